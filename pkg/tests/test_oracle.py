import math
import random
from fractions import Fraction

import pytest

from cloudsched import (Instance, Job, MachineParams, a1, batched_dispatch,
                        brute_force_opt, gen_greedyfit_adv, gen_lb_mid_eps,
                        gen_lb_small_eps_a, gen_lb_small_eps_b, gen_prop1,
                        gen_stack, gen_random, greedyfit, min_slack,
                        run_online, total_cost, validate,
                        witness_greedyfit_adv, witness_lb_mid_eps,
                        witness_lb_small_eps_a, witness_lb_small_eps_b,
                        witness_stack)

from support import params_for, random_instance


class TestBruteForce:
    def test_single_job_two_case_minimum(self):
        params = MachineParams(setup_A=1, setup_B=2, cost_B=2)
        inst = Instance(params, [Job("j", 0, 50, 1, 1)])
        assert brute_force_opt(inst).cost == 2  # min(1*2, 2*3)

    def test_two_identical_jobs_share_a_machine(self):
        params = MachineParams(setup_A=1, setup_B=2, cost_B=5)
        inst = Instance(params, [Job("a", 0, 50, 1, 1), Job("b", 0, 50, 1, 1)])
        result = brute_force_opt(inst)
        assert result.cost == 3  # one type-A machine, setup + 2
        assert result.partitions_examined >= 2

    def test_quiet_first_stage_needs_one_expensive_machine(self):
        params = MachineParams(setup_A=1, setup_B=4, cost_B=2)
        stage1 = gen_prop1(params, beta=0, t=60)
        only_first = Instance(params, [stage1.jobs[0]])
        assert brute_force_opt(only_first).cost == params.cost_B * (params.setup_B + 1)

    def test_witness_always_validates(self):
        for seed in range(25):
            inst = random_instance(seed, 1 + seed % 6)
            result = brute_force_opt(inst)
            assert validate(result.schedule, inst).ok
            assert total_cost(result.schedule, inst.params) == result.cost

    def test_cost_invariant_under_input_permutation(self):
        rng = random.Random(3)
        inst = random_instance(9, 5)
        base = brute_force_opt(inst).cost
        jobs = list(inst.jobs)
        for _ in range(3):
            rng.shuffle(jobs)
            assert brute_force_opt(Instance(inst.params, jobs)).cost == base

    def test_empty_instance_costs_nothing(self):
        assert brute_force_opt(Instance(params_for(0), [])).cost == 0

    def test_limit_is_enforced(self):
        inst = random_instance(1, 8)
        with pytest.raises(ValueError, match="too large"):
            brute_force_opt(inst, limit=7)

    def test_infeasible_instance_is_reported(self):
        params = MachineParams(setup_A=1, setup_B=2, cost_B=2)
        inst = Instance(params, [Job("j", 0, 2, 5, 5)])
        with pytest.raises(ValueError, match="infeasible"):
            brute_force_opt(inst)

    def test_delayed_anchor_beats_naive_left_packing(self):
        # One machine can serve both jobs cheaply only by starting the first
        # job just before the second arrives instead of at its release.
        params = MachineParams(setup_A=1, setup_B=1, cost_B=1)
        inst = Instance(params, [Job("a", 0, 100, 1, 1), Job("b", 50, 52, 1, 1)])
        result = brute_force_opt(inst)
        assert result.cost == 3  # setup + two units, anchored late

    def test_no_algorithm_beats_the_oracle(self):
        for seed in range(40):
            params = params_for(seed)
            inst = gen_random(seed, 1 + seed % 6, params, 2 * params.setup_B)
            opt = brute_force_opt(inst)
            for algo in (a1(), greedyfit(), batched_dispatch(1)):
                report = run_online(algo, inst)
                if report.feasible:
                    assert report.cost >= opt.cost, seed

    def test_oracle_holds_at_its_size_limit(self):
        params = params_for(3)
        inst = gen_random(3, 8, params, 2 * params.setup_B)
        opt = brute_force_opt(inst)
        assert validate(opt.schedule, inst).ok
        for algo in (a1(), greedyfit(), batched_dispatch(1)):
            report = run_online(algo, inst)
            if report.feasible:
                assert report.cost >= opt.cost


class TestGenerators:
    def test_prop1_shape_and_slack(self):
        params = MachineParams(setup_A=1, setup_B=4, cost_B=2)
        inst = gen_prop1(params, beta=0, t=100)
        follower = inst.jobs[1]
        assert follower.release == 100
        assert follower.deadline == 101
        assert follower.size_B == 1 and follower.size_A > 1
        assert min_slack(inst) == 0
        with pytest.raises(ValueError):
            gen_prop1(params, beta=4)  # beta must stay below setup_B

    def test_mid_eps_counts_and_deadlines(self):
        eps, s, c, t = Fraction(1), 4, 2, 8
        delta = Fraction(1, 2)
        inst = gen_lb_mid_eps(eps, s, c, t, delta)
        k = (1 + 2 * eps) * s / (2 * eps * s + delta)
        assert math.ceil(k) == 2
        burst = inst.jobs[1:]
        assert len(burst) == c * t * 2
        assert all(j.deadline == t + (1 + 2 * eps) * s for j in burst)
        assert min_slack(inst) == (1 + eps) * s

    def test_mid_eps_witness_validates(self):
        for eps in (Fraction(1), Fraction(1, 2), Fraction(1, 4)):
            inst = gen_lb_mid_eps(eps, 4, 2, 8)
            witness = witness_lb_mid_eps(eps, 4, 2, 8)
            assert validate(witness, inst).ok

    def test_small_eps_a_count_and_witness(self):
        eps, s, c, t = Fraction(0), 4, 2, 8
        delta = Fraction(1, 2)
        inst = gen_lb_small_eps_a(eps, s, c, t, delta)
        k = (s + 1) / (1 + eps * s + delta)
        assert k == Fraction(10, 3)
        assert len(inst.jobs) == 1 + c * t * 4
        assert min_slack(inst) == s
        witness = witness_lb_small_eps_a(eps, s, c, t, delta)
        assert validate(witness, inst).ok

    def test_small_eps_b_sizes_and_oracle(self):
        inst = gen_lb_small_eps_b(2, 2, 2, 3)
        assert all(j.size_A > inst.params.setup_B + 2 for j in inst.jobs[1:])
        witness = witness_lb_small_eps_b(2, 2, 2, 3)
        assert validate(witness, inst).ok
        assert brute_force_opt(inst).cost <= total_cost(witness, inst.params)

    def test_bait_family_shape(self):
        inst = gen_greedyfit_adv(4, 2)
        assert len(inst.jobs) == 4
        assert all(j.deadline == 16 for j in inst.jobs)
        witness = witness_greedyfit_adv(4, 2)
        assert validate(witness, inst).ok

    def test_stacked_family_and_witness(self):
        inst = gen_stack(8, 2, 16)
        witness = witness_stack(8, 2, 16)
        assert validate(witness, inst).ok
        assert total_cost(witness, inst.params) == 2 * (8 + 16)
        assert min_slack(inst) == 8

    def test_random_generator_is_deterministic_and_pinned(self):
        params = params_for(4)
        a = gen_random(77, 9, params, 11)
        b = gen_random(77, 9, params, 11)
        assert a == b
        assert min_slack(a) == 11
        assert gen_random(5, 0, params, 3).jobs == ()

    def test_random_sizes_and_releases_in_range(self):
        params = params_for(2)
        inst = gen_random(3, 12, params, params.setup_B)
        for j in inst.jobs:
            assert 1 <= j.size_A <= 2 * params.setup_B
            assert 1 <= j.size_B <= 2 * params.setup_B
            assert 0 <= j.release <= 4 * params.setup_B
