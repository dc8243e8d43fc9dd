import random
from fractions import Fraction

import pytest

from cloudsched import (Assignment, Instance, Job, MachineParams, MachineType,
                        Rental, Schedule, ViolationKind, a1, gen_lb_mid_eps,
                        min_slack, rental_cost, run_online, slack, total_cost,
                        validate)

from support import MUTATORS, feasible_fixture


def make_params(s_a=1, s_b=2, c=3) -> MachineParams:
    return MachineParams(setup_A=s_a, setup_B=s_b, cost_B=c)


class TestTypes:
    def test_machine_params_invariants(self):
        with pytest.raises(ValueError):
            MachineParams(setup_A=0, setup_B=1, cost_B=1)
        with pytest.raises(ValueError):
            MachineParams(setup_A=3, setup_B=2, cost_B=1)
        with pytest.raises(ValueError):
            MachineParams(setup_A=1, setup_B=2, cost_B=Fraction(1, 2))

    def test_job_invariants(self):
        with pytest.raises(ValueError):
            Job("j", 0, 10, Fraction(1, 2), 1)
        with pytest.raises(ValueError):
            Job("j", 5, 5, 1, 1)

    def test_instance_sorts_and_rejects_duplicates(self):
        a = Job("b", 3, 10, 1, 1)
        b = Job("a", 3, 10, 1, 1)
        c = Job("c", 1, 10, 1, 1)
        inst = Instance(make_params(), [a, b, c])
        assert [j.id for j in inst.jobs] == ["c", "a", "b"]
        with pytest.raises(ValueError, match="duplicate"):
            Instance(make_params(), [a, a])

    def test_rental_close_before_open(self):
        with pytest.raises(ValueError):
            Rental("m", MachineType.A, 5, 4)


class TestSlack:
    def test_direct_formula_type_a(self):
        assert slack(Job("j", 0, 10, 3, 1), MachineType.A) == 7

    def test_negative_slack(self):
        assert slack(Job("j", 2, 4, 1, 5), MachineType.B) == -3

    def test_boundary_slack_equals_margin(self):
        beta = Fraction(3, 2)
        p_b = Fraction(2)
        job = Job("j", 0, p_b + beta, 10, p_b)
        assert slack(job, MachineType.B) == beta

    def test_identity_slack_plus_size_plus_release(self):
        rng = random.Random(7)
        for _ in range(200):
            r = Fraction(rng.randint(0, 40), 4)
            p_a = Fraction(rng.randint(4, 40), 4)
            p_b = Fraction(rng.randint(4, 40), 4)
            d = r + max(p_a, p_b) + Fraction(rng.randint(1, 40), 4)
            job = Job("j", r, d, p_a, p_b)
            for mt in MachineType:
                assert slack(job, mt) + job.size(mt) + job.release == job.deadline


class TestMinSlack:
    def test_single_job(self):
        inst = Instance(make_params(), [Job("j", 0, 10, 3, 4)])
        assert min_slack(inst) == 7  # max(7, 6)

    def test_two_jobs_takes_minimum(self):
        inst = Instance(make_params(), [
            Job("a", 0, 10, 5, 7),   # max slack 5
            Job("b", 0, 10, 1, 3),   # max slack 9
        ])
        assert min_slack(inst) == 5

    def test_empty_instance_errors(self):
        with pytest.raises(ValueError, match="empty instance"):
            min_slack(Instance(make_params(), []))

    def test_burst_generator_hits_documented_slack(self):
        eps = Fraction(1, 2)
        inst = gen_lb_mid_eps(eps, 4, 2, 8)
        assert min_slack(inst) == (1 + eps) * 4


class TestCosts:
    def test_type_a_rental_is_rate_one(self):
        params = make_params(s_a=1, s_b=2, c=3)
        assert rental_cost(Rental("m", MachineType.A, 0, 2), params) == 2

    def test_type_b_rental_scales_by_cost(self):
        params = make_params(s_a=1, s_b=2, c=3)
        assert rental_cost(Rental("m", MachineType.B, 0, 3), params) == 9

    def test_setup_only_rental(self):
        params = make_params(s_a=1, s_b=2, c=3)
        assert rental_cost(Rental("m", MachineType.B, 5, 7), params) == 6

    def test_rental_shorter_than_setup_errors(self):
        params = make_params(s_a=1, s_b=2, c=3)
        with pytest.raises(ValueError, match="shorter than setup"):
            rental_cost(Rental("m", MachineType.B, 0, 1), params)

    def test_total_cost_empty(self):
        assert total_cost(Schedule(), make_params()) == 0

    def test_total_cost_sums_overlapping_rentals(self):
        params = make_params(s_a=1, s_b=2, c=3)
        sched = Schedule([Rental("m0", MachineType.A, 0, 3),
                          Rental("m1", MachineType.A, 1, 4)], [])
        assert total_cost(sched, params) == 6

    def test_total_cost_invariant_under_rental_order(self):
        params = make_params(s_a=1, s_b=2, c=3)
        r0 = Rental("m0", MachineType.A, 0, 3)
        r1 = Rental("m1", MachineType.B, 1, 4)
        assert (total_cost(Schedule([r0, r1], []), params)
                == total_cost(Schedule([r1, r0], []), params))

    def test_exclusive_machine_cost_via_a1(self):
        params = make_params(s_a=1, s_b=4, c=2)
        inst = Instance(params, [Job("j", 0, 30, 2, 2)])
        report = run_online(a1(), inst)
        assert report.cost == 3  # setup_A + p_A


class TestValidate:
    def feasible_pair(self):
        params = make_params(s_a=1, s_b=2, c=3)
        inst = Instance(params, [Job("j", 0, 10, 2, 2)])
        sched = Schedule([Rental("m", MachineType.A, 0, 3)],
                         [Assignment("j", "m", 1)])
        return inst, sched

    def test_feasible_single_job(self):
        inst, sched = self.feasible_pair()
        assert validate(sched, inst).ok

    def test_start_during_setup_is_setup_violation(self):
        inst, _ = self.feasible_pair()
        sched = Schedule([Rental("m", MachineType.A, 0, 3)],
                         [Assignment("j", "m", 0)])
        assert validate(sched, inst).kinds() == {ViolationKind.SETUP}

    def test_interior_overlap_is_reported(self):
        params = make_params(s_a=1, s_b=2, c=3)
        inst = Instance(params, [Job("a", 0, 20, 2, 2), Job("b", 0, 20, 2, 2)])
        sched = Schedule([Rental("m", MachineType.A, 2, 10)],
                         [Assignment("a", "m", 3), Assignment("b", "m", 4)])
        assert validate(sched, inst).kinds() == {ViolationKind.OVERLAP}

    def test_back_to_back_jobs_are_fine(self):
        params = make_params(s_a=1, s_b=2, c=3)
        inst = Instance(params, [Job("a", 0, 20, 2, 2), Job("b", 0, 20, 2, 2)])
        sched = Schedule([Rental("m", MachineType.A, 2, 10)],
                         [Assignment("a", "m", 3), Assignment("b", "m", 5)])
        assert validate(sched, inst).ok

    @pytest.mark.parametrize("kind", sorted(MUTATORS))
    def test_each_mutation_triggers_exactly_its_class(self, kind):
        rng = random.Random(hash(kind) & 0xFFFF)
        for seed in range(5):
            instance, schedule = feasible_fixture(seed)
            mutated = MUTATORS[kind](instance, schedule, rng)
            report = validate(mutated, instance)
            assert report.kinds() == {ViolationKind(kind)}, report.summary()

    def test_equal_times_in_different_representation(self):
        params = make_params(s_a=1, s_b=2, c=3)
        inst = Instance(params, [Job("j", 0, 10, 2, 2)])
        a = Schedule([Rental("m", MachineType.A, Fraction(1, 2), Fraction(7, 2))],
                     [Assignment("j", "m", Fraction(3, 2))])
        b = Schedule([Rental("m", MachineType.A, Fraction(2, 4), "3.5")],
                     [Assignment("j", "m", "1.5")])
        assert validate(a, inst) == validate(b, inst)
        assert total_cost(a, params) == total_cost(b, params)
