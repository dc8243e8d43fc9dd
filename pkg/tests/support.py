"""Shared helpers for the test suite: independent reference computations,
feasible-schedule builders and single-fault mutators."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from cloudsched import (Assignment, Instance, Job, MachineParams, MachineType,
                        Rental, Schedule, gen_random, validate)
from cloudsched.tentative import (TentativeProblem, _Groups, _covered_indices,
                                  _direct_cost, _group_key)

GRID = Fraction(1, 4)

PARAM_GRID = [
    (Fraction(1), Fraction(4), Fraction(1)),
    (Fraction(1), Fraction(4), Fraction(3)),
    (Fraction(2), Fraction(4), Fraction(2)),
    (Fraction(4), Fraction(4), Fraction(2)),
    (Fraction(1), Fraction(8), Fraction(2)),
    (Fraction(2), Fraction(8), Fraction(3)),
    (Fraction(4), Fraction(8), Fraction(1)),
    (Fraction(8), Fraction(8), Fraction(5)),
]


def params_for(seed: int) -> MachineParams:
    s_a, s_b, c = PARAM_GRID[seed % len(PARAM_GRID)]
    return MachineParams(setup_A=s_a, setup_B=s_b, cost_B=c)


def random_instance(seed: int, n: int, beta_factor: Fraction = Fraction(2)) -> Instance:
    params = params_for(seed)
    return gen_random(seed, n, params, beta_factor * params.setup_B)


# ---------------------------------------------------------------------------
# Independent optimum over tentative candidate sets (no pruning, no ordering)
# ---------------------------------------------------------------------------

def enumerate_tentative_optimum(problem: TentativeProblem) -> Fraction:
    """Plain product enumeration over per-job candidate choices."""
    job_ids = sorted(problem.candidates)
    if not job_ids:
        return Fraction(0)
    cand_lists = [problem.candidates[j] for j in job_ids]
    groups = _Groups(problem)
    best = None
    for combo in itertools.product(*cand_lists):
        direct = Fraction(0)
        z = {k: 0 for k in groups.points}
        counts = {k: [0] * len(p) for k, p in groups.points.items()}
        for cand in combo:
            if cand.exclusive:
                direct += _direct_cost(cand, problem.params)
            else:
                key = _group_key(cand)
                cnt = counts[key]
                for i in _covered_indices(cand, groups.points[key]):
                    cnt[i] += 1
                    if cnt[i] > z[key]:
                        z[key] = cnt[i]
        total = direct + sum((groups.weights[k] * z[k] for k in z), Fraction(0))
        if best is None or total < best:
            best = total
    return best


def random_batch(seed: int):
    """Random single-slot batch for the tentative solver tests."""
    rng = random.Random(seed)
    s_a, s_b, c = PARAM_GRID[rng.randrange(len(PARAM_GRID))]
    params = MachineParams(setup_A=s_a, setup_B=s_b, cost_B=c)
    n = rng.randint(1, 6)
    q = rng.randint(0, 2)
    jobs = []
    for i in range(n):
        release = q * s_b + GRID * rng.randint(0, int(s_b / GRID) - 1)
        size_a = GRID * rng.randint(4, int(2 * s_b / GRID))
        size_b = GRID * rng.randint(4, int(2 * s_b / GRID))
        slack = GRID * rng.randint(int(s_b / GRID), int(3 * s_b / GRID))
        deadline = release + min(size_a, size_b) + slack + s_b
        jobs.append(Job(f"j{i:03d}", release, deadline, size_a, size_b))
    return params, jobs


def product_size(problem: TentativeProblem) -> int:
    size = 1
    for cands in problem.candidates.values():
        size *= max(1, len(cands))
    return size


# ---------------------------------------------------------------------------
# Feasible base schedules and single-fault mutations
# ---------------------------------------------------------------------------

def feasible_fixture(seed: int):
    """A feasible instance/schedule pair with two jobs sharing one rental.

    Jobs j000 and j001 run back to back on rental m0; the remaining jobs sit
    on exclusive rentals.  Windows are generous so mutations can move one
    thing at a time.
    """
    rng = random.Random(seed)
    params = MachineParams(setup_A=Fraction(2), setup_B=Fraction(4), cost_B=Fraction(2))
    n = rng.randint(3, 6)
    jobs = []
    rentals = []
    assignments = []

    shared_open = Fraction(rng.randint(0, 4))
    t1 = shared_open + params.setup_A  # first job starts right after setup
    p1 = Fraction(rng.randint(2, 4))
    p2 = Fraction(rng.randint(2, 4))
    jobs.append(Job("j000", shared_open, t1 + p1 + p2 + 30, p1, p1 + 10))
    jobs.append(Job("j001", shared_open, t1 + p1 + p2 + 30, p2, p2 + 10))
    rentals.append(Rental("m0", MachineType.A, shared_open, t1 + p1 + p2))
    assignments.append(Assignment("j000", "m0", t1))
    assignments.append(Assignment("j001", "m0", t1 + p1))

    for i in range(2, n):
        machine_type = MachineType.A if rng.random() < 0.5 else MachineType.B
        setup = params.setup(machine_type)
        release = Fraction(rng.randint(0, 30))
        size_a = Fraction(rng.randint(1, 6))
        size_b = Fraction(rng.randint(1, 6))
        job = Job(f"j{i:03d}", release, release + setup + max(size_a, size_b) + 20,
                  size_a, size_b)
        jobs.append(job)
        rid = f"m{i - 1}"
        start = release + setup
        end = start + job.size(machine_type)
        rentals.append(Rental(rid, machine_type, release, end))
        assignments.append(Assignment(job.id, rid, start))

    instance = Instance(params, jobs)
    schedule = Schedule(rentals, assignments)
    assert validate(schedule, instance).ok, "fixture must start feasible"
    return instance, schedule


def _replace_assignment(schedule: Schedule, index: int, new: Assignment) -> Schedule:
    assignments = list(schedule.assignments)
    assignments[index] = new
    return Schedule(schedule.rentals, assignments)


def mutate_assignment(instance: Instance, schedule: Schedule, rng: random.Random) -> Schedule:
    """Drop or duplicate one assignment."""
    assignments = list(schedule.assignments)
    victim = rng.randrange(len(assignments))
    if rng.random() < 0.5:
        del assignments[victim]
    else:
        assignments.append(assignments[victim])
    return Schedule(schedule.rentals, assignments)


def mutate_window(instance: Instance, schedule: Schedule, rng: random.Random) -> Schedule:
    """Shift one start past the deadline, widening its rental to match."""
    index = rng.randrange(len(schedule.assignments))
    a = schedule.assignments[index]
    rentals = {r.id: r for r in schedule.rentals}
    rental = rentals[a.rental_id]
    job = instance.job(a.job_id)
    size = job.size(rental.machine_type)
    new_start = job.deadline - size + 1
    new_rentals = [r if r.id != rental.id else
                   Rental(r.id, r.machine_type, r.open_at,
                          max(r.close_at, new_start + size))
                   for r in schedule.rentals]
    return Schedule(new_rentals,
                    [x if i != index else Assignment(a.job_id, a.rental_id, new_start)
                     for i, x in enumerate(schedule.assignments)])


def mutate_setup(instance: Instance, schedule: Schedule, rng: random.Random) -> Schedule:
    """Start one job during its rental's setup (still inside its window)."""
    candidates = []
    rentals = {r.id: r for r in schedule.rentals}
    for i, a in enumerate(schedule.assignments):
        rental = rentals[a.rental_id]
        setup = instance.params.setup(rental.machine_type)
        early = rental.open_at + setup - Fraction(1, 2)
        if early < instance.job(a.job_id).release or early < rental.open_at:
            continue
        end = early + instance.job(a.job_id).size(rental.machine_type)
        clear = all(other.rental_id != a.rental_id or other.job_id == a.job_id
                    or other.start >= end
                    or other.start + instance.job(other.job_id).size(rental.machine_type) <= early
                    for other in schedule.assignments)
        if clear:
            candidates.append((i, early))
    i, early = candidates[rng.randrange(len(candidates))]
    a = schedule.assignments[i]
    return _replace_assignment(schedule, i, Assignment(a.job_id, a.rental_id, early))


def mutate_overlap(instance: Instance, schedule: Schedule, rng: random.Random) -> Schedule:
    """Slide the second shared job into the interior of the first."""
    first = schedule.assignments[0]
    second = schedule.assignments[1]
    job0 = instance.job(first.job_id)
    rental = next(r for r in schedule.rentals if r.id == first.rental_id)
    overlap_start = first.start + job0.size(rental.machine_type) - Fraction(1, 2)
    return _replace_assignment(schedule, 1,
                               Assignment(second.job_id, second.rental_id, overlap_start))


def mutate_dangling(instance: Instance, schedule: Schedule, rng: random.Random) -> Schedule:
    """Point one assignment at a rental that does not exist."""
    index = rng.randrange(len(schedule.assignments))
    a = schedule.assignments[index]
    return _replace_assignment(schedule, index, Assignment(a.job_id, "ghost", a.start))


MUTATORS = {
    "assignment": mutate_assignment,
    "window": mutate_window,
    "setup": mutate_setup,
    "overlap": mutate_overlap,
    "dangling": mutate_dangling,
}
