"""Exact offline optimum for tiny instances, plus adversarial generators.

The brute-force oracle enumerates every way to split the jobs over machines,
every machine type and every processing order per machine.  For a fixed
order the cheapest placement anchors the first job as late as its deadline
chain allows and packs the rest tightly after it; this dominates any other
placement of the same order, so the search is exact.  Instances are capped
at a small size; the point of the oracle is to be an independent reference,
not to scale.

The ``gen_*`` functions build the structured worst-case families used to
probe online algorithms: burst arrivals after a quiet period, stacked
identical jobs, and a bait job that lures greedy policies onto a machine
that later fills up.  The ``witness_*`` companions construct cheap feasible
offline schedules for families too large for the oracle.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional, Sequence

from .core import (Assignment, Instance, Job, MachineParams, MachineType,
                   Rental, Schedule, as_time)

ORACLE_JOB_LIMIT = 8


@dataclass(frozen=True)
class OptResult:
    cost: Fraction
    schedule: Schedule
    partitions_examined: int


def _distinct_permutations(keys: Sequence) -> Iterator[tuple[int, ...]]:
    """Yield index permutations, skipping reorderings of identical keys."""
    n = len(keys)
    order = sorted(range(n), key=lambda i: keys[i])
    used = [False] * n
    perm: list[int] = []

    def rec() -> Iterator[tuple[int, ...]]:
        if len(perm) == n:
            yield tuple(perm)
            return
        last_key = None
        for pos in range(n):
            i = order[pos]
            if used[i]:
                continue
            if last_key is not None and keys[i] == last_key:
                continue
            last_key = keys[i]
            used[i] = True
            perm.append(i)
            yield from rec()
            perm.pop()
            used[i] = False

    return rec()


def _best_on_one_machine(jobs: Sequence[Job], machine_type: MachineType,
                         params: MachineParams):
    """Cheapest single-machine schedule for the given jobs and type.

    Returns (cost, starts) with starts aligned to ``jobs`` order, or None if
    no processing order fits all windows.  The machine opens exactly one
    setup before the first start, so cost = rate * (setup + span).
    """
    setup = params.setup(machine_type)
    rate = params.cost(machine_type)
    rel = [j.release for j in jobs]
    dl = [j.deadline for j in jobs]
    size = [j.size(machine_type) for j in jobs]
    keys = [(rel[i], dl[i], size[i]) for i in range(len(jobs))]

    best_cost = None
    best_starts = None
    for perm in _distinct_permutations(keys):
        # Latest feasible start per position, chained backward.
        latest = [Fraction(0)] * len(perm)
        nxt = None
        feasible = True
        for pos in range(len(perm) - 1, -1, -1):
            i = perm[pos]
            l = dl[i] - size[i]
            if nxt is not None and nxt - size[i] < l:
                l = nxt - size[i]
            if l < rel[i]:
                feasible = False
                break
            latest[pos] = l
            nxt = l
        if not feasible:
            continue
        first = perm[0]
        t0 = latest[0]
        if t0 < setup:
            continue  # cannot process before one setup has ever elapsed
        # Pack forward from the latest admissible first start.
        starts = [Fraction(0)] * len(perm)
        cursor = t0
        for pos, i in enumerate(perm):
            t = cursor if cursor > rel[i] else rel[i]
            starts[pos] = t
            cursor = t + size[i]
        cost = rate * (setup + cursor - t0)
        if best_cost is None or cost < best_cost:
            best_cost = cost
            by_index = [Fraction(0)] * len(perm)
            for pos, i in enumerate(perm):
                by_index[i] = starts[pos]
            best_starts = tuple(by_index)
    if best_cost is None:
        return None
    return best_cost, best_starts


def brute_force_opt(instance: Instance, limit: int = ORACLE_JOB_LIMIT) -> OptResult:
    """Exact minimum rental cost with a witness schedule.

    Raises if the instance exceeds ``limit`` jobs or admits no feasible
    schedule at all.
    """
    jobs = instance.jobs
    n = len(jobs)
    if n == 0:
        return OptResult(Fraction(0), Schedule(), 1)
    if n > limit:
        raise ValueError(f"instance too large for oracle ({n} jobs > limit {limit})")
    params = instance.params

    block_cache: dict[int, Optional[tuple[Fraction, MachineType, tuple[Fraction, ...]]]] = {}

    def block(mask: int):
        hit = block_cache.get(mask)
        if mask in block_cache:
            return hit
        members = [jobs[i] for i in range(n) if mask >> i & 1]
        best = None
        for machine_type in (MachineType.A, MachineType.B):
            res = _best_on_one_machine(members, machine_type, params)
            if res is not None and (best is None or res[0] < best[0]):
                best = (res[0], machine_type, res[1])
        block_cache[mask] = best
        return best

    best_cost: Optional[Fraction] = None
    best_blocks: Optional[list[int]] = None
    partitions = 0
    chosen: list[int] = []

    def rec(remaining: int, acc: Fraction):
        nonlocal best_cost, best_blocks, partitions
        if remaining == 0:
            partitions += 1
            if best_cost is None or acc < best_cost:
                best_cost = acc
                best_blocks = list(chosen)
            return
        low = remaining & -remaining
        rest = remaining ^ low
        sub = rest
        while True:
            mask = low | sub
            b = block(mask)
            if b is not None:
                chosen.append(mask)
                rec(remaining ^ mask, acc + b[0])
                chosen.pop()
            if sub == 0:
                break
            sub = (sub - 1) & rest

    rec((1 << n) - 1, Fraction(0))
    if best_cost is None:
        raise ValueError("infeasible instance")

    rentals = []
    assignments = []
    for k, mask in enumerate(best_blocks):
        cost, machine_type, starts = block(mask)
        members = [i for i in range(n) if mask >> i & 1]
        first = min(starts)
        last = max(starts[pos] + jobs[i].size(machine_type)
                   for pos, i in enumerate(members))
        rid = f"opt{k}"
        rentals.append(Rental(rid, machine_type,
                              first - params.setup(machine_type), last))
        for pos, i in enumerate(members):
            assignments.append(Assignment(jobs[i].id, rid, starts[pos]))
    schedule = Schedule(rentals, sorted(assignments, key=lambda a: (a.start, a.job_id)))
    return OptResult(best_cost, schedule, partitions)


# ---------------------------------------------------------------------------
# Adversarial instance families
# ---------------------------------------------------------------------------

def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ValueError(message)


def gen_prop1(params: MachineParams, beta, t=Fraction(100), follower_size_B=Fraction(1),
              margin=Fraction(1)) -> Instance:
    """Two jobs that force unbounded cost when slack is below the big setup.

    A first job keeps an algorithm honest at time zero; a second job appears
    at ``t`` with so little slack that only an already-running type-B machine
    could serve it, while its type-A size makes type A useless.
    """
    beta = as_time(beta)
    t = as_time(t)
    follower_size_B = as_time(follower_size_B)
    margin = as_time(margin)
    _require(0 <= beta < params.setup_B, "requires 0 <= beta < setup_B")
    _require(t > 0 and margin > 0 and follower_size_B >= 1, "bad parameters")
    j0 = Job("j000", Fraction(0), params.setup_B + 1 + beta,
             params.setup_B - params.setup_A + 1 + beta + margin, Fraction(1))
    j1 = Job("j001", t, t + follower_size_B + beta,
             follower_size_B + beta + margin, follower_size_B)
    return Instance(params, [j0, j1])


def _burst_common(s, c, t) -> tuple[Fraction, int, Fraction]:
    s = as_time(s)
    t_frac = as_time(t)
    _require(s >= 1, "setup must be at least 1")
    _require(t_frac >= s, "quiet period t must be at least the setup time")
    c = as_time(c)
    _require(c >= 1 and c.denominator == 1, "cost ratio must be a positive integer here")
    _require(t_frac.denominator == 1, "quiet period t must be an integer here")
    return s, int(c), t_frac


def gen_lb_mid_eps(eps, s, c, t, delta=Fraction(1, 8)) -> Instance:
    """Burst family for moderate slack: equal setups, one seed job, then a
    wave of jobs sized so type A cannot be set up in time and a fresh type-B
    machine fits at most two of them."""
    eps = as_time(eps)
    delta = as_time(delta)
    s, c_int, t = _burst_common(s, c, t)
    _require(Fraction(1) / s <= eps <= 1, "requires 1/s <= eps <= 1")
    _require(delta > 0, "delta must be positive")
    beta = (1 + eps) * s
    params = MachineParams(setup_A=s, setup_B=s, cost_B=c_int)
    k = (1 + 2 * eps) * s / (2 * eps * s + delta)
    count = c_int * int(t) * math.ceil(k)
    jobs = [Job("j000", Fraction(0), s + 1 + beta, Fraction(1), Fraction(1))]
    p_b = eps * s
    p_a = 2 * eps * s + delta
    d = t + p_b + beta
    for i in range(count):
        jobs.append(Job(f"j{i + 1:03d}", t, d, p_a, p_b))
    return Instance(params, jobs)


def witness_lb_mid_eps(eps, s, c, t, delta=Fraction(1, 8)) -> Schedule:
    """Feasible offline schedule for :func:`gen_lb_mid_eps`: machines of
    type A opened one setup before the burst, each packing a full group."""
    eps = as_time(eps)
    delta = as_time(delta)
    s, c_int, t = _burst_common(s, c, t)
    beta = (1 + eps) * s
    k = (1 + 2 * eps) * s / (2 * eps * s + delta)
    count = c_int * int(t) * math.ceil(k)
    group = max(1, math.floor(k))
    p_a = 2 * eps * s + delta

    rentals = [Rental("w0", MachineType.A, Fraction(0), s + 1)]
    assignments = [Assignment("j000", "w0", s)]
    for g in range(math.ceil(Fraction(count, group))):
        members = range(g * group, min((g + 1) * group, count))
        rid = f"w{g + 1}"
        rentals.append(Rental(rid, MachineType.A, t - s, t + len(members) * p_a))
        for q, i in enumerate(members):
            assignments.append(Assignment(f"j{i + 1:03d}", rid, t + q * p_a))
    return Schedule(rentals, assignments)


def gen_lb_small_eps_a(eps, s, c, t, delta=Fraction(1, 8)) -> Instance:
    """Burst family for very small slack: unit type-B jobs whose type-A size
    is padded just enough that no type-A machine can be set up in time."""
    eps = as_time(eps)
    delta = as_time(delta)
    s, c_int, t = _burst_common(s, c, t)
    _require(0 <= eps < Fraction(1) / s, "requires 0 <= eps < 1/s")
    _require(delta > 0, "delta must be positive")
    beta = (1 + eps) * s
    params = MachineParams(setup_A=s, setup_B=s, cost_B=c_int)
    k = (s + 1) / (1 + eps * s + delta)
    count = c_int * int(t) * math.ceil(k)
    jobs = [Job("j000", Fraction(0), s + 1 + beta, Fraction(1), Fraction(1))]
    p_a = 1 + eps * s + delta
    d = t + 1 + beta
    for i in range(count):
        jobs.append(Job(f"j{i + 1:03d}", t, d, p_a, Fraction(1)))
    return Instance(params, jobs)


def witness_lb_small_eps_a(eps, s, c, t, delta=Fraction(1, 8)) -> Schedule:
    eps = as_time(eps)
    delta = as_time(delta)
    s, c_int, t = _burst_common(s, c, t)
    k = (s + 1) / (1 + eps * s + delta)
    count = c_int * int(t) * math.ceil(k)
    group = max(1, math.floor(k))
    p_a = 1 + eps * s + delta

    rentals = [Rental("w0", MachineType.A, Fraction(0), s + 1)]
    assignments = [Assignment("j000", "w0", s)]
    for g in range(math.ceil(Fraction(count, group))):
        members = range(g * group, min((g + 1) * group, count))
        rid = f"w{g + 1}"
        rentals.append(Rental(rid, MachineType.A, t - s, t + len(members) * p_a))
        for q, i in enumerate(members):
            assignments.append(Assignment(f"j{i + 1:03d}", rid, t + q * p_a))
    return Schedule(rentals, assignments)


def gen_lb_small_eps_b(s_a, s_b, c, t, eps=Fraction(0)) -> Instance:
    """Burst family forcing one type-B machine per job online, while offline
    machines opened ahead of the burst each absorb many unit jobs."""
    s_a = as_time(s_a)
    s_b = as_time(s_b)
    c = as_time(c)
    eps = as_time(eps)
    _require(s_b >= s_a >= 1 and c >= 1, "bad machine parameters")
    _require(0 <= eps < Fraction(1) / s_b, "requires 0 <= eps < 1/setup_B")
    t = as_time(t)
    _require(t >= s_b and t.denominator == 1, "t must be an integer at least setup_B")
    beta = (1 + eps) * s_b
    params = MachineParams(setup_A=s_a, setup_B=s_b, cost_B=c)
    jobs = [Job("j000", Fraction(0), s_b + 1 + beta, Fraction(1), Fraction(1))]
    p_a = s_b + 3  # anything above setup_B + p_B + 1 rules type A out
    d = t + 1 + beta
    for i in range(int(t)):
        jobs.append(Job(f"j{i + 1:03d}", t, d, p_a, Fraction(1)))
    return Instance(params, jobs)


def witness_lb_small_eps_b(s_a, s_b, c, t, eps=Fraction(0)) -> Schedule:
    s_a = as_time(s_a)
    s_b = as_time(s_b)
    eps = as_time(eps)
    t = as_time(t)
    count = int(t)
    group = max(1, math.floor(s_b))
    rentals = [Rental("w0", MachineType.A, Fraction(0), s_a + 1)]
    assignments = [Assignment("j000", "w0", s_a)]
    for g in range(math.ceil(Fraction(count, group))):
        members = range(g * group, min((g + 1) * group, count))
        rid = f"w{g + 1}"
        rentals.append(Rental(rid, MachineType.B, t - s_b, t + len(members)))
        for q, i in enumerate(members):
            assignments.append(Assignment(f"j{i + 1:03d}", rid, t + q))
    return Schedule(rentals, assignments)


def gen_greedyfit_adv(s_b, x, offset=Fraction(1, 2)) -> Instance:
    """Bait family for greedy fitting rules: a long-window job opens a cheap
    type-A machine whose queue the followers then overload, while offline a
    single type-B machine handles everything."""
    s_b = as_time(s_b)
    x = as_time(x)
    offset = as_time(offset)
    _require(s_b >= 2 and s_b.denominator == 1, "setup_B must be an integer >= 2")
    _require(x >= 1, "probe size x must be at least 1")
    _require(0 < offset < 1, "release offset must be in (0, 1)")
    params = MachineParams(setup_A=Fraction(1), setup_B=s_b, cost_B=Fraction(1))
    d = s_b * s_b
    jobs = [Job("j000", Fraction(0), d, s_b, x)]
    for i in range(int(s_b) - 1):
        jobs.append(Job(f"j{i + 1:03d}", offset, d, s_b, Fraction(1)))
    return Instance(params, jobs)


def witness_greedyfit_adv(s_b, x, offset=Fraction(1, 2)) -> Schedule:
    """One type-B machine covering the whole bait family (valid for small x)."""
    s_b = as_time(s_b)
    x = as_time(x)
    total = x + (s_b - 1)
    rentals = [Rental("w0", MachineType.B, Fraction(0), s_b + total)]
    assignments = [Assignment("j000", "w0", s_b)]
    cursor = s_b + x
    for i in range(int(s_b) - 1):
        assignments.append(Assignment(f"j{i + 1:03d}", "w0", cursor))
        cursor += 1
    return Schedule(rentals, assignments)


def gen_stack(s_b, c, n, s_a=Fraction(1)) -> Instance:
    """Staircase of unit type-B jobs that per-job dispatch serves with one
    fresh machine each, although a single machine fits them back to back."""
    s_b = as_time(s_b)
    s_a = as_time(s_a)
    c = as_time(c)
    _require(n >= 1, "need at least one job")
    _require(s_b >= s_a >= 1 and c >= 1, "bad machine parameters")
    params = MachineParams(setup_A=s_a, setup_B=s_b, cost_B=c)
    p_a = c * (s_b + 1) - s_a + 1  # priced so type A never looks attractive
    jobs = [Job(f"j{i:03d}", Fraction(i), Fraction(i) + 1 + s_b, p_a, Fraction(1))
            for i in range(n)]
    return Instance(params, jobs)


def witness_stack(s_b, c, n, s_a=Fraction(1)) -> Schedule:
    s_b = as_time(s_b)
    rentals = [Rental("w0", MachineType.B, Fraction(0), s_b + n)]
    assignments = [Assignment(f"j{i:03d}", "w0", s_b + i) for i in range(n)]
    return Schedule(rentals, assignments)


def gen_random(seed: int, n: int, params: MachineParams, beta_target) -> Instance:
    """Seeded random instance whose minimum slack equals ``beta_target``.

    Sizes land in [1, 2*setup_B] and releases in [0, 4*setup_B] on a quarter
    grid.  Every deadline is derived from the job's faster type so the
    per-job best slack is beta_target plus a random surplus, with one job
    pinned to the target exactly.
    """
    beta_target = as_time(beta_target)
    _require(beta_target >= 0, "beta_target must be nonnegative")
    _require(n >= 0, "n must be nonnegative")
    rng = random.Random(seed)
    grid = Fraction(1, 4)
    size_hi = math.floor(2 * params.setup_B / grid)
    rel_hi = math.floor(4 * params.setup_B / grid)
    jobs = []
    pinned = rng.randrange(n) if n else -1
    for i in range(n):
        size_a = grid * rng.randint(4, size_hi)
        size_b = grid * rng.randint(4, size_hi)
        release = grid * rng.randint(0, rel_hi)
        surplus = Fraction(0) if i == pinned else grid * rng.randint(0, rel_hi)
        deadline = release + min(size_a, size_b) + beta_target + surplus
        jobs.append(Job(f"j{i:03d}", release, deadline, size_a, size_b))
    return Instance(params, jobs)
