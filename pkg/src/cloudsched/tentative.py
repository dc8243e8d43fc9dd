"""Batch subproblem with setup costs but no setup times.

Given one batch of already-released jobs, pick a processing interval per job
so that the total of machine-rental charges is minimized under a relaxed
model: setups cost money but take no time, shared machines are paid for a
fixed span of five setup lengths, and every job must finish a configurable
earliness margin before its deadline.  Solutions of this subproblem are
later turned into real schedules by shifting starts and inserting setups.

Jobs split into size classes relative to the setup lengths.  A job at least
as large as a type's setup goes to its own exclusive machine on that type
and is charged its processing cost only; smaller jobs share slot machines,
whose count per slot is what the solver actually optimizes.  Shared
intervals are confined to a window of :data:`SLOT_SPAN` setup lengths
anchored at the release slot, and their start points are discretized to the
endpoints produced by a greedy earliest-finishing pass, which keeps the
candidate count quadratic in the batch size.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .core import Job, MachineParams, MachineType, as_time

# A shared slot machine accepts processing within a window of SLOT_SPAN
# setup lengths starting at its slot boundary.  (The machine itself is paid
# for SLOT_SPAN + 1 lengths: one extra for its own setup.)  An alternative
# reading lets the window of a type-A slot run for multiples of the large
# setup instead; we use the machine's own setup length uniformly.
SLOT_SPAN = 4
SHARED_MACHINE_PAID_INTERVALS = 5


class SizeClass(Enum):
    BIG_BOTH = "big-both"      # exclusive on either type
    SMALL_BOTH = "small-both"  # shared on either type
    MIXED_A = "mixed-a"        # exclusive on A, shared on B
    MIXED_B = "mixed-b"        # exclusive on B, shared on A


def size_classify(job: Job, params: MachineParams) -> SizeClass:
    big_a = job.size_A >= params.setup_A
    big_b = job.size_B >= params.setup_B
    if big_a and big_b:
        return SizeClass.BIG_BOTH
    if big_a:
        return SizeClass.MIXED_A
    if big_b:
        return SizeClass.MIXED_B
    return SizeClass.SMALL_BOTH


@dataclass(frozen=True)
class CandidateInterval:
    """One admissible placement of a job: [start, start + size] on a type."""

    job_id: str
    machine_type: MachineType
    start: Fraction
    end: Fraction
    exclusive: bool
    slot: Optional[int] = None  # 1-based release slot, shared type-A only


@dataclass(frozen=True)
class JobRestriction:
    """Caller-imposed limits: allowed types and per-type earliest starts."""

    allow_A: bool = True
    allow_B: bool = True
    min_start_A: Optional[Fraction] = None
    min_start_B: Optional[Fraction] = None

    def allows(self, machine_type: MachineType) -> bool:
        return self.allow_A if machine_type is MachineType.A else self.allow_B

    def min_start(self, machine_type: MachineType) -> Optional[Fraction]:
        return self.min_start_A if machine_type is MachineType.A else self.min_start_B


_NO_RESTRICTION = JobRestriction()


@dataclass(frozen=True)
class TentativeProblem:
    jobs: tuple[Job, ...]
    params: MachineParams
    earliness: Fraction
    candidates: dict[str, tuple[CandidateInterval, ...]]
    left_points_B: tuple[Fraction, ...]
    left_points_slot: dict[int, tuple[Fraction, ...]]

    @property
    def candidate_count(self) -> int:
        return sum(len(c) for c in self.candidates.values())


@dataclass(frozen=True)
class TentativeSolution:
    chosen: dict[str, CandidateInterval]
    machines_B: int
    machines_slot: dict[int, int]
    objective: Fraction


class InfeasibleTentativeProblem(ValueError):
    pass


def _greedy_endpoints(pool: Sequence[tuple[Job, Fraction, Fraction, Fraction]],
                      win_lo: Fraction, win_hi: Fraction) -> list[Fraction]:
    """Endpoint set of one virtual machine.

    ``pool`` holds (job, lo, hi, size) with lo/hi the effective window of
    the job on this machine family.  The machine repeatedly runs whichever
    remaining job would finish earliest; collected are the finish times of
    scheduled jobs plus the window endpoints of the jobs left over.
    """
    remaining = list(pool)
    cursor = win_lo
    points: list[Fraction] = []
    while remaining:
        best = None
        for job, lo, hi, size in remaining:
            start = cursor if cursor > lo else lo
            finish = start + size
            if finish > hi or finish > win_hi:
                continue
            if best is None or (finish, job.id) < (best[0], best[1].id):
                best = (finish, job, lo, hi, size)
        if best is None:
            break
        finish = best[0]
        points.append(finish)
        cursor = finish
        remaining.remove((best[1], best[2], best[3], best[4]))
    for job, lo, hi, size in remaining:
        points.append(lo)
        points.append(hi)
    return sorted(set(points))


def _anchored_starts(points: Sequence[Fraction], lo: Fraction, hi: Fraction,
                     size: Fraction, win_lo: Fraction, win_hi: Fraction) -> list[Fraction]:
    a_min = max(lo, win_lo)
    a_max = min(hi, win_hi) - size
    if a_max < a_min:
        return []
    starts = [a_min]
    for p in points:
        if a_min < p <= a_max:
            starts.append(p)
    return starts


def generate_candidate_intervals(jobs: Iterable[Job], params: MachineParams,
                                 restrictions: Optional[dict[str, JobRestriction]] = None,
                                 earliness: Optional[Fraction] = None) -> TentativeProblem:
    """Build the candidate placements for one batch of jobs.

    The batch must be released within a single slot of length ``setup_B``,
    and ``setup_B`` must be an integer multiple of ``setup_A``.  Each job
    contributes exclusive candidates on types where its size reaches the
    setup, and discretized shared candidates on the others.  Restrictions
    intersect the effective windows; a job whose class-given candidates are
    all eliminated falls back to a single exclusive placement so that later
    stages can still realize it.
    """
    jobs = tuple(sorted(jobs, key=lambda j: (j.release, j.id)))
    if earliness is None:
        earliness = params.setup_B
    earliness = as_time(earliness)
    restrictions = restrictions or {}
    if (params.setup_B / params.setup_A).denominator != 1:
        raise ValueError("setup_B must be an integer multiple of setup_A")
    if not jobs:
        return TentativeProblem((), params, earliness, {}, (), {})

    s_a, s_b = params.setup_A, params.setup_B
    b_slot = jobs[0].release // s_b
    if any(j.release // s_b != b_slot for j in jobs):
        raise ValueError("batch spans more than one release slot of length setup_B")

    def bounds(job: Job, machine_type: MachineType) -> tuple[Fraction, Fraction]:
        r = restrictions.get(job.id, _NO_RESTRICTION)
        lo = job.release
        ms = r.min_start(machine_type)
        if ms is not None and ms > lo:
            lo = ms
        return lo, job.deadline - earliness

    def allowed(job: Job, machine_type: MachineType) -> bool:
        return restrictions.get(job.id, _NO_RESTRICTION).allows(machine_type)

    # Virtual shared machine for type B, then one per type-A release slot.
    b_win = (b_slot * s_b, (b_slot + SLOT_SPAN) * s_b)
    b_pool = [(j, *bounds(j, MachineType.B), j.size_B)
              for j in jobs if j.size_B < s_b and allowed(j, MachineType.B)]
    b_points = _greedy_endpoints(b_pool, *b_win)

    slot_of = {j.id: int(j.release // s_a) + 1 for j in jobs}
    slot_windows: dict[int, tuple[Fraction, Fraction]] = {}
    slot_points: dict[int, list[Fraction]] = {}
    for slot in sorted({slot_of[j.id] for j in jobs}):
        win = ((slot - 1) * s_a, (slot - 1 + SLOT_SPAN) * s_a)
        pool = [(j, *bounds(j, MachineType.A), j.size_A)
                for j in jobs
                if slot_of[j.id] == slot and j.size_A < s_a and allowed(j, MachineType.A)]
        slot_windows[slot] = win
        slot_points[slot] = _greedy_endpoints(pool, *win)

    candidates: dict[str, list[CandidateInterval]] = {}
    left_b: set[Fraction] = set()
    left_slot: dict[int, set[Fraction]] = {}
    for job in jobs:
        cands: list[CandidateInterval] = []
        # Type A placements.
        if allowed(job, MachineType.A):
            lo, hi = bounds(job, MachineType.A)
            if job.size_A >= s_a:
                if lo + job.size_A <= hi:
                    cands.append(CandidateInterval(job.id, MachineType.A, lo,
                                                   lo + job.size_A, True))
            else:
                slot = slot_of[job.id]
                win = slot_windows[slot]
                for start in _anchored_starts(slot_points[slot], lo, hi,
                                              job.size_A, *win):
                    cands.append(CandidateInterval(job.id, MachineType.A, start,
                                                   start + job.size_A, False, slot))
                    left_slot.setdefault(slot, set()).add(start)
        # Type B placements.
        if allowed(job, MachineType.B):
            lo, hi = bounds(job, MachineType.B)
            if job.size_B >= s_b:
                if lo + job.size_B <= hi:
                    cands.append(CandidateInterval(job.id, MachineType.B, lo,
                                                   lo + job.size_B, True))
            else:
                for start in _anchored_starts(b_points, lo, hi, job.size_B, *b_win):
                    cands.append(CandidateInterval(job.id, MachineType.B, start,
                                                   start + job.size_B, False))
                    left_b.add(start)
        if not cands:
            # Escape hatch: outside the shared windows the job can still run
            # on a machine of its own.  Prefer the cheaper fresh machine.
            options = []
            for machine_type in (MachineType.A, MachineType.B):
                if not allowed(job, machine_type):
                    continue
                lo, hi = bounds(job, machine_type)
                size = job.size(machine_type)
                if lo + size <= hi:
                    price = params.cost(machine_type) * (params.setup(machine_type) + size)
                    options.append((price, machine_type.value, lo, size, machine_type))
            if options:
                _, _, lo, size, machine_type = min(options)
                cands.append(CandidateInterval(job.id, machine_type, lo, lo + size, True))
        candidates[job.id] = cands

    return TentativeProblem(
        jobs, params, earliness,
        {jid: tuple(c) for jid, c in candidates.items()},
        tuple(sorted(left_b)),
        {slot: tuple(sorted(pts)) for slot, pts in left_slot.items()},
    )


# ---------------------------------------------------------------------------
# Solvers
# ---------------------------------------------------------------------------

def _direct_cost(cand: CandidateInterval, params: MachineParams) -> Fraction:
    if not cand.exclusive:
        return Fraction(0)
    return params.cost(cand.machine_type) * (cand.end - cand.start)


def _group_key(cand: CandidateInterval):
    # Shared intervals are counted against one machine pool per group: the
    # single type-B pool, or the type-A pool of their release slot.
    return ("B",) if cand.machine_type is MachineType.B else ("A", cand.slot)


def _group_weight(key, params: MachineParams) -> Fraction:
    if key[0] == "B":
        return SHARED_MACHINE_PAID_INTERVALS * params.cost_B * params.setup_B
    return SHARED_MACHINE_PAID_INTERVALS * params.setup_A


def _covered_indices(cand: CandidateInterval, points: Sequence[Fraction]) -> tuple[int, ...]:
    # Intervals occupy [start, end); maxima of the overlap count can only be
    # attained at interval start points, so the group point lists suffice.
    return tuple(i for i, p in enumerate(points) if cand.start <= p < cand.end)


class _Groups:
    """Running overlap counts per shared machine pool."""

    def __init__(self, problem: TentativeProblem):
        self.points = {("B",): problem.left_points_B}
        for slot, pts in problem.left_points_slot.items():
            self.points[("A", slot)] = pts
        self.counts = {k: [0] * len(p) for k, p in self.points.items()}
        self.z = {k: 0 for k in self.points}
        self.weights = {k: _group_weight(k, problem.params) for k in self.points}

    def z_cost(self) -> Fraction:
        return sum((self.weights[k] * self.z[k] for k in self.points), Fraction(0))

    def place(self, key, covered: tuple[int, ...]) -> int:
        """Add an interval; returns the previous z of its group."""
        old = self.z[key]
        counts = self.counts[key]
        top = old
        for i in covered:
            counts[i] += 1
            if counts[i] > top:
                top = counts[i]
        self.z[key] = top
        return old

    def remove(self, key, covered: tuple[int, ...], old_z: int) -> None:
        counts = self.counts[key]
        for i in covered:
            counts[i] -= 1
        self.z[key] = old_z

    def probe(self, key, covered: tuple[int, ...]) -> Fraction:
        """Cost increase if the interval were added now."""
        counts = self.counts[key]
        top = self.z[key]
        for i in covered:
            if counts[i] + 1 > top:
                top = counts[i] + 1
        return self.weights[key] * (top - self.z[key])


def _prepared(problem: TentativeProblem, order_jobs):
    """Candidate lists annotated with direct cost and covered points."""
    groups = _Groups(problem)
    prepared = []
    for job in order_jobs:
        cands = problem.candidates.get(job.id, ())
        if not cands:
            raise InfeasibleTentativeProblem(
                f"infeasible tentative problem: job {job.id} has no candidate interval")
        annotated = []
        for cand in cands:
            direct = _direct_cost(cand, problem.params)
            if cand.exclusive:
                annotated.append((direct, cand, None, ()))
            else:
                key = _group_key(cand)
                annotated.append((direct, cand, key, _covered_indices(cand, groups.points[key])))
        annotated.sort(key=lambda a: (a[0], a[1].machine_type.value, a[1].start))
        prepared.append(annotated)
    return groups, prepared


def _solution(problem: TentativeProblem, chosen: dict[str, CandidateInterval],
              groups: _Groups, direct: Fraction) -> TentativeSolution:
    machines_slot = {k[1]: z for k, z in groups.z.items() if k[0] == "A" and z > 0}
    machines_b = groups.z.get(("B",), 0)
    return TentativeSolution(dict(chosen), machines_b, machines_slot,
                             direct + groups.z_cost())


def solve_exact(problem: TentativeProblem) -> TentativeSolution:
    """Globally optimal interval choice over the generated candidates.

    Depth-first branch and bound on per-job choices, jobs with the fewest
    candidates first.  Machine counts are implied: for any complete choice
    the optimal pool sizes are the pointwise overlap maxima, so the bound
    tracks committed exclusive costs plus the current implied pool costs.
    """
    if not problem.jobs:
        return TentativeSolution({}, 0, {}, Fraction(0))
    order = sorted(problem.jobs,
                   key=lambda j: (len(problem.candidates.get(j.id, ())), j.id))
    groups, prepared = _prepared(problem, order)

    # Remaining exclusive costs can never be avoided; fold them into the bound.
    n = len(order)
    suffix_min = [Fraction(0)] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix_min[i] = suffix_min[i + 1] + min(a[0] for a in prepared[i])

    best_total: Optional[Fraction] = None
    best_choice: Optional[list[CandidateInterval]] = None
    choice: list[CandidateInterval] = []

    def dfs(depth: int, direct: Fraction) -> None:
        nonlocal best_total, best_choice
        bound = direct + groups.z_cost() + suffix_min[depth]
        if best_total is not None and bound >= best_total:
            return
        if depth == n:
            best_total = direct + groups.z_cost()
            best_choice = list(choice)
            return
        for cand_direct, cand, key, covered in prepared[depth]:
            choice.append(cand)
            if key is None:
                dfs(depth + 1, direct + cand_direct)
            else:
                old_z = groups.place(key, covered)
                dfs(depth + 1, direct + cand_direct)
                groups.remove(key, covered, old_z)
            choice.pop()

    dfs(0, Fraction(0))
    assert best_choice is not None  # every job has a candidate, so a leaf exists

    # Rebuild the winning state for the reported machine counts.
    groups = _Groups(problem)
    direct = Fraction(0)
    chosen = {}
    for cand in best_choice:
        chosen[cand.job_id] = cand
        direct += _direct_cost(cand, problem.params)
        if not cand.exclusive:
            key = _group_key(cand)
            groups.place(key, _covered_indices(cand, groups.points[key]))
    return _solution(problem, chosen, groups, direct)


def solve_firstfit(problem: TentativeProblem) -> TentativeSolution:
    """Greedy fallback for batches too large to solve exactly.

    Jobs in deadline order each take the candidate with the smallest
    immediate cost increase.  Always feasible when the exact solver would
    be, never cheaper than it.
    """
    if not problem.jobs:
        return TentativeSolution({}, 0, {}, Fraction(0))
    order = sorted(problem.jobs, key=lambda j: (j.deadline, j.id))
    groups, prepared = _prepared(problem, order)

    chosen: dict[str, CandidateInterval] = {}
    direct = Fraction(0)
    for annotated in prepared:
        best = None
        for cand_direct, cand, key, covered in annotated:
            delta = cand_direct if key is None else cand_direct + groups.probe(key, covered)
            rank = (delta, cand_direct, cand.machine_type.value, cand.start)
            if best is None or rank < best[0]:
                best = (rank, cand, key, covered)
        _, cand, key, covered = best
        chosen[cand.job_id] = cand
        direct += _direct_cost(cand, problem.params)
        if key is not None:
            groups.place(key, covered)
    return _solution(problem, chosen, groups, direct)


def pack_shared(intervals: Sequence[CandidateInterval]) -> dict[str, int]:
    """Assign shared intervals of one group to machine indices greedily.

    Sorted by start, every interval goes to the lowest-numbered machine that
    is free again; the machine count used equals the maximum overlap, which
    never exceeds the pool size the solver paid for.
    """
    free_at: list[Fraction] = []
    out: dict[str, int] = {}
    for cand in sorted(intervals, key=lambda c: (c.start, c.end, c.job_id)):
        for idx, free in enumerate(free_at):
            if free <= cand.start:
                out[cand.job_id] = idx
                free_at[idx] = cand.end
                break
        else:
            out[cand.job_id] = len(free_at)
            free_at.append(cand.end)
    return out
