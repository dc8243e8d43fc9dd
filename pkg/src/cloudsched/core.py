"""Data model, cost accounting and feasibility validation for rental scheduling.

Two machine types can be rented for arbitrary durations.  A machine of type
``tau`` opened at ``a`` needs ``setup(tau)`` time units before it can process
anything, and costs ``cost(tau)`` per time unit it stays open, setup included.
Every job must be placed completely inside its time window ``[release,
deadline]`` on a single machine.

All times are exact rationals (:class:`fractions.Fraction`).  Exactness
matters: many interesting instances put jobs exactly on feasibility
boundaries, where float ties would corrupt the checks.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Union

Time = Fraction
Numberish = Union[int, str, Fraction, float]


def as_time(value: Numberish) -> Fraction:
    """Convert a number-like value to an exact rational time.

    Strings may be decimal ("0.25") or rational ("1/3").  Floats are
    converted via their shortest decimal representation, so ``0.1`` becomes
    exactly 1/10 rather than the nearest binary float.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not times")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as a time")


class MachineType(str, Enum):
    A = "A"
    B = "B"

    def __str__(self) -> str:  # "A" instead of "MachineType.A" in messages
        return self.value


@dataclass(frozen=True)
class MachineParams:
    """Setup times and rental rates of the two machine types.

    Type A costs 1 per open time unit by definition; ``cost_B`` is the price
    ratio of type B over type A.
    """

    setup_A: Fraction
    setup_B: Fraction
    cost_B: Fraction

    def __post_init__(self):
        object.__setattr__(self, "setup_A", as_time(self.setup_A))
        object.__setattr__(self, "setup_B", as_time(self.setup_B))
        object.__setattr__(self, "cost_B", as_time(self.cost_B))
        if not self.setup_A > 0:
            raise ValueError("setup_A must be positive")
        if self.setup_B < self.setup_A:
            raise ValueError("setup_B must be at least setup_A")
        if self.cost_B < 1:
            raise ValueError("cost_B must be at least 1")

    def setup(self, machine_type: MachineType) -> Fraction:
        return self.setup_A if machine_type is MachineType.A else self.setup_B

    def cost(self, machine_type: MachineType) -> Fraction:
        return Fraction(1) if machine_type is MachineType.A else self.cost_B


@dataclass(frozen=True)
class Job:
    """A job with a release time, a deadline and one size per machine type."""

    id: str
    release: Fraction
    deadline: Fraction
    size_A: Fraction
    size_B: Fraction

    def __post_init__(self):
        object.__setattr__(self, "release", as_time(self.release))
        object.__setattr__(self, "deadline", as_time(self.deadline))
        object.__setattr__(self, "size_A", as_time(self.size_A))
        object.__setattr__(self, "size_B", as_time(self.size_B))
        if self.release < 0:
            raise ValueError(f"job {self.id}: release must be nonnegative")
        if self.size_A < 1 or self.size_B < 1:
            # Time scale is normalized so the smallest size is at least 1.
            raise ValueError(f"job {self.id}: sizes must be at least 1")
        if not self.deadline > self.release:
            raise ValueError(f"job {self.id}: deadline must exceed release")

    def size(self, machine_type: MachineType) -> Fraction:
        return self.size_A if machine_type is MachineType.A else self.size_B


@dataclass(frozen=True)
class Instance:
    """A machine market plus a job set, kept in canonical release order."""

    params: MachineParams
    jobs: tuple[Job, ...]

    def __init__(self, params: MachineParams, jobs: Iterable[Job]):
        object.__setattr__(self, "params", params)
        ordered = tuple(sorted(jobs, key=lambda j: (j.release, j.id)))
        ids = [j.id for j in ordered]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate job ids: {', '.join(dup)}")
        object.__setattr__(self, "jobs", ordered)

    def __len__(self) -> int:
        return len(self.jobs)

    def job(self, job_id: str) -> Job:
        for j in self.jobs:
            if j.id == job_id:
                return j
        raise KeyError(job_id)


@dataclass(frozen=True)
class Rental:
    """One rented machine: a type and the interval during which it is open."""

    id: str
    machine_type: MachineType
    open_at: Fraction
    close_at: Fraction

    def __post_init__(self):
        object.__setattr__(self, "machine_type", MachineType(self.machine_type))
        object.__setattr__(self, "open_at", as_time(self.open_at))
        object.__setattr__(self, "close_at", as_time(self.close_at))
        if self.open_at < 0:
            raise ValueError(f"rental {self.id}: open time must be nonnegative")
        if self.close_at < self.open_at:
            raise ValueError(f"rental {self.id}: close before open")


@dataclass(frozen=True)
class Assignment:
    """Placement of one job on one rental, starting at ``start``."""

    job_id: str
    rental_id: str
    start: Fraction

    def __post_init__(self):
        object.__setattr__(self, "start", as_time(self.start))


@dataclass(frozen=True)
class Schedule:
    rentals: tuple[Rental, ...]
    assignments: tuple[Assignment, ...]

    def __init__(self, rentals: Iterable[Rental] = (), assignments: Iterable[Assignment] = ()):
        object.__setattr__(self, "rentals", tuple(rentals))
        object.__setattr__(self, "assignments", tuple(assignments))


class ViolationKind(str, Enum):
    """The violation classes a schedule check can report."""

    ASSIGNMENT = "assignment"    # job missing, assigned twice, or unknown
    WINDOW = "window"            # processing interval leaves [release, deadline]
    SETUP = "setup"              # interval not inside [open + setup, close]
    OVERLAP = "overlap"          # two jobs overlap on one rental
    DANGLING = "dangling"        # assignment references an unknown rental
    UNRELEASED = "unreleased"    # online action referenced a future job

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    detail: str
    job_id: Optional[str] = None
    rental_id: Optional[str] = None

    def __str__(self) -> str:
        return f"[{self.kind}] {self.detail}"


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[ViolationKind]:
        return {v.kind for v in self.violations}

    def summary(self) -> str:
        if self.ok:
            return "feasible"
        return "; ".join(str(v) for v in self.violations)


def slack(job: Job, machine_type: MachineType) -> Fraction:
    """How far the job can be delayed on the given type; may be negative."""
    return job.deadline - job.release - job.size(machine_type)


def max_slack(job: Job) -> Fraction:
    """Slack on the job's more forgiving machine type."""
    return max(slack(job, MachineType.A), slack(job, MachineType.B))


def min_slack(instance: Instance) -> Fraction:
    """Minimum over all jobs of the per-job best-type slack."""
    if not instance.jobs:
        raise ValueError("empty instance")
    return min(max_slack(j) for j in instance.jobs)


def rental_cost(rental: Rental, params: MachineParams) -> Fraction:
    """Cost of one rental: rate times open duration, setup charged like any time."""
    setup = params.setup(rental.machine_type)
    if rental.close_at - rental.open_at < setup:
        raise ValueError(f"rental {rental.id}: shorter than setup")
    return params.cost(rental.machine_type) * (rental.close_at - rental.open_at)


def total_cost(schedule: Schedule, params: MachineParams) -> Fraction:
    return sum((rental_cost(r, params) for r in schedule.rentals), Fraction(0))


def validate(schedule: Schedule, instance: Instance) -> ValidationReport:
    """Check a schedule against an instance.

    Reports every violated invariant instead of failing fast, one entry per
    offence: missing or duplicated assignments, processing intervals leaving
    the job window, intervals outside a rental's available span, overlapping
    jobs on one rental, and references to unknown rentals.  An empty report
    means the schedule is feasible.
    """
    params = instance.params
    out: list[Violation] = []

    rentals = {r.id: r for r in schedule.rentals}
    jobs = {j.id: j for j in instance.jobs}

    # Rentals must be open at least for their setup even when unused.
    for r in schedule.rentals:
        if r.close_at - r.open_at < params.setup(r.machine_type):
            out.append(Violation(ViolationKind.SETUP, f"rental {r.id} shorter than its setup",
                                 rental_id=r.id))

    counts: dict[str, int] = {j.id: 0 for j in instance.jobs}
    for a in schedule.assignments:
        if a.job_id not in jobs:
            out.append(Violation(ViolationKind.ASSIGNMENT,
                                 f"assignment for unknown job {a.job_id}", job_id=a.job_id))
        else:
            counts[a.job_id] += 1
    for job_id, n in counts.items():
        if n == 0:
            out.append(Violation(ViolationKind.ASSIGNMENT, f"job {job_id} never assigned",
                                 job_id=job_id))
        elif n > 1:
            out.append(Violation(ViolationKind.ASSIGNMENT,
                                 f"job {job_id} assigned {n} times", job_id=job_id))

    # Per-assignment checks need the rental's type to know the job's length.
    per_rental: dict[str, list[tuple[Fraction, Fraction, str]]] = {r.id: [] for r in schedule.rentals}
    for a in schedule.assignments:
        job = jobs.get(a.job_id)
        if job is None:
            continue
        rental = rentals.get(a.rental_id)
        if rental is None:
            out.append(Violation(ViolationKind.DANGLING,
                                 f"job {a.job_id} assigned to unknown rental {a.rental_id}",
                                 job_id=a.job_id, rental_id=a.rental_id))
            continue
        size = job.size(rental.machine_type)
        end = a.start + size
        if a.start < job.release or end > job.deadline:
            out.append(Violation(ViolationKind.WINDOW,
                                 f"job {a.job_id} runs [{a.start}, {end}] outside "
                                 f"[{job.release}, {job.deadline}]",
                                 job_id=a.job_id, rental_id=a.rental_id))
        avail_from = rental.open_at + params.setup(rental.machine_type)
        if a.start < avail_from or end > rental.close_at:
            out.append(Violation(ViolationKind.SETUP,
                                 f"job {a.job_id} runs [{a.start}, {end}] outside rental "
                                 f"{a.rental_id} availability [{avail_from}, {rental.close_at}]",
                                 job_id=a.job_id, rental_id=a.rental_id))
        per_rental[a.rental_id].append((a.start, end, a.job_id))

    # Disjoint interiors: back-to-back jobs sharing a boundary point are fine.
    for rid, spans in per_rental.items():
        spans.sort()
        for (s1, e1, j1), (s2, e2, j2) in zip(spans, spans[1:]):
            if j1 == j2:
                continue  # duplicates are already an assignment violation
            if s2 < e1:
                out.append(Violation(ViolationKind.OVERLAP,
                                     f"jobs {j1} and {j2} overlap on rental {rid}",
                                     job_id=j2, rental_id=rid))

    return ValidationReport(tuple(out))
