"""Deterministic online simulation of job arrivals.

Algorithms see jobs only at their release times and act through a
:class:`SimContext`: they open and close machines, commit job start times
(possibly in the future, irrevocably) and request wake-up calls.  The
context enforces causality at intake so that no implementation can cheat by
acting in the past or by touching a job before it was revealed.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Optional, Protocol, Sequence, Union

from .core import (Assignment, Instance, Job, MachineParams, MachineType,
                   Rental, Schedule, ValidationReport, Violation,
                   ViolationKind, as_time, total_cost, validate)


class CausalityError(RuntimeError):
    """An algorithm emitted an action in the past or against a dead rental."""


# Recorded actions; the trace of a run is a list of these.
@dataclass(frozen=True)
class OpenMachine:
    at: Fraction
    machine_type: MachineType
    rental_id: str


@dataclass(frozen=True)
class CloseMachine:
    at: Fraction
    rental_id: str


@dataclass(frozen=True)
class AssignJob:
    start: Fraction
    job_id: str
    rental_id: str


@dataclass(frozen=True)
class RequestWakeUp:
    at: Fraction
    tag: Hashable


@dataclass(frozen=True)
class DeclareInfeasible:
    at: Fraction
    job_id: str
    reason: str


Action = Union[OpenMachine, CloseMachine, AssignJob, RequestWakeUp, DeclareInfeasible]


class OnlineAlgorithm(Protocol):
    def on_start(self, params: MachineParams, ctx: "SimContext") -> None: ...

    def on_jobs_released(self, now: Fraction, jobs: Sequence[Job], ctx: "SimContext") -> None: ...

    def on_wake_up(self, now: Fraction, tag: Hashable, ctx: "SimContext") -> None: ...


@dataclass
class _RentalState:
    rental_id: str
    machine_type: MachineType
    open_at: Fraction
    setup: Fraction
    close_at: Optional[Fraction] = None
    committed: list[tuple[Fraction, Fraction, str]] = field(default_factory=list)

    @property
    def available_from(self) -> Fraction:
        return self.open_at + self.setup

    @property
    def busy_until(self) -> Fraction:
        ends = [end for _, end, _ in self.committed]
        return max(ends) if ends else self.available_from


class SimContext:
    """Action intake for one simulation run."""

    def __init__(self, params: MachineParams):
        self.params = params
        self.now = Fraction(0)
        self.actions: list[Action] = []
        self.infeasible: list[DeclareInfeasible] = []
        self._rentals: dict[str, _RentalState] = {}
        self._released: set[str] = set()
        self._jobs: dict[str, Job] = {}
        self._assignments: list[Assignment] = []
        self._wake_heap: list[tuple[Fraction, int, Hashable]] = []
        self._wake_seq = 0
        self._rental_seq = 0
        self._intake_violations: list[Violation] = []

    # -- queries available to algorithms -------------------------------
    def open_rentals(self) -> list[_RentalState]:
        return [r for r in self._rentals.values() if r.close_at is None]

    def rental_state(self, rental_id: str) -> _RentalState:
        return self._rentals[rental_id]

    # -- actions --------------------------------------------------------
    def open_machine(self, machine_type: MachineType, at: Fraction) -> str:
        at = as_time(at)
        if at < self.now:
            raise CausalityError(f"causality violation: open at {at} < now {self.now}")
        rid = f"m{self._rental_seq}"
        self._rental_seq += 1
        self._rentals[rid] = _RentalState(rid, machine_type, at, self.params.setup(machine_type))
        self.actions.append(OpenMachine(at, machine_type, rid))
        return rid

    def close_machine(self, rental_id: str, at: Fraction) -> None:
        at = as_time(at)
        state = self._rentals.get(rental_id)
        if state is None:
            raise CausalityError(f"close of unknown rental {rental_id}")
        if state.close_at is not None:
            raise CausalityError(f"rental {rental_id} closed twice")
        if at < self.now:
            raise CausalityError(f"causality violation: close at {at} < now {self.now}")
        if at < state.open_at + state.setup:
            raise CausalityError(f"rental {rental_id} cannot close before its setup completes")
        if at < state.busy_until:
            # Commitments are irrevocable; the machine must stay open for them.
            raise CausalityError(f"rental {rental_id} has commitments until {state.busy_until}")
        state.close_at = at
        self.actions.append(CloseMachine(at, rental_id))

    def assign(self, job_id: str, rental_id: str, start: Fraction) -> None:
        start = as_time(start)
        if job_id not in self._released:
            self._intake_violations.append(Violation(
                ViolationKind.UNRELEASED,
                f"action referenced job {job_id} before its release", job_id=job_id))
            return
        state = self._rentals.get(rental_id)
        if state is None:
            raise CausalityError(f"assignment to unknown rental {rental_id}")
        if start < self.now:
            raise CausalityError(f"causality violation: start at {start} < now {self.now}")
        if start < state.available_from:
            raise CausalityError(
                f"job {job_id} cannot start at {start} on rental {rental_id}: "
                f"setup completes at {state.available_from}")
        size = self._jobs[job_id].size(state.machine_type)
        if state.close_at is not None and start + size > state.close_at:
            raise CausalityError(f"assignment to closed rental {rental_id}")
        state.committed.append((start, start + size, job_id))
        self._assignments.append(Assignment(job_id, rental_id, start))
        self.actions.append(AssignJob(start, job_id, rental_id))

    def request_wake_up(self, at: Fraction, tag: Hashable = None) -> None:
        at = as_time(at)
        if at < self.now:
            raise CausalityError(f"causality violation: wake-up at {at} < now {self.now}")
        heapq.heappush(self._wake_heap, (at, self._wake_seq, tag))
        self._wake_seq += 1
        self.actions.append(RequestWakeUp(at, tag))

    def declare_infeasible(self, job_id: str, reason: str) -> None:
        entry = DeclareInfeasible(self.now, job_id, reason)
        self.infeasible.append(entry)
        self.actions.append(entry)

    # -- harness side ----------------------------------------------------
    def _release(self, jobs: Sequence[Job]) -> None:
        for j in jobs:
            self._released.add(j.id)
            self._jobs[j.id] = j

    def _finalize_schedule(self) -> Schedule:
        rentals = []
        for state in self._rentals.values():
            close = state.close_at
            if close is None:
                # Never closed by the algorithm: close as early as legal.
                close = max(state.busy_until, state.open_at + state.setup)
            rentals.append(Rental(state.rental_id, state.machine_type, state.open_at, close))
        rentals.sort(key=lambda r: (r.open_at, r.id))
        assignments = sorted(self._assignments, key=lambda a: (a.start, a.job_id))
        return Schedule(rentals, assignments)


@dataclass(frozen=True)
class RunReport:
    """Outcome of one online run."""

    schedule: Schedule
    cost: Fraction
    validation: ValidationReport
    infeasible: tuple[DeclareInfeasible, ...] = ()
    ratio: Optional[Fraction] = None
    actions: tuple[Action, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.validation.ok and not self.infeasible


def competitive_ratio(report_cost: Fraction, opt_cost: Fraction) -> Fraction:
    if opt_cost <= 0:
        raise ValueError("optimal cost must be positive")
    return Fraction(report_cost) / Fraction(opt_cost)


def run_online(algorithm: OnlineAlgorithm, instance: Instance,
               opt_cost: Optional[Fraction] = None) -> RunReport:
    """Replay the instance against an online algorithm.

    Jobs are delivered in release order; wake-ups requested by the algorithm
    fire between releases, releases first on ties.  The resulting schedule is
    validated against the instance, and any rejected action (for example a
    reference to a not-yet-released job) is added to the validation report.
    """
    ctx = SimContext(instance.params)
    algorithm.on_start(instance.params, ctx)

    release_groups: list[tuple[Fraction, list[Job]]] = []
    for job in instance.jobs:  # already sorted by (release, id)
        if release_groups and release_groups[-1][0] == job.release:
            release_groups[-1][1].append(job)
        else:
            release_groups.append((job.release, [job]))

    gi = 0
    while True:
        next_release = release_groups[gi][0] if gi < len(release_groups) else None
        next_wake = ctx._wake_heap[0][0] if ctx._wake_heap else None
        if next_release is None and next_wake is None:
            break
        if next_wake is None or (next_release is not None and next_release <= next_wake):
            at, jobs = release_groups[gi]
            gi += 1
            ctx.now = at
            ctx._release(jobs)
            algorithm.on_jobs_released(at, jobs, ctx)
        else:
            at, _, tag = heapq.heappop(ctx._wake_heap)
            ctx.now = at
            algorithm.on_wake_up(at, tag, ctx)

    schedule = ctx._finalize_schedule()
    report = validate(schedule, instance)
    if ctx._intake_violations:
        report = ValidationReport(report.violations + tuple(ctx._intake_violations))
    cost = total_cost(schedule, instance.params)
    ratio = competitive_ratio(cost, opt_cost) if opt_cost is not None else None
    return RunReport(schedule, cost, report, tuple(ctx.infeasible), ratio, tuple(ctx.actions))
