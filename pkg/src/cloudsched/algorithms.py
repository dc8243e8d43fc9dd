"""Online algorithms: per-job dispatch, greedy fitting, and phase batching.

Three families, in increasing sophistication:

* :class:`SoloDispatch` (name ``a1``) opens one exclusive machine per job,
  picking the type by comparing fresh-machine prices, with a slack override
  that forces type A when type B could not be set up in time.
* :class:`GreedyFit` (name ``greedyfit``) reuses open machines whenever a
  job fits reasonably, otherwise opens like ``a1``; pluggable order, fit and
  close rules.
* :class:`BatchedDispatch` (name ``bd``) buffers arrivals into phases of
  length half of ``eps * setup_B``, reserves a deadline margin of one large
  setup per job up front, and at each phase end solves a tentative batch
  subproblem whose solution it realizes by shifting starts and doing all
  setups at the boundary.  Jobs with very tight type-A slack get a
  precautionary type-A machine at arrival when setups are too slow or too
  cheap to defer.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Sequence

from .core import Job, MachineParams, MachineType, as_time, slack
from .harness import SimContext
from .tentative import (CandidateInterval, InfeasibleTentativeProblem,
                        JobRestriction, generate_candidate_intervals,
                        pack_shared, solve_exact, solve_firstfit)


def a1_choose_type(job: Job, params: MachineParams) -> MachineType:
    """Machine type for a job on a fresh exclusive machine.

    Type A wins if it is no more expensive than type B and its setup fits
    in the job's type-A slack, or if the type-B setup cannot fit at all.
    """
    price_a = params.setup_A + job.size_A
    price_b = params.cost_B * (params.setup_B + job.size_B)
    if price_a <= price_b and slack(job, MachineType.A) >= params.setup_A:
        return MachineType.A
    if slack(job, MachineType.B) < params.setup_B:
        return MachineType.A
    return MachineType.B


class SoloDispatch:
    """One exclusive machine per job, opened at the job's release."""

    def on_start(self, params: MachineParams, ctx: SimContext) -> None:
        self.params = params

    def on_jobs_released(self, now, jobs: Sequence[Job], ctx: SimContext) -> None:
        for job in jobs:
            machine_type = a1_choose_type(job, self.params)
            setup = self.params.setup(machine_type)
            size = job.size(machine_type)
            if now + setup + size > job.deadline:
                ctx.declare_infeasible(job.id, f"type {machine_type} misses the deadline")
                continue
            rid = ctx.open_machine(machine_type, now)
            ctx.assign(job.id, rid, now + setup)
            ctx.close_machine(rid, now + setup + size)

    def on_wake_up(self, now, tag, ctx: SimContext) -> None:
        pass


def a1() -> SoloDispatch:
    return SoloDispatch()


@dataclass(frozen=True)
class GreedyFitPolicy:
    """Deterministic rules a greedy-fit variant plugs into the framework."""

    order: str = "id"          # job order within a release batch: id | deadline
    open_choice: str = "solo"  # type for a fresh machine: solo (same rule as a1)
    fit_choice: str = "first"  # among reasonable machines: first | latest-free
    close_on_idle: bool = True


POLICIES = {
    "default": GreedyFitPolicy(),
    "edf": GreedyFitPolicy(order="deadline"),
    "keep-open": GreedyFitPolicy(close_on_idle=False),
}


def greedyfit_reasonable(job: Job, machine, now, params: MachineParams) -> bool:
    """Whether an open machine is a sensible host for the job.

    True iff the job, queued after the machine's commitments, still meets
    its deadline, and its processing cost there does not exceed the full
    price of the cheapest fresh machine.
    """
    machine_type = machine.machine_type
    size = job.size(machine_type)
    earliest = machine.busy_until if machine.busy_until > now else now
    if earliest + size > job.deadline:
        return False
    fresh = min(params.setup_A + job.size_A,
                params.cost_B * (params.setup_B + job.size_B))
    return params.cost(machine_type) * size <= fresh


class GreedyFit:
    """Fill open machines first, open a fresh one only when nothing fits."""

    def __init__(self, policy: GreedyFitPolicy = POLICIES["default"]):
        self.policy = policy

    def on_start(self, params: MachineParams, ctx: SimContext) -> None:
        self.params = params

    def _ordered(self, jobs: Sequence[Job]) -> list[Job]:
        if self.policy.order == "deadline":
            return sorted(jobs, key=lambda j: (j.deadline, j.id))
        return sorted(jobs, key=lambda j: j.id)

    def _pick(self, machines):
        if self.policy.fit_choice == "latest-free":
            return max(machines, key=lambda m: (m.busy_until, m.rental_id))
        return min(machines, key=lambda m: int(m.rental_id[1:]))

    def on_jobs_released(self, now, jobs: Sequence[Job], ctx: SimContext) -> None:
        for job in self._ordered(jobs):
            open_machines = sorted(ctx.open_rentals(), key=lambda m: int(m.rental_id[1:]))
            reasonable = [m for m in open_machines
                          if greedyfit_reasonable(job, m, now, self.params)]
            if not reasonable:
                machine_type = a1_choose_type(job, self.params)
                setup = self.params.setup(machine_type)
                if now + setup + job.size(machine_type) > job.deadline:
                    ctx.declare_infeasible(job.id,
                                           f"type {machine_type} misses the deadline")
                    continue
                rid = ctx.open_machine(machine_type, now)
                reasonable = [ctx.rental_state(rid)]
            target = self._pick(reasonable)
            start = target.busy_until if target.busy_until > now else now
            ctx.assign(job.id, target.rental_id, start)
            if self.policy.close_on_idle:
                end = start + job.size(target.machine_type)
                ctx.request_wake_up(end, ("idle", target.rental_id))

    def on_wake_up(self, now, tag, ctx: SimContext) -> None:
        if not (isinstance(tag, tuple) and tag and tag[0] == "idle"):
            return
        for machine in ctx.open_rentals():
            if machine.rental_id == tag[1] and machine.busy_until == now:
                ctx.close_machine(machine.rental_id, now)


def greedyfit(policy: GreedyFitPolicy = POLICIES["default"]) -> GreedyFit:
    return GreedyFit(policy)


# ---------------------------------------------------------------------------
# Phase-batched dispatch
# ---------------------------------------------------------------------------

class SlackClass(Enum):
    """Slack classes steering restrictions and realization shifts."""

    J1 = "J1"      # ample slack on B, and A either slack or tiny
    J2_1 = "J2_1"  # tight on A, and type A is worth its setup
    J2_2 = "J2_2"  # tight on A, routed to type B only
    J3 = "J3"      # tight on B, routed to type A only


class UnclassifiableJob(ValueError):
    pass


def uses_precautionary(params: MachineParams, phase_len: Fraction) -> bool:
    """True when type-A setups cannot be deferred to the phase boundary.

    Deferral is safe only if a setup plus one phase still fits within the
    reserved deadline margin and type-A setups are expensive enough that
    per-job machines would be wasteful; otherwise machines for tight-A jobs
    are opened at arrival.
    """
    deferrable = (params.setup_B >= params.setup_A + phase_len
                  and params.setup_A / params.cost_B > phase_len)
    return not deferrable


def bd_classify(job: Job, params: MachineParams, phase_len: Fraction,
                precautionary: Optional[bool] = None) -> SlackClass:
    """Classify a job (deadline margin already subtracted) by its slacks."""
    if precautionary is None:
        precautionary = uses_precautionary(params, phase_len)
    gap = 2 * phase_len
    slack_a = slack(job, MachineType.A)
    slack_b = slack(job, MachineType.B)
    if slack_b >= gap and (slack_a >= gap or job.size_A <= phase_len):
        return SlackClass.J1
    if slack_b >= gap:
        if not precautionary:
            return SlackClass.J2_1
        return SlackClass.J2_1 if params.cost_B * job.size_B > params.setup_A else SlackClass.J2_2
    if slack_a >= gap:
        return SlackClass.J3
    raise UnclassifiableJob(
        f"job {job.id} unclassifiable: slack below {gap} on both types")


class BatchedDispatch:
    """Buffer arrivals per phase, then plan each phase batch at its end.

    On arrival every deadline is reduced by one large setup; that margin
    later absorbs the start shifts of realization.  At the phase boundary a
    tentative subproblem per slack class chooses processing intervals under
    class restrictions; realized machines do their setups exactly at the
    boundary, except reused precautionary machines, which were opened at
    the triggering job's release.
    """

    def __init__(self, eps, exact_limit: int = 9):
        self.eps = as_time(eps)
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        self.exact_limit = exact_limit

    def on_start(self, params: MachineParams, ctx: SimContext) -> None:
        if not (Fraction(1) / params.setup_B <= self.eps <= 1):
            raise ValueError(
                f"eps={self.eps} out of range [1/setup_B, 1] for setup_B={params.setup_B}")
        # Candidate generation below needs commensurable setups.
        if (params.setup_B / params.setup_A).denominator != 1:
            raise ValueError("setup_B must be an integer multiple of setup_A")
        self.params = params
        self.phase_len = self.eps * params.setup_B / 2
        self.precautionary_mode = uses_precautionary(params, self.phase_len)
        self.buffers: dict[int, list[tuple[Job, SlackClass]]] = {}
        self.requested: set[int] = set()
        self.precautionary: dict[str, str] = {}  # job id -> rental id

    def on_jobs_released(self, now, jobs: Sequence[Job], ctx: SimContext) -> None:
        for job in jobs:
            reduced = job.deadline - self.params.setup_B
            if reduced <= job.release:
                ctx.declare_infeasible(job.id, "window shorter than the reserved margin")
                continue
            shrunk = Job(job.id, job.release, reduced, job.size_A, job.size_B)
            try:
                cls = bd_classify(shrunk, self.params, self.phase_len,
                                  self.precautionary_mode)
            except UnclassifiableJob as exc:
                ctx.declare_infeasible(job.id, str(exc))
                continue
            phase = int(job.release // self.phase_len) + 1
            self.buffers.setdefault(phase, []).append((shrunk, cls))
            if phase not in self.requested:
                self.requested.add(phase)
                ctx.request_wake_up(phase * self.phase_len, phase)
            if self.precautionary_mode and cls is SlackClass.J2_1:
                self.precautionary[job.id] = ctx.open_machine(MachineType.A, now)

    def on_wake_up(self, now, tag, ctx: SimContext) -> None:
        batch = self.buffers.pop(tag, None)
        if not batch:
            return
        for cls in SlackClass:
            members = [job for job, c in batch if c is cls]
            if not members:
                continue
            # The candidate windows assume one release slot of length
            # setup_B per batch; split phases straddling a slot boundary.
            by_slot: dict[int, list[Job]] = {}
            for job in members:
                by_slot.setdefault(int(job.release // self.params.setup_B), []).append(job)
            for slot in sorted(by_slot):
                self._dispatch(cls, by_slot[slot], now, ctx)
        if self.precautionary_mode:
            self._close_unused(batch, now, ctx)

    # -- phase realization ------------------------------------------------
    def _restriction(self, cls: SlackClass, boundary: Fraction) -> JobRestriction:
        if cls is SlackClass.J1:
            return JobRestriction(min_start_A=boundary, min_start_B=boundary)
        if cls is SlackClass.J2_1:
            return JobRestriction(min_start_B=boundary)
        if cls is SlackClass.J2_2:
            return JobRestriction(allow_A=False, min_start_B=boundary)
        return JobRestriction(allow_B=False, min_start_A=boundary)

    def _shift(self, cls: SlackClass, machine_type: MachineType) -> Fraction:
        if machine_type is MachineType.B:
            return self.params.setup_B
        if cls is SlackClass.J2_1:
            if self.precautionary_mode:
                return self.params.setup_A
            return self.params.setup_A + self.phase_len
        return self.params.setup_A

    def _dispatch(self, cls: SlackClass, members: list[Job], boundary, ctx: SimContext) -> None:
        restriction = self._restriction(cls, boundary)
        problem = generate_candidate_intervals(
            members, self.params,
            {job.id: restriction for job in members},
            earliness=Fraction(0))
        try:
            if len(members) <= self.exact_limit:
                solution = solve_exact(problem)
            else:
                solution = solve_firstfit(problem)
        except InfeasibleTentativeProblem:
            for job in members:
                ctx.declare_infeasible(job.id, "infeasible phase")
            return

        chosen = sorted(solution.chosen.values(), key=lambda c: c.job_id)
        shared_groups: dict[tuple, list[CandidateInterval]] = {}
        for cand in chosen:
            reuse_precautionary = (cls is SlackClass.J2_1 and self.precautionary_mode
                                   and cand.machine_type is MachineType.A)
            if reuse_precautionary:
                # The machine opened at this job's arrival has been set up
                # since release + setup_A; never start before the boundary.
                start = cand.start + self._shift(cls, cand.machine_type)
                if start < boundary:
                    start = boundary
                rid = self.precautionary.pop(cand.job_id)
                ctx.assign(cand.job_id, rid, start)
                ctx.close_machine(rid, start + (cand.end - cand.start))
            elif cand.exclusive:
                start = cand.start + self._shift(cls, cand.machine_type)
                rid = ctx.open_machine(cand.machine_type, boundary)
                ctx.assign(cand.job_id, rid, start)
                ctx.close_machine(rid, start + (cand.end - cand.start))
            else:
                key = (cand.machine_type.value, cand.slot)
                shared_groups.setdefault(key, []).append(cand)

        for key in sorted(shared_groups, key=lambda k: (k[0], k[1] or 0)):
            group = shared_groups[key]
            machine_type = MachineType(key[0])
            shift = self._shift(cls, machine_type)
            packing = pack_shared(group)
            machines: dict[int, str] = {}
            last_end: dict[int, Fraction] = {}
            for cand in sorted(group, key=lambda c: (c.start, c.job_id)):
                idx = packing[cand.job_id]
                if idx not in machines:
                    machines[idx] = ctx.open_machine(machine_type, boundary)
                ctx.assign(cand.job_id, machines[idx], cand.start + shift)
                last_end[idx] = cand.end + shift
            for idx in sorted(machines):
                ctx.close_machine(machines[idx], last_end[idx])

    def _close_unused(self, batch, now, ctx: SimContext) -> None:
        for job, cls in batch:
            rid = self.precautionary.pop(job.id, None)
            if rid is None:
                continue
            close_at = job.release + self.params.setup_A
            ctx.close_machine(rid, close_at if close_at > now else now)


def batched_dispatch(eps, exact_limit: int = 9) -> BatchedDispatch:
    return BatchedDispatch(eps, exact_limit)


def make_algorithm(spec: str):
    """Build an algorithm from its command-line name.

    Recognized forms: ``a1``, ``greedyfit``, ``greedyfit:<policy>`` and
    ``bd:<epsilon>`` (epsilon decimal or rational, e.g. ``bd:1/2``).
    """
    name, _, arg = spec.partition(":")
    if name == "a1" and not arg:
        return a1()
    if name == "greedyfit":
        policy = arg or "default"
        if policy not in POLICIES:
            raise ValueError(f"unknown greedyfit policy {policy!r} "
                             f"(have: {', '.join(sorted(POLICIES))})")
        return greedyfit(POLICIES[policy])
    if name == "bd":
        if not arg:
            raise ValueError("bd needs an epsilon, e.g. bd:0.5")
        return batched_dispatch(Fraction(arg))
    raise ValueError(f"unknown algorithm {spec!r}")
