"""Exact JSON serialization for instances and schedules.

Instance files look like::

    {"machine_types": {"A": {"setup": 1, "cost": 1},
                       "B": {"setup": 8, "cost": 3}},
     "jobs": [{"id": "j0", "release": 0, "deadline": "21/2",
               "p_A": 2, "p_B": "1.5"}]}

Numbers are parsed exactly: JSON literals go through their source text, and
strings may use decimal ("1.5") or rational ("21/2") notation.  Values whose
exact form cannot be expressed as a decimal are emitted as "p/q" strings.

Setting the environment variable ``SCHED_TIME_QUANTUM`` (for example to
"0.25" or "1/8") constrains every time-valued field to an integer multiple
of that quantum; offending inputs are rejected instead of rounded.
"""

from __future__ import annotations

import json
import os
from fractions import Fraction
from typing import Any, Optional, Union

from .core import (Assignment, Instance, Job, MachineParams, MachineType,
                   Rental, Schedule, as_time)

QUANTUM_ENV_VAR = "SCHED_TIME_QUANTUM"


class InputError(ValueError):
    """Malformed input file; carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.field_path = path
        super().__init__(f"{path}: {message}")


def _parse_json(text: str) -> Any:
    # parse_float receives the literal source text, keeping 0.1 exact.
    return json.loads(text, parse_float=Fraction, parse_int=Fraction)


def encode_number(value: Fraction) -> Union[int, str]:
    value = Fraction(value)
    return int(value) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"


def active_quantum() -> Optional[Fraction]:
    raw = os.environ.get(QUANTUM_ENV_VAR)
    if raw is None or raw == "":
        return None
    quantum = Fraction(raw)
    if quantum <= 0:
        raise ValueError(f"{QUANTUM_ENV_VAR} must be positive, got {raw!r}")
    return quantum


def _number(obj: Any, path: str, quantum: Optional[Fraction]) -> Fraction:
    if isinstance(obj, bool) or not isinstance(obj, (int, str, Fraction)):
        raise InputError(path, f"expected a number, got {obj!r}")
    try:
        value = as_time(obj)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(path, f"bad number {obj!r}: {exc}") from None
    if quantum is not None and (value / quantum).denominator != 1:
        raise InputError(path, f"{obj!r} is not a multiple of the time quantum {quantum}")
    return value


def _string(obj: Any, path: str) -> str:
    if not isinstance(obj, str) or not obj:
        raise InputError(path, f"expected a nonempty string, got {obj!r}")
    return obj


def _object(obj: Any, path: str) -> dict:
    if not isinstance(obj, dict):
        raise InputError(path, f"expected an object, got {type(obj).__name__}")
    return obj


def instance_from_dict(data: Any, quantum: Optional[Fraction] = None) -> Instance:
    data = _object(data, "$")
    types = _object(data.get("machine_types"), "machine_types")
    spec_a = _object(types.get("A"), "machine_types.A")
    spec_b = _object(types.get("B"), "machine_types.B")
    cost_a = _number(spec_a.get("cost", 1), "machine_types.A.cost", None)
    if cost_a != 1:
        raise InputError("machine_types.A.cost", "type A cost is fixed at 1")
    try:
        params = MachineParams(
            setup_A=_number(spec_a.get("setup"), "machine_types.A.setup", quantum),
            setup_B=_number(spec_b.get("setup"), "machine_types.B.setup", quantum),
            cost_B=_number(spec_b.get("cost"), "machine_types.B.cost", None),
        )
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError("machine_types", str(exc)) from None

    raw_jobs = data.get("jobs")
    if not isinstance(raw_jobs, list):
        raise InputError("jobs", "expected an array")
    jobs = []
    for k, raw in enumerate(raw_jobs):
        where = f"jobs[{k}]"
        raw = _object(raw, where)
        try:
            jobs.append(Job(
                id=_string(raw.get("id"), f"{where}.id"),
                release=_number(raw.get("release"), f"{where}.release", quantum),
                deadline=_number(raw.get("deadline"), f"{where}.deadline", quantum),
                size_A=_number(raw.get("p_A"), f"{where}.p_A", quantum),
                size_B=_number(raw.get("p_B"), f"{where}.p_B", quantum),
            ))
        except ValueError as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(where, str(exc)) from None
    try:
        return Instance(params, jobs)
    except ValueError as exc:
        raise InputError("jobs", str(exc)) from None


def instance_to_dict(instance: Instance) -> dict:
    p = instance.params
    return {
        "machine_types": {
            "A": {"setup": encode_number(p.setup_A), "cost": 1},
            "B": {"setup": encode_number(p.setup_B), "cost": encode_number(p.cost_B)},
        },
        "jobs": [
            {
                "id": j.id,
                "release": encode_number(j.release),
                "deadline": encode_number(j.deadline),
                "p_A": encode_number(j.size_A),
                "p_B": encode_number(j.size_B),
            }
            for j in instance.jobs
        ],
    }


def load_instance(path: str, quantum: Optional[Fraction] = None) -> Instance:
    if quantum is None:
        quantum = active_quantum()
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = _parse_json(text)
    except json.JSONDecodeError as exc:
        raise InputError("$", f"invalid JSON: {exc}") from None
    return instance_from_dict(data, quantum)


def dump_instance(instance: Instance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance), fh, indent=2)
        fh.write("\n")


def schedule_from_dict(data: Any, quantum: Optional[Fraction] = None) -> Schedule:
    data = _object(data, "$")
    raw_rentals = data.get("rentals")
    raw_assignments = data.get("assignments")
    if not isinstance(raw_rentals, list):
        raise InputError("rentals", "expected an array")
    if not isinstance(raw_assignments, list):
        raise InputError("assignments", "expected an array")
    rentals = []
    for k, raw in enumerate(raw_rentals):
        where = f"rentals[{k}]"
        raw = _object(raw, where)
        kind = _string(raw.get("type"), f"{where}.type")
        if kind not in ("A", "B"):
            raise InputError(f"{where}.type", f"expected 'A' or 'B', got {kind!r}")
        rentals.append(Rental(
            id=_string(raw.get("id"), f"{where}.id"),
            machine_type=MachineType(kind),
            open_at=_number(raw.get("open"), f"{where}.open", quantum),
            close_at=_number(raw.get("close"), f"{where}.close", quantum),
        ))
    assignments = []
    for k, raw in enumerate(raw_assignments):
        where = f"assignments[{k}]"
        raw = _object(raw, where)
        assignments.append(Assignment(
            job_id=_string(raw.get("job"), f"{where}.job"),
            rental_id=_string(raw.get("rental"), f"{where}.rental"),
            start=_number(raw.get("start"), f"{where}.start", quantum),
        ))
    return Schedule(rentals, assignments)


def schedule_to_dict(schedule: Schedule) -> dict:
    return {
        "rentals": [
            {
                "id": r.id,
                "type": r.machine_type.value,
                "open": encode_number(r.open_at),
                "close": encode_number(r.close_at),
            }
            for r in schedule.rentals
        ],
        "assignments": [
            {
                "job": a.job_id,
                "rental": a.rental_id,
                "start": encode_number(a.start),
            }
            for a in schedule.assignments
        ],
    }


def load_schedule(path: str, quantum: Optional[Fraction] = None) -> Schedule:
    if quantum is None:
        quantum = active_quantum()
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = _parse_json(text)
    except json.JSONDecodeError as exc:
        raise InputError("$", f"invalid JSON: {exc}") from None
    return schedule_from_dict(data, quantum)


def dump_schedule(schedule: Schedule, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(schedule_to_dict(schedule), fh, indent=2)
        fh.write("\n")


def schedule_json(schedule: Schedule) -> str:
    """Canonical single-string form, used for byte-level determinism checks."""
    return json.dumps(schedule_to_dict(schedule), sort_keys=True, separators=(",", ":"))
