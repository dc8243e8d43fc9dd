"""Command-line front end.

Subcommands: ``run`` an algorithm on an instance file, ``opt`` for the exact
offline optimum, ``tentative`` for the batch subproblem, ``gen`` to produce
instances from the adversarial families, ``bench`` for sweep experiments
emitting CSV (plus a rendered figure), and ``validate`` to re-check a
schedule file.  Exit codes: 0 ok, 1 infeasible result, 2 input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction
from typing import Optional

from . import io as sio
from .algorithms import make_algorithm
from .core import Instance, MachineParams, as_time, min_slack, total_cost, validate
from .harness import CausalityError, run_online
from .oracle import (ORACLE_JOB_LIMIT, brute_force_opt, gen_greedyfit_adv,
                     gen_lb_mid_eps, gen_lb_small_eps_a, gen_lb_small_eps_b,
                     gen_prop1, gen_stack, gen_random,
                     witness_greedyfit_adv, witness_lb_mid_eps,
                     witness_lb_small_eps_a, witness_lb_small_eps_b,
                     witness_stack)
from .tentative import generate_candidate_intervals, solve_exact, solve_firstfit


def _fmt(x) -> str:
    """Locale-independent numeric cell: exact for integers, 10 digits else."""
    if x is None:
        return ""
    frac = Fraction(x)
    if frac.denominator == 1:
        return str(frac.numerator)
    return f"{float(frac):.10g}"


# ---------------------------------------------------------------------------
# Generator families
# ---------------------------------------------------------------------------

def _params_from(args: dict) -> MachineParams:
    return MachineParams(setup_A=as_time(args["setup_a"]),
                         setup_B=as_time(args["setup_b"]),
                         cost_B=as_time(args["cost_b"]))


def _build_instance(family: str, params: dict) -> Instance:
    p = dict(params)
    if family == "prop1":
        return gen_prop1(_params_from(p), p["beta"], p.get("t", 100))
    if family == "lb-mid":
        return gen_lb_mid_eps(p["eps"], p["s"], p["c"], p["t"], p.get("delta", Fraction(1, 8)))
    if family == "lb-small-a":
        return gen_lb_small_eps_a(p["eps"], p["s"], p["c"], p["t"], p.get("delta", Fraction(1, 8)))
    if family == "lb-small-b":
        return gen_lb_small_eps_b(p["s_a"], p["s_b"], p["c"], p["t"], p.get("eps", 0))
    if family == "greedyfit":
        return gen_greedyfit_adv(p["s_b"], p["x"], p.get("offset", Fraction(1, 2)))
    if family == "stack":
        return gen_stack(p["s_b"], p["c"], int(p["n"]), p.get("s_a", 1))
    if family == "random":
        return gen_random(int(p["seed"]), int(p["n"]), _params_from(p), p["beta"])
    raise ValueError(f"unknown generator family {family!r}")


def _witness_cost(family: str, params: dict, instance: Instance) -> Optional[Fraction]:
    p = dict(params)
    builders = {
        "lb-mid": lambda: witness_lb_mid_eps(p["eps"], p["s"], p["c"], p["t"],
                                             p.get("delta", Fraction(1, 8))),
        "lb-small-a": lambda: witness_lb_small_eps_a(p["eps"], p["s"], p["c"], p["t"],
                                                     p.get("delta", Fraction(1, 8))),
        "lb-small-b": lambda: witness_lb_small_eps_b(p["s_a"], p["s_b"], p["c"], p["t"],
                                                     p.get("eps", 0)),
        "greedyfit": lambda: witness_greedyfit_adv(p["s_b"], p["x"],
                                                   p.get("offset", Fraction(1, 2))),
        "stack": lambda: witness_stack(p["s_b"], p["c"], int(p["n"]), p.get("s_a", 1)),
    }
    builder = builders.get(family)
    if builder is None:
        return None
    schedule = builder()
    report = validate(schedule, instance)
    if not report.ok:
        raise ValueError(f"internal witness for {family} is infeasible: {report.summary()}")
    return total_cost(schedule, instance.params)


GEN_FAMILIES = ("prop1", "lb-mid", "lb-small-a", "lb-small-b", "greedyfit", "stack", "random")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_run(args) -> int:
    instance = sio.load_instance(args.instance)
    algorithm = make_algorithm(args.algorithm)
    opt_cost = None
    if args.with_opt:
        opt_cost = brute_force_opt(instance, limit=args.opt_limit).cost if instance.jobs else None
    report = run_online(algorithm, instance, opt_cost=opt_cost)
    print(f"cost: {report.cost}")
    if report.ratio is not None:
        print(f"opt: {opt_cost}")
        print(f"ratio: {_fmt(report.ratio)}")
    for entry in report.infeasible:
        print(f"infeasible job {entry.job_id}: {entry.reason}")
    print(f"validation: {report.validation.summary()}")
    if args.schedule:
        sio.dump_schedule(report.schedule, args.schedule)
        print(f"schedule written to {args.schedule}")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            json.dump([{"action": type(a).__name__, **{
                k: (sio.encode_number(v) if isinstance(v, Fraction) else
                    v.value if hasattr(v, "value") else v)
                for k, v in vars(a).items()}} for a in report.actions], fh, indent=2)
        print(f"trace written to {args.trace}")
    if args.json:
        payload = {
            "cost": sio.encode_number(report.cost),
            "feasible": report.feasible,
            "violations": [str(v) for v in report.validation.violations],
            "infeasible_jobs": [e.job_id for e in report.infeasible],
            "schedule": sio.schedule_to_dict(report.schedule),
        }
        if report.ratio is not None:
            payload["opt"] = sio.encode_number(opt_cost)
            payload["ratio"] = sio.encode_number(report.ratio)
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
    return 0 if report.feasible else 1


def _cmd_opt(args) -> int:
    instance = sio.load_instance(args.instance)
    result = brute_force_opt(instance, limit=args.limit)
    print(f"opt cost: {result.cost}")
    print(f"partitions examined: {result.partitions_examined}")
    witness_path = args.witness or (args.instance + ".opt.json")
    sio.dump_schedule(result.schedule, witness_path)
    print(f"witness schedule: {witness_path}")
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump({"cost": sio.encode_number(result.cost),
                       "partitions_examined": result.partitions_examined,
                       "schedule": sio.schedule_to_dict(result.schedule)}, fh, indent=2)
    return 0


def _cmd_tentative(args) -> int:
    instance = sio.load_instance(args.batch)
    earliness = as_time(args.earliness) if args.earliness is not None else None
    # Jobs from different release slots never share machines; solve per slot.
    slots: dict[int, list] = {}
    for job in instance.jobs:
        slots.setdefault(int(job.release // instance.params.setup_B), []).append(job)
    total = Fraction(0)
    candidate_count = 0
    intervals = []
    batches = []
    for slot in sorted(slots):
        jobs = slots[slot]
        problem = generate_candidate_intervals(jobs, instance.params,
                                               earliness=earliness)
        solver = solve_exact if len(jobs) <= args.exact_limit else solve_firstfit
        solution = solver(problem)
        total += solution.objective
        candidate_count += problem.candidate_count
        intervals.extend(sorted(solution.chosen.values(), key=lambda c: c.job_id))
        batches.append({
            "release_slot": slot,
            "objective": sio.encode_number(solution.objective),
            "machines_B": solution.machines_B,
            "machines_per_slot": {str(k): v
                                  for k, v in sorted(solution.machines_slot.items())},
        })
    payload = {
        "objective": sio.encode_number(total),
        "candidate_count": candidate_count,
        "batches": batches,
        "intervals": [
            {
                "job": c.job_id,
                "type": c.machine_type.value,
                "start": sio.encode_number(c.start),
                "end": sio.encode_number(c.end),
                "exclusive": c.exclusive,
            }
            for c in intervals
        ],
    }
    text = json.dumps(payload, indent=2)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return 0


def _parse_kv(pairs: list[str]) -> dict:
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise ValueError(f"expected key=value, got {pair!r}")
        out[key.replace("-", "_")] = value
    return out


def _cmd_gen(args) -> int:
    params = _parse_kv(args.params)
    instance = _build_instance(args.family, params)
    sio.dump_instance(instance, args.output)
    beta = min_slack(instance) if instance.jobs else None
    print(f"{args.family}: {len(instance.jobs)} jobs, min slack {_fmt(beta)} -> {args.output}")
    return 0


def _cmd_validate(args) -> int:
    instance = sio.load_instance(args.instance)
    schedule = sio.load_schedule(args.schedule)
    report = validate(schedule, instance)
    print(f"cost: {total_cost(schedule, instance.params)}")
    print(f"validation: {report.summary()}")
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# Bench sweeps
# ---------------------------------------------------------------------------

def _expand_params(raw: dict) -> list[dict]:
    """Cartesian product over list-valued parameters, in declaration order."""
    combos: list[dict] = [{}]
    for key, value in raw.items():
        options = value if isinstance(value, list) else [value]
        combos = [dict(c, **{key: v}) for c in combos for v in options]
    return combos


def _bench_task(task: dict) -> dict:
    instance = _build_instance(task["family"], task["params"])
    algorithm = make_algorithm(task["algo"])
    started = time.perf_counter()
    report = run_online(algorithm, instance)
    elapsed_ms = (time.perf_counter() - started) * 1000.0

    opt_cost = None
    mode = task["opt"]
    if mode in ("oracle", "auto") and len(instance.jobs) <= ORACLE_JOB_LIMIT:
        opt_cost = brute_force_opt(instance).cost if instance.jobs else None
    if opt_cost is None and mode in ("witness", "auto"):
        opt_cost = _witness_cost(task["family"], task["params"], instance)

    epsilon = ""
    if task["algo"].startswith("bd:"):
        epsilon = _fmt(Fraction(task["algo"].partition(":")[2]))
    ratio = (report.cost / opt_cost) if (opt_cost and report.feasible) else None
    return {
        "instance": task["id"],
        "algo": task["algo"],
        "epsilon": epsilon,
        "beta": _fmt(min_slack(instance)) if instance.jobs else "",
        "n": str(len(instance.jobs)),
        "cost": _fmt(report.cost),
        "opt": _fmt(opt_cost),
        "ratio": _fmt(ratio),
        "feasible": "true" if report.feasible else "false",
        "ms": str(int(elapsed_ms)) if task["measure_time"] else "0",
    }


BENCH_COLUMNS = ["instance", "algo", "epsilon", "beta", "n", "cost", "opt",
                 "ratio", "feasible", "ms"]


def run_bench(config: dict) -> list[dict]:
    sweeps = config.get("sweeps", [])
    if not isinstance(sweeps, list):
        raise ValueError("config field 'sweeps' must be an array")
    measure_time = bool(config.get("measure_time", False))
    tasks = []
    for sweep in sweeps:
        name = sweep.get("name")
        gen = sweep.get("generator", {})
        family = gen.get("family")
        if not name or family not in GEN_FAMILIES:
            raise ValueError(f"sweep needs a name and a known generator family, got {sweep!r}")
        algorithms = sweep.get("algorithms", [])
        opt_mode = sweep.get("opt", "none")
        if opt_mode not in ("none", "oracle", "witness", "auto"):
            raise ValueError(f"sweep {name}: unknown opt mode {opt_mode!r}")
        for idx, combo in enumerate(_expand_params(gen.get("params", {}))):
            for algo in algorithms:
                tasks.append({
                    "id": f"{name}-{idx:03d}",
                    "family": family,
                    "params": combo,
                    "algo": algo,
                    "opt": opt_mode,
                    "measure_time": measure_time,
                })

    workers = int(config.get("workers", 1))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bench_task, tasks))
    else:
        rows = [_bench_task(t) for t in tasks]
    rows.sort(key=lambda r: (r["instance"], r["algo"]))
    return rows


def write_bench_csv(rows: list[dict], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def render_bench_plot(rows: list[dict], path: str) -> None:
    """Ratio (or cost) per algorithm, one figure next to the CSV."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    by_algo: dict[str, list[dict]] = {}
    for row in rows:
        by_algo.setdefault(row["algo"], []).append(row)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    use_ratio = any(r["ratio"] for r in rows)
    for algo in sorted(by_algo):
        series = by_algo[algo]
        ys = [float(r["ratio"] if use_ratio else r["cost"]) for r in series
              if (r["ratio"] if use_ratio else r["cost"])]
        ax.plot(range(len(ys)), ys, marker="o", label=algo)
    ax.set_xlabel("instance (sweep order)")
    ax.set_ylabel("cost ratio vs reference" if use_ratio else "cost")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _cmd_bench(args) -> int:
    with open(args.config, "r", encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise sio.InputError("$", f"invalid JSON: {exc}") from None
    rows = run_bench(config)
    write_bench_csv(rows, args.output)
    print(f"{len(rows)} rows -> {args.output}")
    if not args.no_plot:
        png = args.output.rsplit(".", 1)[0] + ".png"
        render_bench_plot(rows, png)
        print(f"figure -> {png}")
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cloudsched",
        description="Rental scheduling on two machine types with setup times.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an online algorithm on an instance file")
    p.add_argument("instance")
    p.add_argument("algorithm", help="a1 | greedyfit[:policy] | bd:<epsilon>")
    p.add_argument("--with-opt", action="store_true",
                   help="also compute the exact offline optimum and the ratio")
    p.add_argument("--opt-limit", type=int, default=ORACLE_JOB_LIMIT)
    p.add_argument("--schedule", metavar="PATH", help="write the schedule JSON here")
    p.add_argument("--trace", metavar="PATH", help="write the action trace JSON here")
    p.add_argument("--json", metavar="PATH", help="write a JSON report here")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("opt", help="exact offline optimum of a small instance")
    p.add_argument("instance")
    p.add_argument("--limit", type=int, default=ORACLE_JOB_LIMIT)
    p.add_argument("--witness", metavar="PATH")
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=_cmd_opt)

    p = sub.add_parser("tentative", help="solve the batch subproblem for a job file")
    p.add_argument("batch")
    p.add_argument("--earliness", help="deadline margin (default: setup_B)")
    p.add_argument("--exact-limit", type=int, default=9)
    p.add_argument("--json", metavar="PATH")
    p.set_defaults(func=_cmd_tentative)

    p = sub.add_parser("gen", help="generate an instance from a named family")
    p.add_argument("family", choices=GEN_FAMILIES)
    p.add_argument("params", nargs="*", metavar="key=value")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("bench", help="run the sweeps of a config file, emit CSV and a figure")
    p.add_argument("config")
    p.add_argument("-o", "--output", required=True, metavar="CSV")
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("validate", help="re-check a schedule file against an instance")
    p.add_argument("instance")
    p.add_argument("schedule")
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except sio.InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CausalityError as exc:
        print(f"harness error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
