"""schedcon command line: solve, verify, oracle, gen, bench.

Exit codes: 0 success, 1 bad input or a failed check, 2 infeasible.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .bench import format_table, run_bench, summarize
from .dispatch import PROBLEMS, problem_name, solve
from .energy_budget import EnergyBudgetProblem
from .generator import GenerationError, GenSpec, generate
from .instance_io import (
    InstanceError,
    dumps,
    emit_instance,
    emit_outcome,
    parse_instance,
    schedule_from_dict,
    schedule_to_dict,
    to_jsonable,
)
from .makespan_budget import MakespanBudgetProblem
from .model import StructureError, validate_instance, verify_schedule
from .oracle import (
    OracleSizeError,
    dual_min_T_divisible,
    exact_assignment_enum,
    exact_power_subset,
    fractional_knapsack_min_energy,
)
from .power import MODES, PowerProblem

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE = 0, 1, 2

# validator findings that mean "no schedule exists", which solvers report
# with a certificate rather than as an input error
_INFEASIBILITY_CODES = {"power-too-low", "energy-too-low", "makespan-too-short", "job-too-long"}


class CliError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None
    return value


def _rational_list(text: str) -> tuple[Fraction, ...]:
    return tuple(_rational(part) for part in text.split(",") if part.strip())


def _range(text: str) -> tuple[int, int]:
    """``"3"`` or ``"2:6"``."""
    try:
        lo, _, hi = text.partition(":")
        lo = int(lo)
        hi = int(hi) if hi else lo
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO:HI, got {text!r}") from None
    return lo, hi


def _read(path: str) -> bytes:
    try:
        if path == "-":
            return sys.stdin.buffer.read()
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(data: bytes, path: str | None):
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None


def _load(path: str):
    return parse_instance(_read(path))


def cmd_solve(args) -> int:
    fleet, jobs, constraint = _load(args.instance)
    report = validate_instance(fleet, jobs, constraint)
    hard = [f for f in report.errors if f.code not in _INFEASIBILITY_CODES]
    if hard:
        for f in hard:
            print(f"error [{f.code}]: {f.message}", file=sys.stderr)
        return EXIT_ERROR
    for f in report.warnings:
        print(f"warning [{f.code}]: {f.message}", file=sys.stderr)
    outcome = solve(fleet, jobs, constraint, args.objective, args.epsilon, args.mode)
    _write(emit_outcome(outcome), args.output)
    if not outcome.feasible:
        print(f"infeasible: {json.dumps(to_jsonable(outcome.certificate), sort_keys=True)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_verify(args) -> int:
    fleet, jobs, constraint = _load(args.instance)
    try:
        doc = json.loads(_read(args.schedule))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CliError(f"{args.schedule}: malformed JSON: {exc}") from None
    if isinstance(doc, dict) and "status" in doc:
        if doc["status"] != "ok":
            print("FAIL: the outcome is infeasible and carries no schedule")
            return EXIT_ERROR
        doc = doc.get("schedule")
    schedule = schedule_from_dict(doc)
    result = verify_schedule(schedule, fleet, jobs, constraint)
    if result.passed:
        print("PASS")
        return EXIT_OK
    print("FAIL")
    for v in result.violations:
        print(f"  [{v.check}] {v.message}")
    return EXIT_ERROR


def cmd_oracle(args) -> int:
    fleet, jobs, constraint = _load(args.instance)
    name = problem_name(jobs, constraint, args.objective)
    if name.startswith("power"):
        res = exact_power_subset(PowerProblem.from_instance(fleet, jobs, constraint), name.split("-")[1])
    elif name == "energy-makespan-divisible":
        res = dual_min_T_divisible(EnergyBudgetProblem.from_instance(fleet, jobs, constraint))
    elif name == "makespan-energy-divisible":
        res = fractional_knapsack_min_energy(MakespanBudgetProblem.from_instance(fleet, jobs, constraint))
    else:
        res = exact_assignment_enum(fleet, jobs.discrete_weights, constraint)
    doc = {
        "problem": name,
        "method": res.method,
        "search_space_size": res.search_space_size,
        "status": "ok" if res.objective is not None else "infeasible",
    }
    if res.objective is not None:
        doc["objective"] = to_jsonable(res.objective)
        doc["schedule"] = schedule_to_dict(res.witness)
    _write(dumps(doc), args.output)
    return EXIT_OK if res.objective is not None else EXIT_INFEASIBLE


def cmd_gen(args) -> int:
    jobs = None if args.jobs == "divisible" else args.n_jobs
    spec = GenSpec(
        seed=args.seed,
        kind=args.constraint,
        machines=args.machines,
        jobs=jobs,
        tightness=args.tightness,
    )
    fleet, jobspec, constraint = generate(spec)
    _write(emit_instance(fleet, jobspec, constraint), args.output)
    return EXIT_OK


def _bench_variants(args) -> list[str]:
    chosen = []
    for name in PROBLEMS:
        if args.constraint and not name.startswith(args.constraint):
            continue
        if args.objective and name.split("-")[1] != args.objective:
            continue
        if args.jobs:
            divisible = not name.endswith("discrete")
            if divisible != (args.jobs == "divisible"):
                continue
        chosen.append(name)
    if not chosen:
        raise CliError("no problem variant matches the given filters")
    return chosen


def cmd_bench(args) -> int:
    rows = run_bench(_bench_variants(args), args.count, args.epsilon, args.seed, args.mode)
    summaries = summarize(rows)
    table = format_table(summaries)
    sys.stdout.write(table)
    if args.report:
        _write(dumps({"summaries": to_jsonable(summaries)}), args.report)
    return EXIT_ERROR if any(s["violations"] for s in summaries) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schedcon", description="Scheduling under power, energy and makespan limits.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--output")
    p.add_argument("--objective", choices=("makespan", "energy"))
    p.add_argument("--epsilon", type=_rational, default=Fraction(1, 4))
    p.add_argument("--mode", choices=MODES, default="corrected")
    p.set_defaults(run=cmd_solve)

    p = sub.add_parser("verify", help="check a schedule or outcome against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("schedule", help="outcome JSON from solve, or a bare schedule")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("oracle", help="exact reference answer by enumeration or closed form")
    p.add_argument("--instance", required=True)
    p.add_argument("--objective", choices=("makespan", "energy"))
    p.add_argument("--output")
    p.set_defaults(run=cmd_oracle)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--constraint", choices=("power", "energy", "makespan"), default="power")
    p.add_argument("--jobs", choices=("divisible", "discrete"), default="divisible")
    p.add_argument("--machines", type=_range, default=(2, 6), help="N or LO:HI")
    p.add_argument("--n-jobs", type=_range, default=(1, 7), help="N or LO:HI (discrete jobs)")
    p.add_argument("--tightness", type=_rational, default=Fraction(1, 2))
    p.add_argument("--output")
    p.set_defaults(run=cmd_gen)

    p = sub.add_parser("bench", help="approximation ratios against the oracles")
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--epsilon", type=_rational_list, default=(Fraction(1, 4),), help="comma list, e.g. 1/2,1/4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--constraint", choices=("power", "energy", "makespan"))
    p.add_argument("--objective", choices=("makespan", "energy"))
    p.add_argument("--jobs", choices=("divisible", "discrete"))
    p.add_argument("--mode", choices=MODES, default="corrected")
    p.add_argument("--report")
    p.set_defaults(run=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 2 is reserved for infeasible here
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.run(args)
    except (CliError, InstanceError, StructureError, GenerationError, OracleSizeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
