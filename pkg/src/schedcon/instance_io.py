"""JSON files for instances, schedules and solver outcomes.

Rationals are written as ``"p"`` or ``"p/q"`` in lowest terms, never as
floats.  Output is canonical: sorted keys, fixed indentation.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import NamedTuple

from .model import (
    Assignment,
    Constraint,
    ConstraintKind,
    Fleet,
    Guarantee,
    JobSpec,
    Machine,
    Schedule,
    SolveOutcome,
    StructureError,
)

__all__ = [
    "FORMAT_VERSION",
    "InstanceError",
    "Instance",
    "format_rational",
    "parse_rational",
    "parse_instance",
    "instance_to_dict",
    "emit_instance",
    "schedule_to_dict",
    "schedule_from_dict",
    "outcome_to_dict",
    "emit_outcome",
    "parse_outcome",
    "dumps",
    "to_jsonable",
]

FORMAT_VERSION = 1


class InstanceError(ValueError):
    """Malformed or invalid instance/schedule file."""


class Instance(NamedTuple):
    fleet: Fleet
    jobs: JobSpec
    constraint: Constraint


def format_rational(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_rational(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise InstanceError(f"{where}: expected a rational string like \"3/4\", got {value!r}")
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError):
        raise InstanceError(f"{where}: not a rational: {value!r}") from None


def _expect_keys(obj, where: str, required: set, optional: set = frozenset()):
    if not isinstance(obj, dict):
        raise InstanceError(f"{where}: expected an object")
    missing = required - obj.keys()
    if missing:
        raise InstanceError(f"{where}: missing fields {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise InstanceError(f"{where}: unknown fields {sorted(unknown)}")


def _expect_int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError(f"{where}: expected an integer, got {value!r}")
    return value


def _load_json(data):
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    try:
        return json.loads(data)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed JSON: {exc}") from None


def parse_instance(data) -> Instance:
    """Strict parse of an instance file (bytes or str)."""
    doc = _load_json(data)
    _expect_keys(doc, "instance", {"version", "machines", "jobs", "constraint"})
    if doc["version"] != FORMAT_VERSION:
        raise InstanceError(f"instance: unsupported version {doc['version']!r}")

    if not isinstance(doc["machines"], list):
        raise InstanceError("machines: expected a list")
    machines = []
    for k, entry in enumerate(doc["machines"]):
        where = f"machines[{k}]"
        _expect_keys(entry, where, {"id", "working_power", "idle_power", "speed"})
        fields = {f: _expect_int(entry[f], f"{where}.{f}") for f in entry}
        try:
            mc = Machine(fields["id"], fields["working_power"], fields["idle_power"], fields["speed"])
        except StructureError as exc:
            raise InstanceError(f"{where} (machine id {fields['id']}): {exc}") from None
        if mc.idle_power >= mc.working_power:
            raise InstanceError(
                f"{where} (machine id {mc.id}): idle_power {mc.idle_power} must be below "
                f"working_power {mc.working_power}"
            )
        machines.append(mc)
    if not machines:
        raise InstanceError("machines: the fleet is empty")
    try:
        fleet = Fleet(machines)
    except StructureError as exc:
        raise InstanceError(f"machines: {exc}") from None

    jobs_doc = doc["jobs"]
    _expect_keys(jobs_doc, "jobs", set(), {"divisible", "discrete"})
    if len(jobs_doc) != 1:
        raise InstanceError("jobs: exactly one of 'divisible' or 'discrete' is required")
    try:
        if "divisible" in jobs_doc:
            _expect_keys(jobs_doc["divisible"], "jobs.divisible", {"total_work"})
            jobs = JobSpec.divisible(parse_rational(jobs_doc["divisible"]["total_work"], "jobs.divisible.total_work"))
        else:
            _expect_keys(jobs_doc["discrete"], "jobs.discrete", {"weights"})
            weights = jobs_doc["discrete"]["weights"]
            if not isinstance(weights, list):
                raise InstanceError("jobs.discrete.weights: expected a list")
            jobs = JobSpec.discrete(
                _expect_int(w, f"jobs.discrete.weights[{j}]") for j, w in enumerate(weights)
            )
    except StructureError as exc:
        raise InstanceError(f"jobs: {exc}") from None

    c_doc = doc["constraint"]
    _expect_keys(c_doc, "constraint", {"kind", "value"})
    try:
        kind = ConstraintKind(c_doc["kind"])
    except ValueError:
        raise InstanceError(f"constraint.kind: expected power, energy or makespan, got {c_doc['kind']!r}") from None
    try:
        constraint = Constraint(kind, parse_rational(c_doc["value"], "constraint.value"))
    except StructureError as exc:
        raise InstanceError(f"constraint: {exc}") from None
    return Instance(fleet, jobs, constraint)


def instance_to_dict(fleet: Fleet, jobs: JobSpec, constraint: Constraint) -> dict:
    if jobs.is_divisible:
        jobs_doc = {"divisible": {"total_work": format_rational(jobs.divisible_total)}}
    else:
        jobs_doc = {"discrete": {"weights": list(jobs.discrete_weights)}}
    return {
        "version": FORMAT_VERSION,
        "machines": [
            {"id": mc.id, "working_power": mc.working_power, "idle_power": mc.idle_power, "speed": mc.speed}
            for mc in fleet
        ],
        "jobs": jobs_doc,
        "constraint": {"kind": constraint.kind.value, "value": format_rational(constraint.value)},
    }


def dumps(doc) -> bytes:
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


def emit_instance(fleet: Fleet, jobs: JobSpec, constraint: Constraint) -> bytes:
    return dumps(instance_to_dict(fleet, jobs, constraint))


def to_jsonable(value):
    """Fractions become rational strings; sets become sorted lists."""
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (set, frozenset)):
        return [to_jsonable(v) for v in sorted(value)]
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, float):
        return value
    return str(value)


def schedule_to_dict(schedule: Schedule) -> dict:
    rows = []
    for a in schedule.assignments:
        row = {"id": a.machine_id, "work": format_rational(a.work), "time": format_rational(a.time)}
        if a.jobs is not None:
            row["jobs"] = list(a.jobs)
        rows.append(row)
    return {"assignments": rows, "working_set": sorted(schedule.working_set)}


def schedule_from_dict(doc, where: str = "schedule") -> Schedule:
    _expect_keys(doc, where, {"assignments"}, {"working_set"})
    if not isinstance(doc["assignments"], list):
        raise InstanceError(f"{where}.assignments: expected a list")
    out = []
    for k, row in enumerate(doc["assignments"]):
        w = f"{where}.assignments[{k}]"
        _expect_keys(row, w, {"id", "work", "time"}, {"jobs"})
        jobs = None
        if "jobs" in row:
            if not isinstance(row["jobs"], list):
                raise InstanceError(f"{w}.jobs: expected a list")
            jobs = tuple(_expect_int(j, f"{w}.jobs") for j in row["jobs"])
        out.append(
            Assignment(
                _expect_int(row["id"], f"{w}.id"),
                parse_rational(row["work"], f"{w}.work"),
                parse_rational(row["time"], f"{w}.time"),
                jobs,
            )
        )
    try:
        schedule = Schedule(tuple(out))
    except StructureError as exc:
        raise InstanceError(f"{where}: {exc}") from None
    if "working_set" in doc and sorted(doc["working_set"]) != sorted(schedule.working_set):
        raise InstanceError(f"{where}.working_set does not match the assignments")
    return schedule


def outcome_to_dict(outcome: SolveOutcome) -> dict:
    g = outcome.guarantee
    doc = {
        "status": outcome.status,
        "problem": outcome.problem,
        "guarantee": {
            "bound_ratio": None if g.bound_ratio is None else format_rational(g.bound_ratio),
            "epsilon": None if g.epsilon is None else format_rational(g.epsilon),
            "exact": g.exact,
        },
        "diagnostics": to_jsonable(outcome.diagnostics),
    }
    if outcome.feasible:
        doc["objective"] = format_rational(outcome.objective)
        doc["schedule"] = schedule_to_dict(outcome.schedule)
    else:
        doc["certificate"] = to_jsonable(outcome.certificate)
    return doc


def emit_outcome(outcome: SolveOutcome) -> bytes:
    return dumps(outcome_to_dict(outcome))


def parse_outcome(data) -> SolveOutcome:
    """Read an outcome back; diagnostics and certificate stay as JSON values."""
    doc = _load_json(data)
    _expect_keys(doc, "outcome", {"status", "problem", "guarantee", "diagnostics"},
                 {"objective", "schedule", "certificate"})
    g = doc["guarantee"]
    _expect_keys(g, "outcome.guarantee", {"bound_ratio", "epsilon", "exact"})
    guarantee = Guarantee(
        None if g["bound_ratio"] is None else parse_rational(g["bound_ratio"], "guarantee.bound_ratio"),
        None if g["epsilon"] is None else parse_rational(g["epsilon"], "guarantee.epsilon"),
        bool(g["exact"]),
    )
    if doc["status"] == "ok":
        return SolveOutcome(
            "ok",
            doc["problem"],
            schedule_from_dict(doc["schedule"]),
            parse_rational(doc["objective"], "outcome.objective"),
            guarantee,
            doc["diagnostics"],
        )
    return SolveOutcome("infeasible", doc["problem"], None, None, guarantee,
                        doc["diagnostics"], doc.get("certificate"))
