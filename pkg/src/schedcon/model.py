"""Machines, fleets, jobs, constraints and schedules.

Every quantity that is not a machine rating or a job weight is an exact
:class:`fractions.Fraction`.  Ratings and weights are integers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

__all__ = [
    "StructureError",
    "Machine",
    "Fleet",
    "JobSpec",
    "ConstraintKind",
    "Constraint",
    "Assignment",
    "Schedule",
    "Guarantee",
    "SolveOutcome",
    "Severity",
    "Finding",
    "ValidationReport",
    "Violation",
    "FeasibilityReport",
    "as_fraction",
    "makespan",
    "energy",
    "power_draw",
    "validate_instance",
    "verify_schedule",
]


class StructureError(ValueError):
    """Raised for structurally invalid input (unknown ids, bad ratings)."""


def as_fraction(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` / decimal strings to a Fraction.

    Floats are refused: a binary float cannot carry an exact rational.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    if isinstance(value, float):
        raise TypeError(f"float {value!r} is not exact; pass a Fraction or a string")
    raise TypeError(f"cannot interpret {type(value).__name__} as a rational")


def _check_int(name: str, value, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise StructureError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise StructureError(f"{name} must be >= {minimum}, got {value}")
    return value


@dataclass(frozen=True)
class Machine:
    """One machine: working power, idle power (watts) and speed (work/s)."""

    id: int
    working_power: int
    idle_power: int
    speed: int

    def __post_init__(self):
        _check_int("id", self.id, 0)
        _check_int(f"machine {self.id}: working_power", self.working_power, 1)
        _check_int(f"machine {self.id}: idle_power", self.idle_power, 0)
        _check_int(f"machine {self.id}: speed", self.speed, 1)
        if self.idle_power > self.working_power:
            raise StructureError(
                f"machine {self.id}: idle_power {self.idle_power} exceeds "
                f"working_power {self.working_power}"
            )

    @property
    def marginal_power(self) -> int:
        """Extra draw when the machine works instead of idling."""
        return self.working_power - self.idle_power

    @property
    def efficiency(self) -> Fraction:
        """Work produced per joule of marginal energy."""
        if self.marginal_power == 0:
            raise ZeroDivisionError(f"machine {self.id} has zero marginal power")
        return Fraction(self.speed, self.marginal_power)

    @property
    def power_ratio(self) -> Fraction:
        return Fraction(self.idle_power, self.working_power)


class Fleet:
    """An ordered set of machines with dense ids ``0..m-1``.

    ``allow_mu_eq_gamma`` admits machines whose idle power equals their
    working power; solvers refuse such fleets but the energy formulas
    still apply.
    """

    def __init__(self, machines: Iterable[Machine], allow_mu_eq_gamma: bool = False):
        machines = tuple(machines)
        ids = sorted(mc.id for mc in machines)
        if ids != list(range(len(machines))):
            raise StructureError(f"machine ids must be unique and dense 0..m-1, got {ids}")
        if not allow_mu_eq_gamma:
            for mc in machines:
                if mc.idle_power >= mc.working_power:
                    raise StructureError(
                        f"machine {mc.id}: idle_power must be below working_power"
                    )
        self.machines: tuple[Machine, ...] = tuple(sorted(machines, key=lambda mc: mc.id))
        self.allow_mu_eq_gamma = allow_mu_eq_gamma

    @classmethod
    def from_ratings(cls, ratings: Sequence[tuple[int, int, int]], **kwargs) -> "Fleet":
        """Build from ``(working_power, idle_power, speed)`` triples."""
        return cls((Machine(i, mu, g, v) for i, (mu, g, v) in enumerate(ratings)), **kwargs)

    def __len__(self) -> int:
        return len(self.machines)

    def __iter__(self):
        return iter(self.machines)

    def __getitem__(self, machine_id: int) -> Machine:
        if not isinstance(machine_id, int) or not 0 <= machine_id < len(self.machines):
            raise StructureError(f"unknown machine id {machine_id!r}")
        return self.machines[machine_id]

    def __eq__(self, other):
        if not isinstance(other, Fleet):
            return NotImplemented
        return self.machines == other.machines and self.allow_mu_eq_gamma == other.allow_mu_eq_gamma

    def __hash__(self):
        return hash((self.machines, self.allow_mu_eq_gamma))

    def __repr__(self):
        return f"Fleet({list(self.machines)!r})"

    @property
    def m(self) -> int:
        return len(self.machines)

    @property
    def gamma_total(self) -> int:
        """Total idle draw of all machines."""
        return sum(mc.idle_power for mc in self.machines)

    @property
    def working_power_total(self) -> int:
        return sum(mc.working_power for mc in self.machines)

    @property
    def max_speed(self) -> int:
        return max(mc.speed for mc in self.machines)

    @property
    def total_speed(self) -> int:
        return sum(mc.speed for mc in self.machines)

    def by_efficiency(self, faster_first: bool = False) -> list[Machine]:
        """Machines by efficiency, best first.

        Ties go to the lower id, or to the faster machine first when
        ``faster_first`` is set.
        """
        if faster_first:
            return sorted(self.machines, key=lambda mc: (-mc.efficiency, -mc.speed, mc.id))
        return sorted(self.machines, key=lambda mc: (-mc.efficiency, mc.id))

    def efficiency_spread(self) -> Fraction:
        """``max efficiency / min efficiency`` over the whole fleet."""
        etas = [mc.efficiency for mc in self.machines]
        return max(etas) / min(etas)


@dataclass(frozen=True)
class JobSpec:
    """Either a divisible workload or a list of indivisible job weights."""

    divisible_total: Fraction | None = None
    discrete_weights: tuple[int, ...] | None = None

    def __post_init__(self):
        if (self.divisible_total is None) == (self.discrete_weights is None):
            raise StructureError("a job spec is exactly one of divisible or discrete")
        if self.divisible_total is not None:
            total = as_fraction(self.divisible_total)
            if total <= 0:
                raise StructureError(f"divisible total work must be positive, got {total}")
            object.__setattr__(self, "divisible_total", total)
        else:
            weights = tuple(self.discrete_weights)
            if not weights:
                raise StructureError("discrete job list is empty")
            for j, w in enumerate(weights):
                _check_int(f"job {j} weight", w, 1)
            object.__setattr__(self, "discrete_weights", weights)

    @classmethod
    def divisible(cls, total_work) -> "JobSpec":
        return cls(divisible_total=as_fraction(total_work))

    @classmethod
    def discrete(cls, weights: Iterable[int]) -> "JobSpec":
        return cls(discrete_weights=tuple(weights))

    @property
    def is_divisible(self) -> bool:
        return self.divisible_total is not None

    @property
    def total_work(self) -> Fraction:
        if self.is_divisible:
            return self.divisible_total
        return Fraction(sum(self.discrete_weights))

    @property
    def n(self) -> int | None:
        return None if self.is_divisible else len(self.discrete_weights)


class ConstraintKind(str, enum.Enum):
    POWER = "power"
    ENERGY = "energy"
    MAKESPAN = "makespan"


@dataclass(frozen=True)
class Constraint:
    """A power cap (W), an energy budget (J) or a makespan budget (s)."""

    kind: ConstraintKind
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "kind", ConstraintKind(self.kind))
        value = as_fraction(self.value)
        if value <= 0:
            raise StructureError(f"{self.kind.value} constraint must be positive, got {value}")
        object.__setattr__(self, "value", value)

    @classmethod
    def power_cap(cls, watts) -> "Constraint":
        return cls(ConstraintKind.POWER, as_fraction(watts))

    @classmethod
    def energy_budget(cls, joules) -> "Constraint":
        return cls(ConstraintKind.ENERGY, as_fraction(joules))

    @classmethod
    def makespan_budget(cls, seconds) -> "Constraint":
        return cls(ConstraintKind.MAKESPAN, as_fraction(seconds))


@dataclass(frozen=True)
class Assignment:
    machine_id: int
    work: Fraction
    time: Fraction
    jobs: tuple[int, ...] | None = None


@dataclass(frozen=True)
class Schedule:
    """Per-machine work and busy time.

    Job indices (discrete schedules) are 0-based positions in the job list.
    """

    assignments: tuple[Assignment, ...]

    def __post_init__(self):
        assignments = tuple(sorted(self.assignments, key=lambda a: a.machine_id))
        ids = [a.machine_id for a in assignments]
        if len(set(ids)) != len(ids):
            raise StructureError(f"duplicate machine ids in schedule: {ids}")
        object.__setattr__(self, "assignments", assignments)

    @classmethod
    def from_times(cls, fleet: Fleet, times: Mapping[int, object]) -> "Schedule":
        """Every fleet machine gets an entry; work follows from speed."""
        out = []
        for mc in fleet:
            t = as_fraction(times.get(mc.id, 0))
            out.append(Assignment(mc.id, t * mc.speed, t))
        return cls(tuple(out))

    @classmethod
    def from_work(cls, fleet: Fleet, works: Mapping[int, object]) -> "Schedule":
        out = []
        for mc in fleet:
            w = as_fraction(works.get(mc.id, 0))
            out.append(Assignment(mc.id, w, w / mc.speed))
        return cls(tuple(out))

    @classmethod
    def from_job_lists(
        cls, fleet: Fleet, weights: Sequence[int], job_lists: Mapping[int, Sequence[int]]
    ) -> "Schedule":
        out = []
        for mc in fleet:
            jobs = tuple(job_lists.get(mc.id, ()))
            w = Fraction(sum(weights[j] for j in jobs))
            out.append(Assignment(mc.id, w, w / mc.speed, jobs))
        return cls(tuple(out))

    def padded(self, fleet: Fleet) -> "Schedule":
        """Add empty entries for fleet machines the schedule does not mention."""
        present = {a.machine_id for a in self.assignments}
        empty_jobs = () if self.is_discrete else None
        extra = tuple(
            Assignment(mc.id, Fraction(0), Fraction(0), empty_jobs)
            for mc in fleet
            if mc.id not in present
        )
        return Schedule(self.assignments + extra)

    def merged(self, other: "Schedule") -> "Schedule":
        """Union of two schedules over disjoint machine sets."""
        return Schedule(self.assignments + other.assignments)

    @property
    def working_set(self) -> frozenset[int]:
        return frozenset(a.machine_id for a in self.assignments if a.time > 0)

    @property
    def makespan(self) -> Fraction:
        return makespan(self)

    @property
    def total_work(self) -> Fraction:
        return sum((a.work for a in self.assignments), Fraction(0))

    @property
    def is_discrete(self) -> bool:
        return any(a.jobs is not None for a in self.assignments)

    def times(self) -> dict[int, Fraction]:
        return {a.machine_id: a.time for a in self.assignments}

    def job_map(self) -> dict[int, int]:
        """job index -> machine id for discrete schedules."""
        return {j: a.machine_id for a in self.assignments for j in (a.jobs or ())}


@dataclass(frozen=True)
class Guarantee:
    bound_ratio: Fraction | None = None
    epsilon: Fraction | None = None
    exact: bool = False

    def __post_init__(self):
        if self.exact and self.bound_ratio != 1:
            raise ValueError("an exact guarantee has bound ratio 1")


@dataclass(frozen=True)
class SolveOutcome:
    """A solver's answer.  ``schedule`` and ``objective`` are None when infeasible."""

    status: str
    problem: str
    schedule: Schedule | None
    objective: Fraction | None
    guarantee: Guarantee
    diagnostics: dict = field(default_factory=dict)
    certificate: dict | None = None

    def __post_init__(self):
        if self.status not in ("ok", "infeasible"):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == "ok":
            if self.schedule is None or not self.schedule.working_set:
                raise ValueError("a successful outcome needs a non-empty working set")

    @property
    def feasible(self) -> bool:
        return self.status == "ok"

    @classmethod
    def infeasible(cls, problem: str, guarantee: Guarantee, certificate: dict, **diagnostics):
        return cls("infeasible", problem, None, None, guarantee, dict(diagnostics), certificate)


def makespan(schedule: Schedule) -> Fraction:
    return max((a.time for a in schedule.assignments), default=Fraction(0))


def energy(schedule: Schedule, fleet: Fleet) -> Fraction:
    """Marginal energy of every busy machine plus idle draw of the whole
    fleet over the realised makespan (charged once)."""
    total = Fraction(0)
    for a in schedule.assignments:
        mc = fleet[a.machine_id]
        total += a.work / mc.speed * mc.marginal_power
    return total + fleet.gamma_total * makespan(schedule)


def power_draw(working_set: Iterable[int], fleet: Fleet) -> int:
    return fleet.gamma_total + sum(fleet[i].marginal_power for i in set(working_set))


class Severity(str, enum.Enum):
    OK = "ok"
    WARNING = "warning"
    ERROR = "error"


@dataclass(frozen=True)
class Finding:
    severity: Severity
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...]

    @property
    def ok(self) -> bool:
        return not any(f.severity is Severity.ERROR for f in self.findings)

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity is Severity.ERROR]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity is Severity.WARNING]

    def codes(self) -> set[str]:
        return {f.code for f in self.findings}


def validate_instance(fleet: Fleet, jobs: JobSpec, constraint: Constraint) -> ValidationReport:
    """Report everything that would stop a solver, without raising."""
    findings: list[Finding] = []

    def add(sev, code, msg):
        findings.append(Finding(sev, code, msg))

    if fleet is None or len(fleet) == 0:
        add(Severity.ERROR, "empty-fleet", "the fleet has no machines")
        return ValidationReport(tuple(findings))
    if jobs is None:
        add(Severity.ERROR, "no-jobs", "no job specification")
        return ValidationReport(tuple(findings))
    if constraint is None or constraint.value <= 0:
        add(Severity.ERROR, "bad-constraint", "constraint value must be positive")
        return ValidationReport(tuple(findings))
    idle_equal = [mc.id for mc in fleet if mc.marginal_power == 0]
    if idle_equal:
        add(
            Severity.ERROR,
            "zero-marginal-power",
            f"machines {idle_equal} have idle power equal to working power",
        )
        return ValidationReport(tuple(findings))

    gamma = fleet.gamma_total
    if constraint.kind is ConstraintKind.POWER:
        if not jobs.is_divisible:
            add(
                Severity.ERROR,
                "unsupported",
                "power-capped scheduling is only provided for divisible jobs",
            )
        floor = gamma + min(mc.marginal_power for mc in fleet)
        if constraint.value <= floor:
            add(
                Severity.ERROR,
                "power-too-low",
                f"power cap {constraint.value} <= idle total + smallest marginal power = {floor}",
            )
        elif constraint.value >= fleet.working_power_total:
            add(
                Severity.WARNING,
                "unconstrained",
                f"power cap {constraint.value} >= total working power "
                f"{fleet.working_power_total}",
            )
    elif constraint.kind is ConstraintKind.ENERGY:
        # local import: the feasibility test belongs to the solver module
        from .energy_budget import max_divisible_work

        peak, _ = max_divisible_work(fleet, constraint.value)
        if peak < jobs.total_work:
            add(
                Severity.ERROR,
                "energy-too-low",
                f"energy budget {constraint.value} completes at most {peak} of "
                f"{jobs.total_work} work units",
            )
    else:
        budget = constraint.value
        capacity = fleet.total_speed * budget
        if capacity < jobs.total_work:
            add(
                Severity.ERROR,
                "makespan-too-short",
                f"makespan budget {budget} gives capacity {capacity} < work {jobs.total_work}",
            )
        if not jobs.is_divisible:
            too_big = [j for j, w in enumerate(jobs.discrete_weights) if Fraction(w, fleet.max_speed) > budget]
            if too_big:
                add(
                    Severity.ERROR,
                    "job-too-long",
                    f"jobs {too_big} exceed the makespan budget even on the fastest machine",
                )
    if not findings:
        add(Severity.OK, "ok", "instance is valid")
    return ValidationReport(tuple(findings))


@dataclass(frozen=True)
class Violation:
    check: str
    message: str
    quantity: Fraction | None = None


@dataclass(frozen=True)
class FeasibilityReport:
    violations: tuple[Violation, ...]

    @property
    def passed(self) -> bool:
        return not self.violations

    def checks(self) -> set[str]:
        return {v.check for v in self.violations}


def verify_schedule(
    schedule: Schedule, fleet: Fleet, jobs: JobSpec, constraint: Constraint
) -> FeasibilityReport:
    """Independent feasibility check of a finished schedule."""
    out: list[Violation] = []
    known = {mc.id for mc in fleet}
    for a in schedule.assignments:
        if a.machine_id not in known:
            out.append(Violation("structure", f"unknown machine id {a.machine_id}"))
    if out:
        return FeasibilityReport(tuple(out))

    for a in schedule.assignments:
        mc = fleet[a.machine_id]
        if a.time < 0 or a.work < 0:
            out.append(Violation("non-negative", f"machine {mc.id} has negative work or time"))
        if a.work != a.time * mc.speed:
            out.append(
                Violation(
                    "work-time",
                    f"machine {mc.id}: work {a.work} != time {a.time} x speed {mc.speed}",
                    a.work - a.time * mc.speed,
                )
            )

    total = schedule.total_work
    if total != jobs.total_work:
        out.append(
            Violation(
                "work-conservation",
                f"scheduled work {total} != required {jobs.total_work}",
                total - jobs.total_work,
            )
        )

    if not jobs.is_divisible:
        seen: list[int] = []
        for a in schedule.assignments:
            if a.jobs is None:
                if a.work != 0:
                    out.append(Violation("job-partition", f"machine {a.machine_id} has work but no jobs"))
                continue
            seen.extend(a.jobs)
            bad = [j for j in a.jobs if not 0 <= j < len(jobs.discrete_weights)]
            if bad:
                out.append(Violation("job-partition", f"machine {a.machine_id}: unknown jobs {bad}"))
                continue
            load = sum(jobs.discrete_weights[j] for j in a.jobs)
            if load != a.work:
                out.append(
                    Violation(
                        "job-partition",
                        f"machine {a.machine_id}: job weights sum to {load}, work is {a.work}",
                    )
                )
        if sorted(seen) != list(range(len(jobs.discrete_weights))):
            out.append(Violation("job-partition", "job indices do not partition the job list"))

    value = constraint.value
    if constraint.kind is ConstraintKind.POWER:
        draw = power_draw(schedule.working_set, fleet)
        if draw > value:
            out.append(Violation("power", f"draw {draw} exceeds cap {value}", Fraction(draw) - value))
    elif constraint.kind is ConstraintKind.ENERGY:
        e = energy(schedule, fleet)
        if e > value:
            out.append(Violation("energy", f"energy {e} exceeds budget {value}", e - value))
    else:
        t = makespan(schedule)
        if t > value:
            out.append(Violation("makespan", f"makespan {t} exceeds budget {value}", t - value))
    return FeasibilityReport(tuple(out))
