"""Seeded random instances with a tunable constraint tightness."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import floor

from .instance_io import Instance
from .model import Constraint, ConstraintKind, Fleet, JobSpec, Machine, as_fraction, validate_instance
from .oracle import continuous_min_energy_divisible, exact_assignment_enum

__all__ = ["GenSpec", "GenerationError", "generate", "budget_window", "two_machine_worst_case"]

# exact bounds by enumeration below this many job maps, estimates above
_EXACT_EDGE_LIMIT = 20_000


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class GenSpec:
    """Ranges are inclusive ``(lo, hi)`` pairs.  ``jobs=None`` means one
    divisible workload drawn from ``total_work``."""

    seed: int = 0
    kind: str = "power"
    machines: tuple[int, int] = (2, 6)
    jobs: tuple[int, int] | None = None
    speed: tuple[int, int] = (1, 50)
    marginal_power: tuple[int, int] = (1, 50)
    idle_power: tuple[int, int] = (0, 50)
    weight: tuple[int, int] = (1, 100)
    total_work: tuple[int, int] = (1, 100)
    tightness: Fraction = Fraction(1, 2)
    max_retries: int = 50

    def __post_init__(self):
        ConstraintKind(self.kind)
        tightness = as_fraction(self.tightness)
        if not 0 < tightness <= 1:
            raise GenerationError(f"tightness must lie in (0, 1], got {tightness}")
        object.__setattr__(self, "tightness", tightness)
        for name in ("machines", "speed", "marginal_power", "idle_power", "weight", "total_work"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise GenerationError(f"{name}: empty range {lo}..{hi}")
        if self.machines[0] < 1 or self.speed[0] < 1 or self.marginal_power[0] < 1:
            raise GenerationError("machines, speeds and marginal powers start at 1")
        if self.idle_power[0] < 0 or self.weight[0] < 1 or self.total_work[0] < 1:
            raise GenerationError("idle power starts at 0; weights and work at 1")
        if self.jobs is not None and (self.jobs[0] < 1 or self.jobs[0] > self.jobs[1]):
            raise GenerationError(f"jobs: bad range {self.jobs}")


def budget_window(fleet: Fleet, jobs: JobSpec, kind: ConstraintKind) -> tuple[Fraction, Fraction]:
    """``(least feasible, vacuous)`` constraint values for an instance."""
    work = jobs.total_work
    slowest = min(mc.speed for mc in fleet)
    small = jobs.is_divisible or len(fleet) ** jobs.n <= _EXACT_EDGE_LIMIT
    if kind is ConstraintKind.POWER:
        return (Fraction(fleet.gamma_total + min(mc.marginal_power for mc in fleet) + 1),
                Fraction(fleet.working_power_total))
    if kind is ConstraintKind.ENERGY:
        # every schedule finishes by work/slowest, so this much energy covers all
        vacuous = fleet.working_power_total * work / slowest
        if not jobs.is_divisible and small:
            least = exact_assignment_enum(
                fleet, jobs.discrete_weights, Constraint.makespan_budget(work / slowest)
            ).objective
        else:
            least = continuous_min_energy_divisible(fleet, work).objective
        return least, vacuous
    vacuous = work / slowest
    if jobs.is_divisible:
        least = work / fleet.total_speed
    elif small:
        least = exact_assignment_enum(
            fleet, jobs.discrete_weights, Constraint.energy_budget(fleet.working_power_total * vacuous)
        ).objective
    else:
        least = max(work / fleet.total_speed, Fraction(max(jobs.discrete_weights), fleet.max_speed))
    return least, vacuous


def _draw_fleet(rng: random.Random, spec: GenSpec) -> Fleet:
    m = rng.randint(*spec.machines)
    machines = []
    for i in range(m):
        v = rng.randint(*spec.speed)
        d = rng.randint(*spec.marginal_power)
        g = rng.randint(*spec.idle_power)
        machines.append(Machine(i, g + d, g, v))
    return Fleet(machines)


def _draw_jobs(rng: random.Random, spec: GenSpec) -> JobSpec:
    if spec.jobs is None:
        return JobSpec.divisible(rng.randint(*spec.total_work))
    n = rng.randint(*spec.jobs)
    return JobSpec.discrete(rng.randint(*spec.weight) for _ in range(n))


def generate(spec: GenSpec) -> Instance:
    """Draw an instance; retry on invalid draws up to ``spec.max_retries``."""
    rng = random.Random(spec.seed)
    kind = ConstraintKind(spec.kind)
    last = None
    for _ in range(spec.max_retries):
        fleet = _draw_fleet(rng, spec)
        jobs = _draw_jobs(rng, spec)
        if kind is ConstraintKind.POWER and not jobs.is_divisible:
            raise GenerationError("power-capped instances use divisible jobs")
        least, vacuous = budget_window(fleet, jobs, kind)
        if kind is ConstraintKind.POWER:
            if vacuous <= least:
                last = "power window is empty"
                continue
            if spec.tightness == 1:
                value = vacuous
            else:
                value = least + floor(spec.tightness * (vacuous - least))
        else:
            value = least + spec.tightness * (vacuous - least)
        constraint = Constraint(kind, value)
        report = validate_instance(fleet, jobs, constraint)
        if report.ok:
            return Instance(fleet, jobs, constraint)
        last = "; ".join(f.message for f in report.errors)
    raise GenerationError(f"no valid instance after {spec.max_retries} draws (last: {last})")


def two_machine_worst_case(k: int, idle_total: int, total_work=1) -> Instance:
    """Two identical machines with marginal power ``k`` and speed ``k*k``
    (so efficiency ``k``), capped one watt short of running both.

    The idle total is split between the two machines.  The energy greedy
    can only ever run one of them here.
    """
    if k < 1 or idle_total < 0:
        raise GenerationError("need k >= 1 and a non-negative idle total")
    g1 = idle_total // 2
    g2 = idle_total - g1
    fleet = Fleet([Machine(0, g1 + k, g1, k * k), Machine(1, g2 + k, g2, k * k)])
    cap = idle_total + 2 * k - 1
    return Instance(fleet, JobSpec.divisible(total_work), Constraint.power_cap(cap))
