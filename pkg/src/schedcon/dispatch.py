"""Pick the right solver from the constraint kind and the job kind."""

from __future__ import annotations

from fractions import Fraction

from .energy_budget import EnergyBudgetProblem, min_makespan_divisible, min_makespan_nondivisible
from .makespan_budget import MakespanBudgetProblem, min_energy_divisible, min_energy_nondivisible
from .model import Constraint, ConstraintKind, Fleet, JobSpec, SolveOutcome, StructureError, as_fraction
from .power import MODES, PowerProblem, min_energy_under_power, min_makespan_under_power

__all__ = ["PROBLEMS", "problem_name", "solve"]

PROBLEMS = (
    "power-makespan",
    "power-energy",
    "energy-makespan-divisible",
    "energy-makespan-discrete",
    "makespan-energy-divisible",
    "makespan-energy-discrete",
)

DEFAULT_EPSILON = Fraction(1, 4)


def problem_name(jobs: JobSpec, constraint: Constraint, objective: str | None = None) -> str:
    kind = constraint.kind
    if kind is ConstraintKind.POWER:
        if not jobs.is_divisible:
            raise StructureError("power caps are supported for divisible jobs only")
        objective = objective or "makespan"
        if objective not in ("makespan", "energy"):
            raise StructureError(f"unknown objective {objective!r}")
        return f"power-{objective}"
    # under a budget the objective is the other quantity
    implied = "makespan" if kind is ConstraintKind.ENERGY else "energy"
    if objective is not None and objective != implied:
        raise StructureError(f"a {kind.value} budget fixes the objective to {implied}, not {objective}")
    tail = "divisible" if jobs.is_divisible else "discrete"
    return f"{kind.value}-{implied}-{tail}"


def solve(
    fleet: Fleet,
    jobs: JobSpec,
    constraint: Constraint,
    objective: str | None = None,
    epsilon=DEFAULT_EPSILON,
    mode: str = "corrected",
) -> SolveOutcome:
    """Run the solver matching ``(constraint kind, job kind)``.

    ``epsilon`` feeds the approximation schemes (power-makespan and the
    discrete energy-budget solver); ``mode`` only affects power-energy.
    """
    if mode not in MODES:
        raise StructureError(f"mode must be one of {MODES}, got {mode!r}")
    epsilon = as_fraction(epsilon)
    name = problem_name(jobs, constraint, objective)
    if name == "power-makespan":
        return min_makespan_under_power(PowerProblem.from_instance(fleet, jobs, constraint), epsilon)
    if name == "power-energy":
        return min_energy_under_power(PowerProblem.from_instance(fleet, jobs, constraint), mode)
    if name.startswith("energy"):
        p = EnergyBudgetProblem.from_instance(fleet, jobs, constraint)
        return min_makespan_divisible(p) if jobs.is_divisible else min_makespan_nondivisible(p, epsilon)
    p = MakespanBudgetProblem.from_instance(fleet, jobs, constraint)
    return min_energy_divisible(p) if jobs.is_divisible else min_energy_nondivisible(p)
