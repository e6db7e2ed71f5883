"""Least energy that meets a makespan budget."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import (
    Constraint,
    ConstraintKind,
    Fleet,
    Guarantee,
    JobSpec,
    Schedule,
    SolveOutcome,
    StructureError,
    as_fraction,
    energy,
    makespan,
)

__all__ = ["MakespanBudgetProblem", "min_energy_divisible", "min_energy_nondivisible"]


@dataclass(frozen=True)
class MakespanBudgetProblem:
    fleet: Fleet
    jobs: JobSpec
    makespan_budget: Fraction

    def __post_init__(self):
        budget = as_fraction(self.makespan_budget)
        if budget <= 0:
            raise StructureError(f"makespan budget must be positive, got {budget}")
        object.__setattr__(self, "makespan_budget", budget)

    @classmethod
    def from_instance(cls, fleet: Fleet, jobs: JobSpec, constraint: Constraint):
        if constraint.kind is not ConstraintKind.MAKESPAN:
            raise StructureError(f"expected a makespan budget, got {constraint.kind.value}")
        return cls(fleet, jobs, constraint.value)


def min_energy_divisible(problem: MakespanBudgetProblem) -> SolveOutcome:
    """Fill machines to the budget in efficiency order; the last one takes
    the remainder.  Equal efficiency goes to the faster machine first."""
    fleet, limit = problem.fleet, problem.makespan_budget
    if not problem.jobs.is_divisible:
        raise StructureError("min_energy_divisible takes divisible jobs")
    remaining = problem.jobs.total_work
    exact = Guarantee(bound_ratio=Fraction(1), exact=True)
    capacity = fleet.total_speed * limit
    if capacity < remaining:
        return SolveOutcome.infeasible(
            "makespan-energy-divisible",
            exact,
            {"reason": "fleet capacity within the makespan budget is too small",
             "capacity": capacity, "required_work": remaining},
        )

    works = {}
    for mc in fleet.by_efficiency(faster_first=True):
        if remaining <= 0:
            break
        share = min(mc.speed * limit, remaining)
        works[mc.id] = share
        remaining -= share
    schedule = Schedule.from_work(fleet, works)
    return SolveOutcome(
        "ok",
        "makespan-energy-divisible",
        schedule,
        energy(schedule, fleet),
        exact,
        {"makespan": makespan(schedule)},
    )


def min_energy_nondivisible(problem: MakespanBudgetProblem) -> SolveOutcome:
    """First fit decreasing with bins opened in efficiency order.

    Jobs go largest first onto the first machine, in efficiency order,
    that can still finish them within the budget.
    """
    fleet, limit = problem.fleet, problem.makespan_budget
    jobs = problem.jobs
    if jobs.is_divisible:
        raise StructureError("min_energy_nondivisible takes discrete jobs")
    weights = jobs.discrete_weights
    order = fleet.by_efficiency()
    guarantee = Guarantee(bound_ratio=1 + fleet.efficiency_spread(), exact=False)

    busy = {mc.id: Fraction(0) for mc in order}
    placed: dict[int, list[int]] = {mc.id: [] for mc in order}
    for j in sorted(range(len(weights)), key=lambda j: (-weights[j], j)):
        for mc in order:
            need = Fraction(weights[j], mc.speed)
            if need <= limit - busy[mc.id]:
                busy[mc.id] += need
                placed[mc.id].append(j)
                break
        else:
            return SolveOutcome.infeasible(
                "makespan-energy-discrete",
                guarantee,
                {
                    "reason": f"job {j} (weight {weights[j]}) fits on no machine within the budget",
                    "job": j,
                    "weight": weights[j],
                },
            )
    schedule = Schedule.from_job_lists(fleet, weights, placed)
    return SolveOutcome(
        "ok",
        "makespan-energy-discrete",
        schedule,
        energy(schedule, fleet),
        guarantee,
        {"machines_used": len(schedule.working_set), "makespan": makespan(schedule),
         "tighter_bound": 1 + fleet.efficiency_spread() / 2},
    )
