"""Divisible workloads under an instantaneous power cap.

With a cap, only a subset of machines may work at once.  For divisible
work every chosen machine runs for the same time ``T = W / sum(speeds)``,
so the whole problem is choosing the working set.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import Iterable

from .kernels import fptas_max_speed
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
)

__all__ = [
    "PowerProblem",
    "run_working_set",
    "min_makespan_under_power",
    "min_energy_under_power",
    "MODES",
]

MODES = ("corrected", "paper-verbatim")


@dataclass(frozen=True)
class PowerProblem:
    fleet: Fleet
    total_work: Fraction
    power_cap: Fraction

    def __post_init__(self):
        object.__setattr__(self, "total_work", as_fraction(self.total_work))
        object.__setattr__(self, "power_cap", as_fraction(self.power_cap))
        if self.total_work <= 0 or self.power_cap <= 0:
            raise StructureError("work and power cap must be positive")

    @classmethod
    def from_instance(cls, fleet: Fleet, jobs: JobSpec, constraint: Constraint) -> "PowerProblem":
        if constraint.kind is not ConstraintKind.POWER:
            raise StructureError(f"expected a power cap, got {constraint.kind.value}")
        if not jobs.is_divisible:
            raise StructureError("power-capped solvers take divisible jobs only")
        return cls(fleet, jobs.total_work, constraint.value)

    @property
    def margin(self) -> int:
        """Headroom above the all-idle draw, floored: marginal powers are integers."""
        return floor(self.power_cap - self.fleet.gamma_total)


def run_working_set(fleet: Fleet, total_work: Fraction, working_set: Iterable[int]) -> Schedule:
    """All chosen machines run the same span and finish together."""
    ids = sorted(set(working_set))
    speed = sum(fleet[i].speed for i in ids)
    t = Fraction(total_work) / speed
    return Schedule.from_times(fleet, {i: t for i in ids})


def min_makespan_under_power(problem: PowerProblem, epsilon=Fraction(1, 4)) -> SolveOutcome:
    """Fastest working set within the cap, via the rounded knapsack DP.

    The returned speed is at least ``(1 - eps)`` of the optimum, hence the
    makespan is at most ``OPT / (1 - eps)``.
    """
    epsilon = as_fraction(epsilon)
    fleet = problem.fleet
    pairs = [(mc.speed, mc.marginal_power) for mc in fleet]
    bound = 1 / (1 - epsilon)
    guarantee = Guarantee(bound_ratio=bound, epsilon=epsilon, exact=False)
    res = fptas_max_speed(pairs, max(problem.margin, 0), epsilon)
    diagnostics = {
        "margin": problem.margin,
        "rounded_table_size": res.rounded_table_size,
        "achieved_speed": res.achieved_speed,
    }
    if not res.subset:
        return SolveOutcome.infeasible(
            "power-makespan",
            guarantee,
            {"reason": "no machine fits within the power margin", "margin": problem.margin},
            **diagnostics,
        )
    schedule = run_working_set(fleet, problem.total_work, res.subset)
    return SolveOutcome(
        "ok",
        "power-makespan",
        schedule,
        problem.total_work / res.achieved_speed,
        guarantee,
        diagnostics,
    )


def _set_energy_rate(fleet: Fleet, ids) -> Fraction:
    """Joules per unit of work when ``ids`` run together."""
    return Fraction(
        fleet.gamma_total + sum(fleet[i].marginal_power for i in ids),
        sum(fleet[i].speed for i in ids),
    )


def min_energy_under_power(problem: PowerProblem, mode: str = "corrected") -> SolveOutcome:
    """Greedy working set for least energy under the cap (factor 2).

    The first machine maximises ``speed / ((d + idle total) * d)`` among
    those that fit; the rest are scanned by ``speed / d**2``.  A candidate
    that fits the remaining margin joins when it lowers the energy per unit
    of work (``corrected``) or, in ``paper-verbatim`` mode, when the
    current rate is at most the candidate's own rate.  A candidate that
    only fits on its own replaces the set when its efficiency beats the
    summed efficiency of the set.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    fleet = problem.fleet
    gamma = fleet.gamma_total
    cap = problem.power_cap
    limit = cap - gamma
    guarantee = Guarantee(bound_ratio=Fraction(2), exact=False)

    eligible = [mc for mc in fleet if mc.marginal_power <= limit]
    if not eligible:
        return SolveOutcome.infeasible(
            "power-energy",
            guarantee,
            {"reason": "no machine fits within the power margin", "margin": problem.margin},
        )

    first = max(
        eligible,
        key=lambda mc: (Fraction(mc.speed, (mc.marginal_power + gamma) * mc.marginal_power), -mc.id),
    )
    rest = sorted(
        (mc for mc in fleet if mc.id != first.id),
        key=lambda mc: (-Fraction(mc.speed, mc.marginal_power**2), mc.id),
    )

    chosen = [first.id]
    draw = gamma + first.marginal_power
    added = replaced = 0
    for mc in rest:
        if draw >= cap:
            break
        room = cap - draw
        d = mc.marginal_power
        own_rate = Fraction(d, mc.speed)
        set_rate = _set_energy_rate(fleet, chosen)
        if d <= room:
            joins = own_rate <= set_rate if mode == "corrected" else set_rate <= own_rate
            if joins:
                chosen.append(mc.id)
                added += 1
        elif d <= limit:
            summed = sum(fleet[i].efficiency for i in chosen)
            if mc.efficiency > summed:
                chosen = [mc.id]
                replaced += 1
        draw = gamma + sum(fleet[i].marginal_power for i in chosen)

    schedule = run_working_set(fleet, problem.total_work, chosen)
    objective = _set_energy_rate(fleet, chosen) * problem.total_work
    single = len(eligible) == 1
    return SolveOutcome(
        "ok",
        "power-energy",
        schedule,
        objective,
        Guarantee(bound_ratio=Fraction(1), exact=True) if single else guarantee,
        {"mode": mode, "first_pick": first.id, "added": added, "replaced": replaced},
    )
