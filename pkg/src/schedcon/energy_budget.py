"""Shortest makespan that fits within an energy budget."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .kernels import lpt_assign, subset_sum_max_work
from .model import (
    Assignment,
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

__all__ = [
    "EnergyBudgetProblem",
    "max_divisible_work",
    "min_makespan_divisible",
    "min_makespan_nondivisible",
    "LPT_BOUND",
]

LPT_BOUND = Fraction(19, 12)


@dataclass(frozen=True)
class EnergyBudgetProblem:
    fleet: Fleet
    jobs: JobSpec
    energy_budget: Fraction

    def __post_init__(self):
        budget = as_fraction(self.energy_budget)
        if budget <= 0:
            raise StructureError(f"energy budget must be positive, got {budget}")
        object.__setattr__(self, "energy_budget", budget)

    @classmethod
    def from_instance(cls, fleet: Fleet, jobs: JobSpec, constraint: Constraint):
        if constraint.kind is not ConstraintKind.ENERGY:
            raise StructureError(f"expected an energy budget, got {constraint.kind.value}")
        return cls(fleet, jobs, constraint.value)


def _work_within(order, span: Fraction, joules: Fraction) -> Fraction:
    """Most work doable in ``span`` seconds with ``joules`` of marginal
    energy, filling machines best-efficiency first."""
    work = Fraction(0)
    for mc in order:
        if joules <= 0:
            break
        t = min(span, joules / mc.marginal_power)
        work += t * mc.speed
        joules -= t * mc.marginal_power
    return work


def max_divisible_work(fleet: Fleet, budget) -> tuple[Fraction, Fraction]:
    """Peak of the work-versus-makespan curve under ``budget`` joules.

    The curve is concave and piecewise linear; its kinks sit where the
    budget exactly covers the idle draw plus the first ``j`` machines
    running the whole span.  Returns ``(peak work, makespan at the peak)``.
    """
    budget = as_fraction(budget)
    order = fleet.by_efficiency()
    gamma = fleet.gamma_total
    best = (Fraction(0), Fraction(0))
    cum_d = 0
    for mc in order:
        cum_d += mc.marginal_power
        span = budget / (gamma + cum_d)
        work = _work_within(order, span, budget - gamma * span)
        if work > best[0]:
            best = (work, span)
    return best


def min_makespan_divisible(problem: EnergyBudgetProblem) -> SolveOutcome:
    """Exact minimum makespan for divisible work under an energy budget.

    With machines in efficiency order, an optimal schedule runs a prefix
    for the whole makespan and spends the leftover energy on the next
    machine.  Each prefix length gives one linear equation in the makespan;
    the smallest root whose witness respects every cap is optimal.
    """
    fleet, budget = problem.fleet, problem.energy_budget
    if not problem.jobs.is_divisible:
        raise StructureError("min_makespan_divisible takes divisible jobs")
    work = problem.jobs.total_work
    gamma = fleet.gamma_total
    order = fleet.by_efficiency()
    exact = Guarantee(bound_ratio=Fraction(1), exact=True)

    best = None  # (span, number of full machines, partial time)
    cum_v = cum_d = 0
    for k, nxt in enumerate(order):
        eta = nxt.efficiency
        slope = cum_v - eta * (gamma + cum_d)
        if slope != 0:
            span = (work - eta * budget) / slope
            if span > 0:
                partial = (budget - (gamma + cum_d) * span) / nxt.marginal_power
                if 0 <= partial <= span and (best is None or span < best[0]):
                    best = (span, k, partial)
        cum_v += nxt.speed
        cum_d += nxt.marginal_power
        span = work / cum_v
        if (gamma + cum_d) * span <= budget and (best is None or span < best[0]):
            best = (span, k + 1, None)

    if best is None:
        peak, at = max_divisible_work(fleet, budget)
        return SolveOutcome.infeasible(
            "energy-makespan-divisible",
            exact,
            {
                "reason": "energy budget cannot complete the work",
                "max_work": peak,
                "at_makespan": at,
                "required_work": work,
            },
        )

    span, full, partial = best
    times = {mc.id: span for mc in order[:full]}
    if partial is not None:
        times[order[full].id] = partial
    schedule = Schedule.from_times(fleet, times)
    return SolveOutcome(
        "ok",
        "energy-makespan-divisible",
        schedule,
        makespan(schedule),
        exact,
        {"full_machines": full, "partial_machine": None if partial is None else order[full].id,
         "energy": energy(schedule, fleet)},
    )


def min_makespan_nondivisible(problem: EnergyBudgetProblem, epsilon=Fraction(1, 10)) -> SolveOutcome:
    """LPT over efficiency-ordered prefixes, topped up by subset sum.

    Every prefix of the efficiency order gets all jobs by LPT; the longest
    prefix within budget is kept.  The next machine then takes a near-maximal
    job subset that its share of the leftover energy (and the prefix
    makespan) can carry, and LPT re-spreads the remaining jobs over the
    prefix.  The top-up is kept only if it stays within budget and does not
    lengthen the makespan.
    """
    epsilon = as_fraction(epsilon)
    fleet, budget = problem.fleet, problem.energy_budget
    jobs = problem.jobs
    if jobs.is_divisible:
        raise StructureError("min_makespan_nondivisible takes discrete jobs")
    weights = jobs.discrete_weights
    order = fleet.by_efficiency()
    guarantee = Guarantee(bound_ratio=LPT_BOUND + epsilon, epsilon=epsilon, exact=False)

    prefix_energy = {}
    prefix_sched = {}
    for r in range(1, len(order) + 1):
        s = lpt_assign(weights, order[:r]).padded(fleet)
        prefix_sched[r] = s
        prefix_energy[r] = energy(s, fleet)
    feasible = [r for r, e in prefix_energy.items() if e <= budget]
    if not feasible:
        return SolveOutcome.infeasible(
            "energy-makespan-discrete",
            guarantee,
            {
                "reason": "no efficiency-ordered prefix meets the energy budget",
                "min_prefix_energy": min(prefix_energy.values()),
                "budget": budget,
            },
        )
    r = max(feasible)
    chosen = prefix_sched[r]
    diagnostics = {"prefix": r, "prefix_energies": dict(prefix_energy), "topped_up": False}

    if r < len(order):
        nxt = order[r]
        leftover = budget - prefix_energy[r]
        capacity = min(leftover * nxt.efficiency, makespan(chosen) * nxt.speed)
        subset, total = subset_sum_max_work(weights, capacity, epsilon)
        if subset:
            rest = [j for j in range(len(weights)) if j not in set(subset)]
            rest_sched = lpt_assign([weights[j] for j in rest], order[:r])
            # map local job indices back to the original list
            relabelled = Schedule(
                tuple(
                    Assignment(a.machine_id, a.work, a.time, tuple(sorted(rest[j] for j in a.jobs)))
                    for a in rest_sched.assignments
                )
            )
            top = Schedule.from_job_lists(fleet, weights, {nxt.id: subset})
            top = Schedule(tuple(a for a in top.assignments if a.machine_id == nxt.id))
            candidate = relabelled.merged(top).padded(fleet)
            e = energy(candidate, fleet)
            diagnostics["top_up_energy"] = e
            if e <= budget and makespan(candidate) <= makespan(chosen):
                chosen = candidate
                diagnostics["topped_up"] = True
                diagnostics["top_up_machine"] = nxt.id
                diagnostics["top_up_work"] = total

    diagnostics["energy"] = energy(chosen, fleet)
    return SolveOutcome(
        "ok",
        "energy-makespan-discrete",
        chosen,
        makespan(chosen),
        guarantee,
        diagnostics,
    )
