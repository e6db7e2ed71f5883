"""Brute-force and closed-form reference solvers.

Nothing here calls into the solver modules: each routine reaches its
answer by enumeration, by LP duality, or by direct simulation, so the
tests can use them to check the solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .model import (
    Constraint,
    ConstraintKind,
    Fleet,
    Schedule,
    as_fraction,
    makespan,
    energy,
)

__all__ = [
    "OracleSizeError",
    "OracleResult",
    "MAX_SUBSET_MACHINES",
    "MAX_ASSIGNMENTS",
    "exact_power_subset",
    "exact_assignment_enum",
    "min_feasible_machine_count",
    "max_work_at",
    "dual_min_T_divisible",
    "grid_min_T_divisible",
    "fractional_knapsack_min_energy",
    "continuous_min_energy_divisible",
    "step_simulation_energy",
]

MAX_SUBSET_MACHINES = 22
MAX_ASSIGNMENTS = 10**7
_TOL = 1e-9


class OracleSizeError(ValueError):
    """The instance is too large to enumerate."""


@dataclass(frozen=True)
class OracleResult:
    """``objective`` and ``witness`` are None when nothing is feasible."""

    objective: Fraction | None
    witness: Schedule | None
    search_space_size: int
    method: str
    extra: dict = field(default_factory=dict)


# -- power-capped subsets -----------------------------------------------------


def exact_power_subset(problem, objective: str = "makespan") -> OracleResult:
    """Every subset whose draw fits the cap; best makespan or energy.

    Ties keep the first subset in increasing bitmask order.
    """
    if objective not in ("makespan", "energy"):
        raise ValueError(f"objective must be makespan or energy, got {objective!r}")
    fleet = problem.fleet
    m = len(fleet)
    if m > MAX_SUBSET_MACHINES:
        raise OracleSizeError(f"{m} machines exceeds the subset enumeration limit {MAX_SUBSET_MACHINES}")
    gamma = fleet.gamma_total
    cap = problem.power_cap
    speeds = [mc.speed for mc in fleet]
    powers = [mc.marginal_power for mc in fleet]
    n_sub = 1 << m
    v_sum = [0] * n_sub
    d_sum = [0] * n_sub
    best_mask, best_num, best_den = 0, 0, 0
    for mask in range(1, n_sub):
        low = mask & -mask
        i = low.bit_length() - 1
        v_sum[mask] = v_sum[mask ^ low] + speeds[i]
        d_sum[mask] = d_sum[mask ^ low] + powers[i]
        if gamma + d_sum[mask] > cap:
            continue
        # per unit of work: makespan 1/sum(v), energy (gamma + sum(d))/sum(v)
        num = 1 if objective == "makespan" else gamma + d_sum[mask]
        den = v_sum[mask]
        if best_mask == 0 or num * best_den < best_num * den:
            best_mask, best_num, best_den = mask, num, den
    if best_mask == 0:
        return OracleResult(None, None, n_sub, "subset-enum")
    chosen = [i for i in range(m) if best_mask >> i & 1]
    t = problem.total_work / v_sum[best_mask]
    witness = Schedule.from_times(fleet, {i: t for i in chosen})
    value = Fraction(best_num, best_den) * problem.total_work
    return OracleResult(value, witness, n_sub, "subset-enum", {"subset": frozenset(chosen)})


# -- discrete assignments -------------------------------------------------------


def _check_space(m: int, n: int) -> int:
    size = m**n
    if size > MAX_ASSIGNMENTS:
        raise OracleSizeError(f"{m}^{n} = {size} assignments exceeds the limit {MAX_ASSIGNMENTS}")
    return size


def _all_loads(fleet: Fleet, weights: Sequence[int]) -> np.ndarray:
    """Machine loads for every job->machine map, in lexicographic order
    (job 0 is the most significant digit)."""
    m, n = len(fleet), len(weights)
    idx = np.arange(m**n, dtype=np.int64)
    loads = np.zeros((m**n, m), dtype=np.int64)
    for j, w in enumerate(weights):
        digit = (idx // m ** (n - 1 - j)) % m
        loads[np.arange(m**n), digit] += w
    return loads


def _row_map(k: int, m: int, n: int) -> list[int]:
    return [(k // m ** (n - 1 - j)) % m for j in range(n)]


def _exact_metrics(fleet: Fleet, loads_row) -> tuple[Fraction, Fraction]:
    times = [Fraction(int(x), mc.speed) for x, mc in zip(loads_row, fleet)]
    span = max(times)
    e = sum(t * mc.marginal_power for t, mc in zip(times, fleet)) + fleet.gamma_total * span
    return span, e


def _float_metrics(fleet: Fleet, loads: np.ndarray):
    speeds = np.array([mc.speed for mc in fleet], dtype=float)
    powers = np.array([mc.marginal_power for mc in fleet], dtype=float)
    times = loads / speeds
    span = times.max(axis=1)
    return span, times @ powers + fleet.gamma_total * span


def _feasible_rows(metric: np.ndarray, bound: Fraction, exact_metric) -> np.ndarray:
    """Rows with ``metric <= bound``; rows within float noise are settled exactly."""
    b = float(bound)
    tol = _TOL * max(1.0, abs(b))
    ok = metric <= b - tol
    unsure = np.flatnonzero(np.abs(metric - b) <= tol)
    for k in unsure:
        ok[k] = exact_metric(int(k)) <= bound
    return ok


def exact_assignment_enum(fleet: Fleet, weights: Sequence[int], constraint: Constraint) -> OracleResult:
    """All ``m**n`` job maps: least makespan under an energy budget, or
    least energy under a makespan budget.  Ties keep the first map in
    lexicographic order."""
    m, n = len(fleet), len(weights)
    size = _check_space(m, n)
    if constraint.kind is ConstraintKind.POWER:
        raise ValueError("assignment enumeration covers energy and makespan budgets only")
    loads = _all_loads(fleet, weights)
    span, en = _float_metrics(fleet, loads)

    def exact(k):
        return _exact_metrics(fleet, loads[k])

    if constraint.kind is ConstraintKind.ENERGY:
        ok = _feasible_rows(en, constraint.value, lambda k: exact(k)[1])
        objective, pick = span, 0
    else:
        ok = _feasible_rows(span, constraint.value, lambda k: exact(k)[0])
        objective, pick = en, 1
    rows = np.flatnonzero(ok)
    if rows.size == 0:
        return OracleResult(None, None, size, "assignment-enum")
    best_float = objective[rows].min()
    near = rows[objective[rows] <= best_float + _TOL * max(1.0, abs(best_float))]
    best_k, best_val = None, None
    for k in near:
        val = exact(int(k))[pick]
        if best_val is None or val < best_val:
            best_k, best_val = int(k), val
    mapping = _row_map(best_k, m, n)
    lists: dict[int, list[int]] = {}
    for j, i in enumerate(mapping):
        lists.setdefault(i, []).append(j)
    witness = Schedule.from_job_lists(fleet, weights, lists)
    return OracleResult(best_val, witness, size, "assignment-enum", {"assignment": tuple(mapping)})


def min_feasible_machine_count(fleet: Fleet, weights: Sequence[int], makespan_budget) -> int | None:
    """Fewest machines any job map needs to finish within the budget."""
    budget = as_fraction(makespan_budget)
    _check_space(len(fleet), len(weights))
    loads = _all_loads(fleet, weights)
    span, _ = _float_metrics(fleet, loads)
    ok = _feasible_rows(span, budget, lambda k: _exact_metrics(fleet, loads[k])[0])
    if not ok.any():
        return None
    return int((loads[ok] > 0).sum(axis=1).min())


# -- divisible work under an energy budget -------------------------------------


def _dual_lines(fleet: Fleet, budget: Fraction):
    """Lines ``(intercept, slope)`` in the makespan whose lower envelope is
    the most work doable within ``budget``.

    By LP duality the most work at makespan ``T`` is the minimum over
    ``lam >= 0`` of ``lam*(E - idle*T) + T*sum(max(0, v - lam*d))``, and the
    minimum is attained at ``lam = 0`` or at some machine's efficiency.
    """
    gamma = fleet.gamma_total
    lams = {Fraction(0)} | {Fraction(mc.speed, mc.marginal_power) for mc in fleet}
    lines = []
    for lam in sorted(lams):
        slope = sum(max(Fraction(0), mc.speed - lam * mc.marginal_power) for mc in fleet) - lam * gamma
        lines.append((lam * budget, slope))
    return lines


def max_work_at(fleet: Fleet, budget, span) -> Fraction | None:
    """Most divisible work finishing by ``span``; None if even idling
    overruns the budget."""
    budget, span = as_fraction(budget), as_fraction(span)
    if fleet.gamma_total * span > budget:
        return None
    return min(a + b * span for a, b in _dual_lines(fleet, budget))


def _vertex_times(fleet: Fleet, span: Fraction, joules: Fraction) -> dict[int, Fraction]:
    """A work-maximising time vector at fixed makespan and marginal energy,
    found by enumerating LP vertices (full machines plus at most one
    partial one)."""
    ids = [mc.id for mc in fleet]
    best, best_work = {}, Fraction(-1)
    for r in range(len(ids) + 1):
        for full in combinations(ids, r):
            used = sum(fleet[i].marginal_power for i in full) * span
            if used > joules:
                continue
            base = sum(fleet[i].speed for i in full) * span
            options = [(None, Fraction(0))]
            for p in ids:
                if p in full:
                    continue
                t = min(span, (joules - used) / fleet[p].marginal_power)
                options.append((p, t))
            for p, t in options:
                work = base + (fleet[p].speed * t if p is not None else 0)
                if work > best_work:
                    best_work = work
                    best = {i: span for i in full}
                    if p is not None and t > 0:
                        best[p] = t
    return best


def dual_min_T_divisible(problem) -> OracleResult:
    """Closed-form minimum makespan for divisible work under an energy budget.

    Feasible makespans form the interval cut out by ``line(T) >= W`` for
    every dual line together with ``idle*T <= E``.
    """
    fleet, budget = problem.fleet, problem.energy_budget
    work = problem.jobs.total_work
    lo, hi = Fraction(0), None
    if fleet.gamma_total > 0:
        hi = budget / fleet.gamma_total
    for a, b in _dual_lines(fleet, budget):
        if b > 0:
            lo = max(lo, (work - a) / b)
        elif b < 0:
            bound = (work - a) / b
            hi = bound if hi is None else min(hi, bound)
        elif a < work:
            return OracleResult(None, None, len(fleet) + 1, "fractional-knapsack")
    if lo <= 0 or (hi is not None and lo > hi):
        return OracleResult(None, None, len(fleet) + 1, "fractional-knapsack")
    times = _vertex_times(fleet, lo, budget - fleet.gamma_total * lo)
    got = sum(fleet[i].speed * t for i, t in times.items())
    if got != work:
        times = {i: t * work / got for i, t in times.items()}
    witness = Schedule.from_times(fleet, times)
    return OracleResult(lo, witness, len(fleet) + 1, "fractional-knapsack")


def grid_min_T_divisible(problem, resolution: int = 10_000, slack=0) -> OracleResult:
    """Sweep the makespan over ``[W/sum(v), W/min(v)] * (1 + slack)``.

    Returns the first grid makespan at which the work fits, with a witness,
    and always reports the best work seen on the grid in ``extra``.
    """
    fleet, budget = problem.fleet, problem.energy_budget
    work = problem.jobs.total_work
    slack = as_fraction(slack)
    lo = work / fleet.total_speed
    hi = work / min(mc.speed for mc in fleet) * (1 + slack)
    step = (hi - lo) / resolution
    if step == 0:
        step = lo / resolution

    lines = _dual_lines(fleet, budget)
    a = np.array([float(x) for x, _ in lines])[:, None]
    b = np.array([float(y) for _, y in lines])[:, None]
    ks = np.arange(resolution + 1)
    grid = float(lo) + ks * float(step)
    caps = (a + b * grid).min(axis=0)
    caps[fleet.gamma_total * grid > float(budget)] = -np.inf

    def exact_work(k):
        return max_work_at(fleet, budget, lo + k * step)

    peak_k = int(np.argmax(caps))
    peak_exact = exact_work(peak_k)
    extra = {
        "step": step,
        "peak_work": peak_exact if peak_exact is not None else Fraction(0),
        "peak_makespan": lo + peak_k * step,
    }

    tol = _TOL * max(1.0, float(work))
    maybe = np.flatnonzero(caps >= float(work) - tol)
    found = None
    for k in maybe:
        w = exact_work(int(k))
        if w is not None and w >= work:
            found = int(k)
            break
    if found is None:
        return OracleResult(None, None, resolution + 1, "grid-T", extra)
    span = lo + found * step
    times = _vertex_times(fleet, span, budget - fleet.gamma_total * span)
    got = sum(fleet[i].speed * t for i, t in times.items())
    times = {i: t * work / got for i, t in times.items()}
    witness = Schedule.from_times(fleet, times)
    return OracleResult(span, witness, resolution + 1, "grid-T", extra)


# -- divisible work under a makespan budget ------------------------------------


def _min_marginal_vertices(fleet: Fleet, work: Fraction, span: Fraction):
    """LP vertices of ``min sum(d*t)`` s.t. ``sum(v*t) = work, 0 <= t <= span``.

    Returns the best vertex by (marginal energy, latest finish), ties to the
    first enumerated.
    """
    ids = [mc.id for mc in fleet]
    best = None
    for r in range(len(ids) + 1):
        for full in combinations(ids, r):
            base = sum(fleet[i].speed for i in full) * span
            if base > work:
                continue
            rest = work - base
            partials = [None] if rest == 0 else [p for p in ids if p not in full]
            for p in partials:
                times = {i: span for i in full}
                if p is not None:
                    t = rest / fleet[p].speed
                    if t > span:
                        continue
                    times[p] = t
                cost = sum(fleet[i].marginal_power * t for i, t in times.items())
                finish = max(times.values(), default=Fraction(0))
                key = (cost, finish)
                if best is None or key < best[0]:
                    best = (key, times)
    return best


def fractional_knapsack_min_energy(problem) -> OracleResult:
    """Fixed-budget reference: least marginal energy with every machine
    capped at the makespan budget, charged idle power over the witness's
    own makespan."""
    fleet, span = problem.fleet, problem.makespan_budget
    work = problem.jobs.total_work
    found = _min_marginal_vertices(fleet, work, span)
    size = (1 << len(fleet)) * (len(fleet) + 1)
    if found is None:
        return OracleResult(None, None, size, "fractional-knapsack")
    witness = Schedule.from_times(fleet, found[1])
    return OracleResult(energy(witness, fleet), witness, size, "fractional-knapsack",
                        {"marginal_energy": found[0][0]})


def continuous_min_energy_divisible(fleet: Fleet, total_work, makespan_budget=None) -> OracleResult:
    """Least energy over every makespan up to the budget (unbounded if None).

    Energy at makespan ``T`` is the least marginal energy with machines
    capped at ``T`` plus idle power times ``T``; this is convex and
    piecewise linear in ``T`` with kinks where efficiency-ordered prefixes
    exactly absorb the work.
    """
    work = as_fraction(total_work)
    lo = work / fleet.total_speed
    if makespan_budget is not None and as_fraction(makespan_budget) < lo:
        return OracleResult(None, None, 0, "fractional-knapsack")
    candidates = {lo}
    cum = 0
    for mc in sorted(fleet, key=lambda mc: -Fraction(mc.speed, mc.marginal_power)):
        cum += mc.speed
        candidates.add(work / cum)
    if makespan_budget is not None:
        limit = as_fraction(makespan_budget)
        candidates = {t for t in candidates if t <= limit} | {limit}
    best = None
    for span in sorted(candidates):
        found = _min_marginal_vertices(fleet, work, span)
        if found is None:
            continue
        witness = Schedule.from_times(fleet, found[1])
        e = energy(witness, fleet)
        if best is None or e < best[0]:
            best = (e, witness, span)
    if best is None:
        return OracleResult(None, None, len(candidates), "fractional-knapsack")
    return OracleResult(best[0], best[1], len(candidates), "fractional-knapsack",
                        {"makespan": makespan(best[1])})


# -- energy by simulation ------------------------------------------------------


def step_simulation_energy(schedule: Schedule, fleet: Fleet, steps: int) -> Fraction:
    """Integrate draw over ``steps`` equal slices of the makespan.

    A machine draws working power for a whole slice if it is still busy at
    the slice start, idle power otherwise.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    span = makespan(schedule)
    if span == 0:
        return Fraction(0)
    dt = span / steps
    busy = schedule.times()
    total = Fraction(0)
    for k in range(steps):
        start = k * dt
        draw = 0
        for mc in fleet:
            draw += mc.working_power if start < busy.get(mc.id, 0) else mc.idle_power
        total += draw * dt
    return total
