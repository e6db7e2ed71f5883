"""Combinatorial kernels shared by the solvers.

* a knapsack DP that, for every reachable total speed, finds the machine
  subset of least marginal power;
* the rounding wrapper turning it into an FPTAS;
* a trimmed-list approximation for subset sum;
* LPT list scheduling on machines of unequal speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import floor
from typing import NamedTuple, Sequence

import numpy as np

from .model import Machine, Schedule, Assignment, StructureError, as_fraction

__all__ = [
    "INFEASIBLE",
    "DpTable",
    "RoundedSpeeds",
    "FptasResult",
    "dp_min_power",
    "best_subset_under_power",
    "round_speeds",
    "fptas_max_speed",
    "subset_sum_max_work",
    "lpt_assign",
]

INFEASIBLE = None
_BIG = np.iinfo(np.int64).max // 4


@dataclass(frozen=True)
class DpTable:
    """``values[i-1, v]`` is the least marginal power of a subset of the
    first ``i`` machines whose speeds sum to exactly ``v`` (``_BIG`` when
    no subset does).  Column 0 is the empty subset."""

    speeds: tuple[int, ...]
    powers: tuple[int, ...]
    values: np.ndarray
    choice: np.ndarray

    @property
    def m(self) -> int:
        return len(self.speeds)

    @property
    def max_speed_total(self) -> int:
        return self.values.shape[1] - 1

    @property
    def size(self) -> int:
        """Table extent ``m x mV`` (the empty-subset column is not counted)."""
        return self.m * self.max_speed_total

    def power(self, i: int, v: int) -> int | None:
        """Least power for exact speed ``v`` using machines ``1..i``."""
        if not 1 <= i <= self.m:
            raise IndexError(f"row {i} outside 1..{self.m}")
        if not 0 <= v <= self.max_speed_total:
            return INFEASIBLE
        x = int(self.values[i - 1, v])
        return INFEASIBLE if x >= _BIG else x

    def subset_for(self, v: int) -> frozenset[int]:
        """Walk the choice marks back from ``(m, v)``."""
        chosen = []
        for i in range(self.m, 0, -1):
            if self.choice[i - 1, v]:
                chosen.append(i - 1)
                v -= self.speeds[i - 1]
        if v != 0:
            raise AssertionError("inconsistent choice table")
        return frozenset(chosen)


def dp_min_power(machines: Sequence[tuple[int, int]]) -> DpTable:
    """Fill the min-power table for ``(speed, marginal_power)`` pairs.

    A machine may be taken when its speed is at most the target speed, so
    a single machine can realise its own speed exactly.
    """
    if not machines:
        raise StructureError("dp_min_power needs at least one machine")
    speeds = tuple(int(s) for s, _ in machines)
    powers = tuple(int(d) for _, d in machines)
    if any(s < 0 for s in speeds) or any(d < 0 for d in powers):
        raise StructureError("speeds and powers must be non-negative")
    m = len(speeds)
    width = m * max(speeds) + 1
    values = np.full((m, width), _BIG, dtype=np.int64)
    choice = np.zeros((m, width), dtype=bool)

    prev = np.full(width, _BIG, dtype=np.int64)
    prev[0] = 0
    for i, (s, d) in enumerate(zip(speeds, powers)):
        row = prev.copy()
        if s == 0:
            take = prev + d
            better = take < row
        else:
            take = np.full(width, _BIG, dtype=np.int64)
            take[s:] = prev[:-s] + d
            better = take < row
        row[better] = take[better]
        row[row > _BIG] = _BIG
        values[i] = row
        choice[i] = better
        prev = row
    return DpTable(speeds, powers, values, choice)


def best_subset_under_power(table: DpTable, power_cap_margin: int) -> tuple[int, frozenset[int]]:
    """Largest total speed whose least power fits the margin, with a witness."""
    last = table.values[-1]
    ok = np.flatnonzero(last <= power_cap_margin)
    v = int(ok[-1]) if ok.size else 0
    if v == 0:
        return 0, frozenset()
    return v, table.subset_for(v)


class RoundedSpeeds(NamedTuple):
    scale: Fraction
    rounded: tuple[int, ...]


def round_speeds(speeds: Sequence[int], epsilon) -> RoundedSpeeds:
    """Drop low-order precision: ``floor(speed / K)`` with ``K = eps*V/m``."""
    epsilon = as_fraction(epsilon)
    m = len(speeds)
    scale = epsilon * max(speeds) / m
    return RoundedSpeeds(scale, tuple(floor(Fraction(s) / scale) for s in speeds))


class FptasResult(NamedTuple):
    subset: frozenset[int]
    achieved_speed: int
    rounded_table_size: int


def fptas_max_speed(machines: Sequence[tuple[int, int]], margin: int, epsilon) -> FptasResult:
    """Machine subset within ``margin`` whose true speed is at least
    ``(1 - epsilon)`` times the best possible."""
    epsilon = as_fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if not machines:
        raise StructureError("fptas_max_speed needs at least one machine")
    # machines that cannot fit even alone never enter the rounding: V must
    # be a speed some feasible set reaches, or the guarantee breaks
    fits = [i for i, (_, d) in enumerate(machines) if d <= margin]
    if not fits:
        return FptasResult(frozenset(), 0, 0)
    speeds = [machines[i][0] for i in fits]
    rounded = round_speeds(speeds, epsilon).rounded
    table = dp_min_power([(r, machines[i][1]) for r, i in zip(rounded, fits)])
    _, local = best_subset_under_power(table, margin)
    subset = frozenset(fits[k] for k in local)
    achieved = sum(machines[i][0] for i in subset)
    return FptasResult(subset, achieved, table.size)


def subset_sum_max_work(weights: Sequence[int], work_capacity, epsilon) -> tuple[tuple[int, ...], int]:
    """Subset of job indices with total at most ``work_capacity`` and at
    least ``(1 - epsilon)`` of the best such total.

    Keeps a sorted list of reachable sums; after merging each weight, any
    sum within a factor ``1 + epsilon/(2n)`` of the last kept sum is
    dropped, as are sums over capacity.
    """
    epsilon = as_fraction(epsilon)
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    capacity = as_fraction(work_capacity)
    n = len(weights)
    if n == 0 or capacity < 0:
        return (), 0
    delta = epsilon / (2 * n)
    # each entry: (sum, chosen indices)
    sums: list[tuple[int, tuple[int, ...]]] = [(0, ())]
    for j, w in enumerate(weights):
        merged = sorted(
            sums + [(s + w, idx + (j,)) for s, idx in sums if s + w <= capacity],
            key=lambda e: e[0],
        )
        trimmed = [merged[0]]
        for entry in merged[1:]:
            if entry[0] > trimmed[-1][0] * (1 + delta):
                trimmed.append(entry)
        sums = trimmed
    total, chosen = max(sums, key=lambda e: e[0])
    return tuple(sorted(chosen)), total


def lpt_assign(weights: Sequence[int], machines: Sequence[Machine]) -> Schedule:
    """Longest job first, each onto the machine whose current completion
    time is smallest (earlier position wins ties).

    The schedule covers exactly the machines given.
    """
    if not machines:
        raise StructureError("lpt_assign needs at least one machine")
    order = sorted(range(len(weights)), key=lambda j: (-weights[j], j))
    finish = [Fraction(0)] * len(machines)
    loads = [0] * len(machines)
    jobs: list[list[int]] = [[] for _ in machines]
    for j in order:
        k = min(range(len(machines)), key=lambda l: (finish[l], l))
        loads[k] += weights[j]
        finish[k] = Fraction(loads[k], machines[k].speed)
        jobs[k].append(j)
    return Schedule(
        tuple(
            Assignment(mc.id, Fraction(loads[k]), finish[k], tuple(sorted(jobs[k])))
            for k, mc in enumerate(machines)
        )
    )
