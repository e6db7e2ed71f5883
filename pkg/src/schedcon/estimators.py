"""Estimator-style wrappers so the solvers plug into sklearn tooling
(``get_params``/``set_params``/``clone``).

``fit`` takes a fleet, a job spec and a constraint instead of arrays; it
stores the solver outcome.  ``predict`` schedules a new workload on the
fitted fleet under the same constraint.
"""

from __future__ import annotations

from fractions import Fraction

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .dispatch import problem_name, solve
from .model import (
    Constraint,
    ConstraintKind,
    Fleet,
    JobSpec,
    Schedule,
    SolveOutcome,
    StructureError,
    validate_instance,
)
from .power import MODES, run_working_set

__all__ = [
    "ScheduleEstimator",
    "PowerCappedMakespan",
    "PowerCappedEnergy",
    "EnergyBudgetMakespan",
    "MakespanBudgetEnergy",
    "ConstrainedScheduler",
    "check_instance",
]


def check_instance(fleet, jobs, constraint) -> tuple[Fleet, JobSpec, Constraint]:
    """Type and structure checks shared by every ``fit``."""
    if not isinstance(fleet, Fleet):
        raise TypeError(f"fleet must be a Fleet, got {type(fleet).__name__}")
    if not isinstance(jobs, JobSpec):
        raise TypeError(f"jobs must be a JobSpec, got {type(jobs).__name__}")
    if not isinstance(constraint, Constraint):
        raise TypeError(f"constraint must be a Constraint, got {type(constraint).__name__}")
    hard = [f for f in validate_instance(fleet, jobs, constraint).errors
            if f.code in ("unsupported", "zero-marginal-power", "bad-constraint")]
    if hard:
        raise StructureError("; ".join(f.message for f in hard))
    return fleet, jobs, constraint


class ScheduleEstimator(BaseEstimator):
    """Shared fit/predict plumbing; subclasses pin the problem."""

    _kind: ConstraintKind | None = None
    _objective: str | None = None

    def _solve(self, fleet, jobs, constraint) -> SolveOutcome:
        params = self.get_params()
        return solve(
            fleet,
            jobs,
            constraint,
            objective=params.get("objective", self._objective),
            epsilon=params.get("epsilon", Fraction(1, 4)),
            mode=params.get("mode", "corrected"),
        )

    def fit(self, fleet, jobs, constraint):
        fleet, jobs, constraint = check_instance(fleet, jobs, constraint)
        if self._kind is not None and constraint.kind is not self._kind:
            raise StructureError(
                f"{type(self).__name__} expects a {self._kind.value} constraint, got {constraint.kind.value}"
            )
        self.fleet_ = fleet
        self.constraint_ = constraint
        self.problem_ = problem_name(jobs, constraint, getattr(self, "objective", self._objective))
        self.outcome_ = self._solve(fleet, jobs, constraint)
        self.feasible_ = self.outcome_.feasible
        self.schedule_ = self.outcome_.schedule
        self.objective_ = self.outcome_.objective
        self.working_set_ = self.schedule_.working_set if self.feasible_ else frozenset()
        return self

    def predict(self, jobs: JobSpec) -> Schedule | None:
        """Schedule ``jobs`` on the fitted fleet; None if infeasible."""
        check_is_fitted(self, "outcome_")
        if not isinstance(jobs, JobSpec):
            raise TypeError(f"jobs must be a JobSpec, got {type(jobs).__name__}")
        if self.constraint_.kind is ConstraintKind.POWER and self.feasible_:
            # the working set depends only on the cap, never on the work
            return run_working_set(self.fleet_, jobs.total_work, self.working_set_)
        out = self._solve(self.fleet_, jobs, self.constraint_)
        return out.schedule


class PowerCappedMakespan(ScheduleEstimator):
    _kind = ConstraintKind.POWER
    _objective = "makespan"

    def __init__(self, epsilon=Fraction(1, 4)):
        self.epsilon = epsilon


class PowerCappedEnergy(ScheduleEstimator):
    _kind = ConstraintKind.POWER
    _objective = "energy"

    def __init__(self, mode="corrected"):
        self.mode = mode

    def fit(self, fleet, jobs, constraint):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        return super().fit(fleet, jobs, constraint)


class EnergyBudgetMakespan(ScheduleEstimator):
    _kind = ConstraintKind.ENERGY

    def __init__(self, epsilon=Fraction(1, 10)):
        self.epsilon = epsilon


class MakespanBudgetEnergy(ScheduleEstimator):
    _kind = ConstraintKind.MAKESPAN


class ConstrainedScheduler(ScheduleEstimator):
    """Picks the solver from the constraint and job kind at fit time."""

    def __init__(self, objective=None, epsilon=Fraction(1, 4), mode="corrected"):
        self.objective = objective
        self.epsilon = epsilon
        self.mode = mode
