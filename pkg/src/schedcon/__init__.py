"""Scheduling divisible and discrete work on heterogeneous machines under
a power cap, an energy budget or a makespan budget, in exact arithmetic."""

from .dispatch import PROBLEMS, solve
from .estimators import (
    ConstrainedScheduler,
    EnergyBudgetMakespan,
    MakespanBudgetEnergy,
    PowerCappedEnergy,
    PowerCappedMakespan,
)
from .instance_io import Instance, emit_instance, emit_outcome, parse_instance
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
    energy,
    makespan,
    power_draw,
    validate_instance,
    verify_schedule,
)

__version__ = "0.1.0"

__all__ = [
    "PROBLEMS",
    "solve",
    "ConstrainedScheduler",
    "EnergyBudgetMakespan",
    "MakespanBudgetEnergy",
    "PowerCappedEnergy",
    "PowerCappedMakespan",
    "Instance",
    "emit_instance",
    "emit_outcome",
    "parse_instance",
    "Assignment",
    "Constraint",
    "ConstraintKind",
    "Fleet",
    "Guarantee",
    "JobSpec",
    "Machine",
    "Schedule",
    "SolveOutcome",
    "StructureError",
    "energy",
    "makespan",
    "power_draw",
    "validate_instance",
    "verify_schedule",
]
