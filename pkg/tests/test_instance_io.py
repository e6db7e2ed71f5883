import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import F3_RATINGS
from strategies import fleets, rationals
from schedcon.dispatch import solve
from schedcon.instance_io import (
    InstanceError,
    emit_instance,
    emit_outcome,
    format_rational,
    parse_instance,
    parse_outcome,
    schedule_from_dict,
    schedule_to_dict,
)
from schedcon.model import Constraint, ConstraintKind, JobSpec, Schedule


def f3_doc(**overrides):
    doc = {
        "version": 1,
        "machines": [
            {"id": i, "working_power": mu, "idle_power": g, "speed": v}
            for i, (mu, g, v) in enumerate(F3_RATINGS)
        ],
        "jobs": {"divisible": {"total_work": "12"}},
        "constraint": {"kind": "power", "value": "16"},
    }
    doc.update(overrides)
    return doc


def test_parse_f3():
    fleet, jobs, constraint = parse_instance(json.dumps(f3_doc()).encode())
    assert fleet.gamma_total == 6
    assert jobs.total_work == 12
    assert constraint == Constraint.power_cap(16)


def test_gamma_total_is_recomputed():
    doc = f3_doc()
    doc["gamma_total"] = 99
    with pytest.raises(InstanceError, match="unknown fields"):
        parse_instance(json.dumps(doc))


def test_idle_not_below_working_names_machine():
    doc = f3_doc()
    doc["machines"][1]["idle_power"] = 8
    with pytest.raises(InstanceError, match=r"machines\[1\] \(machine id 1\)"):
        parse_instance(json.dumps(doc))


def test_rational_string_forms():
    fleet, jobs, constraint = parse_instance(json.dumps(f3_doc(constraint={"kind": "energy", "value": "24/1"})))
    assert constraint.value == 24
    assert format_rational(Fraction(48, 2)) == "24"
    assert format_rational(Fraction(6, 4)) == "3/2"


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda d: d.update(version=2), "version"),
        (lambda d: d["constraint"].update(kind="speed"), "constraint.kind"),
        (lambda d: d["constraint"].update(value=0.5), "rational string"),
        (lambda d: d["constraint"].update(value="1/0"), "not a rational"),
        (lambda d: d.update(machines=[]), "empty"),
        (lambda d: d["machines"][0].update(speed="5"), "integer"),
        (lambda d: d.update(jobs={"discrete": {"weights": [1, 0]}}), "jobs"),
        (lambda d: d.update(jobs={}), "exactly one"),
        (lambda d: d.pop("jobs"), "missing"),
    ],
)
def test_rejections(mutate, message):
    doc = f3_doc()
    mutate(doc)
    with pytest.raises(InstanceError, match=message):
        parse_instance(json.dumps(doc))


def test_malformed_json():
    with pytest.raises(InstanceError, match="malformed JSON"):
        parse_instance(b"{not json")


def test_outcome_emission(f3):
    out = solve(f3, JobSpec.divisible(12), Constraint.power_cap(16), "makespan")
    doc = json.loads(emit_outcome(out))
    assert doc["objective"] == "2"
    assert doc["schedule"]["working_set"] == [1, 2]
    assert emit_outcome(out) == emit_outcome(out)
    back = parse_outcome(emit_outcome(out))
    assert back.schedule == out.schedule and back.objective == out.objective


def test_infeasible_outcome_emission(f3):
    out = solve(f3, JobSpec.divisible(12), Constraint.energy_budget(24))
    doc = json.loads(emit_outcome(out))
    assert doc["status"] == "infeasible"
    assert doc["certificate"]["max_work"] == "216/19"
    assert "schedule" not in doc


def test_schedule_working_set_must_match(f3):
    doc = schedule_to_dict(Schedule.from_work(f3, {1: 8, 2: 4}))
    doc["working_set"] = [0]
    with pytest.raises(InstanceError):
        schedule_from_dict(doc)


# -- round trip -----------------------------------------------------------------


@given(
    fleets(),
    st.one_of(
        st.builds(JobSpec.divisible, rationals()),
        st.builds(JobSpec.discrete, st.lists(st.integers(1, 100), min_size=1, max_size=8)),
    ),
    st.sampled_from(["power", "energy", "makespan"]),
    rationals(),
)
def test_instance_round_trip(fleet, jobs, kind, value):
    c = Constraint(ConstraintKind(kind), value)
    data = emit_instance(fleet, jobs, c)
    assert parse_instance(data) == (fleet, jobs, c)
    assert emit_instance(*parse_instance(data)) == data
