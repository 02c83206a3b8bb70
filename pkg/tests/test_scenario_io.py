import numpy as np
import pytest

from chebalance.contacts import Mode
from chebalance.harness import run
from chebalance.scenario_io import ParseError, dumps, load, loads

from conftest import DATA, FOUR_CONTACT

HERE = DATA.parents[2] / "tests" / "data"

MINIMAL = """\
robot
  mass 40
contact F
  position 0 0 0
"""


def test_minimal_defaults():
    sc = loads(MINIMAL)
    assert sc.mass == 40 and sc.gravity == 9.81
    c = sc.contact("F")
    assert c.mode is Mode.FIXED
    np.testing.assert_array_equal(c.rotation, np.eye(3))
    assert sc.states == []


def test_scenario_parses(scenario):
    sc = scenario
    assert [s.name for s in sc.states] == ["step_up", "hand_contacts", "co_wipe", "mode_swap", "shuffle", "release"]
    assert sc.total_ticks == 1200
    assert sc.sliding_ids() == ["LF", "LH", "RH"]
    assert sc.estimator.initial_guess == 0.3
    wipe = sc.states[2]
    assert wipe.force_targets == {"RH": 10.0, "LH": 15.0}
    assert wipe.sliding_paths["RH"].kind == "circle"
    # contacts a state does not list are inactive there
    assert "LH" not in sc.states[0].contact_modes


def test_four_contact_stance_parses():
    sc = load(FOUR_CONTACT)
    lf = sc.contact("LF")
    assert lf.mode is Mode.SLIDING and lf.fz_des == 150.0 and lf.mu_dynamic == 0.4
    assert np.allclose(lf.rotation @ [0, 0, 1], [np.sin(-0.3490658503988659), 0, np.cos(0.3490658503988659)])


@pytest.mark.parametrize("text,line,field", [
    (MINIMAL + "  mu abc\n", 5, "mu"),
    (MINIMAL + "  position 0 0\n", 5, "position"),
    (MINIMAL + "  colour red\n", 5, "colour"),
    (MINIMAL + "  mode flying\n", 5, "mode"),
    (MINIMAL + "  rotation 1 0 0 0 1 0 0 0 -1\n", 5, "rotation"),
    (MINIMAL + "state s\n  duration 2.5\n", 6, "duration"),
    (MINIMAL + "state s\n  duration 5\n  path F spiral 1 2\n", 7, "path"),
    ("robot\n  weight 40\n", 2, "weight"),
    ("planet\n", 1, "planet"),
    ("  mass 40\n", 1, "mass"),
])
def test_errors_name_line_and_field(text, line, field):
    with pytest.raises(ParseError) as info:
        loads(text)
    assert info.value.line == line
    assert info.value.field == field
    assert f"line {line}: field '{field}'" in str(info.value)


def test_missing_mass_and_contacts():
    with pytest.raises(ParseError):
        loads("robot\n  gravity 9.81\ncontact F\n  position 0 0 0\n")
    with pytest.raises(ParseError):
        loads("robot\n  mass 40\n")


def test_state_with_unknown_contact_rejected():
    with pytest.raises(ParseError):
        loads(MINIMAL + "state s\n  duration 5\n  mode G fixed\n")


def test_round_trip_is_exact(scenario):
    text = dumps(scenario)
    again = loads(text)
    assert dumps(again) == text
    for a, b in zip(scenario.contacts, again.contacts):
        np.testing.assert_array_equal(a.rotation, b.rotation)
        np.testing.assert_array_equal(a.position, b.position)
    assert [s.name for s in again.states] == [s.name for s in scenario.states]


def test_round_trip_runs_identically():
    sc = load(HERE / "short_scenario.txt")
    rows_a, _ = run(sc)
    rows_b, _ = run(loads(dumps(sc)))
    for a, b in zip(rows_a, rows_b):
        assert np.array_equal(a.com, b.com)
        assert a.mu_filt == b.mu_filt
