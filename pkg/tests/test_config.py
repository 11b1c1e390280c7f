import json

import pytest

from invpers import FasConfig, HomologyConfig, generate_space
from invpers.errors import InputError, PreconditionError, ValidationError
from invpers.fas import schedule_invariants


def test_defaults_pick_preset_for_generators():
    X = generate_space("triadic:3")
    fas = FasConfig().build(X, ("triadic", 3))
    assert [len(lv.members) for lv in fas.levels] == [1, 4, 28]


def test_defaults_pick_disjoint_balls_for_ultrametric():
    X = generate_space("cantor:3")
    fas = FasConfig().build(X)
    assert len(fas.levels[-1].members) == 8


def test_explicit_and_auto():
    X = generate_space("triadic:2")
    fas = FasConfig(schedule="explicit:2,0.3", strategy="all").build(X)
    assert fas.epsilons == [2.0, 0.3]
    fas = FasConfig(schedule="auto:0.5", seed=3).build(X)
    assert all(schedule_invariants(fas).values())


@pytest.mark.parametrize("schedule", ["weird", "auto:x", "explicit:1,a"])
def test_bad_schedules(schedule):
    with pytest.raises(ValidationError):
        FasConfig(schedule=schedule).build(generate_space("triadic:2"))


def test_preset_needs_generator():
    with pytest.raises(ValidationError):
        FasConfig(schedule="preset").build(generate_space("cantor:2"))


def test_overrides():
    assert FasConfig.parse_overrides("2=0.1, 3=0.01") == {2: 0.1, 3: 0.01}
    assert FasConfig.parse_overrides(None) == {}
    with pytest.raises(PreconditionError):
        FasConfig.parse_overrides("2:0.1")
    fas = FasConfig(gamma_override={2: 0.16}).build(generate_space("triadic:3"), ("triadic", 3))
    assert fas.level(2).effective_gamma == 0.16


def test_subset_file(tmp_path):
    X = generate_space("triadic:2")
    bad = tmp_path / "s.json"
    bad.write_text(json.dumps([["0"], ["nope"]]))
    with pytest.raises(InputError):
        FasConfig(schedule="explicit:2,0.34", strategy=f"file:{bad}").build(X)


def test_round_trip_to_dict():
    cfg = FasConfig(schedule="auto", gamma_override={3: 0.5})
    d = cfg.to_dict()
    assert json.loads(json.dumps(d))["gamma_override"] == {"3": 0.5}
    assert HomologyConfig(dims=(1,), level_range=(2, 3)).to_dict()["level_range"] == (2, 3)
