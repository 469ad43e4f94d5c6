import pytest

from pmetric.errors import ModelError
from pmetric.model import (
    EPSILON,
    SubDistribution,
    dirac,
    mix,
    parse_model,
    serialize,
)


def test_fig1_shape(fig1):
    assert len(fig1.states) == 11
    assert len(fig1.actions) == 4
    assert len(fig1.transitions) == 9


def test_successors_fig1(fig1):
    succ = fig1.successors("s", "a")
    assert len(succ) == 1
    assert succ[0] == dirac("s1")

    succ = fig1.successors("s1", "b")
    assert succ == (SubDistribution({"s2": 0.5, "s3": 0.5}),)

    assert fig1.successors("s2", "d") == ()


def test_successors_unknown_state(fig1):
    with pytest.raises(ModelError):
        fig1.successors("nope", "a")
    with pytest.raises(ModelError):
        fig1.successors("s", "z")


def test_mass_error():
    text = """{"states": ["x", "y"], "actions": ["a"],
               "transitions": [{"from": "x", "action": "a", "to": {"y": 0.5}}]}"""
    with pytest.raises(ModelError, match="mass"):
        parse_model(text)


def test_undeclared_state_error():
    text = """{"states": ["y"], "actions": ["a"],
               "transitions": [{"from": "x", "action": "a", "to": {"y": 1.0}}]}"""
    with pytest.raises(ModelError, match="undeclared"):
        parse_model(text)


def test_duplicate_state_error():
    text = '{"states": ["x", "x"], "actions": [], "transitions": []}'
    with pytest.raises(ModelError, match="duplicate"):
        parse_model(text)


def test_syntax_error_reports_position():
    with pytest.raises(ModelError, match="line 1"):
        parse_model("{nope")


def test_dirac():
    d = dirac("s4")
    assert d.items == (("s4", 1.0),)
    assert d.mass == 1.0
    assert len(d.support) == 1
    assert dirac("t5").mass == 1.0


def test_epsilon_empty():
    assert EPSILON.mass == 0.0
    assert EPSILON.support == ()


def test_subdistribution_drops_zeros_and_orders():
    d = SubDistribution({"b": 0.5, "a": 0.5, "c": 0.0})
    assert d.support == ("a", "b")
    assert d == SubDistribution({"a": 0.5, "b": 0.5})


def test_subdistribution_mass_cap():
    with pytest.raises(ValueError):
        SubDistribution({"a": 0.8, "b": 0.3})


def test_mix():
    d = mix([(0.5, dirac("a")), (0.5, SubDistribution({"a": 0.5, "b": 0.5}))])
    assert d == SubDistribution({"a": 0.75, "b": 0.25})


def test_roundtrip(fig1, fig2):
    for model in (fig1, fig2):
        again = parse_model(serialize(model))
        assert again.states == model.states
        assert again.actions == model.actions
        assert again.transitions == model.transitions


def test_parse_is_deterministic(fig1_path):
    with open(fig1_path, encoding="utf-8") as handle:
        text = handle.read()
    first = parse_model(text)
    second = parse_model(text)
    assert first.states == second.states
    assert first.transitions == second.transitions


def test_all_targets_full_mass(fig1, fig2):
    for model in (fig1, fig2):
        for tr in model.transitions:
            assert abs(tr.target.mass - 1.0) <= 1e-9
