import random

import pytest

from helpers import (
    grid_distribution,
    random_dist_formula,
    random_model,
    random_state_formula,
)

from pmetric.errors import BudgetExceededError
from pmetric.formulas import modal_depth, to_text, uses_dist_connectives
from pmetric.mhml import (
    eval_dist,
    eval_state,
    logical_metric_lower_bound,
    synthesize_distinguishing,
)
from pmetric.model import SubDistribution, dirac, mix
from pmetric.parser import parse_formula
from pmetric.state_metric import fixpoint, kleene_iterates
from pmetric.transport import kantorovich_value


def test_example_eval_fig2(fig2):
    phi = parse_formula("<a>([<a>tt] & [<b>tt])")
    assert eval_state(fig2, phi, "s") == pytest.approx(0.2, abs=1e-9)
    assert eval_state(fig2, phi, "t") == pytest.approx(0.5, abs=1e-9)


def test_eval_basics(fig2):
    for s in fig2.states:
        assert eval_state(fig2, parse_formula("tt"), s) == 1.0
        assert eval_state(fig2, parse_formula("!tt"), s) == 0.0
    assert eval_state(fig2, parse_formula("<a>tt"), "s1") == 1.0
    assert eval_state(fig2, parse_formula("<a>tt"), "s2") == 0.0


def test_eval_unknown_state(fig2):
    with pytest.raises(ValueError):
        eval_state(fig2, parse_formula("tt"), "nope")


def test_example_dist_formulas(fig2):
    delta1 = SubDistribution({"s1": 0.2, "s2": 0.8})
    shifted_outside = parse_formula("[<b>tt] - 0.5", sort="dist")
    shifted_inside = parse_formula("[<b>tt - 0.5]", sort="dist")
    assert eval_dist(fig2, shifted_outside, delta1) == pytest.approx(0.3, abs=1e-9)
    assert eval_dist(fig2, shifted_inside, delta1) == pytest.approx(0.4, abs=1e-9)
    split = 0.2 * eval_dist(fig2, shifted_outside, dirac("s1")) + 0.8 * eval_dist(
        fig2, shifted_outside, dirac("s2")
    )
    assert split == pytest.approx(0.4, abs=1e-9)


def test_dist_conj_idempotent(fig2):
    delta1 = SubDistribution({"s1": 0.2, "s2": 0.8})
    psi = parse_formula("[<a>tt]", sort="dist")
    both = parse_formula("[<a>tt] & [<a>tt]", sort="dist")
    assert eval_dist(fig2, both, delta1) == eval_dist(fig2, psi, delta1)


def test_eval_dist_requires_full_mass(fig2):
    with pytest.raises(ValueError):
        eval_dist(fig2, parse_formula("[tt]", sort="dist"), SubDistribution({"s1": 0.5}))


def test_double_negation_and_shift_identities():
    rng = random.Random(50)
    for _ in range(40):
        model = random_model(rng, max_states=4)
        phi = random_state_formula(rng, list(model.actions), 2)
        p = rng.random()
        for s in model.states:
            value = eval_state(model, phi, s)
            assert abs(eval_state(model, parse_formula(f"!!({to_text(phi)})"), s) - value) <= 1e-12
            assert eval_state(model, parse_formula(f"({to_text(phi)}) - 0", sort="state"), s) == value
            plus = eval_state(model, parse_formula(f"({to_text(phi)}) + {p}"), s)
            assert plus == pytest.approx(min(value + p, 1.0), abs=1e-12)


def test_expectation_linear():
    rng = random.Random(51)
    for _ in range(30):
        model = random_model(rng, max_states=5)
        states = list(model.states)
        phi = random_state_formula(rng, list(model.actions), 2)
        left = grid_distribution(rng, states)
        right = grid_distribution(rng, states)
        p = rng.choice([0.125, 0.25, 0.5, 0.75])
        mixed = mix([(p, left), (1 - p, right)])
        from pmetric.formulas import Expect

        got = eval_dist(model, Expect(phi), mixed)
        want = p * eval_dist(model, Expect(phi), left) + (1 - p) * eval_dist(
            model, Expect(phi), right
        )
        assert got == pytest.approx(want, abs=1e-9)


def test_nonexpansive_state_formulas():
    # every connective stays within the converged metric distance
    rng = random.Random(52)
    for _ in range(40):
        model = random_model(rng, max_states=5)
        result = fixpoint(model)
        assert result.converged
        d = result.metric
        for _ in range(5):
            phi = random_state_formula(rng, list(model.actions), 3)
            s, t = rng.sample(list(model.states), 2)
            gap = abs(eval_state(model, phi, s) - eval_state(model, phi, t))
            assert gap <= d(s, t) + 1e-7


def test_nonexpansive_dist_formulas():
    rng = random.Random(53)
    for _ in range(25):
        model = random_model(rng, max_states=5)
        result = fixpoint(model)
        assert result.converged
        d = result.metric
        states = list(model.states)
        for _ in range(4):
            psi = random_dist_formula(rng, list(model.actions), 2)
            left = grid_distribution(rng, states)
            right = grid_distribution(rng, states)
            gap = abs(eval_dist(model, psi, left) - eval_dist(model, psi, right))
            assert gap <= kantorovich_value(d, left, right) + 1e-7


def test_lower_bound_fig2(fig2):
    value, witness = logical_metric_lower_bound(fig2, "s", "t", depth=2, grid=10)
    assert value == pytest.approx(0.3, abs=1e-9)
    # the witness is a real formula achieving the reported gap
    gap = abs(eval_state(fig2, witness, "s") - eval_state(fig2, witness, "t"))
    assert gap == pytest.approx(value, abs=1e-9)


def test_lower_bound_same_state(fig2):
    value, _ = logical_metric_lower_bound(fig2, "s", "s", depth=2, grid=4)
    assert value == 0.0


def test_lower_bound_fig1_deep(fig1):
    value, witness = logical_metric_lower_bound(fig1, "s", "t", depth=4, grid=2)
    assert value == pytest.approx(0.5, abs=1e-9)
    assert modal_depth(witness) <= 4


def test_lower_bound_sound(fig1, fig2):
    for model, pair in ((fig1, ("s", "t")), (fig2, ("s", "t"))):
        delta = fixpoint(model).metric
        value, _ = logical_metric_lower_bound(model, *pair, depth=3, grid=4)
        assert value <= delta(*pair) + 1e-7


def test_lower_bound_monotone(fig2):
    values_by_depth = [
        logical_metric_lower_bound(fig2, "s", "t", depth=k, grid=5)[0] for k in (1, 2, 3)
    ]
    assert values_by_depth == sorted(values_by_depth)
    coarse = logical_metric_lower_bound(fig2, "s", "t", depth=2, grid=5)[0]
    fine = logical_metric_lower_bound(fig2, "s", "t", depth=2, grid=10)[0]
    assert coarse <= fine + 1e-12


def test_lower_bound_budget(fig2):
    with pytest.raises(BudgetExceededError):
        logical_metric_lower_bound(fig2, "s", "t", depth=2, grid=10, budget=50)


def test_lower_bound_validates_args(fig2):
    with pytest.raises(ValueError):
        logical_metric_lower_bound(fig2, "s", "t", depth=0)


def test_synthesis_fig2(fig2):
    phi = synthesize_distinguishing(fig2, "s", "t", 2, 0.01)
    gap = abs(eval_state(fig2, phi, "s") - eval_state(fig2, phi, "t"))
    assert gap >= 0.3 - 0.01


def test_synthesis_fig1(fig1):
    phi = synthesize_distinguishing(fig1, "s", "t", 4, 0.01)
    gap = abs(eval_state(fig1, phi, "s") - eval_state(fig1, phi, "t"))
    assert gap >= 0.5 - 0.01


def test_synthesis_same_state(fig1):
    phi = synthesize_distinguishing(fig1, "s", "s", 3, 0.01)
    assert eval_state(fig1, phi, "s") == 0.0


def test_synthesis_gap_contract_random():
    rng = random.Random(54)
    for _ in range(30):
        model = random_model(rng, max_states=6, acyclic=True)
        chain = kleene_iterates(model, 3)
        s, t = rng.sample(list(model.states), 2)
        phi = synthesize_distinguishing(model, s, t, 3, 0.01)
        gap = abs(eval_state(model, phi, s) - eval_state(model, phi, t))
        assert gap >= chain[3](s, t) - 0.01


def test_synthesis_deterministic_models_single_sorted():
    # with at most one successor per action, no distribution-level
    # conjunction or shift is needed in the witnesses
    rng = random.Random(55)
    for _ in range(25):
        model = random_model(rng, max_states=6, acyclic=True, deterministic=True)
        chain = kleene_iterates(model, 3)
        s, t = rng.sample(list(model.states), 2)
        phi = synthesize_distinguishing(model, s, t, 3, 0.01)
        assert not uses_dist_connectives(phi)
        gap = abs(eval_state(model, phi, s) - eval_state(model, phi, t))
        assert gap >= chain[3](s, t) - 0.01
