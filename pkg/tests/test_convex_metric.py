import random

import numpy as np
import pytest

from helpers import grid_distribution, random_model, sweep_min_to_hull

from pmetric.convex_metric import convex_fixpoint, saturate
from pmetric.lifting import min_distance_to_hull
from pmetric.model import SubDistribution, mix
from pmetric.state_metric import fixpoint
from pmetric.transport import kantorovich_value


def test_fig1_convex_equals_plain(fig1):
    # every successor set is a singleton, so mixtures add nothing
    plain = fixpoint(fig1).metric
    convex = convex_fixpoint(fig1).metric
    assert np.max(np.abs(plain.values - convex.values)) <= 1e-6
    assert convex("s", "t") == pytest.approx(0.5, abs=1e-6)


def test_fig2_convex_separates(fig2):
    convex = convex_fixpoint(fig2)
    assert convex.converged
    assert convex.metric("s", "t") == pytest.approx(0.0, abs=1e-6)
    assert fixpoint(fig2).metric("s", "t") == pytest.approx(0.3, abs=1e-6)


def test_fig2_convex_oracle(fig2):
    # grid sweep over mixtures of the two successors of s reaches the
    # middle successor of t at the even mixture
    d = convex_fixpoint(fig2).metric
    delta1 = SubDistribution({"s1": 0.2, "s2": 0.8})
    delta2 = SubDistribution({"s5": 0.8, "s6": 0.2})
    delta3 = SubDistribution({"s3": 0.5, "s4": 0.5})
    assert sweep_min_to_hull(d, delta3, [delta1, delta2], step=0.01) == pytest.approx(
        0.0, abs=1e-9
    )


def test_diag_zero(fig1, fig2):
    for model in (fig1, fig2):
        metric = convex_fixpoint(model).metric
        assert np.all(np.diag(metric.values) == 0.0)


def test_convex_below_plain_random():
    rng = random.Random(70)
    for _ in range(12):
        model = random_model(rng, max_states=5)
        plain = fixpoint(model).metric
        convex = convex_fixpoint(model).metric
        assert np.all(convex.values <= plain.values + 1e-7)


def test_convex_equals_plain_on_deterministic_random():
    rng = random.Random(71)
    for _ in range(12):
        model = random_model(rng, max_states=5, deterministic=True)
        plain = fixpoint(model).metric
        convex = convex_fixpoint(model).metric
        assert np.max(np.abs(plain.values - convex.values)) <= 1e-6


def test_saturate_grid_one_is_identity(fig2):
    assert len(saturate(fig2, 1).transitions) == len(fig2.transitions)


def test_saturate_adds_even_mixture(fig2):
    sat = saturate(fig2, 2)
    delta1 = SubDistribution({"s1": 0.2, "s2": 0.8})
    delta2 = SubDistribution({"s5": 0.8, "s6": 0.2})
    even = mix([(0.5, delta1), (0.5, delta2)])
    assert even in sat.successors("s", "a")


def test_saturated_metric_approaches_convex(fig2):
    # the plain metric on the saturated model dominates the convex metric
    # and tightens toward it as the grid refines (0.15 at grid 2, 0.03 at
    # grid 10, against a convex value of 0)
    convex = convex_fixpoint(fig2).metric("s", "t")
    assert convex == pytest.approx(0.0, abs=1e-6)
    values = []
    for grid in (1, 2, 5, 10):
        sat_value = fixpoint(saturate(fig2, grid)).metric("s", "t")
        assert sat_value >= convex - 1e-9
        values.append(sat_value)
    assert values[0] == pytest.approx(0.3, abs=1e-6)
    assert values[1] == pytest.approx(0.15, abs=1e-6)
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))
    assert values[-1] == pytest.approx(0.03, abs=1e-6)


def test_combined_transitions_answerable_within_fixpoint(fig1, fig2):
    # every grid-sampled mixture of a state's successors is answered by the
    # opposing convex closure within the fixpoint distance
    for model in (fig1, fig2):
        metric = convex_fixpoint(model).metric
        for s in model.states:
            for t in model.states:
                bound = metric(s, t)
                for a in model.actions:
                    der_s = model.successors(s, a)
                    der_t = model.successors(t, a)
                    if not der_s:
                        continue
                    combined = list(der_s)
                    if len(der_s) >= 2:
                        combined.append(mix([(1 / len(der_s), d) for d in der_s]))
                    for dist in combined:
                        if der_t:
                            answer = min_distance_to_hull(metric, dist, der_t)
                        else:
                            answer = 1.0
                        assert answer <= bound + 1e-6


def test_mixture_convexity_inequality_random():
    rng = random.Random(72)
    from helpers import random_pseudometric

    states = tuple(f"q{i}" for i in range(5))
    for _ in range(40):
        d = random_pseudometric(rng, states)
        k = rng.randint(2, 3)
        lefts = [grid_distribution(rng, list(states)) for _ in range(k)]
        rights = [grid_distribution(rng, list(states)) for _ in range(k)]
        cuts = sorted(rng.sample(range(1, 8), k - 1))
        weights = [(b - a) / 8 for a, b in zip([0] + cuts, cuts + [8])]
        mixed = kantorovich_value(d, mix(zip(weights, lefts)), mix(zip(weights, rights)))
        split = sum(
            w * kantorovich_value(d, l, r) for w, l, r in zip(weights, lefts, rights)
        )
        assert mixed <= split + 1e-7
