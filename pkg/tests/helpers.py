"""Shared generators and brute-force oracles for the test suite."""

from __future__ import annotations

import itertools

import numpy as np

from pmetric.formulas import (
    Conj,
    DConj,
    DMinus,
    Dia,
    Expect,
    Minus,
    Neg,
    TT,
    const,
)
from pmetric.model import Plts, SubDistribution, Transition
from pmetric.transport import StateMetric


def grid_distribution(rng, pool, grid=8, max_support=3):
    """Full distribution with probabilities k/grid over a random support."""
    size = rng.randint(1, min(max_support, len(pool)))
    support = rng.sample(pool, size)
    cuts = sorted(rng.sample(range(1, grid), size - 1))
    weights = [b - a for a, b in zip([0] + cuts, cuts + [grid])]
    return SubDistribution({s: w / grid for s, w in zip(support, weights)})


def random_model(
    rng,
    max_states=6,
    max_actions=2,
    acyclic=False,
    deterministic=False,
    grid=8,
):
    """Random pLTS; acyclic models only step toward higher state indices."""
    n = rng.randint(2, max_states)
    states = [f"q{i}" for i in range(n)]
    actions = [chr(ord("a") + i) for i in range(rng.randint(1, max_actions))]
    transitions = []
    for i, s in enumerate(states):
        pool = states[i + 1:] if acyclic else states
        if not pool:
            continue
        for a in actions:
            count = rng.choice([0, 1, 1, 1] if deterministic else [0, 1, 1, 2])
            seen = set()
            for _ in range(count):
                dist = grid_distribution(rng, pool, grid)
                if dist.key not in seen:
                    seen.add(dist.key)
                    transitions.append(Transition(s, a, dist))
    return Plts(states, actions, transitions)


def random_pseudometric(rng, states):
    """Random 1-bounded pseudometric via shortest-path closure."""
    n = len(states)
    values = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            values[i, j] = values[j, i] = rng.random()
    for k in range(n):
        values = np.minimum(values, values[:, k][:, None] + values[k, :][None, :])
    np.fill_diagonal(values, 0.0)
    return StateMetric(states, values)


def random_state_formula(rng, actions, depth):
    roll = rng.random()
    if depth > 0 and actions and roll < 0.35:
        return Dia(rng.choice(actions), random_dist_formula(rng, actions, depth - 1))
    if roll < 0.45:
        return TT
    if roll < 0.55:
        return const(rng.choice([0.0, 0.25, 0.5, 0.75, 1.0]))
    if roll < 0.7:
        return Neg(random_state_formula(rng, actions, depth))
    if roll < 0.85:
        return Minus(random_state_formula(rng, actions, depth), rng.random())
    return Conj(
        random_state_formula(rng, actions, depth),
        random_state_formula(rng, actions, depth),
    )


def random_dist_formula(rng, actions, depth):
    roll = rng.random()
    if roll < 0.5:
        return Expect(random_state_formula(rng, actions, depth))
    if roll < 0.75:
        return DMinus(random_dist_formula(rng, actions, depth), rng.random())
    return DConj(
        random_dist_formula(rng, actions, depth),
        random_dist_formula(rng, actions, depth),
    )


def random_subdist_formula(rng, actions, depth):
    roll = rng.random()
    if depth > 0 and actions and roll < 0.35:
        return Dia(rng.choice(actions), random_subdist_formula(rng, actions, depth - 1))
    if roll < 0.5:
        return TT
    if roll < 0.65:
        return Neg(random_subdist_formula(rng, actions, depth))
    if roll < 0.85:
        return Minus(random_subdist_formula(rng, actions, depth), rng.random())
    return Conj(
        random_subdist_formula(rng, actions, depth),
        random_subdist_formula(rng, actions, depth),
    )


def bruteforce_transport(d: StateMetric, left: SubDistribution, right: SubDistribution):
    """LP oracle: exhaustive minimum over basic feasible matchings.

    Every basis is a set of m+n-1 cells; the equality system fixes the flows
    on it, and feasible nonnegative solutions cover all polytope vertices.
    Intended for supports of size <= 3.
    """
    rows = left.support
    cols = right.support
    m, n = len(rows), len(cols)
    cells = [(i, j) for i in range(m) for j in range(n)]
    supply = [p for _, p in left.items]
    demand = [q for _, q in right.items]
    rhs = np.array(supply + demand)
    best = None
    for basis in itertools.combinations(cells, m + n - 1):
        a = np.zeros((m + n, len(basis)))
        for k, (i, j) in enumerate(basis):
            a[i, k] = 1.0
            a[m + j, k] = 1.0
        sol, *_ = np.linalg.lstsq(a, rhs, rcond=None)
        if np.linalg.norm(a @ sol - rhs) > 1e-9 or np.any(sol < -1e-9):
            continue
        cost = sum(d(rows[i], cols[j]) * x for (i, j), x in zip(basis, sol))
        if best is None or cost < best:
            cost = max(cost, 0.0)
            best = cost if best is None else min(best, cost)
    return best


def sweep_min_to_hull(d: StateMetric, source, generators, step=0.01):
    """Grid-sweep oracle for the least lifted distance into a convex hull."""
    from pmetric.model import mix
    from pmetric.transport import kantorovich_value

    generators = list(generators)
    steps = int(round(1.0 / step))
    best = None
    for combo in itertools.product(range(steps + 1), repeat=len(generators) - 1):
        if sum(combo) > steps:
            continue
        weights = [c / steps for c in combo]
        weights.append(1.0 - sum(weights))
        value = kantorovich_value(d, source, mix(zip(weights, generators)))
        if best is None or value < best:
            best = value
    return best
