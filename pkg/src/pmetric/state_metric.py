"""State-based bisimilarity metric as a least fixed point.

One step refines a pseudometric table d into, for every state pair, the
supremum over actions of the Hausdorff distance (under the Kantorovich
lifting of d) between the two successor sets.  Iterating from the zero
table yields a nondecreasing chain whose limit is the bisimilarity metric;
iteration stops when the sup-norm change drops below the tolerance and the
last change is reported as the residual.
"""

from __future__ import annotations

import warnings

import numpy as np

from .lifting import hausdorff_kantorovich
from .model import Plts
from .transport import StateMetric


class FixpointResult:
    """Converged (or capped) metric table plus iteration diagnostics."""

    __slots__ = ("metric", "iterations", "residual", "converged")

    def __init__(self, metric, iterations, residual, converged):
        self.metric = metric
        self.iterations = iterations
        self.residual = residual
        self.converged = converged

    def __repr__(self):
        tag = "converged" if self.converged else "capped"
        return (
            f"FixpointResult({tag} after {self.iterations} iterations, "
            f"residual={self.residual:.3g})"
        )


def default_max_iter(model: Plts) -> int:
    return 10 * model.num_states ** 2 + 100


def functor_step(model: Plts, d: StateMetric) -> StateMetric:
    """One refinement step of the metric table (pure, deterministic)."""
    n = model.num_states
    out = np.zeros((n, n))
    cache = {}
    for i in range(n):
        s = model.states[i]
        for j in range(i + 1, n):
            t = model.states[j]
            best = 0.0
            for a in model.actions:
                der_s = model.successors(s, a)
                der_t = model.successors(t, a)
                if not der_s and not der_t:
                    continue
                best = max(best, hausdorff_kantorovich(d, der_s, der_t, cache))
                if best >= 1.0:
                    break
            out[i, j] = out[j, i] = best
    return StateMetric(model.states, out)


def kleene_iterates(model: Plts, steps: int, step_fn=functor_step):
    """The chain d_0 = 0, d_{i+1} = step(d_i), as a list of length steps+1."""
    chain = [StateMetric.zero(model.states)]
    for _ in range(steps):
        chain.append(step_fn(model, chain[-1]))
    return chain


def iterate_fixpoint(model: Plts, tol, max_iter, step_fn) -> FixpointResult:
    """Shared Kleene-iteration driver used by the plain and convex metrics."""
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    current = StateMetric.zero(model.states)
    residual = float("inf")
    iterations = 0
    for iterations in range(1, max_iter + 1):
        nxt = step_fn(model, current)
        residual = float(np.max(np.abs(nxt.values - current.values)))
        current = nxt
        if residual < tol:
            return FixpointResult(current, iterations, residual, True)
    return FixpointResult(current, iterations, residual, False)


def fixpoint(model: Plts, tol: float = 1e-9, max_iter: int | None = None) -> FixpointResult:
    """Bisimilarity metric via Kleene iteration from the zero table.

    On cyclic models the limit may only be approached; the result then
    under-approximates it and the residual quantifies the last step.
    """
    if max_iter is None:
        max_iter = default_max_iter(model)
    return iterate_fixpoint(model, tol, max_iter, functor_step)


def kernel(d: StateMetric, tol: float = 1e-6):
    """Partition of the states into classes of pairwise distance <= tol.

    The relation d <= tol is closed transitively; if the closure merges
    states further apart than 10 * tol, a warning flags the non-transitive
    tolerance cut.
    """
    states = d.states
    n = len(states)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(n):
        for j in range(i + 1, n):
            if d.values[i, j] <= tol:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    blocks = sorted(groups.values(), key=lambda g: g[0])
    for block in blocks:
        worst = max((d.values[i, j] for i in block for j in block), default=0.0)
        if worst > 10 * tol:
            warnings.warn(
                f"kernel tolerance cut is not transitive: class "
                f"{[states[i] for i in block]} spans distance {worst:.3g}",
                stacklevel=2,
            )
    return [[states[i] for i in block] for block in blocks]


def bisimilarity_oracle(model: Plts):
    """Coarsest probabilistic bisimulation, by naive partition refinement.

    Two states stay related iff for every action each successor distribution
    of one is matched by a successor of the other assigning equal probability
    to every current block.  Used as an independent check of the metric
    kernel; probabilities are compared after rounding to 9 decimals.
    """
    n = model.num_states
    block_of = [0] * n

    def signature(state):
        sig = set()
        for a in model.actions:
            for dist in model.successors(state, a):
                masses = {}
                for u, p in dist.items:
                    b = block_of[model.state_index[u]]
                    masses[b] = masses.get(b, 0.0) + p
                vec = tuple(sorted((b, round(p, 9)) for b, p in masses.items()))
                sig.add((a, vec))
        return frozenset(sig)

    while True:
        keys = {}
        new_block = [0] * n
        for i, s in enumerate(model.states):
            key = (block_of[i], signature(s))
            if key not in keys:
                keys[key] = len(keys)
            new_block[i] = keys[key]
        if new_block == block_of:
            break
        block_of = new_block

    groups = {}
    for i, b in enumerate(block_of):
        groups.setdefault(b, []).append(i)
    blocks = sorted(groups.values(), key=lambda g: g[0])
    return [[model.states[i] for i in block] for block in blocks]
