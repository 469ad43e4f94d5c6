"""Convex bisimilarity metric: successors answer with mixtures.

One refinement step measures, per action, the Hausdorff distance between
the convex closures of the two successor sets; closures are never
materialized, every infimum over a closure is one joint LP.  `saturate`
instead adds grid-sampled mixtures as explicit transitions and exists as a
cross-check oracle: the plain metric on a saturated model approaches the
convex metric from above as the grid refines.
"""

from __future__ import annotations

import itertools

import numpy as np

from .lifting import DistributionSet, hausdorff_convex
from .model import Plts, Transition, mix
from .state_metric import FixpointResult, default_max_iter, iterate_fixpoint
from .transport import StateMetric


def convex_step(model: Plts, d: StateMetric) -> StateMetric:
    """One refinement step against convex closures of successor sets."""
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
                key = (frozenset(x.key for x in der_s), frozenset(x.key for x in der_t))
                val = cache.get(key)
                if val is None:
                    val = hausdorff_convex(
                        d,
                        DistributionSet(der_s, convex=True),
                        DistributionSet(der_t, convex=True),
                    )
                    cache[key] = val
                best = max(best, val)
                if best >= 1.0:
                    break
            out[i, j] = out[j, i] = best
    return StateMetric(model.states, out)


def convex_fixpoint(model: Plts, tol: float = 1e-9, max_iter: int | None = None) -> FixpointResult:
    """Convex bisimilarity metric via Kleene iteration from the zero table."""
    if max_iter is None:
        max_iter = default_max_iter(model)
    return iterate_fixpoint(model, tol, max_iter, convex_step)


def _weight_vectors(count, grid):
    """All weight tuples (c_1/grid, ..., c_count/grid) summing to one."""
    for cells in itertools.combinations(range(grid + count - 1), count - 1):
        bounds = (-1,) + cells + (grid + count - 1,)
        yield tuple((b - a - 1) / grid for a, b in zip(bounds, bounds[1:]))


def saturate(model: Plts, grid: int) -> Plts:
    """Model with grid-sampled mixtures of successors added as transitions.

    With grid 1 the mixtures are the original successors and the model is
    returned unchanged (up to transition deduplication being a no-op).
    """
    if grid < 1:
        raise ValueError("grid must be at least 1")
    extra = []
    for s in model.states:
        for a in model.actions:
            der = model.successors(s, a)
            if len(der) < 2:
                continue
            existing = {dist.key for dist in der}
            for weights in _weight_vectors(len(der), grid):
                mixture = mix(zip(weights, der))
                if mixture.key not in existing:
                    existing.add(mixture.key)
                    extra.append(Transition(s, a, mixture))
    return Plts(model.states, model.actions, model.transitions + tuple(extra))
