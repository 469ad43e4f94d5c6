"""Hausdorff lifting of a distribution distance to sets of distributions.

Conventions for empty sets: the infimum over an empty set is 1 and the
supremum over an empty set is 0, so the directed distance from a nonempty
set into an empty one is 1, and both directions vanish when both sets are
empty.

The convex variant measures the distance between convex closures of finite
generator sets.  The infimum over a convex closure is computed exactly by a
single joint LP over matching variables and mixture weights; the supremum
side only needs the generating vertices because the lifted distance is
jointly convex in its two arguments.
"""

from __future__ import annotations

import numpy as np

from .model import SubDistribution
from .simplex import solve_lp
from .transport import StateMetric, kantorovich_value


class DistributionSet:
    """Finite ordered set of full distributions, deduplicated canonically.

    With ``convex=True`` the set denotes the convex closure of its members.
    """

    __slots__ = ("members", "convex")

    def __init__(self, members, convex=False):
        seen = set()
        ordered = []
        for dist in members:
            if dist.key not in seen:
                seen.add(dist.key)
                ordered.append(dist)
        self.members = tuple(ordered)
        self.convex = convex

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __repr__(self):
        tag = "cc" if self.convex else "set"
        return f"DistributionSet({tag}, {list(self.members)!r})"


def directed_hausdorff(dist_fn, first, second) -> float:
    """sup over `first` of the inf distance into `second` (empty-set rules)."""
    best = 0.0
    for left in first:
        low = 1.0
        for right in second:
            low = min(low, dist_fn(left, right))
            if low == 0.0:
                break
        best = max(best, low)
    return best


def hausdorff(dist_fn, first, second) -> float:
    """Symmetric Hausdorff distance between two finite distribution sets."""
    return max(
        directed_hausdorff(dist_fn, first, second),
        directed_hausdorff(dist_fn, second, first),
    )


def min_distance_to_hull(d: StateMetric, source: SubDistribution, generators) -> float:
    """Least lifted distance from `source` into the convex hull of `generators`.

    Joint LP over the matching w and mixture weights lam:

        min  sum d(s,t) w(s,t)
        s.t. sum_t w(s,t) = source(s)          for each support state s
             sum_s w(s,t) = sum_r lam_r G_r(t) for each target state t
             sum_r lam_r = 1,  w, lam >= 0
    """
    generators = list(generators)
    if not generators:
        return 1.0
    rows = source.support
    cols = sorted({s for g in generators for s in g.support})
    m, n, k = len(rows), len(cols), len(generators)
    cost_w = d.submatrix(rows, cols).reshape(-1)
    nvar = m * n + k
    c = np.concatenate([cost_w, np.zeros(k)])
    a = np.zeros((m + n + 1, nvar))
    b = np.zeros(m + n + 1)
    for i, (_, p) in enumerate(source.items):
        a[i, i * n:(i + 1) * n] = 1.0
        b[i] = p
    for j, t in enumerate(cols):
        a[m + j, j:m * n:n] = 1.0
        for r, g in enumerate(generators):
            a[m + j, m * n + r] = -g(t)
        b[m + j] = 0.0
    a[m + n, m * n:] = 1.0
    b[m + n] = 1.0
    _, value = solve_lp(c, a, b)
    return max(value, 0.0)


def hausdorff_convex(d: StateMetric, first: DistributionSet, second: DistributionSet) -> float:
    """Hausdorff distance between convex closures under the lifting of d."""
    def directed(src_set, dst_set):
        best = 0.0
        for vertex in src_set:
            best = max(best, min_distance_to_hull(d, vertex, dst_set.members))
        return best

    return max(directed(first, second), directed(second, first))


def hausdorff_kantorovich(d: StateMetric, first, second, cache=None) -> float:
    """Hausdorff of the Kantorovich lifting of d, with optional value cache."""
    if cache is None:
        return hausdorff(lambda a, b: kantorovich_value(d, a, b), first, second)

    def dist_fn(a, b):
        key = (a.key, b.key) if a.key <= b.key else (b.key, a.key)
        val = cache.get(key)
        if val is None:
            val = kantorovich_value(d, a, b)
            cache[key] = val
        return val

    return hausdorff(dist_fn, first, second)
