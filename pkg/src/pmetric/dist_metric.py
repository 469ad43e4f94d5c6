"""Metric and logic on subdistributions via lifted transitions.

A subdistribution steps under an action by letting every support state that
can move pick one successor distribution while stuck states drop out (their
mass is lost), giving one successor per combination of choices.  By default
at least one support state must move; `allow_null_lift=True` switches to the
literal reading in which a fully stuck subdistribution steps to the empty
one.

The k-step metric starts from the mass difference and refines through the
Hausdorff distance between lifted successor sets.  The single-sorted logic
evaluates on subdistributions, with tt denoting the total mass, and its
evaluation gaps lower-bound the metric at matching depth.
"""

from __future__ import annotations

import itertools
import os

from .errors import BudgetExceededError
from .formulas import (
    Conj,
    Dia,
    Formula,
    Minus,
    Neg,
    TT,
    Top,
    conj_all,
)
from .lifting import hausdorff
from .mhml import _VectorPool, _state_pipeline, _best_gap
from .model import EPSILON, Plts, SubDistribution, mix

import numpy as np

DEFAULT_NODE_BUDGET = 100000


def node_budget_default() -> int:
    """Node cap for lifted-graph exploration; PMETRIC_NODE_BUDGET overrides."""
    raw = os.environ.get("PMETRIC_NODE_BUDGET")
    if raw:
        try:
            return int(raw)
        except ValueError as exc:
            raise ValueError(f"PMETRIC_NODE_BUDGET must be an integer, got {raw!r}") from exc
    return DEFAULT_NODE_BUDGET


def lifted_successors(model: Plts, dist: SubDistribution, action, allow_null_lift=False):
    """Successor subdistributions of `dist` under `action`, deduplicated.

    One successor per choice of a move for every support state that has one;
    stuck support states contribute no mass.  Empty when no support state
    moves, unless `allow_null_lift` admits the step to the empty
    subdistribution.
    """
    options = []
    movers = 0
    for state, prob in dist.items:
        der = model.successors(state, action)
        if der:
            movers += 1
            options.append([(prob, d) for d in der])
    if movers == 0:
        return (EPSILON,) if allow_null_lift else ()
    seen = set()
    out = []
    for choice in itertools.product(*options):
        succ = mix(choice)
        if succ.key not in seen:
            seen.add(succ.key)
            out.append(succ)
    return tuple(out)


class LiftedGraph:
    """Explored portion of the subdistribution transition graph.

    Nodes are canonical subdistributions in first-visit order; `cuts[r]`
    is the number of nodes reachable from the roots within r steps, so each
    prefix of `nodes` is one exploration layer.  Edges are stored for every
    node that has been expanded.
    """

    def __init__(self, model, roots, depth, node_budget=None, allow_null_lift=False):
        self.model = model
        self.depth = depth
        self.allow_null_lift = allow_null_lift
        budget = node_budget_default() if node_budget is None else node_budget
        self.nodes = []
        self.index = {}
        self.edges = {}
        for root in roots:
            self._intern(root, budget)
        self.cuts = [len(self.nodes)]
        frontier = list(range(len(self.nodes)))
        for _ in range(depth):
            next_frontier = []
            for i in frontier:
                for a in model.actions:
                    succ = lifted_successors(model, self.nodes[i], a, allow_null_lift)
                    ids = []
                    for child in succ:
                        j = self._intern(child, budget, next_frontier)
                        ids.append(j)
                    self.edges[(i, a)] = tuple(ids)
            self.cuts.append(len(self.nodes))
            frontier = next_frontier

    def _intern(self, dist, budget, fresh=None):
        key = dist.key
        j = self.index.get(key)
        if j is None:
            if len(self.nodes) >= budget:
                raise BudgetExceededError(
                    f"lifted-graph node budget ({budget}) exceeded"
                )
            j = len(self.nodes)
            self.index[key] = j
            self.nodes.append(dist)
            if fresh is not None:
                fresh.append(j)
        return j

    def successors(self, node_id, action):
        return self.edges.get((node_id, action))


class _LiftedSpace:
    """Successor cache with a node budget, shared by the metric recursions."""

    def __init__(self, model, node_budget=None, allow_null_lift=False):
        self.model = model
        self.allow_null_lift = allow_null_lift
        self.budget = node_budget_default() if node_budget is None else node_budget
        self.known = {}
        self.succ = {}

    def intern(self, dist):
        key = dist.key
        if key not in self.known:
            if len(self.known) >= self.budget:
                raise BudgetExceededError(
                    f"lifted-graph node budget ({self.budget}) exceeded"
                )
            self.known[key] = dist
        return key

    def successors(self, dist, action):
        key = (self.intern(dist), action)
        hit = self.succ.get(key)
        if hit is None:
            hit = lifted_successors(self.model, dist, action, self.allow_null_lift)
            for child in hit:
                self.intern(child)
            self.succ[key] = hit
        return hit


class _DistMetric:
    """Memoized k-step distribution metric over a lifted space."""

    def __init__(self, space):
        self.space = space
        self.memo = {}

    def value(self, level, left, right):
        if left.key == right.key:
            return 0.0
        kl, kr = left.key, right.key
        if kr < kl:
            left, right, kl, kr = right, left, kr, kl
        key = (level, kl, kr)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        base = abs(left.mass - right.mass)
        out = base
        if level > 0:
            for a in self.space.model.actions:
                succ_l = self.space.successors(left, a)
                succ_r = self.space.successors(right, a)
                if not succ_l and not succ_r:
                    continue
                h = hausdorff(lambda x, y: self.value(level - 1, x, y), succ_l, succ_r)
                out = max(out, h)
                if out >= 1.0:
                    break
        self.memo[key] = out
        return out


def dist_fixpoint(model: Plts, pairs, k: int, node_budget=None, allow_null_lift=False):
    """k-step metric values for the requested subdistribution pairs.

    Nondecreasing in k, and exact (equal to the full metric) once k reaches
    the longest action path of an acyclic lifted graph.  Exploration is
    capped by the node budget.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    space = _LiftedSpace(model, node_budget, allow_null_lift)
    metric = _DistMetric(space)
    return [metric.value(k, left, right) for left, right in pairs]


def eval_dstar(model: Plts, psi: Formula, dist: SubDistribution,
               node_budget=None, allow_null_lift=False) -> float:
    """Value of a subdistribution formula (tt reads the total mass)."""
    space = _LiftedSpace(model, node_budget, allow_null_lift)
    return _eval_dstar(space, psi, dist, {})


def _eval_dstar(space, psi, dist, memo):
    key = (id(psi), dist.key)
    hit = memo.get(key)
    if hit is not None:
        return hit
    match psi:
        case Top():
            value = dist.mass
        case Neg(child):
            value = 1.0 - _eval_dstar(space, child, dist, memo)
        case Minus(child, p):
            value = max(_eval_dstar(space, child, dist, memo) - p, 0.0)
        case Conj(left, right):
            value = min(
                _eval_dstar(space, left, dist, memo),
                _eval_dstar(space, right, dist, memo),
            )
        case Dia(action, child):
            value = 0.0
            for succ in space.successors(dist, action):
                value = max(value, _eval_dstar(space, child, succ, memo))
        case _:
            raise TypeError(f"not a subdistribution formula: {psi!r}")
    memo[key] = value
    return value


_TINY = 1e-11

#: formula with value 1 on every subdistribution, including the empty one
_ALWAYS_ONE = Neg(Minus(Neg(TT), 1.0))
_ZERO = Minus(TT, 1.0)


class _DstarWitness:
    """Distinguishing-formula construction mirroring the metric recursion."""

    def __init__(self, space, metric):
        self.space = space
        self.metric = metric
        self.memo = {}
        self.eval_memo = {}

    def _eval(self, psi, dist):
        return _eval_dstar(self.space, psi, dist, self.eval_memo)

    def witness(self, level, left, right) -> Formula:
        """Formula with value(left) - value(right) >= d_level(left, right)."""
        key = (level, left.key, right.key)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        target = self.metric.value(level, left, right)
        out = self._build(level, left, right, target)
        self.memo[key] = out
        return out

    def _build(self, level, left, right, target):
        if target <= _TINY:
            return _ZERO
        if abs(left.mass - right.mass) >= target - _TINY:
            return TT if left.mass > right.mass else Neg(TT)
        for a in self.space.model.actions:
            succ_l = self.space.successors(left, a)
            succ_r = self.space.successors(right, a)
            forward = self._directed(level - 1, succ_l, succ_r)
            backward = self._directed(level - 1, succ_r, succ_l)
            if max(forward, backward) >= target - _TINY:
                if forward >= backward:
                    return self._guard(level, a, succ_l, succ_r)
                return Neg(self._guard(level, a, succ_r, succ_l))
        raise AssertionError("no action realizes the metric step value")

    def _directed(self, level, succ_src, succ_dst):
        if not succ_src:
            return 0.0
        if not succ_dst:
            return 1.0
        worst = 0.0
        for src in succ_src:
            low = min(self.metric.value(level, src, dst) for dst in succ_dst)
            worst = max(worst, low)
        return worst

    def _guard(self, level, action, succ_src, succ_dst):
        if not succ_dst:
            return Dia(action, _ALWAYS_ONE)
        best = max(
            succ_src,
            key=lambda src: min(self.metric.value(level - 1, src, dst) for dst in succ_dst),
        )
        answers = []
        for dst in succ_dst:
            psi = self.witness(level - 1, best, dst)
            answers.append((psi, self._eval(psi, dst)))
        if len(answers) == 1:
            return Dia(action, answers[0][0])
        return Dia(action, conj_all([Minus(psi, cut) for psi, cut in answers]))


def dstar_lower_bound(
    model: Plts,
    left: SubDistribution,
    right: SubDistribution,
    depth: int = 3,
    grid: int = 20,
    budget: int = 200000,
    max_conj: int = 1500,
    node_budget=None,
    allow_null_lift=False,
):
    """Best evaluation gap over subdistribution formulas of bounded depth.

    Combines blind enumeration (value vectors over the lifted graph, with
    shift literals on the 1/grid lattice) with a guided construction that
    follows the metric recursion, and returns the better of the two with
    its witness formula.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    graph = LiftedGraph(model, [left, right], depth, node_budget, allow_null_lift)
    li = graph.index[left.key]
    ri = graph.index[right.key]

    budget_state = [budget]
    shifts = [i / grid for i in range(1, grid + 1)]
    pool = _VectorPool(budget_state)
    masses = np.array([node.mass for node in graph.nodes])
    pool.add(masses, TT)
    value, witness = 0.0, TT

    try:
        _state_pipeline(pool, shifts, max_conj)
        for j in range(1, depth + 1):
            cut = graph.cuts[depth - j]
            prev_mat = pool.matrix()
            prev_formulas = list(pool.formulas)
            pool = _VectorPool(budget_state)
            pool.add_batch(prev_mat[:, :cut], prev_formulas)
            for a in model.actions:
                out = np.zeros((len(prev_formulas), cut))
                for i in range(cut):
                    ids = graph.successors(i, a)
                    if ids:
                        out[:, i] = prev_mat[:, ids].max(axis=1)
                pool.add_batch(
                    out,
                    [(lambda f=psi, act=a: Dia(act, f)) for psi in prev_formulas],
                )
            _state_pipeline(pool, shifts, max_conj)
        value, witness = _best_gap(pool, li, ri)
    except BudgetExceededError as exc:
        exc.best = value
        raise

    space = _LiftedSpace(model, node_budget, allow_null_lift)
    metric = _DistMetric(space)
    guided = _DstarWitness(space, metric).witness(depth, left, right)
    gap = abs(
        _eval_dstar(space, guided, left, {}) - _eval_dstar(space, guided, right, {})
    )
    if gap > value:
        return gap, guided
    return value, witness
