"""Two-sorted real-valued modal logic: evaluation, enumeration, synthesis.

State formulas evaluate at states, distribution formulas at full
distributions, both to success probabilities in [0, 1].  The diamond takes
the best transition; over a state with no matching move it evaluates to 0.

`logical_metric_lower_bound` enumerates formulas up to a modal depth with
shift literals on a finite grid and reports the largest evaluation gap
between two states; since every candidate is genuinely evaluated, the result
can only underestimate the bisimilarity metric.

`synthesize_distinguishing` builds a single witness formula whose evaluation
gap reaches the k-step metric iterate up to the requested slack, by
realizing dual transport potentials as shifted recursive witnesses and
guarding them behind the best action.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetExceededError
from .formulas import (
    Conj,
    DConj,
    DMinus,
    Dia,
    Expect,
    Formula,
    Minus,
    Neg,
    Top,
    TT,
    conj_all,
    const,
    dconj_all,
    disj_all,
    plus,
    simplify,
)
from .model import Plts, SubDistribution
from .state_metric import kleene_iterates
from .transport import kantorovich


def eval_state(model: Plts, phi: Formula, state, _memo=None) -> float:
    """Value of a state formula at a state."""
    if state not in model.state_index:
        raise ValueError(f"unknown state {state!r}")
    memo = {} if _memo is None else _memo
    return _eval_state(model, phi, state, memo)


def eval_dist(model: Plts, psi: Formula, dist: SubDistribution, _memo=None) -> float:
    """Value of a distribution formula at a full distribution."""
    if not dist.is_full():
        raise ValueError(f"distribution formulas evaluate on mass-1 distributions (mass {dist.mass:.12g})")
    memo = {} if _memo is None else _memo
    return _eval_dist(model, psi, dist, memo)


def _eval_state(model, phi, state, memo):
    key = (id(phi), state)
    hit = memo.get(key)
    if hit is not None:
        return hit
    match phi:
        case Top():
            value = 1.0
        case Neg(child):
            value = 1.0 - _eval_state(model, child, state, memo)
        case Minus(child, p):
            value = max(_eval_state(model, child, state, memo) - p, 0.0)
        case Conj(left, right):
            value = min(
                _eval_state(model, left, state, memo),
                _eval_state(model, right, state, memo),
            )
        case Dia(action, child):
            value = 0.0
            for dist in model.successors(state, action):
                value = max(value, _eval_dist(model, child, dist, memo))
        case _:
            raise TypeError(f"not a state formula: {phi!r}")
    memo[key] = value
    return value


def _eval_dist(model, psi, dist, memo):
    key = (id(psi), dist.key)
    hit = memo.get(key)
    if hit is not None:
        return hit
    match psi:
        case Expect(child):
            value = 0.0
            for state, p in dist.items:
                value += p * _eval_state(model, child, state, memo)
        case DMinus(child, p):
            value = max(_eval_dist(model, child, dist, memo) - p, 0.0)
        case DConj(left, right):
            value = min(
                _eval_dist(model, left, dist, memo),
                _eval_dist(model, right, dist, memo),
            )
        case _:
            raise TypeError(f"not a distribution formula: {psi!r}")
    memo[key] = value
    return value


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

class _VectorPool:
    """Deduplicated value vectors with the first generating formula kept."""

    def __init__(self, budget_state):
        self.keys = {}
        self.vectors = []
        self.formulas = []
        self.budget = budget_state

    def add(self, vec, formula):
        """Insert unless an equal vector exists; `formula` may be a thunk."""
        key = np.round(vec, 12).tobytes()
        if key in self.keys:
            return False
        self._insert(key, vec, formula)
        return True

    def add_batch(self, rows, formulas):
        """Insert many rows at once; `formulas` holds one thunk per row."""
        if len(rows) == 0:
            return
        rounded = np.round(rows, 12)
        for i in range(len(rows)):
            key = rounded[i].tobytes()
            if key not in self.keys:
                self._insert(key, rows[i], formulas[i])

    def _insert(self, key, vec, formula):
        self.budget[0] -= 1
        if self.budget[0] < 0:
            raise BudgetExceededError("formula enumeration budget exceeded")
        self.keys[key] = len(self.vectors)
        self.vectors.append(vec)
        self.formulas.append(formula() if callable(formula) else formula)

    def __len__(self):
        return len(self.vectors)

    def items(self):
        return list(zip(self.vectors, self.formulas))

    def matrix(self):
        return np.vstack(self.vectors)


def _conj_pass(pool, max_participants, make):
    """One blocked pairwise-min pass; skips constants and dominated pairs.

    Constant vectors are expressible by shifts alone and pairing them merely
    clips other vectors, so they are left out.  When one vector dominates
    the other their minimum is already in the pool.
    """
    rows = pool.matrix()
    spread = rows.max(axis=1) - rows.min(axis=1) > 1e-12
    idx = np.nonzero(spread)[0][:max_participants]
    V = rows[idx]
    F = [pool.formulas[i] for i in idx]
    for i in range(len(idx) - 1):
        block = np.minimum(V[i], V[i + 1:])
        dominated = np.logical_or(
            (block == V[i]).all(axis=1), (block == V[i + 1:]).all(axis=1)
        )
        fresh = np.nonzero(~dominated)[0]
        left = F[i]
        pool.add_batch(
            block[fresh],
            [
                (lambda l=left, r=F[i + 1 + off]: make(l, r))
                for off in fresh
            ],
        )


def _shift_pass(pool, shifts, make):
    mat = pool.matrix()
    formulas = list(pool.formulas)
    for p in shifts:
        pool.add_batch(
            np.maximum(mat - p, 0.0),
            [(lambda f=phi, q=p: make(f, q)) for phi in formulas],
        )


def _state_pipeline(pool, shifts, max_conj):
    """Negation pass, fused-shift pass, then one conjunction pass.

    Stacked shifts fuse (x - p - q = x - (p + q)), so a single pass over the
    whole grid covers every iterated shift; pools accumulate across modal
    levels, so conjunctions of conjunctions still appear at deeper levels.
    """
    mat = pool.matrix()
    pool.add_batch(1.0 - mat, [(lambda f=phi: Neg(f)) for phi in pool.formulas])
    _shift_pass(pool, shifts, Minus)
    _conj_pass(pool, max_conj, Conj)


def _dist_pipeline(pool, shifts, max_conj):
    """Fused-shift pass then one conjunction pass (no negation at this sort)."""
    _shift_pass(pool, shifts, DMinus)
    _conj_pass(pool, max_conj, DConj)


def logical_metric_lower_bound(
    model: Plts,
    s,
    t,
    depth: int = 3,
    grid: int = 20,
    budget: int = 200000,
    max_conj: int = 1500,
):
    """Best evaluation gap over enumerated state formulas, with a witness.

    Formulas range over modal depth <= depth with shift literals on the
    1/grid lattice; value-equivalent formulas are merged, so the search is
    over achievable value vectors rather than syntax, and each level runs
    one negation, shift, and conjunction pass over everything accumulated
    so far.  Raises BudgetExceededError (carrying the best value so far)
    if more than `budget` distinct vectors are created.
    """
    if depth < 1 or grid < 1:
        raise ValueError("depth and grid must be at least 1")
    for name in (s, t):
        if name not in model.state_index:
            raise ValueError(f"unknown state {name!r}")
    n = model.num_states
    shifts = [i / grid for i in range(1, grid + 1)]
    budget_state = [budget]

    targets = []
    seen = {}
    for tr in model.transitions:
        if tr.target.key not in seen:
            seen[tr.target.key] = len(targets)
            targets.append(tr.target)
    # expectation matrix: rows index target distributions, columns states
    expect = np.zeros((len(targets), n))
    for r, dist in enumerate(targets):
        for state, p in dist.items:
            expect[r, model.state_index[state]] = p
    succ_rows = {
        (state, a): [seen[dist.key] for dist in model.successors(state, a)]
        for state in model.states
        for a in model.actions
    }

    state_pool = _VectorPool(budget_state)
    state_pool.add(np.ones(n), TT)
    si, ti = model.state_index[s], model.state_index[t]

    try:
        _state_pipeline(state_pool, shifts, max_conj)
        for _ in range(depth):
            dist_pool = _VectorPool(budget_state)
            if targets:
                state_mat = state_pool.matrix()
                dist_mat = state_mat @ expect.T
                dist_pool.add_batch(
                    dist_mat,
                    [(lambda f=phi: Expect(f)) for phi in state_pool.formulas],
                )
                _dist_pipeline(dist_pool, shifts, max_conj)
            if len(dist_pool):
                dmat = dist_pool.matrix()
                for a in model.actions:
                    out = np.zeros((len(dist_pool), n))
                    for i, state in enumerate(model.states):
                        rows = succ_rows[(state, a)]
                        if rows:
                            out[:, i] = dmat[:, rows].max(axis=1)
                    state_pool.add_batch(
                        out,
                        [(lambda f=psi, act=a: Dia(act, f)) for psi in dist_pool.formulas],
                    )
            _state_pipeline(state_pool, shifts, max_conj)
    except BudgetExceededError as exc:
        best, witness = _best_gap(state_pool, si, ti)
        exc.best = best
        raise
    value, witness = _best_gap(state_pool, si, ti)
    return value, witness


def _best_gap(pool, si, ti):
    if not len(pool):
        return 0.0, TT
    mat = pool.matrix()
    gaps = np.abs(mat[:, si] - mat[:, ti])
    best = int(np.argmax(gaps))
    return float(gaps[best]), pool.formulas[best]


# ---------------------------------------------------------------------------
# distinguishing-formula synthesis
# ---------------------------------------------------------------------------

_TINY = 1e-11


def synthesize_distinguishing(model: Plts, s, t, k: int, eps: float = 0.01) -> Formula:
    """State formula separating s from t by at least d_k(s, t) - eps.

    d_k is the k-th iterate of the metric refinement from the zero table.
    The construction follows the refinement structure: it picks the action
    and direction realizing d_k, answers every opposing successor with a
    shifted expectation formula built from the dual transport potentials,
    and conjoins those answers under the diamond.  All shift constants are
    exact evaluator outputs, so the achieved gap matches d_k up to floating
    point noise; `eps` only sets the threshold below which the trivial
    formula const(0) is returned.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if k < 0:
        raise ValueError("k must be nonnegative")
    for name in (s, t):
        if name not in model.state_index:
            raise ValueError(f"unknown state {name!r}")
    chain = kleene_iterates(model, k)
    if chain[k](s, t) <= eps:
        return const(0.0)
    synth = _Synthesizer(model, chain)
    return simplify(synth.witness(k, s, t))


class _Synthesizer:
    def __init__(self, model, chain):
        self.model = model
        self.chain = chain      # iterates d_0 .. d_k
        self.memo = {}          # (level, u, w) -> oriented formula
        self.eval_memo = {}

    def _eval(self, phi, state):
        return _eval_state(self.model, phi, state, self.eval_memo)

    def _eval_d(self, psi, dist):
        return _eval_dist(self.model, psi, dist, self.eval_memo)

    def witness(self, level, u, w) -> Formula:
        """Formula with value(u) - value(w) >= d_level(u, w) (up to fp noise)."""
        key = (level, u, w)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        target = self.chain[level](u, w)
        if level == 0 or target <= _TINY:
            out = const(0.0)
        else:
            out = self._build(level, u, w, target)
        self.memo[key] = out
        return out

    def _build(self, level, u, w, target):
        prev = self.chain[level - 1]
        # locate the action and direction that realize d_level(u, w)
        for a in self.model.actions:
            der_u = self.model.successors(u, a)
            der_w = self.model.successors(w, a)
            forward = self._directed(prev, der_u, der_w)
            backward = self._directed(prev, der_w, der_u)
            if max(forward, backward) >= target - _TINY:
                if forward >= backward:
                    return self._guard(level, a, u, w, der_u, der_w, forward)
                return Neg(self._guard(level, a, w, u, der_w, der_u, backward))
        raise AssertionError("no action realizes the metric step value")

    def _directed(self, prev, der_src, der_dst):
        if not der_src:
            return 0.0
        if not der_dst:
            return 1.0
        worst = 0.0
        for left in der_src:
            low = min(kantorovich(prev, left, right).value for right in der_dst)
            worst = max(worst, low)
        return worst

    def _guard(self, level, action, u, w, der_u, der_w, target):
        """Diamond formula with value(u) >= target and value(w) = 0-ish."""
        if not der_w:
            # w cannot move at all: any mass-1 successor of u separates fully
            return Dia(action, Expect(TT))
        prev = self.chain[level - 1]
        best = max(
            der_u,
            key=lambda left: min(kantorovich(prev, left, right).value for right in der_w),
        )
        answers = []
        for right in der_w:
            psi = self._hull_formula(level, best, right)
            answers.append((psi, self._eval_d(psi, right)))
        if len(answers) == 1:
            # single opposing successor: the gap passes through the diamond
            return Dia(action, answers[0][0])
        return Dia(action, dconj_all([DMinus(psi, cut) for psi, cut in answers]))

    def _hull_formula(self, level, left, right):
        """Distribution formula whose gap on (left, right) meets their lifted
        distance under the previous iterate."""
        plan = kantorovich(self.chain[level - 1], left, right)
        support = sorted(set(left.support) | set(right.support))
        parts = []
        for a_state in support:
            conjuncts = [
                self._shifted(level - 1, a_state, b_state, plan.duals)
                for b_state in support
            ]
            parts.append(conj_all(conjuncts))
        return Expect(disj_all(parts))

    def _shifted(self, level, a_state, b_state, duals):
        """State formula with value exactly duals[a] at a and at most
        duals[b] (plus recursion slack) at b."""
        ka, kb = duals[a_state], duals[b_state]
        if ka <= kb:
            return const(ka)
        base = self.witness(level, a_state, b_state)
        at_a = self._eval(base, a_state)
        if at_a > ka:
            return Minus(base, at_a - ka)
        return plus(base, ka - at_a)
