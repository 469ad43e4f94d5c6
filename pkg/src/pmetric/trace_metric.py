"""Maximum trace probabilities and the trace distance.

The probability of a trace from a state picks the best transition at each
step and weighs the remainder by the reached distribution; a state with no
matching move contributes 0.  The trace distance is the largest probability
gap over traces up to a length bound (exact on acyclic models once the
bound covers the longest path).

Trace formulas are state formulas in the tt / diamond fragment; their
evaluation performs the same arithmetic as the trace recursion, which the
tests assert bitwise.
"""

from __future__ import annotations

from .formulas import Dia, Expect, Formula, TT
from .model import Plts


def trace_prob(model: Plts, state, trace) -> float:
    """Maximum probability of performing the whole trace from `state`."""
    if state not in model.state_index:
        raise ValueError(f"unknown state {state!r}")
    trace = tuple(trace)
    for label in trace:
        if label not in model.action_index:
            raise ValueError(f"unknown action {label!r}")
    return _prob(model, state, trace, {})


def _prob(model, state, suffix, memo):
    if not suffix:
        return 1.0
    key = (state, suffix)
    hit = memo.get(key)
    if hit is not None:
        return hit
    action, rest = suffix[0], suffix[1:]
    best = 0.0
    for dist in model.successors(state, action):
        total = 0.0
        for target, p in dist.items:
            total += p * _prob(model, target, rest, memo)
        best = max(best, total)
    memo[key] = best
    return best


def trace_distance(model: Plts, s, t, max_len: int):
    """Largest trace-probability gap over traces of length <= max_len.

    Returns the gap and the first witnessing trace in length-then-action
    order.  Prefixes dead from both states are pruned: no extension can
    reopen a gap once both probabilities hit 0.
    """
    if max_len < 0:
        raise ValueError("max_len must be nonnegative")
    for name in (s, t):
        if name not in model.state_index:
            raise ValueError(f"unknown state {name!r}")
    memo_s = {}
    memo_t = {}
    best = 0.0
    witness = ()
    live = [()]
    for _ in range(max_len):
        nxt = []
        for prefix in live:
            for a in model.actions:
                trace = prefix + (a,)
                ps = _prob(model, s, trace, memo_s)
                pt = _prob(model, t, trace, memo_t)
                gap = abs(ps - pt)
                if gap > best:
                    best = gap
                    witness = trace
                if ps > 0.0 or pt > 0.0:
                    nxt.append(trace)
        live = nxt
        if not live:
            break
    return best, witness


def trace_formula(trace) -> Formula:
    """The tt / diamond formula whose evaluation equals the trace probability."""
    out = TT
    for label in reversed(tuple(trace)):
        out = Dia(label, Expect(out))
    return out
