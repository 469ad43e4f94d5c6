"""Abstract syntax for the real-valued modal logics.

Three sorts share these node types:

* state formulas: Top | Neg | Minus | Conj | Dia, where every Dia child is a
  distribution formula;
* distribution formulas: DMinus | DConj | Expect, where every Expect child
  is a state formula;
* subdistribution formulas (the single-sorted logic evaluated on
  subdistributions, where tt denotes the total mass): Top | Neg | Minus |
  Conj | Dia with Dia children of the same sort and no Expect nodes.

Derived connectives (constants, plus-shift, disjunction) are desugared into
these constructors and never appear in an AST.
"""

from __future__ import annotations

from dataclasses import dataclass

SORT_STATE = "state"
SORT_DIST = "dist"
SORT_SUBDIST = "dstar"

SORTS = (SORT_STATE, SORT_DIST, SORT_SUBDIST)


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Neg(Formula):
    child: Formula


@dataclass(frozen=True)
class Minus(Formula):
    child: Formula
    value: float


@dataclass(frozen=True)
class Conj(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Dia(Formula):
    action: str
    child: Formula


@dataclass(frozen=True)
class DMinus(Formula):
    child: Formula
    value: float


@dataclass(frozen=True)
class DConj(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Expect(Formula):
    """Distribution formula averaging a state formula over the distribution."""

    child: Formula


TT = Top()


def const(p: float) -> Formula:
    """State formula with constant value p (desugars to tt - (1-p))."""
    return Minus(TT, 1.0 - p)


def plus(phi: Formula, p: float) -> Formula:
    """Capped addition: value min(phi + p, 1) (desugars via negation)."""
    return Neg(Minus(Neg(phi), p))


def disj(left: Formula, right: Formula) -> Formula:
    return Neg(Conj(Neg(left), Neg(right)))


def conj_all(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return TT
    out = parts[0]
    for part in parts[1:]:
        out = Conj(out, part)
    return out


def dconj_all(parts) -> Formula:
    parts = list(parts)
    out = parts[0]
    for part in parts[1:]:
        out = DConj(out, part)
    return out


def disj_all(parts) -> Formula:
    parts = list(parts)
    if not parts:
        return const(0.0)
    out = parts[0]
    for part in parts[1:]:
        out = disj(out, part)
    return out


def modal_depth(f: Formula) -> int:
    match f:
        case Top():
            return 0
        case Neg(child) | Minus(child, _) | DMinus(child, _) | Expect(child):
            return modal_depth(child)
        case Conj(left, right) | DConj(left, right):
            return max(modal_depth(left), modal_depth(right))
        case Dia(_, child):
            return 1 + modal_depth(child)
    raise TypeError(f"not a formula: {f!r}")


def uses_dist_connectives(f: Formula) -> bool:
    """Whether any distribution-level shift or conjunction occurs."""
    match f:
        case Top():
            return False
        case DMinus(_, _) | DConj(_, _):
            return True
        case Neg(child) | Minus(child, _) | Expect(child) | Dia(_, child):
            return uses_dist_connectives(child)
        case Conj(left, right):
            return uses_dist_connectives(left) or uses_dist_connectives(right)
    raise TypeError(f"not a formula: {f!r}")


def simplify(f: Formula) -> Formula:
    """Peephole cleanup: drop double negations, zero shifts, repeated and
    constant-true conjuncts, and fuse stacked shifts.  Value-preserving up
    to floating-point re-association."""
    return _simplify(f, {})


def _simplify(f: Formula, memo) -> Formula:
    hit = memo.get(id(f))
    if hit is not None:
        return hit
    match f:
        case Top():
            out = f
        case Neg(child):
            child = _simplify(child, memo)
            if isinstance(child, Neg):
                out = child.child
            elif child == Minus(TT, 1.0):
                out = TT
            else:
                out = Neg(child)
        case Minus(child, p):
            child = _simplify(child, memo)
            if p <= 0.0:
                out = child
            elif isinstance(child, Minus):
                out = Minus(child.child, min(child.value + p, 1.0))
            else:
                out = Minus(child, p)
        case Conj(left, right):
            left = _simplify(left, memo)
            right = _simplify(right, memo)
            if left == right or left == TT:
                out = right
            elif right == TT:
                out = left
            else:
                out = Conj(left, right)
        case Dia(action, child):
            out = Dia(action, _simplify(child, memo))
        case Expect(child):
            out = Expect(_simplify(child, memo))
        case DMinus(child, p):
            child = _simplify(child, memo)
            if p <= 0.0:
                out = child
            elif isinstance(child, DMinus):
                out = DMinus(child.child, min(child.value + p, 1.0))
            else:
                out = DMinus(child, p)
        case DConj(left, right):
            left = _simplify(left, memo)
            right = _simplify(right, memo)
            out = left if left == right else DConj(left, right)
        case _:
            raise TypeError(f"not a formula: {f!r}")
    memo[id(f)] = out
    return out


def _prob_text(p: float) -> str:
    text = repr(float(p))
    if "e" in text or "E" in text:
        text = format(float(p), ".20f").rstrip("0")
        if text.endswith("."):
            text += "0"
    return text


# precedence levels for rendering: disjunction-free output needs only
# conjunction (1) < shift (2) < atom (3)
def _level(f: Formula) -> int:
    match f:
        case Conj(_, _) | DConj(_, _):
            return 1
        case Minus(_, _) | DMinus(_, _):
            return 2
        case _:
            return 3


def _right_open(f: Formula) -> bool:
    """Whether the rendering of f ends inside a diamond's distribution tail.

    A following "- p" would then be captured at the distribution level on
    re-parse, so such children need explicit parentheses under a state
    shift.  Diamonds of the subdistribution sort (child is not a
    distribution formula) bind their argument as an atom and are closed.
    """
    match f:
        case Dia(_, child):
            return isinstance(child, (Expect, DMinus, DConj))
        case Neg(child):
            return _right_open(child)
        case Conj(_, right):
            return _right_open(right)
        case _:
            return False


def _wrap(f: Formula, minimum: int, close_open=False) -> str:
    text = to_text(f)
    if _level(f) < minimum or (close_open and _right_open(f)):
        return f"({text})"
    return text


def to_text(f: Formula) -> str:
    """Concrete syntax that parses back to an equal AST (same sort)."""
    match f:
        case Top():
            return "tt"
        case Neg(child):
            return "!" + _wrap(child, 3)
        case Minus(child, p):
            return f"{_wrap(child, 2, close_open=True)} - {_prob_text(p)}"
        case DMinus(child, p):
            return f"{_wrap(child, 2)} - {_prob_text(p)}"
        case Conj(left, right) | DConj(left, right):
            return f"{_wrap(left, 2)} & {_wrap(right, 2)}"
        case Expect(child):
            return f"[{to_text(child)}]"
        case Dia(action, child):
            if isinstance(child, Expect) or _level(child) == 3:
                return f"<{action}>{to_text(child)}"
            return f"<{action}>({to_text(child)})"
    raise TypeError(f"not a formula: {f!r}")
