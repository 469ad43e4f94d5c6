"""Recursive-descent parser for the concrete formula syntax.

Grammar (whitespace-insensitive)::

    state   := sconj ("|" sconj)*
    sconj   := sshift ("&" sshift)*
    sshift  := satom (("-" | "+") prob)*
    satom   := "tt" | "!" satom | "const(" prob ")"
             | "<" ident ">" diarg | "(" state ")"
    diarg   := dist | satom          -- bare state formula sugar for [.]
    dist    := dshift ("&" dshift)*
    dshift  := datom ("-" prob)*
    datom   := "[" state "]" | "(" dist ")"
    prob    := decimal literal in [0, 1]

The subdistribution sort uses the state grammar with "[" removed and the
diamond argument being a subdistribution atom.  Derived forms are desugared
while parsing: const(p) = tt - (1-p), x + p = !((!x) - p),
x | y = !(!x & !y), and a bare state formula under a diamond stands for its
induced distribution formula.  A "&" extension inside a diamond argument is
abandoned (not an error) if what follows is not a distribution formula, so
that the rest can continue at the state level.
"""

from __future__ import annotations

import re

from .errors import FormulaError
from .formulas import (
    SORT_DIST,
    SORT_STATE,
    SORT_SUBDIST,
    Conj,
    DConj,
    DMinus,
    Dia,
    Expect,
    Minus,
    Neg,
    TT,
    const,
    disj,
    plus,
)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<sym>[!&|\-+<>\[\]()]))"
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            where = len(text) - len(rest)
            raise FormulaError(f"unexpected character {rest[0]!r} at position {where}", where)
        if match.group("num"):
            tokens.append(("num", match.group("num"), match.start("num")))
        elif match.group("ident"):
            tokens.append(("ident", match.group("ident"), match.start("ident")))
        else:
            tokens.append(("sym", match.group("sym"), match.start("sym")))
        pos = match.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    # -- token helpers ----------------------------------------------------
    def peek(self):
        return self.tokens[self.pos]

    def fail(self, message):
        kind, value, where = self.peek()
        shown = value if kind != "eof" else "end of input"
        raise FormulaError(f"{message}, found {shown!r} at position {where}", where)

    def accept(self, kind, value=None):
        tok = self.peek()
        if tok[0] == kind and (value is None or tok[1] == value):
            self.pos += 1
            return tok
        return None

    def expect(self, kind, value=None, what=None):
        tok = self.accept(kind, value)
        if tok is None:
            self.fail(f"expected {what or value or kind}")
        return tok

    def prob(self):
        tok = self.expect("num", what="probability literal")
        value = float(tok[1])
        if not 0.0 <= value <= 1.0:
            raise FormulaError(
                f"probability literal {tok[1]} out of [0, 1] at position {tok[2]}", tok[2]
            )
        return value

    # -- state sort --------------------------------------------------------
    def state_formula(self):
        left = self.state_conj()
        while self.accept("sym", "|"):
            left = disj(left, self.state_conj())
        return left

    def state_conj(self):
        left = self.state_shift()
        while self.accept("sym", "&"):
            left = Conj(left, self.state_shift())
        return left

    def state_shift(self):
        out = self.state_atom()
        while True:
            if self.accept("sym", "-"):
                out = Minus(out, self.prob())
            elif self.accept("sym", "+"):
                out = plus(out, self.prob())
            else:
                return out

    def state_atom(self):
        tok = self.peek()
        if self.accept("ident", "tt"):
            return TT
        if self.accept("sym", "!"):
            return Neg(self.state_atom())
        if self.accept("ident", "const"):
            self.expect("sym", "(")
            value = self.prob()
            self.expect("sym", ")")
            return const(value)
        if self.accept("sym", "<"):
            action = self.expect("ident", what="action name")[1]
            self.expect("sym", ">")
            return Dia(action, self.dia_arg())
        if self.accept("sym", "("):
            inner = self.state_formula()
            self.expect("sym", ")")
            return inner
        self.fail("expected a state formula")

    def dia_arg(self):
        save = self.pos
        try:
            return self.dist_formula()
        except FormulaError:
            self.pos = save
        return Expect(self.state_atom())

    # -- distribution sort ---------------------------------------------------
    def dist_formula(self):
        left = self.dist_shift()
        while True:
            save = self.pos
            if not self.accept("sym", "&"):
                return left
            try:
                right = self.dist_shift()
            except FormulaError:
                self.pos = save
                return left
            left = DConj(left, right)

    def dist_shift(self):
        out = self.dist_atom()
        while self.accept("sym", "-"):
            out = DMinus(out, self.prob())
        return out

    def dist_atom(self):
        if self.accept("sym", "["):
            inner = self.state_formula()
            self.expect("sym", "]")
            return Expect(inner)
        if self.accept("sym", "("):
            inner = self.dist_formula()
            self.expect("sym", ")")
            return inner
        self.fail("expected a distribution formula ('[' or '(')")

    # -- subdistribution sort -------------------------------------------------
    def subdist_formula(self):
        left = self.subdist_conj()
        while self.accept("sym", "|"):
            left = disj(left, self.subdist_conj())
        return left

    def subdist_conj(self):
        left = self.subdist_shift()
        while self.accept("sym", "&"):
            left = Conj(left, self.subdist_shift())
        return left

    def subdist_shift(self):
        out = self.subdist_atom()
        while True:
            if self.accept("sym", "-"):
                out = Minus(out, self.prob())
            elif self.accept("sym", "+"):
                out = plus(out, self.prob())
            else:
                return out

    def subdist_atom(self):
        if self.accept("ident", "tt"):
            return TT
        if self.accept("sym", "!"):
            return Neg(self.subdist_atom())
        if self.accept("ident", "const"):
            self.expect("sym", "(")
            value = self.prob()
            self.expect("sym", ")")
            return const(value)
        if self.accept("sym", "<"):
            action = self.expect("ident", what="action name")[1]
            self.expect("sym", ">")
            return Dia(action, self.subdist_atom())
        if self.accept("sym", "("):
            inner = self.subdist_formula()
            self.expect("sym", ")")
            return inner
        self.fail("expected a subdistribution formula")


def parse_formula(text: str, sort: str = SORT_STATE):
    """Parse concrete syntax into a desugared AST of the requested sort."""
    parser = _Parser(text)
    if sort == SORT_STATE:
        out = parser.state_formula()
    elif sort == SORT_DIST:
        out = parser.dist_formula()
    elif sort == SORT_SUBDIST:
        out = parser.subdist_formula()
    else:
        raise ValueError(f"unknown sort {sort!r} (expected one of {SORT_STATE}/{SORT_DIST}/{SORT_SUBDIST})")
    if parser.peek()[0] != "eof":
        parser.fail("expected end of input")
    return out
