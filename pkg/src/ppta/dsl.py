"""Text format for models: parser and canonical serializer.

Grammar sketch (// comments run to end of line):

    pppta NAME
    clocks c, d;
    clock_params T in [0, 5];
    prob_params p in [1/10, 9/10];
    location idle init invariant c <= T;
    edge idle -- send [c >= 1] -> { p : reset {c} goto idle ; 1 - p : goto done };

Weight expressions use + - * / ( ) over naturals and probability
parameters.  Diagonal atoms (a clock as a bound) and undeclared
identifiers are parse errors.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from . import ratfun
from .constraints import Atom, ClockConstraint, Rel
from .model import ParametricDistribution, Pppta
from .ratfun import RatFunError, RationalFunction


class DslError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "nat" | "punct" | "eof"
    value: str
    line: int
    col: int


_PUNCTS = ("--", "->", "&&", "<=", ">=", "==", "<", ">", ";", ",", "[", "]",
           "{", "}", "(", ")", ":", "+", "-", "*", "/")
_LEX_RE = re.compile(
    r"(?P<ws>\s+)|(?P<comment>//[^\n]*)|(?P<nat>\d+)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct>" + "|".join(re.escape(p) for p in _PUNCTS) + r")")

_RELS = {"<=": Rel.LE, "<": Rel.LT, "==": Rel.EQ, ">=": Rel.GE, ">": Rel.GT}


def tokenize(text: str):
    tokens, pos, line, linestart = [], 0, 1, 0
    while pos < len(text):
        m = _LEX_RE.match(text, pos)
        if m is None:
            raise DslError(f"unexpected character {text[pos]!r}",
                           line, pos - linestart + 1)
        chunk = m.group(0)
        if m.lastgroup not in ("ws", "comment"):
            tokens.append(Token(m.lastgroup, chunk, line, pos - linestart + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            linestart = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, len(text) - linestart + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.clocks = []
        self.clock_params = {}
        self.prob_params = {}
        self.locations = []
        self.initial = None
        self.invariants = {}
        self.edges = []  # (src, action, guard, branches) raw; resolved later

    # -- token helpers ------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        t = self.tokens[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def accept(self, kind, value=None):
        t = self.peek()
        if t.kind == kind and (value is None or t.value == value):
            return self.next()
        return None

    def expect(self, kind, value=None, what=None) -> Token:
        t = self.accept(kind, value)
        if t is None:
            got = self.peek()
            want = what or value or kind
            raise DslError(f"expected {want}, got {got.value or 'end of input'!r}",
                           got.line, got.col)
        return t

    def fail(self, message, tok=None):
        tok = tok or self.peek()
        raise DslError(message, tok.line, tok.col)

    # -- grammar ------------------------------------------------------

    def parse(self) -> Pppta:
        self.expect("ident", "pppta")
        name = self.expect("ident", what="model name").value
        while self.peek().kind != "eof":
            kw = self.expect("ident", what="declaration keyword")
            if kw.value == "clocks":
                self._clocks()
            elif kw.value == "clock_params":
                self._clock_params()
            elif kw.value == "prob_params":
                self._prob_params()
            elif kw.value == "location":
                self._location()
            elif kw.value == "edge":
                self._edge()
            else:
                self.fail(f"unknown declaration '{kw.value}'", kw)
        return self._resolve(name)

    def _ident_list(self):
        out = [self.expect("ident", what="identifier").value]
        while self.accept("punct", ","):
            out.append(self.expect("ident", what="identifier").value)
        return out

    def _declare(self, name: str, tok: Token):
        if (name in self.clocks or name in self.clock_params
                or name in self.prob_params or name in self.locations):
            self.fail(f"duplicate declaration of '{name}'", tok)

    def _clocks(self):
        for name in self._ident_list():
            self._declare(name, self.peek())
            self.clocks.append(name)
        self.expect("punct", ";")

    def _nat(self) -> int:
        return int(self.expect("nat", what="natural number").value)

    def _rat(self) -> Fraction:
        n = self._nat()
        if self.accept("punct", "/"):
            d = self._nat()
            if d == 0:
                self.fail("zero denominator in rational literal")
            return Fraction(n, d)
        return Fraction(n)

    def _clock_params(self):
        while True:
            tok = self.peek()
            name = self.expect("ident", what="parameter name").value
            self._declare(name, tok)
            self.expect("ident", "in")
            self.expect("punct", "[")
            lo = self._nat()
            self.expect("punct", ",")
            hi = self._nat()
            self.expect("punct", "]")
            if lo > hi:
                self.fail(f"empty domain [{lo},{hi}] for '{name}'", tok)
            self.clock_params[name] = (lo, hi)
            if not self.accept("punct", ","):
                break
        self.expect("punct", ";")

    def _prob_params(self):
        while True:
            tok = self.peek()
            name = self.expect("ident", what="parameter name").value
            self._declare(name, tok)
            self.expect("ident", "in")
            self.expect("punct", "[")
            lo = self._rat()
            self.expect("punct", ",")
            hi = self._rat()
            self.expect("punct", "]")
            if lo > hi:
                self.fail(f"empty domain [{lo},{hi}] for '{name}'", tok)
            self.prob_params[name] = (lo, hi)
            if not self.accept("punct", ","):
                break
        self.expect("punct", ";")

    def _location(self):
        tok = self.peek()
        name = self.expect("ident", what="location name").value
        self._declare(name, tok)
        self.locations.append(name)
        if self.accept("ident", "init"):
            if self.initial is not None:
                self.fail("more than one init location", tok)
            self.initial = name
        if self.accept("ident", "invariant"):
            self.invariants[name] = self._constraint()
        self.expect("punct", ";")

    def _constraint(self) -> list:
        atoms = [self._atom()]
        while self.accept("punct", "&&"):
            atoms.append(self._atom())
        return atoms

    def _atom(self):
        ctok = self.expect("ident", what="clock name")
        rtok = self.peek()
        if rtok.kind != "punct" or rtok.value not in _RELS:
            self.fail("expected a relation (<= < == >= >)", rtok)
        self.next()
        btok = self.peek()
        if btok.kind == "nat":
            self.next()
            bound = int(btok.value)
        elif btok.kind == "ident":
            self.next()
            bound = btok.value
        else:
            self.fail("expected a natural number or parameter as bound", btok)
        return (ctok, _RELS[rtok.value], btok, bound)

    def _edge(self):
        src = self.expect("ident", what="source location")
        self.expect("punct", "--")
        action = self.expect("ident", what="action name")
        self.expect("punct", "[")
        if self.accept("punct", "]"):
            guard = []
        else:
            guard = self._constraint()
            self.expect("punct", "]")
        self.expect("punct", "->")
        self.expect("punct", "{")
        branches = [self._branch()]
        while self.accept("punct", ";"):
            branches.append(self._branch())
        self.expect("punct", "}")
        self.expect("punct", ";")
        self.edges.append((src, action, guard, branches))

    def _branch(self):
        weight = self._weight_expr()
        resets = []
        if self.accept("ident", "reset"):
            self.expect("punct", "{")
            if not self.accept("punct", "}"):
                resets = self._ident_list()
                self.expect("punct", "}")
        self.expect("ident", "goto")
        target = self.expect("ident", what="target location")
        return (weight, resets, target)

    def _weight_expr(self) -> RationalFunction:
        # Collect tokens up to the ':' at bracket depth 0, then hand the
        # slice to the shared rational-expression parser.
        start = self.peek()
        collected, depth = [], 0
        while True:
            t = self.peek()
            if t.kind == "eof":
                self.fail("unterminated branch weight (missing ':')", start)
            if t.kind == "punct" and t.value == ":" and depth == 0:
                self.next()
                break
            if t.kind == "punct" and t.value == "(":
                depth += 1
            elif t.kind == "punct" and t.value == ")":
                depth -= 1
            self.next()
            if t.kind == "nat":
                collected.append(("nat", int(t.value)))
            elif t.kind == "ident":
                collected.append(("ident", t.value))
            elif t.kind == "punct" and t.value in "+-*/()":
                collected.append(("op", t.value))
            else:
                self.fail(f"unexpected {t.value!r} in branch weight", t)
        try:
            cursor = ratfun.ExprCursor(collected)
            value = ratfun.parse_expr(cursor)
            if cursor.peek() is not None:
                raise RatFunError("trailing tokens")
        except RatFunError as e:
            raise DslError(f"bad branch weight: {e}", start.line, start.col) from None
        return value

    # -- resolution ---------------------------------------------------

    def _resolve_constraint(self, raw_atoms) -> ClockConstraint:
        atoms = []
        for ctok, rel, btok, bound in raw_atoms:
            if ctok.value not in self.clocks:
                self.fail(f"'{ctok.value}' is not a declared clock", ctok)
            if isinstance(bound, str):
                if bound in self.clocks:
                    self.fail(f"diagonal constraint: clock '{bound}' used as a bound",
                              btok)
                if bound not in self.clock_params:
                    self.fail(f"'{bound}' is not a declared clock parameter", btok)
            atoms.append(Atom(ctok.value, rel, bound))
        return ClockConstraint(atoms)

    def _resolve(self, name: str) -> Pppta:
        eof = self.tokens[-1]
        if not self.locations:
            raise DslError("model declares no locations", eof.line, eof.col)
        if self.initial is None:
            raise DslError("no init location declared", eof.line, eof.col)
        invariants = {l: self._resolve_constraint(raw)
                      for l, raw in self.invariants.items()}
        guards, transitions = {}, {}
        for src, action, raw_guard, raw_branches in self.edges:
            if src.value not in self.locations:
                self.fail(f"'{src.value}' is not a declared location", src)
            key = (src.value, action.value)
            if key in transitions:
                self.fail(f"duplicate edge {src.value} -- {action.value}", action)
            branches = {}
            for weight, resets, target in raw_branches:
                if target.value not in self.locations:
                    self.fail(f"'{target.value}' is not a declared location", target)
                unknown = [c for c in resets if c not in self.clocks]
                if unknown:
                    self.fail(f"'{unknown[0]}' in reset set is not a declared clock",
                              target)
                bad = weight.variables() - set(self.prob_params)
                if bad:
                    self.fail(f"'{sorted(bad)[0]}' in branch weight is not a "
                              f"declared probability parameter", src)
                k = (frozenset(resets), target.value)
                branches[k] = branches[k] + weight if k in branches else weight
            guards[key] = self._resolve_constraint(raw_guard)
            transitions[key] = ParametricDistribution(branches)
        return Pppta(name=name, clocks=tuple(self.clocks),
                     clock_params=self.clock_params,
                     prob_params=self.prob_params,
                     locations=tuple(self.locations), initial=self.initial,
                     invariants=invariants, guards=guards,
                     transitions=transitions)


def parse(text: str) -> Pppta:
    if not isinstance(text, str):
        raise DslError("model source must be text")
    return _Parser(text).parse()


def parse_file(path) -> Pppta:
    with open(path, "r", encoding="utf-8") as fh:
        return parse(fh.read())


# ---------------------------------------------------------------------------
# Serialization (canonical: sorted declarations, normalized weights)

def _render_rat(v: Fraction) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _render_constraint(phi: ClockConstraint) -> str:
    from .constraints import _atom_key
    return " && ".join(a.render() for a in sorted(phi.atoms, key=_atom_key))


def serialize(m: Pppta) -> str:
    lines = [f"pppta {m.name}", ""]
    if m.clocks:
        lines.append("clocks " + ", ".join(m.clocks) + ";")
    if m.clock_params:
        lines.append("clock_params " + ", ".join(
            f"{p} in [{lo}, {hi}]" for p, (lo, hi) in m.clock_params.items()) + ";")
    if m.prob_params:
        lines.append("prob_params " + ", ".join(
            f"{p} in [{_render_rat(lo)}, {_render_rat(hi)}]"
            for p, (lo, hi) in m.prob_params.items()) + ";")
    lines.append("")
    for l in m.locations:
        parts = ["location", l]
        if l == m.initial:
            parts.append("init")
        inv = m.invariants[l]
        if not inv.is_true():
            parts.append("invariant " + _render_constraint(inv))
        lines.append(" ".join(parts) + ";")
    lines.append("")
    for (l, a), dist in m.transitions.items():
        guard = m.guards[(l, a)]
        gtxt = "" if guard.is_true() else _render_constraint(guard)
        btxts = []
        for (resets, target), w in dist.branches.items():
            b = w.render() + " : "
            if resets:
                b += "reset {" + ", ".join(sorted(resets)) + "} "
            b += f"goto {target}"
            btxts.append(b)
        lines.append(f"edge {l} -- {a} [{gtxt}] -> {{ " + " ; ".join(btxts) + " };")
    return "\n".join(lines).rstrip() + "\n"
