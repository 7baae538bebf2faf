"""Exact multivariate polynomials and rational functions over Q.

Transition weights of parametric models are rational functions in the
probability parameters.  Everything here is exact (fractions.Fraction);
no floating point is ever involved.  Normalization keeps the denominator's
leading coefficient (graded-lex over alphabetically sorted parameter
names) positive and strips common rational content, but no polynomial GCD
is computed: equality is decided by cross-multiplication.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd, lcm

# A monomial is a tuple of (name, exponent) pairs, sorted by name, all
# exponents positive.  The empty tuple is the constant monomial.
Monomial = tuple


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    d = dict(a)
    for name, e in b:
        d[name] = d.get(name, 0) + e
    return tuple(sorted(d.items()))


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_key(m: Monomial):
    # Graded lexicographic: total degree first, then lex over the
    # alphabetically sorted variable names (higher exponent earlier).
    return (_mono_degree(m), tuple((name, e) for name, e in m))


def _frac_gcd(a: Fraction, b: Fraction) -> Fraction:
    if a == 0:
        return abs(b)
    if b == 0:
        return abs(a)
    return Fraction(gcd(a.numerator * b.denominator, b.numerator * a.denominator),
                    a.denominator * b.denominator)


class RatFunError(ValueError):
    pass


class Polynomial:
    """Polynomial over Q in named indeterminates, sparse representation."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = {m: Fraction(c) for m, c in dict(terms).items() if c != 0}

    @classmethod
    def constant(cls, c) -> "Polynomial":
        return cls({(): Fraction(c)})

    @classmethod
    def variable(cls, name: str) -> "Polynomial":
        return cls({((name, 1),): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def variables(self) -> set:
        out = set()
        for m in self.terms:
            out.update(name for name, _ in m)
        return out

    def leading_coefficient(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        m = max(self.terms, key=_mono_key)
        return self.terms[m]

    def content(self) -> Fraction:
        g = Fraction(0)
        for c in self.terms.values():
            g = _frac_gcd(g, c)
        return g

    def __add__(self, other: "Polynomial") -> "Polynomial":
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, Fraction(0)) + c
        return Polynomial(terms)

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        terms = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = _mono_mul(m1, m2)
                terms[m] = terms.get(m, Fraction(0)) + c1 * c2
        return Polynomial(terms)

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        return Polynomial({m: coeff * c for m, coeff in self.terms.items()})

    def evaluate(self, valuation) -> Fraction:
        total = Fraction(0)
        for m, c in self.terms.items():
            v = c
            for name, e in m:
                if name not in valuation:
                    raise RatFunError(f"no value assigned to parameter '{name}'")
                v *= Fraction(valuation[name]) ** e
            total += v
        return total

    def __eq__(self, other) -> bool:
        return isinstance(other, Polynomial) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=_mono_key, reverse=True):
            c = self.terms[m]
            factors = []
            for name, e in m:
                factors.extend([name] * e)
            if not factors:
                body = _render_frac(abs(c))
            elif abs(c) == 1:
                body = "*".join(factors)
            else:
                body = "*".join([_render_frac(abs(c))] + factors)
            if not parts:
                parts.append(body if c > 0 else "-" + body)
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    def __repr__(self):
        return f"Polynomial({self.render()})"


def _render_frac(c: Fraction) -> str:
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


class RationalFunction:
    """Quotient of two polynomials, normalized but not GCD-reduced."""

    __slots__ = ("num", "den")

    def __init__(self, num: Polynomial, den: Polynomial = None):
        if den is None:
            den = Polynomial.constant(1)
        if den.is_zero():
            raise RatFunError("zero denominator polynomial")
        self.num, self.den = _normalize(num, den)

    @classmethod
    def constant(cls, c) -> "RationalFunction":
        return cls(Polynomial.constant(c))

    @classmethod
    def variable(cls, name: str) -> "RationalFunction":
        return cls(Polynomial.variable(name))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num == self.den

    def variables(self) -> set:
        return self.num.variables() | self.den.variables()

    def constant_value(self):
        """The Fraction value if this is a constant, else None."""
        if self.num.variables() or self.den.variables():
            return None
        n = self.num.terms.get((), Fraction(0))
        d = self.den.terms.get((), Fraction(0))
        return n / d

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.den + other.num * self.den,
                                self.den * other.den)

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.den - other.num * self.den,
                                self.den * other.den)

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        if other.is_zero():
            raise RatFunError("division by the zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den)

    def evaluate(self, valuation) -> Fraction:
        d = self.den.evaluate(valuation)
        if d == 0:
            raise RatFunError("denominator evaluates to zero at this valuation")
        return self.num.evaluate(valuation) / d

    def substitute(self, partial) -> "RationalFunction":
        """Substitute a subset of the parameters by rational values."""
        def sub_poly(p: Polynomial) -> RationalFunction:
            acc = RationalFunction.constant(0)
            for m, c in p.terms.items():
                t = RationalFunction.constant(c)
                for name, e in m:
                    base = (RationalFunction.constant(partial[name])
                            if name in partial else RationalFunction.variable(name))
                    for _ in range(e):
                        t = t * base
                acc = acc + t
            return acc

        den = sub_poly(self.den)
        if den.is_zero():
            raise RatFunError("denominator vanishes under substitution")
        return sub_poly(self.num) / den

    def equals(self, other: "RationalFunction") -> bool:
        return self.num * other.den == other.num * self.den

    def __eq__(self, other) -> bool:
        return isinstance(other, RationalFunction) and self.equals(other)

    def __hash__(self):
        # Weak but consistent with cross-multiplication equality.
        return hash(len(self.num.terms) + len(self.den.terms))

    def render(self) -> str:
        if self.den == Polynomial.constant(1):
            return self.num.render()
        num = self.num.render()
        den = self.den.render()
        if len(self.num.terms) > 1 or num.startswith("-"):
            num = f"({num})"
        if len(self.den.terms) > 1 or "*" in den or "/" in den or den.startswith("-"):
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"RationalFunction({self.render()})"


def _normalize(num: Polynomial, den: Polynomial):
    if num.is_zero():
        return Polynomial({}), Polynomial.constant(1)
    g = _frac_gcd(num.content(), den.content())
    inv = 1 / g
    num, den = num.scale(inv), den.scale(inv)
    if den.leading_coefficient() < 0:
        num, den = -num, -den
    return num, den


def arith(op: str, f: RationalFunction, g: RationalFunction) -> RationalFunction:
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    if op == "div":
        return f / g
    raise RatFunError(f"unknown operation '{op}'")


# ---------------------------------------------------------------------------
# Expression syntax: + - * / ( ), integer and a/b literals, parameter names.

_TOKEN_RE = re.compile(r"\s*(?:(?P<nat>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
                       r"|(?P<op>[-+*/()]))")


def tokenize_expr(text: str):
    tokens, pos = [], 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise RatFunError(f"unexpected character {text[pos:pos+1]!r} "
                              f"in expression at offset {pos}")
        if m.lastgroup == "nat":
            tokens.append(("nat", int(m.group("nat"))))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident")))
        else:
            tokens.append(("op", m.group("op")))
        pos = m.end()
    return tokens


class ExprCursor:
    """Token cursor shared with the model DSL's weight expressions."""

    def __init__(self, tokens):
        self.tokens = list(tokens)
        self.index = 0

    def peek(self):
        return self.tokens[self.index] if self.index < len(self.tokens) else None

    def advance(self):
        tok = self.peek()
        if tok is not None:
            self.index += 1
        return tok


def parse_expr(cursor: ExprCursor) -> RationalFunction:
    """Parse an additive expression starting at the cursor."""
    value = _parse_term(cursor)
    while True:
        tok = cursor.peek()
        if tok == ("op", "+"):
            cursor.advance()
            value = value + _parse_term(cursor)
        elif tok == ("op", "-"):
            cursor.advance()
            value = value - _parse_term(cursor)
        else:
            return value


def _parse_term(cursor: ExprCursor) -> RationalFunction:
    value = _parse_factor(cursor)
    while True:
        tok = cursor.peek()
        if tok == ("op", "*"):
            cursor.advance()
            value = value * _parse_factor(cursor)
        elif tok == ("op", "/"):
            cursor.advance()
            value = value / _parse_factor(cursor)
        else:
            return value


def _parse_factor(cursor: ExprCursor) -> RationalFunction:
    tok = cursor.advance()
    if tok is None:
        raise RatFunError("unexpected end of expression")
    kind, value = tok
    if kind == "nat":
        return RationalFunction.constant(value)
    if kind == "ident":
        return RationalFunction.variable(value)
    if tok == ("op", "-"):
        return -_parse_factor(cursor)
    if tok == ("op", "("):
        inner = parse_expr(cursor)
        if cursor.advance() != ("op", ")"):
            raise RatFunError("missing closing parenthesis in expression")
        return inner
    raise RatFunError(f"unexpected token {value!r} in expression")


def parse_ratfun(text: str) -> RationalFunction:
    cursor = ExprCursor(tokenize_expr(text))
    value = parse_expr(cursor)
    if cursor.peek() is not None:
        raise RatFunError(f"trailing input in expression: {cursor.peek()[1]!r}")
    return value
