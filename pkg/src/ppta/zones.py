"""Clock zones as difference bounded matrices.

Clock parameters are instantiated before any zone is built, so bounds
are plain integers.  Index 0 is the reference clock (constant 0);
entry (i, j) bounds x_i - x_j.  Every operation returns a canonical
matrix (Floyd-Warshall tightened), and emptiness shows up as a
negative diagonal.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Tuple

from .constraints import Atom, ClockConstraint, ConstraintError, Rel

# A bound is (value, strict) with value an int or None for +infinity.
# +infinity is always non-strict.
INF = (None, False)
ZERO = (0, False)


def bound_le(a, b) -> bool:
    """a is at least as tight as b."""
    av, astrict = a
    bv, bstrict = b
    if bv is None:
        return True
    if av is None:
        return False
    if av != bv:
        return av < bv
    return astrict or not bstrict


def bound_add(a, b):
    av, astrict = a
    bv, bstrict = b
    if av is None or bv is None:
        return INF
    return (av + bv, astrict or bstrict)


def bound_min(a, b):
    return a if bound_le(a, b) else b


class ZoneError(ValueError):
    pass


class Dbm:
    """Canonical DBM over a fixed clock tuple; immutable once built."""

    __slots__ = ("clocks", "m", "_hash")

    def __init__(self, clocks: Sequence[str], matrix, canonical=False):
        self.clocks = tuple(clocks)
        self.m = tuple(tuple(row) for row in matrix)
        if not canonical:
            self.m = _canonicalize(self.m)
        self._hash = None

    # -- constructors -------------------------------------------------

    @classmethod
    def universal(cls, clocks: Sequence[str]) -> "Dbm":
        n = len(clocks) + 1
        m = [[INF] * n for _ in range(n)]
        for i in range(n):
            m[i][i] = ZERO
            m[0][i] = ZERO  # 0 - x_i <= 0, i.e. x_i >= 0
        return cls(clocks, m, canonical=True)

    @classmethod
    def empty(cls, clocks: Sequence[str]) -> "Dbm":
        n = len(clocks) + 1
        m = [[ZERO] * n for _ in range(n)]
        m[0][0] = (-1, False)
        return cls(clocks, m, canonical=True)

    @classmethod
    def from_constraint(cls, clocks: Sequence[str], phi: ClockConstraint) -> "Dbm":
        z = cls.universal(clocks)
        m = [list(row) for row in z.m]
        for a in phi.atoms:
            if isinstance(a.bound, str):
                raise ZoneError(f"parametric atom '{a.render()}' in zone construction")
            i = z._index(a.clock)
            v = a.bound
            if a.rel in (Rel.LE, Rel.LT, Rel.EQ):
                m[i][0] = bound_min(m[i][0], (v, a.rel is Rel.LT))
            if a.rel in (Rel.GE, Rel.GT, Rel.EQ):
                m[0][i] = bound_min(m[0][i], (-v, a.rel is Rel.GT))
        return cls(clocks, m)

    # -- basics -------------------------------------------------------

    def _index(self, clock: str) -> int:
        try:
            return self.clocks.index(clock) + 1
        except ValueError:
            raise ZoneError(f"unknown clock '{clock}'") from None

    def _check_compat(self, other: "Dbm"):
        if self.clocks != other.clocks:
            raise ZoneError("clock set mismatch between zones")

    def is_empty(self) -> bool:
        return any(not bound_le(ZERO, self.m[i][i]) for i in range(len(self.m)))

    def __eq__(self, other):
        if not isinstance(other, Dbm):
            return NotImplemented
        if self.clocks != other.clocks:
            return False
        if self.is_empty() or other.is_empty():
            return self.is_empty() == other.is_empty()
        return self.m == other.m

    def __hash__(self):
        if self._hash is None:
            if self.is_empty():
                self._hash = hash((self.clocks, "empty"))
            else:
                self._hash = hash((self.clocks, self.m))
        return self._hash

    # -- operations ---------------------------------------------------

    def intersect(self, *others: "Dbm") -> "Dbm":
        m = [list(row) for row in self.m]
        for other in others:
            self._check_compat(other)
            for i in range(len(m)):
                for j in range(len(m)):
                    m[i][j] = bound_min(m[i][j], other.m[i][j])
        return Dbm(self.clocks, m)

    def intersect_constraint(self, phi: ClockConstraint) -> "Dbm":
        return self.intersect(Dbm.from_constraint(self.clocks, phi))

    def up(self) -> "Dbm":
        """Time successors: drop upper bounds on individual clocks."""
        if self.is_empty():
            return self
        m = [list(row) for row in self.m]
        for i in range(1, len(m)):
            m[i][0] = INF
        return Dbm(self.clocks, m)

    def down(self) -> "Dbm":
        """Time predecessors: relax lower bounds toward 0."""
        if self.is_empty():
            return self
        m = [list(row) for row in self.m]
        for i in range(1, len(m)):
            m[0][i] = ZERO
        return Dbm(self.clocks, m)

    def reset(self, resets: Iterable[str]) -> "Dbm":
        """Image under setting the given clocks to 0."""
        if self.is_empty():
            return self
        m = [list(row) for row in self.m]
        for c in resets:
            i = self._index(c)
            for j in range(len(m)):
                m[i][j] = m[0][j]
                m[j][i] = m[j][0]
            m[i][i] = ZERO
        return Dbm(self.clocks, m)

    def free(self, clocks: Iterable[str]) -> "Dbm":
        """Forget all constraints on the given clocks (keep x >= 0)."""
        if self.is_empty():
            return self
        m = [list(row) for row in self.m]
        for c in clocks:
            i = self._index(c)
            for j in range(len(m)):
                m[i][j] = INF
                m[j][i] = INF
            m[i][i] = ZERO
            m[0][i] = ZERO
        return Dbm(self.clocks, m)

    def inverse_reset(self, resets: Iterable[str]) -> "Dbm":
        """Preimage under reset: {nu | nu[R] in Z}."""
        resets = list(resets)
        zero_atoms = ClockConstraint(Atom(c, Rel.EQ, 0) for c in resets)
        pinned = self.intersect_constraint(zero_atoms)
        if pinned.is_empty():
            return Dbm.empty(self.clocks)
        return pinned.free(resets)

    def includes(self, other: "Dbm") -> bool:
        """Set inclusion: other is a subset of self."""
        self._check_compat(other)
        if other.is_empty():
            return True
        if self.is_empty():
            return False
        n = len(self.m)
        for i in range(n):
            for j in range(n):
                if not bound_le(other.m[i][j], self.m[i][j]):
                    return False
        return True

    def contains(self, tau: Mapping[str, Fraction]) -> bool:
        vals = [Fraction(0)] + [Fraction(tau[c]) for c in self.clocks]
        n = len(self.m)
        for i in range(n):
            for j in range(n):
                v, strict = self.m[i][j]
                if v is None:
                    continue
                d = vals[i] - vals[j]
                if (d >= v) if strict else (d > v):
                    return False
        return True

    def render(self) -> str:
        """Stable rendering as difference constraints, for goldens."""
        if self.is_empty():
            return "false"
        names = ("0",) + self.clocks
        parts = []
        n = len(self.m)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                v, strict = self.m[i][j]
                if v is None:
                    continue
                if i == 0 and v == 0 and not strict:
                    continue  # x >= 0 is implicit
                rel = "<" if strict else "<="
                lhs = names[i] if j == 0 else (names[j] if i == 0 else f"{names[i]} - {names[j]}")
                if i == 0:
                    rel = ">" if strict else ">="
                    parts.append(f"{lhs} {rel} {-v}")
                else:
                    parts.append(f"{lhs} {rel} {v}")
        return " && ".join(parts) if parts else "true"

    def __repr__(self):
        return f"Dbm({self.render()})"


def _canonicalize(m):
    n = len(m)
    m = [list(row) for row in m]
    for k in range(n):
        for i in range(n):
            ik = m[i][k]
            if ik == INF:
                continue
            for j in range(n):
                via = bound_add(ik, m[k][j])
                if not bound_le(m[i][j], via):
                    m[i][j] = via
    # Any negative diagonal means empty; collapse to the canonical empty form.
    if any(not bound_le(ZERO, m[i][i]) for i in range(n)):
        m = [[ZERO] * n for _ in range(n)]
        m[0][0] = (-1, False)
        return tuple(tuple(row) for row in m)
    # Clamp lower bounds through x >= 0 (row 0 already participates in FW).
    return tuple(tuple(row) for row in m)
