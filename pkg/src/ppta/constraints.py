"""Parametric clock constraints and combined clock/parameter valuations.

Constraints are conjunctions of non-diagonal atoms ``clock REL bound``
where the bound is either a natural number or a clock parameter.
Diagonal atoms are rejected at construction time.  Clock values are
exact rationals; parameter values are naturals.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

Bound = Union[int, str]  # natural constant or clock-parameter name


class Rel(str, enum.Enum):
    LE = "<="
    LT = "<"
    EQ = "=="
    GE = ">="
    GT = ">"

    @property
    def is_upper(self) -> bool:
        return self in (Rel.LE, Rel.LT)

    @property
    def is_lower(self) -> bool:
        return self in (Rel.GE, Rel.GT)

    @property
    def is_strict(self) -> bool:
        return self in (Rel.LT, Rel.GT)


class ConstraintError(ValueError):
    pass


def _check(value, rel: Rel, bound) -> bool:
    if rel is Rel.LE:
        return value <= bound
    if rel is Rel.LT:
        return value < bound
    if rel is Rel.EQ:
        return value == bound
    if rel is Rel.GE:
        return value >= bound
    return value > bound


@dataclass(frozen=True)
class Atom:
    clock: str
    rel: Rel
    bound: Bound

    def __post_init__(self):
        if isinstance(self.bound, int) and self.bound < 0:
            raise ConstraintError(f"negative constant bound in atom on '{self.clock}'")

    def substitute(self, gamma: Mapping[str, int]) -> "Atom":
        if isinstance(self.bound, str) and self.bound in gamma:
            return Atom(self.clock, self.rel, int(gamma[self.bound]))
        return self

    def is_parametric(self) -> bool:
        return isinstance(self.bound, str)

    def render(self) -> str:
        return f"{self.clock} {self.rel.value} {self.bound}"


class ClockConstraint:
    """Conjunction of atoms; the empty conjunction is `true`.

    Redundant equal-form atoms (same clock, same bound direction,
    comparable bounds) are pruned, keeping the strongest.
    """

    __slots__ = ("atoms",)

    def __init__(self, atoms=()):
        self.atoms = tuple(_prune(atoms))

    @classmethod
    def true(cls) -> "ClockConstraint":
        return cls(())

    def is_true(self) -> bool:
        return not self.atoms

    def clocks(self) -> set:
        return {a.clock for a in self.atoms}

    def parameters(self) -> set:
        return {a.bound for a in self.atoms if isinstance(a.bound, str)}

    def conjoin(self, other: "ClockConstraint") -> "ClockConstraint":
        return ClockConstraint(self.atoms + other.atoms)

    def substitute(self, gamma: Mapping[str, int]) -> "ClockConstraint":
        return ClockConstraint(a.substitute(gamma) for a in self.atoms)

    def has_strict(self) -> bool:
        return any(a.rel.is_strict for a in self.atoms)

    def render(self) -> str:
        if not self.atoms:
            return "true"
        return " && ".join(a.render() for a in self.atoms)

    def __eq__(self, other):
        return (isinstance(other, ClockConstraint)
                and sorted(self.atoms, key=_atom_key) == sorted(other.atoms, key=_atom_key))

    def __hash__(self):
        return hash(tuple(sorted(self.atoms, key=_atom_key)))

    def __repr__(self):
        return f"ClockConstraint({self.render()})"


def _atom_key(a: Atom):
    return (a.clock, a.rel.value, str(a.bound), isinstance(a.bound, str))


def _prune(atoms):
    """Drop equal-form atoms dominated by a stronger one.

    Upper bounds with constant bounds: keep the smallest (strict wins a
    tie); lower bounds: keep the largest.  Parametric bounds are only
    comparable against the same parameter.  Equality atoms are deduped.
    """
    kept = []

    def group_of(a: Atom):
        if a.rel is Rel.EQ:
            direction = "eq"
        else:
            direction = "up" if a.rel.is_upper else "lo"
        kind = a.bound if isinstance(a.bound, str) else None
        return (a.clock, direction, kind)

    strongest = {}
    order = []
    for a in atoms:
        if not isinstance(a, Atom):
            raise ConstraintError(f"not an atom: {a!r}")
        g = group_of(a)
        if g not in strongest:
            strongest[g] = a
            order.append(g)
            continue
        strongest[g] = _stronger(strongest[g], a)
    for g in order:
        kept.append(strongest[g])
    return kept


def _stronger(a: Atom, b: Atom) -> Atom:
    if a.rel is Rel.EQ or b.rel is Rel.EQ:
        # Only exact duplicates collapse; distinct equalities both stay,
        # but within one group they share clock and bound, so bounds are
        # equal for constants grouped... keep the first for identical atoms.
        return a if a == b else a
    if isinstance(a.bound, str):
        # Same parameter: strict dominates non-strict; otherwise identical.
        if a.rel.is_strict:
            return a
        return b if b.rel.is_strict else a
    ka = (a.bound, not a.rel.is_strict)
    kb = (b.bound, not b.rel.is_strict)
    if a.rel.is_upper:
        return a if ka <= kb else b
    return a if ka >= kb else b


@dataclass(frozen=True)
class CombinedValuation:
    """Assignment of rationals to clocks and naturals to clock parameters."""

    clocks: Mapping[str, Fraction]
    clock_params: Mapping[str, int]

    def __post_init__(self):
        object.__setattr__(self, "clocks",
                           {c: Fraction(v) for c, v in dict(self.clocks).items()})
        object.__setattr__(self, "clock_params",
                           {p: int(v) for p, v in dict(self.clock_params).items()})
        for c, v in self.clocks.items():
            if v < 0:
                raise ConstraintError(f"negative clock value for '{c}'")
        for p, v in self.clock_params.items():
            if v < 0:
                raise ConstraintError(f"negative parameter value for '{p}'")

    def value_of(self, ident: Bound):
        if isinstance(ident, int):
            return Fraction(ident)
        if ident in self.clocks:
            return self.clocks[ident]
        if ident in self.clock_params:
            return Fraction(self.clock_params[ident])
        raise ConstraintError(f"unassigned identifier '{ident}'")

    def delay(self, delta) -> "CombinedValuation":
        delta = Fraction(delta)
        if delta < 0:
            raise ConstraintError("negative delay")
        return CombinedValuation({c: v + delta for c, v in self.clocks.items()},
                                 self.clock_params)

    def reset(self, resets) -> "CombinedValuation":
        unknown = set(resets) - set(self.clocks)
        if unknown:
            raise ConstraintError(f"unknown clocks in reset set: {sorted(unknown)}")
        return CombinedValuation(
            {c: Fraction(0) if c in resets else v for c, v in self.clocks.items()},
            self.clock_params)

    def satisfies(self, phi: ClockConstraint) -> bool:
        for a in phi.atoms:
            v = self.value_of(a.clock)
            b = self.value_of(a.bound)
            if a.rel is Rel.EQ:
                if not (v <= b and v >= b):
                    return False
            elif not _check(v, a.rel, b):
                return False
        return True
