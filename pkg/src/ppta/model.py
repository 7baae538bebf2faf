"""The parametric probabilistic timed automaton record and its analyses.

A model carries locations, actions, clocks, two disjoint parameter sets
with declared interval domains, invariants, guards, and a parametric
distribution per (location, action).  Declarations are stored sorted so
serialization and exploration order are deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, Mapping, Tuple

from .constraints import Atom, ClockConstraint, Rel
from .ratfun import RationalFunction
from .zones import Dbm

Outcome = Tuple[FrozenSet[str], str]  # (reset set, target location)


class ModelError(ValueError):
    pass


def _sorted_branches(branches):
    def key(item):
        (resets, target), _ = item
        return (target, tuple(sorted(resets)))
    return dict(sorted(branches.items(), key=key))


class ParametricDistribution:
    """Finite map (reset set, target location) -> weight rational function."""

    __slots__ = ("branches",)

    def __init__(self, branches: Mapping[Outcome, RationalFunction]):
        merged: Dict[Outcome, RationalFunction] = {}
        for (resets, target), w in dict(branches).items():
            k = (frozenset(resets), target)
            merged[k] = merged[k] + w if k in merged else w
        if not merged:
            raise ModelError("distribution with no branches")
        self.branches = _sorted_branches(merged)

    def weight_sum(self) -> RationalFunction:
        total = RationalFunction.constant(0)
        for w in self.branches.values():
            total = total + w
        return total

    def substitute(self, rho) -> "ParametricDistribution":
        return ParametricDistribution(
            {k: w.substitute(rho) for k, w in self.branches.items()})

    def __eq__(self, other):
        return (isinstance(other, ParametricDistribution)
                and self.branches.keys() == other.branches.keys()
                and all(self.branches[k].equals(other.branches[k])
                        for k in self.branches))

    def __repr__(self):
        items = ", ".join(f"({sorted(r)}, {t}): {w.render()}"
                          for (r, t), w in self.branches.items())
        return f"ParametricDistribution({items})"


@dataclass
class Pppta:
    name: str
    clocks: Tuple[str, ...]
    clock_params: Dict[str, Tuple[int, int]]
    prob_params: Dict[str, Tuple[Fraction, Fraction]]
    locations: Tuple[str, ...]
    initial: str
    invariants: Dict[str, ClockConstraint]
    guards: Dict[Tuple[str, str], ClockConstraint]
    transitions: Dict[Tuple[str, str], ParametricDistribution]

    def __post_init__(self):
        self.clocks = tuple(sorted(self.clocks))
        self.locations = tuple(sorted(self.locations))
        self.clock_params = dict(sorted(self.clock_params.items()))
        self.prob_params = dict(sorted(self.prob_params.items()))
        self.invariants = {l: self.invariants.get(l, ClockConstraint.true())
                           for l in self.locations}
        self.transitions = dict(sorted(self.transitions.items()))
        guards = dict(self.guards)
        for key in self.transitions:
            guards.setdefault(key, ClockConstraint.true())
        self.guards = dict(sorted(guards.items()))

    @property
    def actions(self) -> Tuple[str, ...]:
        return tuple(sorted({a for _, a in self.transitions}))

    def edges(self):
        """Deterministic iteration over (location, action, distribution)."""
        for (l, a), dist in self.transitions.items():
            yield l, a, dist

    def __eq__(self, other):
        if not isinstance(other, Pppta):
            return NotImplemented
        return (self.name == other.name
                and self.clocks == other.clocks
                and self.clock_params == other.clock_params
                and self.prob_params == other.prob_params
                and self.locations == other.locations
                and self.initial == other.initial
                and self.invariants == other.invariants
                and self.guards == other.guards
                and self.transitions == other.transitions)


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    where: str = ""

    def render(self) -> str:
        loc = f" [{self.where}]" if self.where else ""
        return f"{self.code}: {self.message}{loc}"


def _gamma_corners(m: Pppta):
    """All corner valuations of the clock-parameter box."""
    names = list(m.clock_params)
    if not names:
        return [{}]
    axes = [sorted({lo, hi}) for lo, hi in m.clock_params.values()]
    return [dict(zip(names, pt)) for pt in itertools.product(*axes)]


def validate(m: Pppta) -> list:
    diags = []
    overlap = set(m.clock_params) & set(m.prob_params)
    if overlap:
        diags.append(Diagnostic("disjoint-params",
                                f"parameters declared in both sets: {sorted(overlap)}"))
    if m.initial not in m.locations:
        diags.append(Diagnostic("initial", f"undeclared initial location '{m.initial}'"))

    for where, phi in _all_constraints(m):
        for a in phi.atoms:
            if a.clock not in m.clocks:
                diags.append(Diagnostic("undeclared-clock",
                                        f"unknown clock '{a.clock}'", where))
            if isinstance(a.bound, str):
                if a.bound in m.clocks:
                    diags.append(Diagnostic("diagonal",
                                            f"clock '{a.bound}' used as a bound "
                                            f"(diagonal constraints are not allowed)",
                                            where))
                elif a.bound not in m.clock_params:
                    diags.append(Diagnostic("undeclared-param",
                                            f"unknown clock parameter '{a.bound}'",
                                            where))

    for (l, a), dist in m.transitions.items():
        where = f"edge {l} -- {a}"
        if l not in m.locations:
            diags.append(Diagnostic("undeclared-location",
                                    f"unknown source location '{l}'", where))
        for (resets, target), w in dist.branches.items():
            if target not in m.locations:
                diags.append(Diagnostic("undeclared-location",
                                        f"unknown target location '{target}'", where))
            unknown = set(resets) - set(m.clocks)
            if unknown:
                diags.append(Diagnostic("undeclared-clock",
                                        f"unknown clocks in reset set: {sorted(unknown)}",
                                        where))
            bad = w.variables() - set(m.prob_params)
            if bad:
                diags.append(Diagnostic("undeclared-param",
                                        f"unknown probability parameters {sorted(bad)} "
                                        f"in branch weight", where))
        total = dist.weight_sum()
        if not total.equals(RationalFunction.constant(1)):
            diags.append(Diagnostic("distribution-sum",
                                    f"distribution sums to {total.render()}, not 1",
                                    where))

    if diags:
        return diags

    # Initial state valid for at least one clock-parameter corner.
    corners = _gamma_corners(m)
    zero = Dbm.from_constraint(m.clocks,
                               ClockConstraint(Atom(c, Rel.EQ, 0) for c in m.clocks))
    if not any(zero.intersect_constraint(
            m.invariants[m.initial].substitute(g)).is_empty() is False
            for g in corners):
        diags.append(Diagnostic("initial-invalid",
                                "initial state violates its invariant for every "
                                "clock-parameter valuation in the domain box"))

    # Well-formedness on corner valuations: reset successors respect the
    # target invariant.
    for g in corners:
        for l, a, dist in m.edges():
            src = Dbm.from_constraint(m.clocks, m.invariants[l].substitute(g)) \
                .intersect_constraint(m.guards[(l, a)].substitute(g))
            if src.is_empty():
                continue
            for (resets, target) in dist.branches:
                img = src.reset(resets)
                tgt = Dbm.from_constraint(m.clocks,
                                          m.invariants[target].substitute(g))
                if not tgt.includes(img):
                    diags.append(Diagnostic(
                        "not-well-formed",
                        f"branch to '{target}' can leave its invariant at "
                        f"clock-parameter valuation {g}",
                        f"edge {l} -- {a}"))
    # Dedupe (same violation can fire at several corners).
    seen, out = set(), []
    for d in diags:
        k = (d.code, d.message, d.where)
        if k not in seen:
            seen.add(k)
            out.append(d)
    return out


def _all_constraints(m: Pppta):
    for l in m.locations:
        yield f"invariant of {l}", m.invariants[l]
    for (l, a), phi in m.guards.items():
        yield f"guard of edge {l} -- {a}", phi


# ---------------------------------------------------------------------------
# Instantiation

def instantiate(m: Pppta, gamma: Mapping[str, int] = None,
                rho: Mapping[str, Fraction] = None) -> Pppta:
    gamma = dict(gamma or {})
    rho = {p: Fraction(v) for p, v in dict(rho or {}).items()}
    for p, v in gamma.items():
        if p not in m.clock_params:
            raise ModelError(f"unknown clock parameter '{p}'")
        if not isinstance(v, int) or isinstance(v, bool):
            raise ModelError(f"clock parameter '{p}' needs a natural value, got {v!r}")
        lo, hi = m.clock_params[p]
        if not lo <= v <= hi:
            raise ModelError(f"value {v} for '{p}' outside domain [{lo},{hi}]")
    for p, v in rho.items():
        if p not in m.prob_params:
            raise ModelError(f"unknown probability parameter '{p}'")
        lo, hi = m.prob_params[p]
        if not lo <= v <= hi:
            raise ModelError(f"value {v} for '{p}' outside domain [{lo},{hi}]")

    return Pppta(
        name=m.name,
        clocks=m.clocks,
        clock_params={p: d for p, d in m.clock_params.items() if p not in gamma},
        prob_params={p: d for p, d in m.prob_params.items() if p not in rho},
        locations=m.locations,
        initial=m.initial,
        invariants={l: phi.substitute(gamma) for l, phi in m.invariants.items()},
        guards={k: phi.substitute(gamma) for k, phi in m.guards.items()},
        transitions={k: (d.substitute(rho) if rho else d)
                     for k, d in m.transitions.items()},
    )


# ---------------------------------------------------------------------------
# Syntactic analyses

LOWER, UPPER, BOTH, UNUSED = "Lower", "Upper", "Both", "Unused"


def classify_lu(m: Pppta) -> Dict[str, str]:
    """Per clock parameter: Lower, Upper, Both, or Unused.

    A parameter is an upper-bound occurrence in `c <= p`, `c < p`, or
    `c == p`; a lower-bound occurrence in `c >= p`, `c > p`, `c == p`.
    """
    as_upper, as_lower = set(), set()
    for _, phi in _all_constraints(m):
        for a in phi.atoms:
            if not isinstance(a.bound, str) or a.bound not in m.clock_params:
                continue
            if a.rel in (Rel.LE, Rel.LT, Rel.EQ):
                as_upper.add(a.bound)
            if a.rel in (Rel.GE, Rel.GT, Rel.EQ):
                as_lower.add(a.bound)
    out = {}
    for p in m.clock_params:
        u, lo = p in as_upper, p in as_lower
        out[p] = BOTH if u and lo else UPPER if u else LOWER if lo else UNUSED
    return out


def is_closed(m: Pppta) -> bool:
    return not any(phi.has_strict() for _, phi in _all_constraints(m))


def max_constants(m: Pppta, gamma: Mapping[str, int]) -> Dict[str, int]:
    missing = set(m.clock_params) - set(gamma)
    if missing:
        raise ModelError(f"clock parameters without values: {sorted(missing)}")
    out = {c: 0 for c in m.clocks}
    for _, phi in _all_constraints(m):
        for a in phi.atoms:
            v = gamma[a.bound] if isinstance(a.bound, str) else a.bound
            if a.clock in out:
                out[a.clock] = max(out[a.clock], int(v))
    return out


def strengthen_guards(m: Pppta) -> Pppta:
    """Conjoin each guard with the preimage of every branch target invariant.

    Requires a fully clock-parameter-instantiated model.  The preimage of
    an invariant atom under reset R keeps atoms on unreset clocks; an atom
    on a reset clock must hold at value 0, otherwise the branch is never
    enabled and the guard is made unsatisfiable.
    """
    if m.clock_params:
        raise ModelError("strengthen_guards needs all clock parameters instantiated")
    false_atoms = None
    if m.clocks:
        c = m.clocks[0]
        false_atoms = (Atom(c, Rel.GE, 1), Atom(c, Rel.LE, 0))  # unsatisfiable
    guards = {}
    for (l, a), phi in m.guards.items():
        atoms = list(phi.atoms)
        for (resets, target) in m.transitions[(l, a)].branches:
            for inv_atom in m.invariants[target].atoms:
                if inv_atom.clock in resets:
                    bound = inv_atom.bound
                    ok = {Rel.LE: 0 <= bound, Rel.LT: 0 < bound,
                          Rel.EQ: bound == 0, Rel.GE: 0 >= bound,
                          Rel.GT: False}[inv_atom.rel]
                    if not ok:
                        atoms = list(false_atoms or ())
                else:
                    atoms.append(inv_atom)
        guards[(l, a)] = ClockConstraint(atoms)
    return Pppta(name=m.name, clocks=m.clocks, clock_params=m.clock_params,
                 prob_params=m.prob_params, locations=m.locations,
                 initial=m.initial, invariants=m.invariants,
                 guards=guards, transitions=m.transitions)
