"""Shared fixtures and random generators for the test suite."""

from __future__ import annotations

import random
from fractions import Fraction
from pathlib import Path

import pytest

from ppta.constraints import Atom, ClockConstraint, Rel
from ppta.model import ParametricDistribution, Pppta
from ppta.pmdp import FinitePmdp
from ppta.ratfun import Polynomial, RationalFunction

MODELS_DIR = Path(__file__).resolve().parent.parent / "models"

BUNDLED = ["geometric", "separability", "nrp", "nrp_modified"]


@pytest.fixture(scope="session")
def models():
    from ppta.dsl import parse_file
    return {name: parse_file(MODELS_DIR / f"{name}.pppta") for name in BUNDLED}


def model_path(name: str) -> str:
    return str(MODELS_DIR / f"{name}.pppta")


# ---------------------------------------------------------------------------
# Random rational functions

def random_polynomial(rng: random.Random, names=("p", "q"), max_terms=3,
                      max_deg=2) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        mono = []
        for name in names:
            e = rng.randint(0, max_deg)
            if e:
                mono.append((name, e))
        coeff = Fraction(rng.randint(-4, 4), rng.randint(1, 4))
        if coeff:
            terms[tuple(sorted(mono))] = coeff
    return Polynomial(terms) if terms else Polynomial.constant(1)


def random_ratfun(rng: random.Random, names=("p", "q")) -> RationalFunction:
    num = random_polynomial(rng, names)
    den = random_polynomial(rng, names)
    while den.is_zero():
        den = random_polynomial(rng, names)
    return RationalFunction(num, den)


def random_point(rng: random.Random, names=("p", "q")):
    return {n: Fraction(rng.randint(1, 9), 10) for n in names}


# ---------------------------------------------------------------------------
# Random constraints and grids

def random_constraint(rng: random.Random, clocks, max_atoms=4,
                      max_const=4) -> ClockConstraint:
    rels = [Rel.LE, Rel.LT, Rel.EQ, Rel.GE, Rel.GT]
    atoms = []
    for _ in range(rng.randint(0, max_atoms)):
        atoms.append(Atom(rng.choice(list(clocks)), rng.choice(rels),
                          rng.randint(0, max_const)))
    return ClockConstraint(atoms)


def half_integer_grid(clocks, top=5):
    """All points of {0, 1/2, ..., top}^clocks."""
    import itertools
    axis = [Fraction(i, 2) for i in range(2 * top + 1)]
    for pt in itertools.product(axis, repeat=len(clocks)):
        yield dict(zip(clocks, pt))


# ---------------------------------------------------------------------------
# Random finite MDPs

def random_mdp(rng: random.Random, max_states=6, max_actions=3) -> tuple:
    """Returns (mdp, targets); weights are constant rationals, with some
    sub-stochastic rows exercising the implicit sink."""
    n = rng.randint(2, max_states)
    labels = [f"s{i}" for i in range(n)] + ["sink"]
    sink = n
    targets = {rng.randrange(n)}
    branches = {}
    for s in range(n):
        # keep the nondeterminism budget small so brute force stays cheap
        acts = rng.choice([1, 1, 1, 2, min(3, max_actions)])
        for a in range(acts):
            k = rng.randint(1, 3)
            cuts = sorted(rng.randint(0, 8) for _ in range(k - 1))
            weights = []
            prev = 0
            denom = 8 if rng.random() < 0.8 else 10  # <1 total: sink mass
            for c in cuts + [8]:
                weights.append(Fraction(c - prev, denom))
                prev = c
            outs = [(RationalFunction.constant(w), rng.randrange(n))
                    for w in weights if w > 0]
            if not outs:
                outs = [(RationalFunction.constant(1), rng.randrange(n))]
            branches[(s, f"a{a}")] = outs
    return FinitePmdp(labels, 0, branches, sink), targets


# ---------------------------------------------------------------------------
# Random small closed models with one upper-bound clock parameter

def random_umodel(rng: random.Random) -> Pppta:
    clocks = ("x",)
    locations = ["l0", "l1", "goal"]
    one = RationalFunction.constant(1)
    half = RationalFunction.constant(Fraction(1, 2))

    def random_guard(allow_param: bool):
        atoms = []
        if rng.random() < 0.5:
            atoms.append(Atom("x", Rel.GE, rng.randint(0, 2)))
        if allow_param and rng.random() < 0.7:
            atoms.append(Atom("x", Rel.LE, "T"))
        elif rng.random() < 0.4:
            atoms.append(Atom("x", Rel.LE, rng.randint(1, 3)))
        return ClockConstraint(atoms)

    transitions, guards = {}, {}
    for src in ("l0", "l1"):
        for ai in range(rng.randint(1, 2)):
            action = f"{src}_a{ai}"
            resets = frozenset(["x"]) if rng.random() < 0.4 else frozenset()
            t1 = rng.choice(locations)
            t2 = rng.choice(locations)
            if t1 == t2 and resets:
                branches = {(resets, t1): one}
            elif t1 == t2:
                branches = {(frozenset(), t1): one}
            else:
                branches = {(resets, t1): half, (frozenset(), t2): half}
            guards[(src, action)] = random_guard(allow_param=rng.random() < 0.8)
            transitions[(src, action)] = ParametricDistribution(branches)

    return Pppta(name="random_u", clocks=clocks,
                 clock_params={"T": (0, 3)}, prob_params={},
                 locations=tuple(locations), initial="l0",
                 invariants={}, guards=guards, transitions=transitions)


# ---------------------------------------------------------------------------
# Random syntactically valid models for round-trip testing

def random_model_for_roundtrip(rng: random.Random) -> Pppta:
    n_clocks = rng.randint(1, 3)
    clocks = tuple(f"c{i}" for i in range(n_clocks))
    n_locs = rng.randint(1, 4)
    locations = tuple(f"loc{i}" for i in range(n_locs))
    clock_params = {}
    for i in range(rng.randint(0, 2)):
        lo = rng.randint(0, 3)
        clock_params[f"P{i}"] = (lo, lo + rng.randint(0, 4))
    prob_params = {}
    for i in range(rng.randint(0, 2)):
        lo = Fraction(rng.randint(0, 3), 10)
        prob_params[f"r{i}"] = (lo, lo + Fraction(rng.randint(0, 5), 10))

    def constraint():
        atoms = []
        for _ in range(rng.randint(0, 3)):
            bound = (rng.choice(sorted(clock_params)) if clock_params
                     and rng.random() < 0.4 else rng.randint(0, 5))
            atoms.append(Atom(rng.choice(clocks),
                              rng.choice(list(Rel)), bound))
        return ClockConstraint(atoms)

    def weight_pair():
        if prob_params and rng.random() < 0.6:
            r = RationalFunction.variable(rng.choice(sorted(prob_params)))
            return r, RationalFunction.constant(1) - r
        w = Fraction(rng.randint(1, 7), 8)
        return (RationalFunction.constant(w),
                RationalFunction.constant(1 - w))

    invariants = {l: constraint() for l in locations if rng.random() < 0.5}
    guards, transitions = {}, {}
    for i in range(rng.randint(0, 4)):
        src = rng.choice(locations)
        action = f"act{i}"
        resets = frozenset(c for c in clocks if rng.random() < 0.3)
        t1, t2 = rng.choice(locations), rng.choice(locations)
        if rng.random() < 0.4 or (resets, t1) == (frozenset(), t2):
            branches = {(resets, t1): RationalFunction.constant(1)}
        else:
            w1, w2 = weight_pair()
            branches = {(resets, t1): w1, (frozenset(), t2): w2}
        guards[(src, action)] = constraint()
        transitions[(src, action)] = ParametricDistribution(branches)

    return Pppta(name=f"gen{rng.randint(0, 999)}", clocks=clocks,
                 clock_params=clock_params, prob_params=prob_params,
                 locations=locations, initial=rng.choice(locations),
                 invariants=invariants, guards=guards,
                 transitions=transitions)
