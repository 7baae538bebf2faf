"""Integer-clock compilation of closed, fully clock-instantiated models.

Clocks are tracked as integers saturated at one past their maximal
compared constant; a unit tick is the only delay action.  Also hosts
the epsilon-digitization utilities for paths and the zero-time cycle
check that guards min-reachability claims.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, FrozenSet, List, Tuple

from .constraints import ClockConstraint, Rel
from .model import Pppta, is_closed, max_constants, validate
from .pmdp import FinitePmdp

TICK = "tick"
STALL = "stall"


class DigitalError(ValueError):
    pass


def _sat(phi: ClockConstraint, tau: Dict[str, int]) -> bool:
    # Saturated values exceed every compared constant, so plain integer
    # comparison is already the saturated semantics.
    for a in phi.atoms:
        v, b = tau[a.clock], a.bound
        assert isinstance(b, int), "clock parameter left in digital constraint"
        if a.rel is Rel.LE and not v <= b:
            return False
        if a.rel is Rel.LT and not v < b:
            return False
        if a.rel is Rel.EQ and v != b:
            return False
        if a.rel is Rel.GE and not v >= b:
            return False
        if a.rel is Rel.GT and not v > b:
            return False
    return True


def _check_preconditions(m: Pppta):
    if m.clock_params:
        raise DigitalError(f"clock parameters still free: {sorted(m.clock_params)}")
    if not is_closed(m):
        raise DigitalError("model has strict constraints; digital semantics "
                           "requires a closed model")
    diags = validate(m)
    if diags:
        raise DigitalError("invalid model: " + "; ".join(d.render() for d in diags))


def build_digital(m: Pppta, targets) -> Tuple[FinitePmdp, set]:
    """Forward reachable digital MDP plus the target state index set."""
    _check_preconditions(m)
    targets = set(targets)
    unknown = targets - set(m.locations)
    if unknown:
        raise DigitalError(f"undeclared target locations: {sorted(unknown)}")
    ks = max_constants(m, {})
    cap = {c: ks[c] + 1 for c in m.clocks}

    init = (m.initial, tuple(0 for _ in m.clocks))
    if not _sat(m.invariants[m.initial], dict(zip(m.clocks, init[1]))):
        raise DigitalError("initial state violates its invariant")

    index = {init: 0}
    order = [init]
    branches = {}
    frontier = [init]
    while frontier:
        state = frontier.pop(0)
        l, vals = state
        tau = dict(zip(m.clocks, vals))
        s = index[state]
        acted = False

        ticked = tuple(min(v + 1, cap[c]) for c, v in zip(m.clocks, vals))
        if _sat(m.invariants[l], dict(zip(m.clocks, ticked))):
            nxt = (l, ticked)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                frontier.append(nxt)
            branches[(s, TICK)] = [(_one(), index[nxt])]
            acted = True

        for (src, a), dist in m.transitions.items():
            if src != l or not _sat(m.guards[(src, a)], tau):
                continue
            outs = []
            for (resets, tgt), w in dist.branches.items():
                nv = tuple(0 if c in resets else v for c, v in zip(m.clocks, vals))
                nxt = (tgt, nv)
                if nxt not in index:
                    index[nxt] = len(order)
                    order.append(nxt)
                    frontier.append(nxt)
                outs.append((w, index[nxt]))
            branches[(s, f"act:{a}")] = _merge(outs)
            acted = True

        if not acted:
            branches[(s, STALL)] = []

    labels = [f"{l}|" + ",".join(f"{c}={v}" for c, v in zip(m.clocks, vals))
              for l, vals in order]
    sink = len(labels)
    labels.append("sink")
    mdp = FinitePmdp(labels, 0, branches, sink)
    target_set = {index[(l, v)] for (l, v) in order if l in targets}
    return mdp, target_set


def _one():
    from .ratfun import RationalFunction
    return RationalFunction.constant(1)


def _merge(outs):
    acc = {}
    for w, t in outs:
        acc[t] = acc[t] + w if t in acc else w
    return [(w, t) for t, w in sorted(acc.items())]


# ---------------------------------------------------------------------------
# Epsilon digitization

def epsilon_digitize_value(t, eps) -> int:
    t, eps = Fraction(t), Fraction(eps)
    if t < 0:
        raise DigitalError("negative time value")
    if not 0 <= eps <= 1:
        raise DigitalError("epsilon outside [0,1]")
    fl = t.numerator // t.denominator
    return fl if t <= fl + eps else fl + 1


@dataclass(frozen=True)
class PathStep:
    delay: Fraction
    action: str
    resets: FrozenSet[str]
    target: str


@dataclass(frozen=True)
class ConcretePath:
    """Alternating delay/discrete path through a clock-instantiated model."""
    initial: str
    steps: Tuple[PathStep, ...]


def is_valid_path(m: Pppta, path: ConcretePath) -> bool:
    if m.clock_params or path.initial not in m.locations:
        return False
    loc = path.initial
    tau = {c: Fraction(0) for c in m.clocks}
    if not _sat_frac(m.invariants[loc], tau):
        return False
    for step in path.steps:
        if step.delay < 0:
            return False
        tau = {c: v + step.delay for c, v in tau.items()}
        # Closed invariants are convex along the elapse line, so the two
        # endpoints cover the whole delay.
        if not _sat_frac(m.invariants[loc], tau):
            return False
        key = (loc, step.action)
        if key not in m.transitions:
            return False
        if not _sat_frac(m.guards[key], tau):
            return False
        if (step.resets, step.target) not in m.transitions[key].branches:
            return False
        tau = {c: Fraction(0) if c in step.resets else v for c, v in tau.items()}
        loc = step.target
        if not _sat_frac(m.invariants[loc], tau):
            return False
    return True


def _sat_frac(phi: ClockConstraint, tau) -> bool:
    for a in phi.atoms:
        v, b = tau[a.clock], Fraction(a.bound)
        ok = {Rel.LE: v <= b, Rel.LT: v < b, Rel.EQ: v == b,
              Rel.GE: v >= b, Rel.GT: v > b}[a.rel]
        if not ok:
            return False
    return True


def epsilon_digitize_path(path: ConcretePath, eps) -> ConcretePath:
    """Replace delays by differences of epsilon-digitized durations."""
    eps = Fraction(eps)
    dur = Fraction(0)
    prev = 0
    steps = []
    for step in path.steps:
        dur += Fraction(step.delay)
        d = epsilon_digitize_value(dur, eps)
        steps.append(PathStep(Fraction(d - prev), step.action,
                              step.resets, step.target))
        prev = d
    return ConcretePath(path.initial, tuple(steps))


# ---------------------------------------------------------------------------
# Zero-time cycle analysis

def zero_time_cycle_check(m: Pppta) -> List[str]:
    """Warn about location cycles that may loop without consuming time.

    A cycle is considered time-consuming when some edge on it carries a
    lower-bound atom with constant >= 1 on a clock that the cycle resets;
    every other cycle earns a warning.  No warnings certify that digital
    min-reach coincides with min-reach over time-divergent schedulers.
    """
    if m.clock_params:
        raise DigitalError("cycle check needs all clock parameters instantiated")
    edges = []
    for (l, a), dist in m.transitions.items():
        for (resets, tgt) in dist.branches:
            edges.append((l, a, frozenset(resets), tgt))

    warnings = []
    order = {l: i for i, l in enumerate(m.locations)}
    for cycle in _simple_cycles(m.locations, edges, order):
        cycle_resets = set()
        for (_l, _a, resets, _t) in cycle:
            cycle_resets |= resets
        forced = False
        for (l, a, _resets, _t) in cycle:
            for atom in m.guards[(l, a)].atoms:
                if atom.clock not in cycle_resets:
                    continue
                if atom.rel in (Rel.GE, Rel.EQ) and atom.bound >= 1:
                    forced = True
                if atom.rel is Rel.GT and atom.bound >= 0:
                    forced = True
        if not forced:
            desc = " -> ".join(f"{l} --{a}" for (l, a, _r, _t) in cycle)
            warnings.append(f"cycle may consume no time: {desc} -> {cycle[0][0]}")
    return warnings


def _simple_cycles(locations, edges, order):
    """All simple cycles of the location multigraph, as edge lists."""
    by_src = {}
    for e in edges:
        by_src.setdefault(e[0], []).append(e)
    cycles = []

    def dfs(start, node, path, on_path):
        for e in by_src.get(node, ()):
            tgt = e[3]
            if order[tgt] < order[start]:
                continue  # canonical start: smallest location in the cycle
            if tgt == start:
                cycles.append(path + [e])
            elif tgt not in on_path:
                on_path.add(tgt)
                dfs(start, tgt, path + [e], on_path)
                on_path.discard(tgt)

    for start in locations:
        dfs(start, start, [], {start})
    return cycles
