"""Symbolic backwards zone exploration and the induced sub-MDP.

Works on a model whose clock parameters are fully instantiated.  From a
target zone assignment it closes a set of symbolic states under timed
and discrete predecessors plus pairwise same-action intersections, then
assembles an MDP whose actions are maximal edge selections.  Max
reachability of the target seeds in that MDP matches the concrete
model's maximal reachability.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple

from .constraints import ClockConstraint
from .model import Pppta, validate
from .pmdp import FinitePmdp, instantiate_pmdp, solve_reach
from .zones import Dbm

DEFAULT_CAP = 10_000


class BackwardsError(ValueError):
    pass


@dataclass(frozen=True)
class SymbolicState:
    location: str
    zone: Dbm

    def render(self) -> str:
        return f"({self.location}, {self.zone.render()})"


@dataclass(frozen=True)
class SymbolicEdge:
    source: SymbolicState
    action: str
    outcome: Tuple[frozenset, str]  # (reset set, successor location)
    target: SymbolicState


@dataclass
class BackwardsSystem:
    model: Pppta
    states: List[SymbolicState]
    edges: List[SymbolicEdge]
    seeds: List[SymbolicState]
    truncated: bool = False

    def dump(self) -> str:
        lines = ["states:"]
        for i, s in enumerate(self.states):
            tag = " (target)" if s in set(self.seeds) else ""
            lines.append(f"  {i}: {s.render()}{tag}")
        lines.append("edges:")
        index = {s: i for i, s in enumerate(self.states)}
        for e in self.edges:
            resets, tgt = e.outcome
            lines.append(f"  {index[e.source]} --{e.action}"
                         f"[reset {{{', '.join(sorted(resets))}}} -> {tgt}]"
                         f"--> {index[e.target]}")
        if self.truncated:
            lines.append("truncated: yes")
        return "\n".join(lines)


def pre_time_zone(m: Pppta, location: str, zone: Dbm) -> Dbm:
    inv = Dbm.from_constraint(m.clocks, m.invariants[location])
    return zone.intersect(inv).down().intersect(inv)


def pre_time_state(m: Pppta, s: SymbolicState) -> SymbolicState:
    return SymbolicState(s.location, pre_time_zone(m, s.location, s.zone))


def pre_edge(m: Pppta, s: SymbolicState, source_loc: str, action: str,
             resets) -> Optional[SymbolicState]:
    """Discrete predecessor of s through the given transition shape."""
    guard = Dbm.from_constraint(m.clocks, m.guards[(source_loc, action)])
    inv = Dbm.from_constraint(m.clocks, m.invariants[source_loc])
    zone = s.zone.inverse_reset(resets).intersect(guard, inv)
    if zone.is_empty():
        return None
    return SymbolicState(source_loc, zone)


def _check_model(m: Pppta):
    if m.clock_params:
        raise BackwardsError(f"clock parameters still free: {sorted(m.clock_params)}")
    diags = validate(m)
    if diags:
        raise BackwardsError("invalid model: " + "; ".join(d.render() for d in diags))


def target_zones_for_locations(m: Pppta, locations) -> Dict[str, Dbm]:
    unknown = set(locations) - set(m.locations)
    if unknown:
        raise BackwardsError(f"undeclared target locations: {sorted(unknown)}")
    return {l: Dbm.from_constraint(m.clocks, m.invariants[l]) for l in locations}


def explore(m: Pppta, target_zones: Mapping[str, Dbm],
            cap: Optional[int] = DEFAULT_CAP) -> BackwardsSystem:
    """Close the symbolic system under predecessor and intersection rules."""
    _check_model(m)
    sys = BackwardsSystem(m, [], [], [])
    seen: Dict[SymbolicState, int] = {}
    edge_seen = set()
    applications = 0

    def spend() -> bool:
        nonlocal applications
        applications += 1
        if cap is not None and applications > cap:
            sys.truncated = True
            return False
        return True

    queue: List[SymbolicState] = []

    def add_state(s: SymbolicState) -> SymbolicState:
        if s in seen:
            return sys.states[seen[s]]
        seen[s] = len(sys.states)
        sys.states.append(s)
        queue.append(s)
        return s

    # Seed with the timed predecessors of the target zones.
    for l in sorted(target_zones):
        zone = pre_time_zone(m, l, target_zones[l])
        if zone.is_empty():
            continue
        if not spend():
            return sys
        s = SymbolicState(l, zone)
        add_state(s)
        sys.seeds.append(s)

    def subsumed(s: SymbolicState) -> bool:
        return any(seed.location == s.location and seed.zone.includes(s.zone)
                   for seed in sys.seeds)

    # The predecessor shapes targeting each location, in declaration order.
    shapes: Dict[str, list] = {l: [] for l in m.locations}
    for (src, a), dist in m.transitions.items():
        for (resets, tgt), w in dist.branches.items():
            if w.is_zero():
                continue
            shapes[tgt].append((src, a, resets))

    while queue:
        # Discrete-predecessor phase.
        while queue:
            s = queue.pop(0)
            pre = pre_time_state(m, s)
            for (src, a, resets) in shapes[s.location]:
                cand = pre_edge(m, pre, src, a, resets)
                if cand is None or subsumed(cand):
                    continue
                edge_key = (cand, a, (resets, s.location), s)
                if edge_key in edge_seen:
                    continue
                if not spend():
                    return sys
                edge_seen.add(edge_key)
                add_state(cand)
                sys.edges.append(SymbolicEdge(cand, a, (resets, s.location), s))

        # Intersection phase: same source location and action, distinct
        # outcomes.  New states re-enter the predecessor phase.
        for e1, e2 in itertools.combinations(sys.edges, 2):
            if (e1.source.location != e2.source.location
                    or e1.action != e2.action or e1.outcome == e2.outcome):
                continue
            zone = e1.source.zone.intersect(e2.source.zone)
            if zone.is_empty():
                continue
            s = SymbolicState(e1.source.location, zone)
            if s in seen or subsumed(s):
                continue
            if not spend():
                return sys
            add_state(s)
    return sys


def max_edge_selections(sys: BackwardsSystem, action: str,
                        s: SymbolicState) -> List[dict]:
    """Maximal per-outcome edge choices for one action at one state."""
    by_outcome: Dict[tuple, list] = {}
    for e in sys.edges:
        if (e.action == action and e.source.location == s.location
                and e.source.zone.includes(s.zone)):
            by_outcome.setdefault(e.outcome, []).append(e)
    if not by_outcome:
        return []
    index = {st: i for i, st in enumerate(sys.states)}
    outcomes = sorted(by_outcome, key=lambda o: (o[1], tuple(sorted(o[0]))))
    pools = [sorted(by_outcome[o], key=lambda e: index[e.target]) for o in outcomes]
    selections = []
    for picks in itertools.product(*pools):
        selections.append(dict(zip(outcomes, picks)))
    return selections


def build_sub_pmdp(sys: BackwardsSystem) -> Tuple[FinitePmdp, set]:
    """The MDP over symbolic states; seeds are the targets."""
    index = {s: i for i, s in enumerate(sys.states)}
    labels = [s.render() for s in sys.states]
    sink = len(labels)
    labels.append("sink")
    seeds = set(sys.seeds)
    branches = {}
    m = sys.model
    for s in sys.states:
        i = index[s]
        if s in seeds:
            branches[(i, "stall")] = []
            continue
        any_action = False
        for a in sorted({e.action for e in sys.edges if e.source.location == s.location}):
            for sel in max_edge_selections(sys, a, s):
                label = (a, tuple(sorted(
                    ((tuple(sorted(r)), l), index[e.target])
                    for (r, l), e in sel.items())))
                outs = {}
                dist = m.transitions[(s.location, a)]
                for (resets, tgt), w in dist.branches.items():
                    key = (resets, tgt)
                    if key in sel:
                        t = index[sel[key].target]
                        outs[t] = outs[t] + w if t in outs else w
                    # uncovered outcomes implicitly route to the sink
                branches[(i, label)] = [(w, t) for t, w in sorted(outs.items())]
                any_action = True
        if not any_action:
            branches[(i, "stall")] = []
    mdp = FinitePmdp(labels, 0 if sys.states else sink, branches, sink)
    return mdp, {index[s] for s in sys.seeds}


@dataclass
class EvalResult:
    value: Fraction
    witness: Optional[SymbolicState]
    truncated: bool = False


def covering_states(sys: BackwardsSystem, location: str,
                    nu: Mapping[str, Fraction]) -> List[SymbolicState]:
    out = []
    for s in sys.states:
        if s.location != location:
            continue
        if pre_time_zone(sys.model, location, s.zone).contains(nu):
            out.append(s)
    return out


def max_reach_eval(sys: BackwardsSystem, location: str,
                   nu: Mapping[str, Fraction],
                   rho: Mapping[str, Fraction]) -> EvalResult:
    covers = covering_states(sys, location, nu)
    if not covers:
        return EvalResult(Fraction(0), None, sys.truncated)
    mdp, targets = build_sub_pmdp(sys)
    inst = instantiate_pmdp(mdp, rho) if mdp.parameters() else mdp
    result = solve_reach(inst, targets, "max", "exact")
    index = {s: i for i, s in enumerate(sys.states)}
    best, witness = Fraction(0), None
    for s in covers:
        v = result.value(index[s])
        if witness is None or v > best:
            best, witness = v, s
    return EvalResult(best, witness, sys.truncated)
