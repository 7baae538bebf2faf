"""Finite parametric MDPs and reachability solving.

States are indices with opaque string-ish payload labels.  Branch lists
may sum to less than 1; the missing mass goes to a distinguished
absorbing sink.  Exact solving is policy iteration with least-fixpoint
policy evaluation over Fractions; the iterative mode is plain value
iteration in floats.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Tuple

from .ratfun import RatFunError, RationalFunction

# successive-difference stopping; tight enough that the absolute error
# stays below 1e-8 even on slowly mixing chains
VI_THRESHOLD = 1e-12
VI_MAX_ITER = 10 ** 6
BRUTE_FORCE_CAP = 12


class PmdpError(ValueError):
    pass


def _action_key(a):
    return str(a)


class FinitePmdp:
    """Finite MDP with rational-function weights and an explicit sink."""

    __slots__ = ("labels", "initial", "branches", "sink", "_actions")

    def __init__(self, labels: List, initial: int,
                 branches: Mapping[Tuple[int, object], list], sink: int):
        self.labels = list(labels)
        self.initial = initial
        self.sink = sink
        self.branches = {k: list(v) for k, v in branches.items()}
        n = len(self.labels)
        if not (0 <= initial < n and 0 <= sink < n):
            raise PmdpError("initial or sink index out of range")
        acts: Dict[int, list] = {s: [] for s in range(n)}
        for (s, a), outs in self.branches.items():
            if not 0 <= s < n:
                raise PmdpError(f"state index {s} out of range")
            for _, t in outs:
                if not 0 <= t < n:
                    raise PmdpError(f"target index {t} out of range")
            acts[s].append(a)
        if not self.branches.get((sink, "loop")):
            self.branches[(sink, "loop")] = [(RationalFunction.constant(1), sink)]
            acts[sink].append("loop")
        for s, alist in acts.items():
            if not alist:
                raise PmdpError(f"state {self.labels[s]!r} has no actions")
        self._actions = {s: sorted(alist, key=_action_key) for s, alist in acts.items()}

    def actions_of(self, s: int) -> list:
        return self._actions[s]

    def is_constant(self) -> bool:
        return all(w.constant_value() is not None
                   for outs in self.branches.values() for w, _ in outs)

    def parameters(self) -> set:
        out = set()
        for outs in self.branches.values():
            for w, _ in outs:
                out |= w.variables()
        return out


def instantiate_pmdp(M: FinitePmdp, rho: Mapping[str, Fraction]) -> FinitePmdp:
    rho = {p: Fraction(v) for p, v in dict(rho).items()}
    missing = M.parameters() - set(rho)
    if missing:
        raise PmdpError(f"no values for parameters {sorted(missing)}")
    branches = {}
    for (s, a), outs in M.branches.items():
        new_outs = []
        total = Fraction(0)
        for w, t in outs:
            try:
                v = w.evaluate(rho)
            except RatFunError as e:
                raise PmdpError(f"weight {w.render()} at state {M.labels[s]!r}, "
                                f"action {a!r}: {e}") from None
            if not 0 <= v <= 1:
                raise PmdpError(f"weight {v} outside [0,1] at state "
                                f"{M.labels[s]!r}, action {a!r}")
            total += v
            new_outs.append((RationalFunction.constant(v), t))
        if total > 1:
            raise PmdpError(f"branch weights sum to {total} > 1 at state "
                            f"{M.labels[s]!r}, action {a!r}")
        branches[(s, a)] = new_outs
    return FinitePmdp(M.labels, M.initial, branches, M.sink)


@dataclass
class ReachResult:
    values: Dict[int, Fraction]
    scheduler: Dict[int, object]
    mode: str

    def value(self, s: int) -> Fraction:
        return self.values[s]


def _constant_branches(M: FinitePmdp):
    out = {}
    for (s, a), outs in M.branches.items():
        consts = []
        for w, t in outs:
            v = w.constant_value()
            if v is None:
                raise PmdpError("solve_reach needs an instantiated MDP")
            if v != 0:
                consts.append((v, t))
        out[(s, a)] = consts
    return out


def _prob0_max(M, branches, targets):
    """States with max reach 0: cannot reach targets under any scheduler."""
    n = len(M.labels)
    pred = {s: set() for s in range(n)}
    for (s, _a), outs in branches.items():
        for _v, t in outs:
            pred[t].add(s)
    can = set(targets)
    frontier = list(can)
    while frontier:
        t = frontier.pop()
        for s in pred[t]:
            if s not in can:
                can.add(s)
                frontier.append(s)
    return set(range(n)) - can


def _prob0_min(M, branches, targets):
    """States with min reach 0: some scheduler avoids the targets.

    Greatest fixpoint: keep s if s is not a target and some action keeps
    all positive-probability successors (sink included when mass is
    missing) inside the kept set.
    """
    n = len(M.labels)
    kept = set(range(n)) - set(targets)
    changed = True
    while changed:
        changed = False
        for s in sorted(kept):
            ok = False
            for a in M.actions_of(s):
                outs = branches[(s, a)]
                succs = {t for _v, t in outs}
                if sum(v for v, _t in outs) < 1:
                    succs.add(M.sink)
                if succs <= kept:
                    ok = True
                    break
            if not ok:
                kept.discard(s)
                changed = True
    return kept


def _solve_linear(rows, rhs):
    """Exact Gaussian elimination; rows is a dense square Fraction matrix."""
    n = len(rows)
    a = [list(row) + [rhs[i]] for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        assert piv is not None, "singular policy-evaluation system"
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[i][n] for i in range(n)]


def _eval_policy(M, branches, policy, targets, zeros):
    """Least-fixpoint reachability values of the induced Markov chain."""
    n = len(M.labels)
    values = {s: Fraction(0) for s in range(n)}
    for t in targets:
        values[t] = Fraction(1)
    unknown = [s for s in range(n) if s not in targets and s not in zeros]
    # Restrict to states that reach a target inside the chain; the rest
    # stay 0 (least fixpoint).
    pred = {s: set() for s in range(n)}
    for s in unknown:
        for v, t in branches[(s, policy[s])]:
            pred[t].add(s)
    reach = set(targets)
    frontier = list(reach)
    while frontier:
        t = frontier.pop()
        for s in pred[t]:
            if s in reach or s not in set(unknown):
                continue
            reach.add(s)
            frontier.append(s)
    live = [s for s in unknown if s in reach]
    if live:
        index = {s: i for i, s in enumerate(live)}
        rows = [[Fraction(0)] * len(live) for _ in live]
        rhs = [Fraction(0)] * len(live)
        for s in live:
            i = index[s]
            rows[i][i] += 1
            for v, t in branches[(s, policy[s])]:
                if t in targets:
                    rhs[i] += v
                elif t in index:
                    rows[i][index[t]] -= v
        sol = _solve_linear(rows, rhs)
        for s in live:
            values[s] = sol[index[s]]
    return values


def _policy_iteration(M, branches, targets, zeros, objective):
    n = len(M.labels)
    better = (lambda x, y: x > y) if objective == "max" else (lambda x, y: x < y)
    policy = {}
    for s in range(n):
        if s in targets or s in zeros:
            policy[s] = M.actions_of(s)[0]
        else:
            policy[s] = M.actions_of(s)[0]
    while True:
        values = _eval_policy(M, branches, policy, targets, zeros)
        improved = False
        for s in range(n):
            if s in targets or s in zeros:
                continue
            best_a, best_v = policy[s], None
            for a in M.actions_of(s):
                v = sum((w * values[t] for w, t in branches[(s, a)]), Fraction(0))
                if best_v is None:
                    cur = sum((w * values[t]
                               for w, t in branches[(s, policy[s])]), Fraction(0))
                    best_v = cur
                if better(v, best_v):
                    best_a, best_v = a, v
            if best_a != policy[s]:
                policy[s] = best_a
                improved = True
        if not improved:
            return values, policy


def solve_reach(M: FinitePmdp, targets, objective: str = "max",
                mode: str = "exact") -> ReachResult:
    if objective not in ("max", "min"):
        raise PmdpError(f"unknown objective {objective!r}")
    targets = set(targets)
    if not targets:
        raise PmdpError("empty target set")
    branches = _constant_branches(M)
    zeros = (_prob0_max if objective == "max" else _prob0_min)(M, branches, targets)
    zeros -= targets

    if mode == "exact":
        values, policy = _policy_iteration(M, branches, targets, zeros, objective)
        return ReachResult(values, policy, "exact")
    if mode != "iterate":
        raise PmdpError(f"unknown mode {mode!r}")

    n = len(M.labels)
    vals = [0.0] * n
    for t in targets:
        vals[t] = 1.0
    fbranches = {k: [(float(v), t) for v, t in outs] for k, outs in branches.items()}
    pick = max if objective == "max" else min
    for _ in range(VI_MAX_ITER):
        delta = 0.0
        new = list(vals)
        for s in range(n):
            if s in targets or s in zeros:
                continue
            new[s] = pick(sum(v * vals[t] for v, t in fbranches[(s, a)])
                          for a in M.actions_of(s))
            delta = max(delta, abs(new[s] - vals[s]))
        vals = new
        if delta < VI_THRESHOLD:
            break
    scheduler = {}
    for s in range(n):
        scheduler[s] = pick(M.actions_of(s),
                            key=lambda a: sum(v * vals[t]
                                              for v, t in fbranches[(s, a)])) \
            if s not in targets else M.actions_of(s)[0]
    return ReachResult({s: Fraction(vals[s]).limit_denominator(10 ** 12)
                        for s in range(n)}, scheduler, "iterate")


def brute_force_reach(M: FinitePmdp, targets, objective: str = "max") -> Fraction:
    """Enumerate memoryless deterministic schedulers; exact optimum."""
    targets = set(targets)
    branches = _constant_branches(M)
    n = len(M.labels)
    choice_states = [s for s in range(n) if len(M.actions_of(s)) >= 2]
    if len(choice_states) > BRUTE_FORCE_CAP:
        raise PmdpError(f"too many nondeterministic states "
                        f"({len(choice_states)} > {BRUTE_FORCE_CAP})")
    best = None
    for picks in itertools.product(*(M.actions_of(s) for s in choice_states)):
        policy = {s: M.actions_of(s)[0] for s in range(n)}
        policy.update(dict(zip(choice_states, picks)))
        v = _eval_policy(M, branches, policy, targets, set())[M.initial]
        if best is None or (v > best if objective == "max" else v < best):
            best = v
    return best
