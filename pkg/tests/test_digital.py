import random
from fractions import Fraction

import pytest

from ppta.digital import (ConcretePath, DigitalError, PathStep, build_digital,
                          epsilon_digitize_path, epsilon_digitize_value,
                          is_valid_path, zero_time_cycle_check)
from ppta.dsl import parse
from ppta.model import instantiate
from ppta.pmdp import solve_reach

from conftest import random_umodel

F = Fraction


def test_build_geometric(models):
    m = instantiate(models["geometric"], {"T": 2})
    mdp, targets = build_digital(m, {"goal"})
    assert targets
    assert all(lab.startswith("goal|") for i, lab in enumerate(mdp.labels)
               if i in targets)
    res = solve_reach(mdp, targets, "max", "exact")
    assert res.value(mdp.initial) == F(3, 4)


def test_geometric_value_formula(models):
    for t in range(6):
        m = instantiate(models["geometric"], {"T": t})
        mdp, targets = build_digital(m, {"goal"})
        if not targets:  # T=0 leaves goal unreachable
            assert t == 0
            continue
        v = solve_reach(mdp, targets, "max", "exact").value(mdp.initial)
        assert v == 1 - F(1, 2 ** t)


def test_preconditions():
    m = parse("pppta s clocks c; clock_params T in [0,3]; location a init; "
              "edge a -- x [c <= T] -> { 1 : goto a };")
    with pytest.raises(DigitalError, match="clock parameters"):
        build_digital(m, {"a"})
    strict = parse("pppta s clocks c; location a init invariant c < 2; "
                   "location b; edge a -- x [] -> { 1 : goto b };")
    with pytest.raises(DigitalError, match="closed"):
        build_digital(strict, {"b"})
    ok = instantiate(m, {"T": 1})
    with pytest.raises(DigitalError, match="target"):
        build_digital(ok, {"zz"})


def test_deadlock_goes_to_sink():
    # location b deadlocks once its invariant forbids ticking, so the
    # half that lands there drains to the sink
    m = parse("pppta d clocks c; "
              "location a init invariant c <= 1; "
              "location b invariant c <= 1; location goal; "
              "edge a -- go [c == 0] -> { 1/2 : goto goal ; 1/2 : goto b };")
    mdp, targets = build_digital(m, {"goal"})
    assert any(a == "stall" for (_s, a) in mdp.branches)
    v = solve_reach(mdp, targets, "max", "exact").value(mdp.initial)
    assert v == F(1, 2)


def test_saturation_keeps_state_space_finite():
    m = parse("pppta s clocks c; location a init; location goal; "
              "edge a -- go [c >= 3] -> { 1 : goto goal };")
    mdp, targets = build_digital(m, {"goal"})
    # clock saturates at 4, so there are few states despite unbounded waiting
    assert len(mdp.labels) <= 8
    assert solve_reach(mdp, targets, "max", "exact").value(mdp.initial) == 1


def test_saturation_soundness_lockstep():
    """Walk the model with unbounded integer clocks; at every step the
    saturated projection must be a reachable digital state, and the
    enabled action sets must agree."""
    from ppta.model import max_constants
    from ppta.digital import _sat as digital_sat
    rng = random.Random(13)
    for _ in range(12):
        m = instantiate(random_umodel(rng), {"T": rng.randint(0, 3)})
        mdp, _targets = build_digital(m, {"goal"})
        by_label = {lab: i for i, lab in enumerate(mdp.labels)}
        cap = {c: k + 1 for c, k in max_constants(m, {}).items()}

        def project(loc, tau):
            return loc + "|" + ",".join(f"{c}={min(tau[c], cap[c])}"
                                        for c in m.clocks)

        for _ in range(4):
            loc = m.initial
            tau = {c: 0 for c in m.clocks}
            for _ in range(10):
                s = by_label[project(loc, tau)]
                moves = [("tick", None)] if digital_sat(
                    m.invariants[loc],
                    {c: min(v + 1, cap[c]) for c, v in tau.items()}) else []
                for (l, a), dist in m.transitions.items():
                    if l == loc and digital_sat(m.guards[(l, a)], tau):
                        for outcome in dist.branches:
                            moves.append((a, outcome))
                digital_acts = set(mdp.actions_of(s))
                expect = {"tick"} if moves and moves[0][0] == "tick" else set()
                expect |= {f"act:{a}" for a, o in moves if o is not None}
                assert digital_acts == (expect or {"stall"})
                if not moves:
                    break
                a, outcome = rng.choice(moves)
                if outcome is None:
                    tau = {c: v + 1 for c, v in tau.items()}
                else:
                    resets, loc = outcome
                    tau = {c: 0 if c in resets else v for c, v in tau.items()}
                assert project(loc, tau) in by_label


def test_digitize_value_examples():
    assert epsilon_digitize_value(F(3, 2), F(1, 2)) == 1
    assert epsilon_digitize_value(F(3, 2), F(1, 4)) == 2
    assert epsilon_digitize_value(F(3, 2), 0) == 2
    assert epsilon_digitize_value(2, 0) == 2
    assert epsilon_digitize_value(0, 0) == 0
    with pytest.raises(DigitalError):
        epsilon_digitize_value(-1, 0)
    with pytest.raises(DigitalError):
        epsilon_digitize_value(1, 2)


def test_digitize_path_cumulative():
    # two half-unit delays: durations 1/2, 1; with eps 0 they digitize
    # to 1 and 1, so the step delays become 1 and 0
    p = ConcretePath("a", (
        PathStep(F(1, 2), "x", frozenset(), "a"),
        PathStep(F(1, 2), "x", frozenset(), "a")))
    d = epsilon_digitize_path(p, 0)
    assert [s.delay for s in d.steps] == [1, 0]
    d2 = epsilon_digitize_path(p, F(1, 2))
    assert [s.delay for s in d2.steps] == [0, 1]


def test_digitized_path_stays_valid():
    rng = random.Random(61)
    delays = [F(0), F(1, 3), F(1, 2), F(1), F(3, 2), F(2)]
    checked = 0
    for _ in range(40):
        m = instantiate(random_umodel(rng), {"T": rng.randint(1, 3)})
        # simulate a random valid path
        loc = m.initial
        tau = {c: F(0) for c in m.clocks}
        steps = []
        for _ in range(6):
            rng.shuffle(delays)
            picked = None
            for d in delays:
                ntau = {c: v + d for c, v in tau.items()}
                if not _sat(m.invariants[loc], ntau):
                    continue
                opts = []
                for (l, a), dist in m.transitions.items():
                    if l == loc and _sat(m.guards[(l, a)], ntau):
                        for (resets, tgt) in dist.branches:
                            ptau = {c: F(0) if c in resets else v
                                    for c, v in ntau.items()}
                            if _sat(m.invariants[tgt], ptau):
                                opts.append((a, resets, tgt))
                if opts:
                    picked = (d, rng.choice(opts))
                    break
            if picked is None:
                break
            d, (a, resets, tgt) = picked
            steps.append(PathStep(d, a, resets, tgt))
            tau = {c: F(0) if c in resets else v + d for c, v in tau.items()}
            loc = tgt
        path = ConcretePath(m.initial, tuple(steps))
        assert is_valid_path(m, path)
        for eps in (F(0), F(1, 4), F(1, 2), F(1)):
            dig = epsilon_digitize_path(path, eps)
            assert all(s.delay == int(s.delay) for s in dig.steps)
            assert is_valid_path(m, dig), (path, eps)
            checked += 1
    assert checked >= 40


def _sat(phi, tau):
    from ppta.digital import _sat_frac
    return _sat_frac(phi, tau)


def test_invalid_paths_rejected():
    m = parse("pppta v clocks c; location a init invariant c <= 2; "
              "location b; edge a -- go [c >= 1] -> { 1 : goto b };")
    good = ConcretePath("a", (PathStep(F(1), "go", frozenset(), "b"),))
    assert is_valid_path(m, good)
    too_soon = ConcretePath("a", (PathStep(F(1, 2), "go", frozenset(), "b"),))
    assert not is_valid_path(m, too_soon)
    too_late = ConcretePath("a", (PathStep(F(3), "go", frozenset(), "b"),))
    assert not is_valid_path(m, too_late)
    wrong_resets = ConcretePath("a", (PathStep(F(1), "go",
                                               frozenset({"c"}), "b"),))
    assert not is_valid_path(m, wrong_resets)


def test_zero_time_cycle_warns():
    m = parse("pppta z clocks c; location a init; location b; "
              "edge a -- f [] -> { 1 : goto b }; "
              "edge b -- g [] -> { 1 : goto a };")
    assert zero_time_cycle_check(m)


def test_time_consuming_cycle_silent():
    m = parse("pppta z clocks c; location a init; location b; "
              "edge a -- f [c >= 1] -> { 1 : reset {c} goto b }; "
              "edge b -- g [] -> { 1 : goto a };")
    assert zero_time_cycle_check(m) == []


def test_cycle_without_reset_still_warns_only_on_zero_cycles(models):
    # geometric's loop resets c2 and requires c2 == 1, so it consumes time
    m = instantiate(models["geometric"], {"T": 3})
    assert zero_time_cycle_check(m) == []
