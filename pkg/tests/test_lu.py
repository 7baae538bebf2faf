import random
from fractions import Fraction

import pytest

from ppta.digital import build_digital
from ppta.lu import ClockRegion, LuError, ReductionReport, reduce
from ppta.model import BOTH, LOWER, UPPER, instantiate
from ppta.pmdp import solve_reach

from conftest import random_umodel

F = Fraction


def test_region_points():
    r = ClockRegion(rectangular={"A": (0, 2), "B": (1, 1)})
    pts = r.points()
    assert pts == [{"A": 0, "B": 1}, {"A": 1, "B": 1}, {"A": 2, "B": 1}]
    e = ClockRegion.from_points([{"A": 5}, {"A": 7}])
    assert e.points() == [{"A": 5}, {"A": 7}]
    assert not e.is_rectangular()


def test_region_validation():
    with pytest.raises(LuError):
        ClockRegion()
    with pytest.raises(LuError):
        ClockRegion(rectangular={"A": (3, 1)})
    with pytest.raises(LuError):
        ClockRegion(explicit=())


def test_reduce_geometric(models):
    m = models["geometric"]
    rep = reduce(m, ClockRegion.from_model(m))
    assert rep.fixed == {"T": 5}
    assert rep.classification["T"] == UPPER
    assert rep.residual_model.clock_params == {}
    assert rep.residual_region.rectangular == {}
    assert "fix T = 5" in rep.render()


def test_reduce_nrp(models):
    m = models["nrp"]
    rep = reduce(m, ClockRegion.from_model(m))
    assert rep.fixed == {"CD": 6}
    assert rep.classification == {"CD": LOWER, "TO": BOTH}
    assert rep.residual_region.rectangular == {"TO": (3, 20)}
    assert set(rep.residual_model.clock_params) == {"TO"}
    assert "keep TO in [3, 20]" in rep.render()


def test_reduce_nrp_modified(models):
    m = models["nrp_modified"]
    rep = reduce(m, ClockRegion.from_model(m))
    assert rep.fixed == {"CD": 6, "TO": 20}
    assert rep.residual_region.rectangular == {}


def test_reduce_subregion(models):
    m = models["geometric"]
    rep = reduce(m, ClockRegion(rectangular={"T": (1, 3)}))
    assert rep.fixed == {"T": 3}


def test_reduce_same_for_min(models):
    m = models["nrp_modified"]
    assert reduce(m, ClockRegion.from_model(m), "max").fixed == \
        reduce(m, ClockRegion.from_model(m), "min").fixed


def test_reduce_refuses_explicit_region(models):
    m = models["geometric"]
    with pytest.raises(LuError, match="separable"):
        reduce(m, ClockRegion.from_points([{"T": 0}, {"T": 5}]))


def test_reduce_region_domain_errors(models):
    m = models["geometric"]
    with pytest.raises(LuError, match="misses"):
        reduce(m, ClockRegion(rectangular={}))
    with pytest.raises(LuError, match="unknown"):
        reduce(m, ClockRegion(rectangular={"T": (0, 5), "Z": (0, 1)}))
    with pytest.raises(LuError, match="outside"):
        reduce(m, ClockRegion(rectangular={"T": (0, 9)}))
    with pytest.raises(LuError, match="objective"):
        reduce(m, ClockRegion.from_model(m), "avg")


def _value(m, gamma, objective):
    inst = instantiate(m, gamma)
    mdp, targets = build_digital(inst, {"goal"})
    if not targets:
        return F(0) if objective == "max" else F(0)
    return solve_reach(mdp, targets, objective, "exact").value(mdp.initial)


def test_endpoint_fixing_matches_enumeration():
    """Fixed endpoints achieve the region optimum, checked exhaustively."""
    rng = random.Random(17)
    for _ in range(15):
        m = random_umodel(rng)
        region = ClockRegion.from_model(m)
        rep = reduce(m, region)
        assert set(rep.fixed) == {"T"}  # T is Upper or Unused here
        for objective in ("max", "min"):
            rep_o = reduce(m, region, objective)
            fixed_v = _value(m, rep_o.fixed, objective)
            pick = max if objective == "max" else min
            best = pick(_value(m, pt, objective) for pt in region.points())
            assert fixed_v == best, (m.name, objective)
