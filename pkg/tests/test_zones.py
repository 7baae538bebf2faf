import random
from fractions import Fraction

import pytest

from ppta.constraints import Atom, ClockConstraint, Rel
from ppta.zones import Dbm, ZoneError

from conftest import random_constraint


def zone(clocks, *atoms):
    return Dbm.from_constraint(clocks, ClockConstraint(atoms))


def test_universal_and_empty():
    u = Dbm.universal(("c", "d"))
    assert not u.is_empty()
    assert u.contains({"c": Fraction(3), "d": Fraction(0)})
    e = zone(("c",), Atom("c", Rel.LE, 2), Atom("c", Rel.GT, 3))
    assert e.is_empty()


def test_parametric_atom_rejected():
    with pytest.raises(ZoneError):
        zone(("c",), Atom("c", Rel.LE, "T"))


def test_zero_point():
    z = zone(("c", "d"), Atom("c", Rel.EQ, 0), Atom("d", Rel.EQ, 0))
    assert z.contains({"c": 0, "d": 0})
    assert not z.contains({"c": 0, "d": Fraction(1, 2)})


def test_intersect():
    clocks = ("c",)
    u = Dbm.universal(clocks)
    z = zone(clocks, Atom("c", Rel.LE, 2))
    assert z.intersect(u) == z
    assert zone(clocks, Atom("c", Rel.LE, 1)).intersect(
        zone(clocks, Atom("c", Rel.GE, 2))).is_empty()
    assert zone(clocks, Atom("c", Rel.LE, 2)).intersect(
        zone(clocks, Atom("c", Rel.LE, 1))) == zone(clocks, Atom("c", Rel.LE, 1))


def test_up_diagonal_line():
    clocks = ("c", "d")
    origin = zone(clocks, Atom("c", Rel.EQ, 0), Atom("d", Rel.EQ, 0))
    line = origin.up()
    assert line.contains({"c": Fraction(5), "d": Fraction(5)})
    assert not line.contains({"c": Fraction(5), "d": Fraction(4)})
    assert Dbm.empty(clocks).up().is_empty()


def test_down():
    clocks = ("c",)
    z = zone(clocks, Atom("c", Rel.EQ, 1))
    within = z.down().intersect(zone(clocks, Atom("c", Rel.LE, 1)))
    assert within == zone(clocks, Atom("c", Rel.GE, 0), Atom("c", Rel.LE, 1))
    u = Dbm.universal(clocks)
    assert u.down() == u
    pt = zone(("c", "d"), Atom("c", Rel.EQ, 1), Atom("d", Rel.EQ, 2))
    assert pt.down().contains({"c": 0, "d": 1})


def test_reset():
    clocks = ("c", "d")
    band = zone(clocks, Atom("c", Rel.GE, 1), Atom("c", Rel.LE, 2),
                Atom("d", Rel.GE, 1), Atom("d", Rel.LE, 2))
    # c = d comes from elapsing the origin, keeping everything diagonal-free
    z = zone(clocks, Atom("c", Rel.EQ, 0), Atom("d", Rel.EQ, 0)).up() \
        .intersect(band)
    r = z.reset(("c",))
    assert r.contains({"c": 0, "d": Fraction(3, 2)})
    assert not r.contains({"c": Fraction(1, 2), "d": Fraction(3, 2)})
    assert z.reset(()) == z
    assert Dbm.empty(clocks).reset(("c",)).is_empty()


def test_inverse_reset():
    clocks = ("c", "d")
    z = zone(clocks, Atom("c", Rel.LE, 2), Atom("d", Rel.EQ, 0))
    ir = z.inverse_reset(("d",))
    assert ir.contains({"c": 1, "d": Fraction(7, 2)})
    assert not ir.contains({"c": 3, "d": 0})
    assert zone(clocks, Atom("d", Rel.GE, 1)).inverse_reset(("d",)).is_empty()
    assert z.inverse_reset(()) == z


def test_includes_and_contains():
    clocks = ("c", "d")
    u = Dbm.universal(clocks)
    z = zone(clocks, Atom("c", Rel.LE, 2))
    assert u.includes(z)
    assert not z.includes(u)
    origin = zone(clocks, Atom("c", Rel.EQ, 0), Atom("d", Rel.EQ, 0))
    assert origin.up().contains({"c": 1, "d": 1})
    assert zone(("c",), Atom("c", Rel.LT, 1), Atom("c", Rel.GT, 1)).is_empty()


def test_galois_laws():
    rng = random.Random(23)
    clocks = ("x", "y")
    for _ in range(40):
        z = Dbm.from_constraint(clocks, random_constraint(rng, clocks))
        assert z.down().up().includes(z) or z.is_empty()
        assert z.up().up() == z.up()
        assert z.down().down() == z.down()
        r = ("x",)
        assert z.includes(z.inverse_reset(r).reset(r))


def test_contains_matches_render():
    rng = random.Random(29)
    clocks = ("x", "y")
    for _ in range(20):
        z = Dbm.from_constraint(clocks, random_constraint(rng, clocks))
        if z.is_empty():
            assert z.render() == "false"
            continue
        # spot-check membership against the rendered difference constraints
        for _ in range(10):
            pt = {c: Fraction(rng.randint(0, 10), 2) for c in clocks}
            expected = _satisfies_render(z.render(), pt)
            assert z.contains(pt) == expected


def _satisfies_render(text, pt):
    if text == "true":
        return True
    vals = dict(pt)
    vals["0"] = Fraction(0)
    for part in text.split(" && "):
        tokens = part.split()
        if len(tokens) == 3:
            lhs, rel, bound = tokens
            left = vals[lhs]
        else:  # "a - b rel k"
            left = vals[tokens[0]] - vals[tokens[2]]
            rel, bound = tokens[3], tokens[4]
        bound = Fraction(bound)
        ok = {"<=": left <= bound, "<": left < bound,
              ">=": left >= bound, ">": left > bound}[rel]
        if not ok:
            return False
    return True


def test_dimension_mismatch():
    with pytest.raises(ZoneError):
        Dbm.universal(("c",)).intersect(Dbm.universal(("c", "d")))
