from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from cantorlab._rational import ONE, ZERO, Q
from cantorlab.core import (
    BasicSet,
    CylinderFunction,
    CylinderSet,
    RationalInterval,
    Rect,
    cells,
    check_bits,
    cylinder_length,
    from_fibers,
    left_endpoint,
    meet,
    overlap,
    ratio_enclosure,
    tree_cells,
)
from oracles import all_cells, cells_of_rects
from strategies import basic_sets, bitstrings, rect_lists

GRID = 4  # rect_lists use depth <= 3, so depth-4 cells resolve every set


def as_cells(u: BasicSet):
    return cells_of_rects(u.rects, GRID)


# ----------------------------------------------------------------------------
# bit strings


def test_cells_order():
    assert list(cells(2)) == ["00", "01", "10", "11"]
    assert list(cells(0)) == [""]
    assert list(tree_cells(1)) == ["", "0", "1"]


def test_meet_and_endpoints():
    assert meet("01", "011") == "011"
    assert meet("01", "00") is None
    assert left_endpoint("11") == Q(3, 4)
    assert cylinder_length("101") == Q(1, 8)
    assert overlap("1", Q(1, 4), Q(3, 4)) == Q(1, 4)
    assert overlap("00", Q(1, 2), ONE) == ZERO


def test_check_bits():
    with pytest.raises(ValueError):
        check_bits("012")


# ----------------------------------------------------------------------------
# intervals


def test_interval_basics():
    a = RationalInterval(Q(1, 4), Q(1, 2))
    assert a.width == Q(1, 4) and a.mid == Q(3, 8)
    assert Q(1, 3) in a and not a.is_exact
    assert a.intersect(RationalInterval(Q(3, 4), ONE)) is None
    assert a.hull(RationalInterval.point(ONE)) == RationalInterval(Q(1, 4), ONE)
    assert (a - a) == RationalInterval(Q(-1, 4), Q(1, 4))
    assert a.scale(-2) == RationalInterval(-ONE, Q(-1, 2))
    assert RationalInterval(Q(-1), Q(2)).clip() == RationalInterval(ZERO, ONE)
    with pytest.raises(ValueError):
        RationalInterval(ONE, ZERO)


@given(st.fractions(0, 1), st.fractions(0, 1), st.fractions(1, 2), st.fractions(1, 2))
def test_ratio_enclosure_contains_true_ratio(n1, n2, d1, d2):
    num = RationalInterval(min(n1, n2), max(n1, n2))
    den = RationalInterval(min(d1, d2), max(d1, d2))
    r = ratio_enclosure(num, den)
    for n in (num.lo, num.hi):
        for d in (den.lo, den.hi):
            assert Q(n) / Q(d) in r


# ----------------------------------------------------------------------------
# one-dimensional sets


@given(st.lists(bitstrings(4), max_size=5), st.lists(bitstrings(4), max_size=5))
def test_cylinder_set_algebra(xs, ys):
    a, b = CylinderSet.from_prefixes(xs), CylinderSet.from_prefixes(ys)

    def pts(s):
        return {c for c in all_cells(4) if c in s}

    def ref(ps):
        return {c for c in all_cells(4) if any(c.startswith(p) for p in ps)}

    assert pts(a) == ref(xs)
    assert pts(a | b) == ref(xs) | ref(ys)
    assert pts(a & b) == ref(xs) & ref(ys)
    assert pts(a - b) == ref(xs) - ref(ys)
    assert (a <= b) == (ref(xs) <= ref(ys))
    assert CylinderSet.from_prefixes(a.prefixes) == a
    assert a.measure(cylinder_length) == Fraction(len(ref(xs)), 16)


def test_cylinder_set_prefixes_are_maximal():
    s = CylinderSet.from_prefixes(["00", "01", "110"])
    assert s.prefixes == ["0", "110"]
    assert "0" in s and "01" in s and "1" not in s


# ----------------------------------------------------------------------------
# basic sets


@given(rect_lists(), rect_lists())
def test_basic_set_algebra_matches_cells(r1, r2):
    a, b = BasicSet.from_rects(r1), BasicSet.from_rects(r2)
    ca, cb = cells_of_rects(r1, GRID), cells_of_rects(r2, GRID)
    assert as_cells(a) == ca
    assert as_cells(a | b) == ca | cb
    assert as_cells(a & b) == ca & cb
    assert as_cells(a - b) == ca - cb
    assert (a <= b) == (ca <= cb)
    assert (a == b) == (ca == cb)


@given(rect_lists())
def test_canonical_rects_disjoint_and_unique(r):
    u = BasicSet.from_rects(r)
    rects = u.rects
    seen = set()
    for rect in rects:
        c = cells_of_rects([rect], GRID)
        assert not (c & seen)
        seen |= c
    # rebuilding from the canonical list, in any order, gives the same list
    assert BasicSet.from_rects(reversed(rects)).rects == rects


@given(rect_lists())
def test_canonical_x_siblings_not_identical(r):
    # no two x-siblings carry the same section: they would have been merged
    u = BasicSet.from_rects(r)
    leaves = {}
    for a1, a2 in u.rects:
        leaves.setdefault(a1, []).append(a2)
    for a1, ys in leaves.items():
        if a1:
            sib = a1[:-1] + ("1" if a1[-1] == "0" else "0")
            if sib in leaves:
                assert sorted(leaves[sib]) != sorted(ys)


@given(rect_lists(), bitstrings(4))
def test_section_and_stability(r, prefix):
    u = BasicSet.from_rects(r)
    cs = as_cells(u)
    sec, stable = u.section(prefix)
    xs = [x for x in all_cells(GRID) if x.startswith(prefix)] if len(prefix) <= GRID else [prefix[:GRID]]
    sections = {frozenset(y for (x2, y) in cs if x2 == x) for x in xs}
    assert stable == (len(sections) == 1)
    leftmost = frozenset(y for (x2, y) in cs if x2 == xs[0])
    assert frozenset(y for y in all_cells(GRID) if y in sec) == leftmost


@given(rect_lists(), bitstrings(3), bitstrings(3))
def test_contains_cell(r, a1, a2):
    u = BasicSet.from_rects(r)
    block = cells_of_rects([(a1, a2)], GRID)
    assert u.contains_cell(a1, a2) == (block <= as_cells(u))


def test_basic_set_text_and_examples():
    u = BasicSet.from_rects([("00", ""), ("01", "")])
    assert u.rects == [Rect("0", "")]
    assert u.to_text() == "[0]x*"
    assert BasicSet.empty().to_text() == "{}"
    assert BasicSet.full().rects == [Rect("", "")]
    v = BasicSet.from_rects([("0", "1"), ("1", "11")])
    assert v.to_text() == "[0]x[1],[1]x[11]"
    assert v.footprint() == CylinderSet.full()
    assert v.restrict("1") == BasicSet.from_rects([("1", "11")])
    assert v.x_depth == 1 and v.depth == 2


# ----------------------------------------------------------------------------
# cylinder functions


def test_cylinder_function_basics():
    f = CylinderFunction.from_mapping(2, {"11": Q(4)})
    assert f("11") == 4 and f("110") == 4 and f("01") == 0
    assert f.refine(3)("111") == 4
    with pytest.raises(ValueError):
        f.refine(1)
    with pytest.raises(ValueError):
        f("1")
    with pytest.raises(ValueError):
        CylinderFunction(1, (ONE, -ONE))
    g = CylinderFunction.from_mapping(1, {("1", "1"): Q(8)}, arity=2)
    assert g("1", "1") == 8 and g.fiber("1").values == (ZERO, Q(8))
    assert from_fibers([g.fiber("0"), g.fiber("1")]) == g
    assert g.scale(Q(1, 8)).sup == 1


@given(st.integers(0, 3), st.integers(0, 2), st.data())
def test_refine_preserves_values(d, extra, data):
    vals = data.draw(st.lists(st.integers(0, 9), min_size=1 << d, max_size=1 << d))
    f = CylinderFunction(d, tuple(Q(v) for v in vals))
    g = f.refine(d + extra)
    for c in cells(d + extra):
        assert g(c) == f(c[:d])
