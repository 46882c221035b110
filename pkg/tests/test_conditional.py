import pytest
from hypothesis import given
from hypothesis import strategies as st

from cantorlab import conditional as C
from cantorlab import measures as M
from cantorlab._rational import ONE, ZERO, Q, dyadic
from cantorlab.core import RationalInterval, cells, tree_cells

EXACT = {
    "uniform": M.uniform,
    "product": lambda: M.product(M.Bernoulli(Q(1, 3)), M.Bernoulli(Q(3, 4))),
    "oscillating": M.oscillating,
    "staircase": M.staircase,
    "segments": M.segments,
    "kernel": lambda: M.from_kernel(
        M.Bernoulli(Q(2, 5)), M.KernelConfig(1, {"0": M.Bernoulli(Q(1, 4)), "1": M.Bernoulli(Q(2, 3))})
    ),
}


def test_paths():
    assert C.PathGenerator.zeros().prefix(4) == "0000"
    assert C.PathGenerator.named("alt").prefix(5) == "01010"
    assert C.PathGenerator.named("p:011").prefix(7) == "0110110"
    assert C.PathGenerator.named("x:1/3").prefix(6) == "010101"
    assert C.PathGenerator.named("x:5/8").prefix(5) == "10100"
    with pytest.raises(ValueError):
        C.PathGenerator.named("bogus")


def test_conditional_martingale_examples():
    m = C.conditional_martingale(M.uniform(), "1", 3)
    assert set(m.values.values()) == {Q(1, 2)}
    m = C.conditional_martingale(M.oscillating(), "1", 10)
    assert [m("0" * n) for n in range(6)] == [Q(2, 3), Q(1, 3)] * 3
    s = C.conditional_martingale(M.staircase(), "1", 10)
    errs = [abs(s("0" * n) - Q(3, 4)) for n in range(1, 11)]
    assert errs == sorted(errs, reverse=True)


@pytest.mark.parametrize("name", sorted(EXACT))
def test_martingale_fairness_every_measure(name):
    P = EXACT[name]()
    for a2 in ("1", "01"):
        assert C.martingale_check(C.conditional_martingale(P, a2, 10)).ok


def test_martingale_check_catches_perturbation():
    m = C.conditional_martingale(M.uniform(), "1", 3)
    values = dict(m.values)
    values["010"] = values["010"] + Q(1, 64)
    bad = C.Martingale(3, values, m.measure)
    report = C.martingale_check(bad)
    assert [v[0] for v in report.violations] == ["01"]
    const = C.Martingale(2, {c: ONE for c in tree_cells(2)}, M.Uniform1D())
    assert C.martingale_check(const).ok


def test_exceed_set_examples():
    half = C.Martingale(3, {c: Q(1, 2) for c in tree_cells(3)}, M.Uniform1D())
    assert C.exceed_set(half, 1).cells.is_empty()
    osc = C.conditional_martingale(M.oscillating(), "1", 8)
    r = C.exceed_set(osc, Q(2, 3))
    assert r.cells.prefixes == [""] and r.ok and r.bound == 1
    dbl = C.doubling_martingale(M.Uniform1D(), 5, "1")
    r = C.exceed_set(dbl, 4)
    assert r.cells.prefixes == ["11"] and r.measure == Q(1, 4) and r.bound == Q(1, 4)


def _brute_crossings(m, path: str, u, v) -> int:
    # independent per-path simulation of the buy-low/sell-high rule
    count, active = 0, False
    for i in range(len(path) + 1):
        x = m(path[:i])
        if x is None:
            return -1
        if active and i > 0 and x > v:
            count += 1
            active = False
        elif not active and x < u:
            active = True
    return count


@pytest.mark.parametrize("name", ["oscillating", "segments", "kernel"])
@pytest.mark.parametrize("band", [(Q(1, 2), Q(3, 5)), (Q(2, 5), Q(3, 5)), (Q(1, 3), Q(1, 2))])
def test_upcrossings_match_brute_force(name, band):
    u, v = band
    m = C.conditional_martingale(EXACT[name](), "1", 8)
    f = C.follower_martingale(m, u, v)
    for cell in cells(8):
        assert f.crossings[cell] == _brute_crossings(m, cell, u, v)
    assert C.martingale_check(f.capital).ok
    for n, meas, bound, ok in C.upcrossing_bound_check(m, u, v, 4):
        assert ok and meas <= bound


def test_follower_doubles_on_oscillation():
    m = C.conditional_martingale(M.oscillating(), "1", 10)
    f = C.follower_martingale(m, Q(2, 5), Q(3, 5))
    for j in range(1, 6):
        assert f.capital("0" * (2 * j)) == 2**j
        assert f.crossings["0" * (2 * j)] == j


def test_follower_constant_martingale():
    const = C.Martingale(4, {c: ONE for c in tree_cells(4)}, M.Uniform1D())
    f = C.follower_martingale(const, Q(1, 2), Q(3, 4))
    assert set(f.capital.values.values()) == {ONE}


@st.composite
def random_martingales(draw, depth=6):
    # fair splits of mass under a Bernoulli reference measure
    p = Q(draw(st.sampled_from(["1/2", "1/3", "3/4"])))
    P1 = M.Bernoulli(p)
    values = {"": Q(draw(st.integers(0, 8)), 4)}
    for a in tree_cells(depth - 1):
        total = values[a] * P1.mass(a)
        share = Q(draw(st.integers(0, 8)), 8)
        values[a + "0"] = total * share / P1.mass(a + "0")
        values[a + "1"] = total * (1 - share) / P1.mass(a + "1")
    return C.Martingale(depth, values, P1)


@given(random_martingales(), st.sampled_from([Q(1, 4), Q(1, 2), ONE, Q(2), Q(4)]))
def test_maximal_inequality_random(m, c):
    assert C.martingale_check(m).ok
    r = C.exceed_set(m, c)
    assert r.measure <= m.initial / c
    # every hit really reaches c and no proper ancestor does
    for a in r.cells.prefixes:
        assert m(a) >= c
        assert all(m(a[:i]) < c for i in range(len(a)))


@given(random_martingales(), st.sampled_from([(Q(1, 4), Q(1, 2)), (Q(1, 2), Q(1)), (Q(1, 3), Q(3, 2))]))
def test_upcrossing_bound_random(m, band):
    for _, meas, bound, ok in C.upcrossing_bound_check(m, *band, max_n=4):
        assert ok


# ----------------------------------------------------------------------------
# traces


def test_trace_oscillating():
    tr = C.conditional_trace(M.oscillating(), C.PathGenerator.zeros(), "1", 12)
    assert [e.lo for _, e in tr.values] == [Q(2, 3) if d % 2 == 0 else Q(1, 3) for d in range(13)]
    assert tr.verdict == "oscillating"
    assert [(b.lo, b.hi) for b in tr.bands] == [(Q(1, 3), Q(1, 3)), (Q(2, 3), Q(2, 3))]
    assert tr.to_rows()[0] == ("0", "2/3", "2/3", "undecided")


def test_trace_product_converges():
    tr = C.conditional_trace(EXACT["product"](), C.PathGenerator.named("alt"), "1", 8)
    assert tr.verdict == "converged" and tr.limit == RationalInterval.point(Q(3, 4))


def test_trace_segments_uniform_above_alpha():
    tr = C.conditional_trace(M.segments(), C.PathGenerator.named("x:1/3"), "11", 14)
    assert tr.verdict == "converged"
    assert abs(tr.limit.mid - Q(3, 8)) <= dyadic(10)


def test_trace_zero_marginal_keeps_partial():
    P = M.from_kernel(M.Dirac("1"), M.KernelConfig(0, {"": M.Uniform1D()}))
    with pytest.raises(M.ZeroMarginalError) as info:
        C.conditional_trace(P, C.PathGenerator.named("p:10"), "1", 6)
    assert info.value.depth == 2 and len(info.value.partial.values) == 2


def test_classify_rules():
    pts = [RationalInterval.point(Q(x)) for x in (1, 2, 1, 2, 1, 2)]
    assert C.classify(pts, 6, dyadic(10))[0] == "oscillating"
    assert C.classify(pts[:5], 6, dyadic(10))[0] == "undecided"
    near = [RationalInterval.point(Q(1, 2) + dyadic(20 + i)) for i in range(6)]
    assert C.classify(near, 6, dyadic(10))[0] == "converged"
    three = [RationalInterval.point(Q(x)) for x in (1, 2, 3, 1, 2, 3)]
    assert C.classify(three, 6, dyadic(10))[0] == "undecided"


@pytest.mark.parametrize(
    "name,path", [("product", "alt"), ("segments", "alt"), ("staircase", "zeros")]
)
def test_additivity_of_limits(name, path):
    report = C.additivity_of_limits(EXACT[name](), C.PathGenerator.named(path), ["", "1", "11"], 14)
    assert report.ok is True
