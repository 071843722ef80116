import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from atlasforge.cknum import (
    EXACT,
    SAMPLED,
    CkChartDesc,
    CkGluingData,
    CkLocalRep,
    CkMap,
    CkTransition,
    CoverageError,
    Region,
    ck_atlas_report,
    ck_morphism_check,
    fd_derivative,
    inverse_of,
    jacobian_det,
    manifold_check,
    parse_order,
    parse_rational,
    restrict_transition,
    smoothness_check,
    symbolic_derivative,
    transition_diffeo_check,
)
from atlasforge.errors import EvaluationError, MalformedInput, PreconditionError
from atlasforge.fixtures import circle2

RECIP = CkMap.rational("1/x1")
REAL_LINE = Region.interval(-math.inf, math.inf)
FULL = Region.interval(-5, 5)
FAR = Region.of([[(-4.9, -0.25)], [(0.25, 4.9)]], closed=True)


def rep(src, dst, domain, text, res=21):
    return CkLocalRep(src, dst, domain, CkMap.rational(text), res)


@pytest.fixture(scope="module")
def c2():
    return circle2()


def test_parse_order():
    assert parse_order("inf") == math.inf == parse_order("∞")
    assert parse_order(3) == 3 == parse_order("3")
    for bad in (-1, "two", True, 1.5):
        with pytest.raises(MalformedInput):
            parse_order(bad)


@pytest.mark.parametrize("text", ["sin(x1)", "x1**(1/2)", "x2", "x1 +", "sqrt(x1)"])
def test_rational_grammar_rejects(text):
    with pytest.raises(MalformedInput):
        parse_rational(text, 1)


def test_region_sampling_and_cover():
    r = Region.interval(0, 1)
    s = r.samples(5)
    assert s.min() > 0 and s.max() < 1 and len(s) == 5
    assert Region.interval(0, 1, closed=True).samples(5)[[0, -1], 0].tolist() == [0, 1]
    assert Region.of([[(-1, 1)], [(0.5, 3)]]).covers(Region.interval(-0.5, 2))
    assert not Region.of([[(-1, 0)], [(0, 1)]]).covers(Region.interval(-1, 1))
    assert not Region.interval(-5, 5).covers(REAL_LINE)


def test_reciprocal_derivative_and_det():
    bb = CkMap.black_box(lambda p: [1 / p[0]])
    assert abs(fd_derivative(bb, [[2.0]])[0, 0] + 0.25) < 1e-6
    assert symbolic_derivative(RECIP, [[2.0]])[0, 0] == pytest.approx(-0.25, abs=1e-15)
    t = CkTransition("A", "B", Region.interval(0.5, 2, closed=True), RECIP)
    r = transition_diffeo_check(t, "inf", RECIP)
    assert r.passes and r.mode == "polynomial" and r.verdict == EXACT
    # 1/x^2 on [0.5, 2] bottoms out at x = 2
    assert abs(r.min_abs_jacobian_det - 0.25) < 1e-9


def test_circle2(c2):
    r = ck_atlas_report(c2, "inf")
    assert r.is_atlas and r.non_degenerate and not r.is_full
    for t in r.transitions.values():
        assert abs(t.min_abs_jacobian_det - 0.0625) < 1e-9
        assert t.max_inverse_residual < 1e-12
    m = manifold_check(c2)
    assert m.is_manifold_data and m.maximality == "assumed"


def test_abs_fails_c1_and_inverse_required():
    ab = CkMap.black_box(lambda p: [abs(p[0])])
    t = CkTransition("A", "B", Region.interval(-1, 1), ab)
    r = transition_diffeo_check(t, 1, ab)
    assert not r.passes and any("order-1" in f for f in r.failures)
    assert r.verdict == SAMPLED
    with pytest.raises(PreconditionError):
        transition_diffeo_check(t, 1)


def test_c1_not_c2():
    f = CkMap.black_box(lambda p: [p[0] + p[0] * abs(p[0])])
    g = CkMap.black_box(lambda p: [math.copysign((math.sqrt(1 + 4 * abs(p[0])) - 1) / 2, p[0])])
    t = CkTransition("A", "B", Region.interval(-0.5, 0.5), f)
    assert transition_diffeo_check(t, 1, g).passes
    r = transition_diffeo_check(t, 2, g)
    assert not r.passes and any("order-2" in x for x in r.failures)


def test_singular_jacobian():
    cube = CkMap.rational("x1**3")
    root = CkMap.black_box(lambda p: [np.cbrt(p[0])])
    r = transition_diffeo_check(CkTransition("A", "B", Region.interval(-1, 1, closed=True), cube), 1, root)
    assert not r.passes and any("singular" in f for f in r.failures)


def test_pole_and_nan():
    with pytest.raises(EvaluationError):
        RECIP(np.array([[0.0]]))
    sq = CkMap.black_box(lambda p: [math.sqrt(p[0]) if p[0] >= 0 else float("nan")])
    with pytest.raises(EvaluationError):
        sq(np.array([[-1.0]]))


def test_structural_errors(c2):
    empty = CkGluingData((), (), REAL_LINE)
    assert not ck_atlas_report(empty).is_atlas
    one_way = CkGluingData(c2.charts, c2.transitions[:1], REAL_LINE)
    with pytest.raises(MalformedInput):
        ck_atlas_report(one_way)


def test_single_chart():
    one = CkGluingData((CkChartDesc("G", Region.interval(-1, 1)),), (), REAL_LINE)
    r = ck_atlas_report(one)
    assert r.is_atlas and not r.is_full
    full = CkGluingData((CkChartDesc("G", Region.interval(-1, 1)),), (), Region.interval(-1, 1))
    assert ck_atlas_report(full).is_full


def test_morphisms(c2):
    ident = [rep("N", "N", FULL, "x1"), rep("S", "S", FULL, "x1")]
    r = ck_morphism_check(c2, c2, ident, CkMap.rational("x1"))
    assert r.is_morphism and r.is_classic and r.verdict == EXACT
    antipode = [
        rep("N", "S", FULL, "-x1"),
        rep("S", "N", FULL, "-x1"),
        rep("N", "N", FAR, "-1/x1", 9),
        rep("S", "S", FAR, "-1/x1", 9),
    ]
    r = ck_morphism_check(c2, c2, antipode, CkMap.rational("-x1"))
    assert r.is_morphism and r.is_classic
    assert not ck_morphism_check(c2, c2, antipode).is_morphism
    kink = CkLocalRep("N", "N", FULL, CkMap.black_box(lambda p: [p[0] / 2 + abs(p[0]) / 4]), 21)
    r = ck_morphism_check(c2, c2, [kink, ident[1]], None, 1)
    assert not r.is_classic
    with pytest.raises(CoverageError):
        ck_morphism_check(c2, c2, ident[:1])


def test_inverse_of_hull():
    t = CkTransition("A", "B", Region.interval(1, 2, closed=True), CkMap.rational("2*x1"))
    back = inverse_of(t, CkMap.rational("x1/2"))
    assert back.overlap.boxes == (((2.0, 4.0),),)
    assert transition_diffeo_check(t, "inf", back).passes


def test_jacobian_det_2d():
    rot = CkMap.rational(["x1 - x2", "x1 + x2"], 2)
    assert np.allclose(jacobian_det(rot, [[0.3, -1.2], [2.0, 1.0]]), 2.0)


@given(
    st.lists(st.integers(-4, 4), min_size=2, max_size=5),
    st.floats(-2, 2, allow_nan=False),
    st.integers(1, 2),
)
def test_fd_matches_symbolic(coeffs, x, order):
    text = " + ".join(f"({c})*x1**{i}" for i, c in enumerate(coeffs))
    exact = CkMap.rational(text)
    bb = CkMap.black_box(lambda p: [sum(c * p[0] ** i for i, c in enumerate(coeffs))])
    want = symbolic_derivative(exact, [[x]], 0, order)[0, 0]
    got = fd_derivative(bb, [[x]], 0, order)[0, 0]
    assert abs(got - want) <= 1e-6 * max(1.0, abs(want))


@given(
    st.floats(0.2, 5).map(lambda a: a) | st.floats(-5, -0.2),
    st.floats(-3, 3),
)
def test_affine_transition_symmetric(a, b):
    fwd = CkMap.rational(f"{a!r}*x1 + {b!r}")
    bwd = CkMap.rational(f"(x1 - {b!r})/{a!r}")
    t = CkTransition("A", "B", Region.interval(-1, 1, closed=True), fwd)
    back = inverse_of(t, bwd)
    assert transition_diffeo_check(t, "inf", back).passes
    assert transition_diffeo_check(back, "inf", t).passes


@given(st.floats(0.25, 3.9), st.floats(0.05, 1.0))
def test_restriction_keeps_passing(lo, width):
    hi = min(lo + width, 4.0)
    t = circle2().transition("N", "S")
    sub = restrict_transition(t, Region.interval(lo, hi, closed=True), 7)
    assert transition_diffeo_check(sub, "inf", RECIP).passes
