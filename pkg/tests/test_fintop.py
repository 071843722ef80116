from itertools import product as iproduct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from atlasforge.errors import MalformedInput, PreconditionError
from atlasforge.fintop import (
    Arrow,
    CMap,
    FinSpace,
    compose,
    connected_components,
    continuous_on,
    is_homeomorphism,
    iter_continuous,
    iter_homeomorphisms,
    pair,
    product,
    rectangle,
    subspace,
    unpair,
)
from atlasforge.fixtures import disc2, pc4, sierp, w_space


def brute_continuous(x: FinSpace, a, y: FinSpace, b):
    """Continuity straight from the definition: preimages of relative opens are relatively open."""
    a, b = sorted(a), sorted(b)
    rel_x = {frozenset(u & set(a)) for u in x.opens}
    rel_y = {frozenset(v & set(b)) for v in y.opens}
    out = []
    for vals in iproduct(b, repeat=len(a)):
        m = dict(zip(a, vals))
        if all(frozenset(p for p in a if m[p] in v) in rel_x for v in rel_y):
            out.append(m)
    return out


@st.composite
def spaces(draw, max_points=4):
    n = draw(st.integers(1, max_points))
    pts = [f"x{i}" for i in range(n)]
    sub = draw(st.lists(st.sets(st.sampled_from(pts)), max_size=5))
    return FinSpace.from_subbasis(pts, sub)


def test_pc4_opens():
    s = pc4()
    assert len(s.opens) == 7
    assert s.min_nbhd["c"] == frozenset("abc")
    assert s.min_nbhd["a"] == frozenset("a")


def test_sierpinski_and_w():
    assert sierp().opens == {frozenset(), frozenset("1"), frozenset("01")}
    assert frozenset("pq") in w_space().opens
    assert len(w_space().opens) == 5


def test_from_opens_rejects_non_topology():
    with pytest.raises(MalformedInput):
        FinSpace(frozenset("ab"), frozenset({frozenset(), frozenset("a"), frozenset("b")}))


def test_subbasis_outside_points():
    with pytest.raises(MalformedInput):
        FinSpace.from_subbasis("ab", [{"z"}])


@given(spaces())
def test_opens_form_topology(s):
    for u in s.opens:
        for v in s.opens:
            assert u | v in s.opens and u & v in s.opens


@given(spaces(3), spaces(3))
def test_continuous_enumeration_matches_definition(x, y):
    got = {f.graph for f in iter_continuous(x, x.points, y, y.points)}
    want = {tuple(sorted(m.items())) for m in brute_continuous(x, x.points, y, y.points)}
    assert got == want


def test_pc4_self_maps_count():
    # derived by the brute-force oracle above and frozen
    assert sum(1 for _ in iter_continuous(pc4(), "abcd", pc4(), "abcd")) == 36
    assert len(brute_continuous(pc4(), "abcd", pc4(), "abcd")) == 36


def test_homeomorphisms_of_pc4():
    hs = list(iter_homeomorphisms(pc4(), "abcd", pc4(), "abcd"))
    # swap a/b, swap c/d, or both
    assert len(hs) == 4
    assert all(is_homeomorphism(CMap(pc4(), pc4(), h)) for h in hs)


@given(spaces(3), spaces(3), spaces(3))
def test_composition_of_continuous_maps(x, y, z):
    fs = list(iter_continuous(x, x.points, y, y.points))[:4]
    gs = list(iter_continuous(y, y.points, z, z.points))[:4]
    for f in fs:
        for g in gs:
            assert continuous_on(x, compose(g, f), z)


def test_compose_mismatch():
    f = Arrow.of("a", "p", {"a": "p"})
    g = Arrow.of("q", "q", {"q": "q"})
    with pytest.raises(Exception):
        compose(g, f)


def test_cmap_rejects_discontinuous():
    with pytest.raises(PreconditionError):
        CMap.of(sierp(), sierp(), {"0": "1", "1": "0"})


@given(st.text("abc", min_size=1, max_size=3), st.text("xyz", min_size=1, max_size=3))
def test_pair_roundtrip(x, y):
    assert unpair(pair(x, y)) == (x, y)
    assert unpair(pair(pair(x, y), y)) == (pair(x, y), y)


def test_product_of_sierpinski_has_six_opens():
    # up-sets of the product order on {0,1}^2: {}, 11, 01+11, 10+11, three points, all
    assert len(product(sierp(), sierp()).opens) == 6


def test_rectangle_and_subspace():
    r = rectangle("ab", "01")
    assert r == {"(a,0)", "(a,1)", "(b,0)", "(b,1)"}
    sub = subspace(pc4(), "abc")
    assert sub.opens == {frozenset(), frozenset("a"), frozenset("b"), frozenset("ab"), frozenset("abc")}


def test_components():
    assert len(connected_components(pc4())) == 1
    assert len(connected_components(disc2())) == 2


@given(spaces())
def test_components_partition(s):
    comps = connected_components(s)
    flat = [p for c in comps for p in c]
    assert sorted(flat) == sorted(s.points)
    # every open set's minimal neighbourhoods stay inside one component
    where = {p: i for i, c in enumerate(comps) for p in c}
    for x, m in s.min_nbhd.items():
        assert {where[y] for y in m} == {where[x]}
