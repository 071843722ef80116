from itertools import permutations

import pytest

from atlasforge.bundles import (
    BundleChart,
    BundleMorphism,
    FiniteGroup,
    bundle_atlas_report,
    bundle_identity,
    bundle_maximal_closure,
    bundle_minimal_functor,
    bundle_minimal_spaces,
    bundle_subchart,
    bundle_chart_check,
    classify_bundle_morphism,
    derive_projection,
    fiber_homeomorphic,
    grho_compatible,
    grho_generators,
    grho_morphism_report,
    iter_bundle_morphisms,
    round_trip,
)
from atlasforge.cats import check_category_laws, check_functor_laws
from atlasforge.errors import MalformedInput, PreconditionError
from atlasforge.fintop import Arrow, connected_components, pair, unpair
from atlasforge.modelspace import check_axioms, minimal_closure

FLIP = {"0": "1", "1": "0"}


def components_oracle(space):
    """Union-find over points sharing a minimal open neighbourhood."""
    parent = {p: p for p in space.points}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for x in space.points:
        nbhd = frozenset.intersection(*[o for o in space.opens if x in o])
        for y in nbhd:
            parent[find(y)] = find(x)
    return len({find(p) for p in space.points})


def all_subcharts(a):
    out = set(a.charts)
    for c in a.charts:
        for v in a.bundle.base.opens:
            if v and v <= c.base_open:
                out.add(bundle_subchart(c, v, a.bundle))
    return sorted(out)


def test_grho_space(triv):
    g = triv.bundle.grho
    assert len([o for o in g.objects if o]) == 6
    assert len(g.arrows) == 53
    assert check_axioms(g).passed
    assert minimal_closure(g.space, g.objects, grho_generators(g)).arrows == g.arrows


def test_group_table_validation():
    # left-zero semigroup: associative, no identity
    with pytest.raises(MalformedInput):
        FiniteGroup.of("ab", {("a", "a"): "a", ("a", "b"): "a", ("b", "a"): "b", ("b", "b"): "b"})


@pytest.mark.parametrize("name,closure_size,components", [("triv", 14, 2), ("mobius", 12, 1)])
def test_atlas_reports(request, name, closure_size, components):
    a = request.getfixturevalue(name)
    assert all(bundle_chart_check(c, a.bundle)[0] for c in a.charts)
    r = bundle_atlas_report(a)
    assert (r.is_atlas, r.is_full, r.is_semi_maximal, r.is_maximal) == (True, True, False, False)
    assert r.cross_check_agrees
    m = bundle_maximal_closure(a)
    assert len(m.charts) == closure_size
    r = bundle_atlas_report(m)
    assert r.is_atlas and r.is_semi_maximal and r.is_maximal and r.cross_check_agrees
    assert bundle_maximal_closure(m) == m
    total = m.bundle.total
    assert len(connected_components(total)) == components == components_oracle(total)


def test_cocycle_values(triv, mobius):
    c1, c2 = triv.sorted_charts
    assert grho_compatible(c1, c2, triv.bundle).g_function == {"a": "e", "b": "e"}
    c1, c2 = mobius.sorted_charts
    assert grho_compatible(c1, c2, mobius.bundle).g_function == {"a": "e", "b": "s"}


@pytest.mark.parametrize("name", ["triv_max", "mobius_max"])
def test_grho_compatibility_symmetric(request, name):
    a = request.getfixturevalue(name)
    pool = all_subcharts(a)
    for c1 in pool:
        for c2 in pool:
            assert bool(grho_compatible(c1, c2, a.bundle)) == bool(grho_compatible(c2, c1, a.bundle))


@pytest.mark.parametrize("name", ["triv", "mobius", "triv_max", "mobius_max"])
def test_projection_and_fibers(request, name):
    a = request.getfixturevalue(name)
    b = a.bundle
    pi = derive_projection(a.charts, b.total, b.base, b.grho)
    assert pi.fn == b.proj.fn
    assert pi.fn.image() == b.base.points
    assert all(fiber_homeomorphic(b, x) for x in b.base.points)


def test_bad_chart_rejected(triv):
    b = triv.bundle
    cross = {"a0": "(a,0)", "a1": "(b,1)", "b0": "(b,0)", "b1": "(a,1)"}
    c = BundleChart(frozenset(cross), frozenset("ab"), Arrow.of(cross, cross.values(), cross))
    assert not bundle_chart_check(c, b)[0]


def test_identity_and_flip_are_morphisms(triv, triv_max):
    assert classify_bundle_morphism(bundle_identity(triv_max)).holds
    assert classify_bundle_morphism(bundle_identity(triv), "near").holds
    e = triv_max.bundle.total.points
    flip = BundleMorphism(
        Arrow.of(e, e, {p: p[0] + FLIP[p[1]] for p in e}),
        Arrow.identity("abcd"),
        Arrow.of("01", "01", FLIP),
        Arrow.identity("es"),
        triv_max,
        triv_max,
    )
    v = classify_bundle_morphism(flip)
    assert v.holds and v.reduction_agrees


def test_grho_morphism_report(triv):
    g = triv.bundle.grho
    pts = g.points
    flip = Arrow.of(pts, pts, {p: pair(unpair(p)[0], FLIP[unpair(p)[1]]) for p in pts})
    assert grho_morphism_report(g, g, Arrow.identity(pts)).is_grho_morphism
    assert grho_morphism_report(g, g, flip).is_grho_morphism
    squash = Arrow.of(pts, pts, {p: p if unpair(p)[0] != "b" else pair("b", "0") for p in pts})
    with pytest.raises(PreconditionError):
        grho_morphism_report(g, g, squash)


def test_bundle_category(bundle_cat, triv_max, mobius_max):
    assert len(bundle_cat.arrows) == 832
    assert check_category_laws(bundle_cat, max_triples=20000)
    assert not [a for a in bundle_cat.hom(mobius_max, triv_max) if a.payload[0].is_bijective()]


def test_round_trip_and_minimal_functors(mobius_cat):
    assert len(mobius_cat.arrows) == 144
    assert check_category_laws(mobius_cat)
    assert round_trip(mobius_cat)
    for which in ("F1", "F2"):
        assert check_functor_laws(bundle_minimal_functor(mobius_cat, which))


def test_minimal_spaces(mobius):
    for which in ("F1", "F2"):
        sp = bundle_minimal_spaces(mobius, which)
        assert (len(sp.objects), len(sp.arrows)) == (3, 8)
        assert check_axioms(sp).passed


def test_no_bijective_map_mobius_to_triv(mobius_max, triv_max):
    assert list(iter_bundle_morphisms(mobius_max, triv_max, bijective_E=True)) == []
    # oracle: no continuous bijection between the totals at all
    src, dst = mobius_max.bundle.total, triv_max.bundle.total
    pts = sorted(src.points)
    hits = 0
    for img in permutations(sorted(dst.points)):
        m = dict(zip(pts, img))
        if all(frozenset(p for p in pts if m[p] in v) in src.opens for v in dst.opens):
            hits += 1
    assert hits == 0
