"""Acceptance criteria, one test each; the summary prints a PASS/FAIL line per criterion."""
import time
from itertools import combinations, permutations, product

import pytest

from atlasforge import fixtures
from atlasforge.atlas import are_compatible, is_atlas, is_maximal, is_semi_maximal, maximal_closure, subchart
from atlasforge.bundles import (
    bundle_subchart,
    derive_projection,
    fiber_homeomorphic,
    grho_compatible,
    iter_bundle_morphisms,
    round_trip,
)
from atlasforge.cats import (
    check_category_laws,
    check_functor_laws,
    compose_functors,
    functor_M_Classic,
    functor_M_Top,
    functor_Top_M,
    is_identity_functor,
    minimal_space_functor,
)
from atlasforge.cknum import CkMap, CkTransition, Region, ck_atlas_report, fd_derivative, transition_diffeo_check
from atlasforge.diagrams import NcdProblem, complete_ncd, ncd_local
from atlasforge.fintop import Arrow, iter_continuous, product as space_product
from atlasforge.modelspace import check_axioms, minimal_closure, trivial
from atlasforge.morphisms import classify, compose, identity, iter_pairs
from test_bundles import all_subcharts, components_oracle


def fixture_spaces():
    out = dict(fixtures.all_small_spaces())
    out["SIERP2"] = space_product(fixtures.sierp(), fixtures.sierp())
    out["E_TRIV"] = fixtures.bundle_total(False)
    out["E_MOBIUS"] = fixtures.bundle_total(True)
    return out


def closure_seeds(space):
    opens = sorted((o for o in space.opens if o), key=lambda o: (len(o), sorted(o)))
    yield opens, ()
    for o in opens:
        yield [o], ()
    for u in opens:
        for f in iter_continuous(space, u, space, u):
            if f.is_bijective():
                yield [u], (f,)


def matlas_pool(a):
    out = set(a.charts)
    for c in a.charts:
        for u in a.total.objects:
            if u and u <= c.patch:
                out.add(subchart(c, u, a.total))
    return sorted(out)


@pytest.mark.criterion(1, "model-space axioms for trivial spaces and minimal closures")
def test_criterion_1_axioms():
    for name, s in fixture_spaces().items():
        assert check_axioms(trivial(s)).passed, name
        for objs, arrows in closure_seeds(s):
            cl = minimal_closure(s, objs, arrows)
            assert check_axioms(cl).passed, (name, objs, arrows)
            assert minimal_closure(s, cl.objects, cl.arrows) == cl


@pytest.mark.criterion(2, "compatibility symmetry and subchart heredity")
def test_criterion_2_compatibility(pc4_atlas, pc4_max, triv, mobius, triv_max, mobius_max):
    for a in (pc4_atlas, pc4_max):
        pool = matlas_pool(a)
        w = a.coord_space
        for c1, c2 in product(pool, repeat=2):
            fwd = are_compatible(c1, c2, w)
            assert fwd == are_compatible(c2, c1, w)
            if fwd:
                for u in a.total.objects:
                    if u and u <= c1.patch:
                        assert are_compatible(subchart(c1, u, a.total), c2, w)
    # bundle atlases: subcharts live over base opens
    for a in (triv, mobius, triv_max, mobius_max):
        b = a.bundle
        pool = all_subcharts(a)
        for c1, c2 in product(pool, repeat=2):
            fwd = bool(grho_compatible(c1, c2, b))
            assert fwd == bool(grho_compatible(c2, c1, b))
            if fwd:
                for v in b.base.opens:
                    if v and v <= c1.base_open:
                        assert grho_compatible(bundle_subchart(c1, v, b), c2, b)


@pytest.mark.criterion(3, "maximal closure: extensive, idempotent, maximal, unique; maximal implies semi-maximal")
def test_criterion_3_closure(pc4_atlas, pc4_max):
    assert pc4_atlas.charts <= pc4_max.charts
    assert maximal_closure(pc4_max) == pc4_max
    assert is_maximal(pc4_max)
    charts = pc4_max.sorted_charts
    seen = 0
    for r in range(1, len(charts) + 1):
        for s in combinations(charts, r):
            a = pc4_max.with_charts(s)
            if not is_atlas(a):
                continue
            seen += 1
            if r <= 3:
                assert maximal_closure(a) == pc4_max
            if is_maximal(a):
                assert is_semi_maximal(a)
    assert seen > 0


@pytest.mark.criterion(4, "morphism taxonomy implications and composition")
def test_criterion_4_morphisms(pc4_atlas, pc4_max):
    for s, t in [(pc4_atlas, pc4_atlas), (pc4_atlas, pc4_max), (pc4_max, pc4_atlas), (pc4_max, pc4_max)]:
        for m in iter_pairs(s, t):
            r = classify(m)
            if r.strict:
                assert r.semi_strict
            if r.morphism:
                assert r.near
            if r.near and is_semi_maximal(s) and is_semi_maximal(t):
                assert r.morphism
    mors = [m for m in iter_pairs(pc4_max, pc4_max) if classify(m, levels={"morphism"}).morphism]
    keys = {m.key() for m in mors}
    comp = {}
    for g, f in product(mors, repeat=2):
        h = compose(g, f, check=False)
        assert h.key() in keys
        comp[(g.key(), f.key())] = h.key()
    for h, g, f in product(keys, repeat=3):
        assert comp[(h, comp[(g, f)])] == comp[(comp[(h, g)], f)]
    i = identity(pc4_max)
    for m in mors:
        assert compose(m, i).key() == m.key() == compose(i, m).key()


@pytest.mark.criterion(5, "functor laws and the Top round trip")
def test_criterion_5_functors(pc4_cat):
    ft = functor_M_Top(pc4_cat)
    back = functor_Top_M(ft.dst)
    for f in (ft, back, functor_M_Classic(pc4_cat),
              minimal_space_functor(pc4_cat, "F1"), minimal_space_functor(pc4_cat, "F2")):
        assert check_functor_laws(f), f.name
    assert is_identity_functor(compose_functors(functor_M_Top(back.dst), back))


@pytest.mark.criterion(6, "bundle track: cocycle symmetry, projection, fibers, round trip, category laws")
def test_criterion_6_bundles(triv, mobius, triv_max, mobius_max, bundle_cat, mobius_cat):
    for a in (triv, mobius, triv_max, mobius_max):
        b = a.bundle
        pool = all_subcharts(a)
        for c1, c2 in product(pool, repeat=2):
            assert bool(grho_compatible(c1, c2, b)) == bool(grho_compatible(c2, c1, b))
        pi = derive_projection(a.charts, b.total, b.base, b.grho)
        assert pi.fn == b.proj.fn
        assert pi.fn.image() == b.base.points
        # the closure's charts pin down the same projection
        assert derive_projection(pool, b.total, b.base, b.grho).fn == pi.fn
        assert all(fiber_homeomorphic(b, x) for x in b.base.points)
    assert round_trip(mobius_cat)
    laws = check_category_laws(bundle_cat)
    assert laws and not laws.sampled


@pytest.mark.criterion(7, "Moebius distinguisher")
def test_criterion_7_mobius(triv_max, mobius_max):
    assert components_oracle(triv_max.bundle.total) == 2
    assert components_oracle(mobius_max.bundle.total) == 1
    assert list(iter_bundle_morphisms(mobius_max, triv_max, bijective_E=True)) == []
    src, dst = mobius_max.bundle.total, triv_max.bundle.total
    pts = sorted(src.points)
    for img in permutations(sorted(dst.points)):
        m = dict(zip(pts, img))
        assert not all(frozenset(p for p in pts if m[p] in v) in src.opens for v in dst.opens)


@pytest.mark.criterion(8, "C^k numerics on CIRCLE2 and the reciprocal map")
def test_criterion_8_cknum():
    start = time.perf_counter()
    r = ck_atlas_report(fixtures.circle2(), "inf")
    assert r.is_atlas
    for t in r.transitions.values():
        assert t.mode == "polynomial"
        assert abs(t.min_abs_jacobian_det - 0.0625) < 1e-9
    recip = CkMap.black_box(lambda p: [1 / p[0]])
    assert abs(fd_derivative(recip, [[2.0]])[0, 0] + 0.25) < 1e-6
    ab = CkMap.black_box(lambda p: [abs(p[0])])
    assert not transition_diffeo_check(CkTransition("A", "B", Region.interval(-1, 1), ab), 1, ab).passes
    assert time.perf_counter() - start < 1.0


@pytest.mark.criterion(9, "diagram vacuity and enlargement stability")
def test_criterion_9_diagrams():
    for space in (fixtures.w_space(), fixtures.pc4()):
        big = trivial(space)
        small = minimal_closure(space, [o for o in space.opens if o])
        objs = sorted(small.objects, key=lambda o: (len(o), sorted(o)))
        empty = frozenset()
        assert ncd_local(NcdProblem([], [], big, initial=empty)).holds
        for v1, v2 in product(objs, repeat=2):
            assert ncd_local(NcdProblem([Arrow.of((), v1, {})], [Arrow.of((), v2, {})], big)).holds
            for w in objs:
                for f in iter_continuous(space, v1, space, w):
                    chain = [Arrow.of((), v1, {}), f]
                    assert ncd_local(NcdProblem(chain, [Arrow.of((), v2, {})], big)).holds
        nonempty = [o for o in objs if o]
        strong = 0
        for u in nonempty:
            maps = [f for v in nonempty for f in iter_continuous(space, u, space, v)]
            for f, g in product(maps, repeat=2):
                if complete_ncd(NcdProblem([f], [g], small)).strong:
                    strong += 1
                    assert complete_ncd(NcdProblem([f], [g], big)).strong
        assert strong > 0
