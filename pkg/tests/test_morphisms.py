from itertools import product

import pytest
from hypothesis import given, strategies as st

from atlasforge.errors import CompositionUndefined, PreconditionError
from atlasforge.morphisms import classify, compose, equivalent, identity, iter_pairs


@pytest.fixture(scope="module")
def max_pairs(pc4_max):
    return [(m, classify(m)) for m in iter_pairs(pc4_max, pc4_max)]


@pytest.fixture(scope="module")
def max_morphisms(max_pairs):
    return [m for m, r in max_pairs if r.morphism]


def flags(r):
    return (r.near, r.morphism, r.semi_strict, r.strict)


def test_identity_flags(pc4_atlas, pc4_max):
    assert flags(classify(identity(pc4_max))) == (True,) * 4
    # seed charts alone do not provide the witnesses for the morphism clause
    assert flags(classify(identity(pc4_atlas))) == (True, False, True, True)
    inc = classify(identity(pc4_atlas, pc4_max))
    assert inc.near and not inc.morphism


def test_taxonomy_counts(max_pairs, pc4_atlas):
    assert len(max_pairs) == 396
    counts = {}
    for _, r in max_pairs:
        counts[flags(r)] = counts.get(flags(r), 0) + 1
    assert counts == {(True,) * 4: 38, (False,) * 4: 358}
    seed = {}
    for m in iter_pairs(pc4_atlas, pc4_atlas):
        k = flags(classify(m))
        seed[k] = seed.get(k, 0) + 1
    assert sum(seed.values()) == 396
    assert seed[(True,) * 4] == 4
    assert seed[(False,) * 4] == 342
    near_only = sum(v for k, v in seed.items() if k[0] and not k[1])
    assert near_only == 50


def test_implications_between_semi_maximal_atlases(max_pairs):
    for _, r in max_pairs:
        assert r.near == r.morphism
        if r.strict:
            assert r.semi_strict
        if r.semi_strict:
            assert r.near


def test_composition_closed_and_associative(max_morphisms):
    keys = {m.key() for m in max_morphisms}
    for g, f in product(max_morphisms, repeat=2):
        h = compose(g, f, check=False)
        assert h.key() in keys
    sample = max_morphisms[:12]
    for h, g, f in product(sample, repeat=3):
        left = compose(h, compose(g, f, check=False), check=False)
        right = compose(compose(h, g, check=False), f, check=False)
        assert left.key() == right.key()


def test_identity_laws(pc4_max, max_morphisms):
    i = identity(pc4_max)
    for m in max_morphisms:
        assert compose(m, i).key() == m.key() == compose(i, m).key()


def test_compose_rejects_non_near(max_pairs):
    bad = next(m for m, r in max_pairs if not r.near)
    good = next(m for m, r in max_pairs if r.morphism)
    with pytest.raises(PreconditionError):
        compose(good, bad)


def test_near_factor_needs_semi_maximal_middle(pc4_atlas):
    near_only = next(m for m in iter_pairs(pc4_atlas, pc4_atlas) if (lambda r: r.near and not r.morphism)(classify(m)))
    with pytest.raises(CompositionUndefined):
        compose(near_only, near_only)


def test_equivalence_ignores_coordinates(max_morphisms):
    by_f0 = {}
    for m in max_morphisms:
        by_f0.setdefault(m.f0, []).append(m)
    for group in by_f0.values():
        for a in group:
            for b in group:
                assert equivalent(a, b)


@given(st.data())
def test_composite_of_morphisms_is_morphism(max_morphisms, data):
    g = data.draw(st.sampled_from(max_morphisms))
    f = data.draw(st.sampled_from(max_morphisms))
    assert classify(compose(g, f), levels={"morphism"}).morphism
