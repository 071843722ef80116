import pytest

from atlasforge.cats import (
    Arr,
    SmallCat,
    build_atlas_category,
    check_category_laws,
    check_functor_laws,
    compose_functors,
    functor_M_Classic,
    functor_M_Top,
    functor_Top_M,
    is_identity_functor,
    minimal_space,
    minimal_space_functor,
)
from atlasforge.errors import PreconditionError
from atlasforge.modelspace import check_axioms


def test_category_sizes_and_laws(pc4_cat):
    assert len(pc4_cat.objects) == 2
    assert len(pc4_cat.arrows) == 61
    assert check_category_laws(pc4_cat)


@pytest.mark.parametrize("restriction", ["max", "S-max", "strict", "semi-strict", "const"])
def test_restricted_categories(pc4_max, restriction):
    c = build_atlas_category([pc4_max], restriction=restriction)
    assert len(c.arrows) == 38
    assert check_category_laws(c)


def test_object_filter_rejects(pc4_atlas):
    with pytest.raises(PreconditionError):
        build_atlas_category([pc4_atlas], restriction="max")


def test_classic_category(pc4_atlas, pc4_max):
    c = build_atlas_category([pc4_atlas, pc4_max], "classic")
    assert len(c.arrows) == 144
    assert check_category_laws(c)


def test_law_checker_catches_broken_table():
    ids = {"o": Arr("id", "o", "o")}
    f = Arr("f", "o", "o")
    cat = SmallCat.build(["o"], [f], ids, lambda g, h: h if g == "id" else (g if h == "id" else "ff"))
    assert not check_category_laws(cat)


def _assoc_broken():
    table = {("a", "a"): "b", ("a", "b"): "a", ("b", "a"): "b", ("b", "b"): "b"}

    def comp(g, f):
        if g == "id":
            return f
        if f == "id":
            return g
        return table[(g, f)]

    ids = {"o": Arr("id", "o", "o")}
    return SmallCat.build(["o"], [Arr("a", "o", "o"), Arr("b", "o", "o")], ids, comp)


def test_law_checker_catches_associativity():
    r = check_category_laws(_assoc_broken())
    assert not r and not r.sampled
    assert {x[0] for x in r.counterexamples} == {"associativity"}


def test_sampled_associativity():
    # two of the 27 triples break; sampling is seeded
    reports = [check_category_laws(_assoc_broken(), max_triples=20, seed=s) for s in range(10)]
    assert all(r.sampled for r in reports)
    assert any(not r for r in reports)


def test_forgetful_and_classic_functors(pc4_cat):
    assert check_functor_laws(functor_M_Classic(pc4_cat))
    ft = functor_M_Top(pc4_cat)
    assert check_functor_laws(ft)
    back = functor_Top_M(ft.dst)
    assert check_functor_laws(back)
    assert is_identity_functor(compose_functors(functor_M_Top(back.dst), back))


@pytest.mark.parametrize("which,objects,arrows", [("F1", 3, 7), ("F2", 2, 3)])
def test_minimal_spaces(pc4_atlas, pc4_cat, which, objects, arrows):
    sp = minimal_space(pc4_atlas, which)
    assert (len(sp.objects), len(sp.arrows)) == (objects, arrows)
    assert check_axioms(sp).passed
    assert check_functor_laws(minimal_space_functor(pc4_cat, which))


def test_unknown_minimal_functor(pc4_atlas):
    with pytest.raises(PreconditionError):
        minimal_space(pc4_atlas, "F3")
