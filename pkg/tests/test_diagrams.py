import pytest

from atlasforge.atlas import subchart
from atlasforge.diagrams import NcdProblem, complete_ncd, ncd_local
from atlasforge.errors import PreconditionError
from atlasforge.fintop import Arrow, iter_continuous
from atlasforge.fixtures import AB, pc4_atlas, w_space
from atlasforge.modelspace import minimal_closure, trivial

PQR = frozenset("pqr")


def bare_w():
    """All opens of W as objects, arrows only what the closure forces."""
    w = w_space()
    return minimal_closure(w, [o for o in w.opens if o])


def single_link_pairs(amb):
    """Every pair of one-link chains out of a common nonempty object into objects."""
    objs = [o for o in amb.sorted_objects if o]
    for u in objs:
        maps = [f for v in objs for f in iter_continuous(amb.space, u, amb.space, v)]
        for f in maps:
            for g in maps:
                yield f, g


def test_identity_bridge():
    f = Arrow.identity(PQR)
    v = complete_ncd(NcdProblem([f], [f], trivial(w_space())))
    assert v.strong and v.witness == Arrow.identity(PQR)


def test_chart_compatibility_diagram_witness_is_transition():
    a = pc4_atlas()
    c1, c2 = a.sorted_charts
    p = NcdProblem([subchart(c1, AB).coord], [subchart(c2, AB).coord], trivial(w_space()))
    v = complete_ncd(p)
    assert v.strong
    assert v.strong_witness == Arrow.identity("pq")


def test_no_bridge_all_false():
    amb = bare_w()
    f = Arrow.of("pq", PQR, {"p": "p", "q": "q"})
    g = Arrow.of("pq", PQR, {"p": "q", "q": "p"})
    v = complete_ncd(NcdProblem([f], [g], amb))
    assert not (v.left or v.right or v.strong)
    assert v.witness is None


def test_terminal_must_be_object():
    f = Arrow.of("p", "pr", {"p": "p"})
    with pytest.raises(PreconditionError):
        complete_ncd(NcdProblem([f], [f], trivial(w_space())))


def test_vacuous_on_empty_initial():
    amb = trivial(w_space())
    assert ncd_local(NcdProblem([], [], amb, initial=frozenset())).holds
    e = Arrow.of((), PQR, {})
    assert ncd_local(NcdProblem([e], [Arrow.of((), "p", {})], amb)).holds


def test_global_strong_implies_local_strong():
    amb = trivial(w_space())
    f = Arrow.identity(PQR)
    assert complete_ncd(NcdProblem([f], [f], amb)).strong
    assert ncd_local(NcdProblem([f], [f], amb)).holds


def test_local_success_away_from_one_point():
    amb = bare_w()
    left = Arrow.of("pq", PQR, {"p": "p", "q": "q"})
    right = Arrow.of("pq", PQR, {"p": "p", "q": "r"})
    p = NcdProblem([left], [right], amb)
    assert not complete_ncd(p).strong
    r = ncd_local(p)
    assert not r.holds
    assert r.per_point["p"] is not None and r.per_point["q"] is None
    assert ncd_local(p, at="p").holds


def test_strong_survives_enlargement():
    small, big = bare_w(), trivial(w_space())
    checked = 0
    for f, g in single_link_pairs(small):
        if complete_ncd(NcdProblem([f], [g], small)).strong:
            checked += 1
            assert complete_ncd(NcdProblem([f], [g], big)).strong
    assert checked > 0
