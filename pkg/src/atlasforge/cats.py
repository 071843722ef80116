"""Explicit small categories, atlas categories and the functors between them."""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import Callable, Hashable, Iterable

import numpy as np

from .atlas import MAtlas, is_atlas, is_full, is_maximal, is_semi_maximal, transition
from .errors import CompositionUndefined, PreconditionError
from .fintop import Arrow, compose as compose_arrows
from .modelspace import ModelSpace, is_fine_grained, is_model_function, minimal_closure, trivial
from .morphisms import (
    AtlasMorphism,
    classify,
    classify_classic,
    iter_pairs,
)


@dataclass(frozen=True)
class Arr:
    """Labeled arrow: equal payloads with different endpoints are different arrows."""

    payload: Hashable
    dom: Hashable
    cod: Hashable


@dataclass
class SmallCat:
    objects: tuple
    arrows: tuple
    compose: dict
    identities: dict
    meta: dict = field(default_factory=dict)

    @staticmethod
    def build(
        objects: Iterable,
        arrows: Iterable[Arr],
        identities: dict,
        composer: Callable,
        meta: dict | None = None,
    ) -> "SmallCat":
        """Fill the composition table with ``composer(g_payload, f_payload)``."""
        objects = tuple(objects)
        arrows = tuple(dict.fromkeys(list(arrows) + list(identities.values())))
        by_dom: dict = {}
        for a in arrows:
            by_dom.setdefault(a.dom, []).append(a)
        table = {}
        for f in arrows:
            for g in by_dom.get(f.cod, ()):
                table[(g, f)] = Arr(composer(g.payload, f.payload), f.dom, g.cod)
        return SmallCat(objects, arrows, table, dict(identities), dict(meta or {}))

    def hom(self, a, b) -> list:
        return [x for x in self.arrows if x.dom == a and x.cod == b]


@dataclass
class LawReport:
    passed: bool
    counterexamples: list = field(default_factory=list)
    sampled: bool = False

    def __bool__(self) -> bool:
        return self.passed


def _triples(by_dom: dict, arrows, cods: list, max_triples: int | None, seed: int):
    """Composable index triples ``(f, g, h)``; a seeded sample when there are more than ``max_triples``."""
    total = sum(len(by_dom.get(cods[g], ())) for f in arrows for g in by_dom.get(cods[f], ()))
    if max_triples is None or total <= max_triples:
        for f in arrows:
            for g in by_dom.get(cods[f], ()):
                for h in by_dom.get(cods[g], ()):
                    yield f, g, h
        return
    rng = random.Random(seed)
    arrows = list(arrows)
    for _ in range(max_triples):
        f = rng.choice(arrows)
        g = rng.choice(by_dom[cods[f]])
        yield f, g, rng.choice(by_dom[cods[g]])


def _associativity_failures(table: dict, n: int, limit: int = 10) -> list:
    """Every triple at once: ``m[h, m[g, f]] == m[m[h, g], f]`` with ``n`` as the undefined marker."""
    m = np.full((n + 1, n + 1), n, dtype=np.int64)
    for (g, f), h in table.items():
        m[g, f] = h if h >= 0 else n
    out = []
    for f in range(n):
        col = m[:, f]
        left = m[:n, col[:n]]  # [h, g] -> h . (g . f)
        right = col[m[:n, :n]]  # [h, g] -> (h . g) . f
        bad = np.argwhere(left != right)
        for h, g in bad[: limit - len(out)]:
            out.append((int(h), int(g), f))
        if len(out) >= limit:
            break
    return out


def check_category_laws(
    c: SmallCat,
    *,
    max_examples: int = 10,
    max_triples: int | None = None,
    seed: int = 0,
) -> LawReport:
    """Identities, closure, unit laws and associativity.

    Everything is exhaustive except associativity once the number of
    composable triples exceeds ``max_triples``; then a seeded sample of
    that size is checked and the report is marked ``sampled``.
    """
    bad: list = []

    def note(*item):
        if len(bad) < max_examples:
            bad.append(item)

    arrows = set(c.arrows)
    objs = set(c.objects)
    for o in c.objects:
        i = c.identities.get(o)
        if i is None or i not in arrows or i.dom != o or i.cod != o:
            note("identity", o)
    for a in c.arrows:
        if a.dom not in objs or a.cod not in objs:
            note("endpoint", a)
    by_dom: dict = {}
    for a in c.arrows:
        by_dom.setdefault(a.dom, []).append(a)
    for (g, f), h in c.compose.items():
        if f.cod != g.dom:
            note("defined on non-composable pair", g, f)
    for f in c.arrows:
        for g in by_dom.get(f.cod, ()):
            h = c.compose.get((g, f))
            if h is None:
                note("missing composite", g, f)
            elif h not in arrows:
                note("composite not an arrow", g, f, h)
            elif h.dom != f.dom or h.cod != g.cod:
                note("composite endpoints", g, f, h)
    for f in c.arrows:
        il, ir = c.identities.get(f.cod), c.identities.get(f.dom)
        if il is not None and c.compose.get((il, f)) != f:
            note("left identity", f)
        if ir is not None and c.compose.get((f, ir)) != f:
            note("right identity", f)
    total = sum(len(by_dom.get(g.cod, ())) for f in c.arrows for g in by_dom.get(f.cod, ()))
    # integer table: hashing payload-heavy arrows dominates otherwise
    idx = {a: i for i, a in enumerate(c.arrows)}
    table = {(idx[g], idx[f]): idx.get(h, -1) for (g, f), h in c.compose.items() if g in idx and f in idx}
    by_dom_i = {o: [idx[a] for a in xs] for o, xs in by_dom.items()}
    cods = [a.cod for a in c.arrows]
    sampled = max_triples is not None and total > max_triples
    if sampled:
        for f, g, h in _triples(by_dom_i, range(len(c.arrows)), cods, max_triples, seed):
            gf, hg = table.get((g, f)), table.get((h, g))
            if gf is None or hg is None or gf < 0 or hg < 0:
                continue
            if table.get((h, gf)) != table.get((hg, f)):
                note("associativity", c.arrows[h], c.arrows[g], c.arrows[f])
    else:
        for h, g, f in _associativity_failures(table, len(c.arrows)):
            note("associativity", c.arrows[h], c.arrows[g], c.arrows[f])
    return LawReport(not bad, bad, sampled)


OBJECT_FLAGS = {"full", "S-max", "max"}
ARROW_FLAGS = {"semi-strict", "strict", "const"}


def _flags(restriction) -> frozenset:
    if restriction is None or restriction == "plain":
        return frozenset()
    if isinstance(restriction, str):
        parts = restriction.replace(",", " ").split()
    else:
        parts = list(restriction)
    flags = frozenset(p for p in parts if p != "plain")
    unknown = flags - OBJECT_FLAGS - ARROW_FLAGS
    if unknown:
        raise PreconditionError(f"unknown restriction {sorted(unknown)}")
    return flags


def _morphism_payload(m: AtlasMorphism) -> tuple:
    return (m.f0, m.f1)


def _compose_payloads(g: tuple, f: tuple) -> tuple:
    return tuple(compose_arrows(gi, fi) for gi, fi in zip(g, f))


def atlas_identity(a: MAtlas, arrow_mode: str = "morphism") -> Arr:
    ids = (Arrow.identity(a.total.points), Arrow.identity(a.coord_space.points))
    return Arr(ids if arrow_mode == "morphism" else ids[:1], a, a)


def build_atlas_category(
    objects: Iterable[MAtlas],
    arrow_mode: str = "morphism",
    restriction="plain",
    *,
    ambient: tuple | None = None,
    budget: int | None = None,
) -> SmallCat:
    """Atlas category over a supplied object set.

    ``restriction`` is a flag string or iterable drawn from ``full``,
    ``S-max``, ``max`` (object filters) and ``semi-strict``, ``strict``,
    ``const`` (arrow filters).  Objects violating an object flag raise.
    """
    if arrow_mode not in ("morphism", "classic"):
        raise PreconditionError(f"unknown arrow mode {arrow_mode!r}")
    flags = _flags(restriction)
    objects = list(dict.fromkeys(objects))
    for o in objects:
        if not is_atlas(o):
            raise PreconditionError(f"{o!r} is not an atlas")
        if "full" in flags and not is_full(o):
            raise PreconditionError(f"{o!r} is not full")
        if "S-max" in flags and not is_semi_maximal(o):
            raise PreconditionError(f"{o!r} is not semi-maximal")
        if "max" in flags and not is_maximal(o):
            raise PreconditionError(f"{o!r} is not maximal")
    arrows = []
    kw = {} if budget is None else {"budget": budget}
    for s, t in iproduct(objects, objects):
        if arrow_mode == "morphism":
            for m in iter_pairs(s, t, **kw):
                r = classify(m, ambient, levels={"near", "morphism", "strict"} if flags & ARROW_FLAGS else {"morphism"})
                if not r.morphism:
                    continue
                if "semi-strict" in flags and not r.semi_strict:
                    continue
                if "strict" in flags and not r.strict:
                    continue
                if "const" in flags and not r.constrained:
                    continue
                arrows.append(Arr(_morphism_payload(m), s, t))
        else:
            seen = set()
            for m in iter_pairs(s, t, **kw):
                if m.f0 in seen:
                    continue
                seen.add(m.f0)
                r = classify_classic(m.f0, s, t, ambient)
                if not r.classic:
                    continue
                if "semi-strict" in flags and not r.semi_strict:
                    continue
                if "strict" in flags and not r.strict:
                    continue
                if "const" in flags and not r.constrained:
                    continue
                arrows.append(Arr((m.f0,), s, t))
    ids = {o: atlas_identity(o, arrow_mode) for o in objects}
    meta = {"arrow_mode": arrow_mode, "restriction": sorted(flags) or ["plain"], "ambient": ambient is not None}
    return SmallCat.build(objects, arrows, ids, _compose_payloads, meta)


@dataclass
class FunctorData:
    src: SmallCat
    dst: SmallCat
    on_objects: dict
    on_arrows: dict
    name: str = ""


def check_functor_laws(f: FunctorData, *, max_examples: int = 10) -> LawReport:
    bad: list = []

    def note(*item):
        if len(bad) < max_examples:
            bad.append(item)

    dst_objs, dst_arrows = set(f.dst.objects), set(f.dst.arrows)
    for o in f.src.objects:
        img = f.on_objects.get(o)
        if img is None or img not in dst_objs:
            note("endpoint", "object leaves the target category", o)
    for a in f.src.arrows:
        img = f.on_arrows.get(a)
        if img is None or img not in dst_arrows:
            note("endpoint", "arrow leaves the target category", a)
            continue
        if img.dom != f.on_objects.get(a.dom) or img.cod != f.on_objects.get(a.cod):
            note("endpoint", "arrow endpoints not preserved", a)
    for o in f.src.objects:
        i = f.src.identities[o]
        if f.on_arrows.get(i) != f.dst.identities.get(f.on_objects.get(o)):
            note("identity", o)
    for (g, h), gh in f.src.compose.items():
        fg, fh, fgh = f.on_arrows.get(g), f.on_arrows.get(h), f.on_arrows.get(gh)
        if None in (fg, fh, fgh):
            continue
        if f.dst.compose.get((fg, fh)) != fgh:
            note("composition", g, h)
    return LawReport(not bad, bad)


def compose_functors(g: FunctorData, f: FunctorData) -> FunctorData:
    return FunctorData(
        f.src,
        g.dst,
        {o: g.on_objects.get(v) for o, v in f.on_objects.items()},
        {a: g.on_arrows.get(v) for a, v in f.on_arrows.items()},
        f"{g.name}.{f.name}",
    )


def is_identity_functor(f: FunctorData) -> bool:
    return all(f.on_objects.get(o) == o for o in f.src.objects) and all(
        f.on_arrows.get(a) == a for a in f.src.arrows
    )


def _relabel(src: SmallCat, obj_map: dict, dst_objects: list) -> FunctorData:
    """Functor keeping payloads and moving endpoints along ``obj_map``."""
    meta = dict(src.meta)
    keep = set(dst_objects)
    arrows = [Arr(a.payload, obj_map[a.dom], obj_map[a.cod]) for a in src.arrows
              if obj_map[a.dom] in keep and obj_map[a.cod] in keep]
    mode = meta.get("arrow_mode", "morphism")
    ids = {o: atlas_identity(o, mode) for o in dst_objects}
    dst = SmallCat.build(dst_objects, arrows, ids, _compose_payloads, meta)
    on_arrows = {a: Arr(a.payload, obj_map[a.dom], obj_map[a.cod]) for a in src.arrows}
    return FunctorData(src, dst, dict(obj_map), on_arrows)


def _rebuild_dst(src: SmallCat, objects: list) -> SmallCat:
    meta = src.meta
    return build_atlas_category(objects, meta.get("arrow_mode", "morphism"), meta.get("restriction", "plain"))


def functor_M_Top(src: SmallCat, *, require_fine_grained: bool = True, independent: bool = True) -> FunctorData:
    """Forget the total model structure: ``(A, E, C) -> (A, Top(E), C)``.

    Topological totals are represented by their trivial model spaces.
    With ``require_fine_grained=False`` a non-fine-grained coordinate
    space is let through; the offending objects then fall outside the
    target category and show up as endpoint failures.
    """
    obj_map = {}
    for o in src.objects:
        if require_fine_grained and not is_fine_grained(o.coord_space):
            label = o.coord_space.name or repr(o.coord_space)
            raise PreconditionError(f"coordinate space {label} is not fine grained")
        obj_map[o] = MAtlas(o.charts, trivial(o.total.space), o.coord_space, True, o.name)
    good = [v for v in dict.fromkeys(obj_map.values()) if is_atlas(v)]
    f = _relabel(src, obj_map, good)
    if independent and len(good) == len(set(obj_map.values())):
        f.dst = _rebuild_dst(src, good)
    f.name = "F_M,Top"
    return f


def functor_Top_M(src: SmallCat, *, independent: bool = True) -> FunctorData:
    """``(A, E, C) -> (A, E_triv, C)`` on atlases over topological totals."""
    obj_map = {}
    for o in src.objects:
        obj_map[o] = MAtlas(o.charts, trivial(o.total.space), o.coord_space, False, o.name)
    objs = list(dict.fromkeys(obj_map.values()))
    f = _relabel(src, obj_map, objs)
    if independent and objs:
        f.dst = _rebuild_dst(src, objs)
    f.name = "F_Top,M"
    return f


def functor_M_Classic(src: SmallCat) -> FunctorData:
    """``(f0, f1) -> (f0)`` into the classic category on the same objects."""
    flags = [x for x in src.meta.get("restriction", ["plain"]) if x != "plain"]
    dst = build_atlas_category(src.objects, "classic", flags or "plain")
    on_arrows = {a: Arr(a.payload[:1], a.dom, a.cod) for a in src.arrows}
    return FunctorData(src, dst, {o: o for o in src.objects}, on_arrows, "F_M,Classic")


# minimal model spaces attached to atlases


def _f2_seeds(a: MAtlas) -> tuple:
    objs, arrows = set(), set()
    for c in a.sorted_charts:
        objs.add(c.codomain)
    for c in a.sorted_charts:
        for d in a.sorted_charts:
            t = transition(c, d)
            if t is not None:
                objs.update((t.dom, t.cod))
                arrows.add(t)
    return objs, arrows


def _f1_seeds(a: MAtlas) -> tuple:
    objs, arrows = set(), set()
    for c in a.sorted_charts:
        objs.add(c.patch)
    for c in a.sorted_charts:
        for d in a.sorted_charts:
            if not c.patch & d.patch:
                continue
            common = c.codomain & d.codomain
            if not common:
                continue
            dom = c.coord.preimage(common)
            dinv = d.coord.inverse()
            cod = dinv.image(common)
            arrows.add(Arrow.of(dom, cod, {x: dinv(c.coord(x)) for x in dom}))
            objs.update((dom, cod))
    return objs, arrows


def minimal_space(a: MAtlas, which: str = "F2") -> ModelSpace:
    """Minimal model space attached to ``a``: ``F1`` on the total, ``F2`` on coordinates."""
    if which == "F1":
        objs, arrows = _f1_seeds(a)
        return minimal_closure(a.total.space, objs, arrows, name=f"F1({a.name})" if a.name else "F1")
    if which == "F2":
        objs, arrows = _f2_seeds(a)
        return minimal_closure(a.coord_space.space, objs, arrows, name=f"F2({a.name})" if a.name else "F2")
    raise PreconditionError(f"unknown minimal-space functor {which!r}")


minimal_space_functors = minimal_space


@dataclass
class MinimalArrow:
    map: Arrow
    src: ModelSpace
    dst: ModelSpace
    is_model_function: bool


def minimal_space_arrow(m: AtlasMorphism, which: str = "F2", *, checked: bool = True) -> MinimalArrow:
    """Arrow action: ``f0`` (F1) or ``f1`` (F2) between the minimal spaces.

    F2 is only well defined for morphisms or semi-maximal endpoints; other
    inputs raise :class:`CompositionUndefined`.
    """
    s, t = minimal_space(m.source, which), minimal_space(m.target, which)
    f = m.f0 if which == "F1" else m.f1
    if which == "F2" and checked:
        ok = is_semi_maximal(m.source) and is_semi_maximal(m.target)
        if not ok and not classify(m, levels={"morphism"}).morphism:
            raise CompositionUndefined("F2 arrow action needs a morphism or semi-maximal atlases")
    img = f.image(s.points)
    if not img <= t.points:
        raise CompositionUndefined("component does not map the minimal carriers into each other")
    g = f.restrict(s.points, t.points)
    return MinimalArrow(g, s, t, is_model_function(s, t, g))


def minimal_space_functor(src: SmallCat, which: str = "F2") -> FunctorData:
    """Functor into the category of minimal spaces and continuous carrier maps."""
    spaces = {o: minimal_space(o, which) for o in src.objects}
    on_arrows = {}
    for a in src.arrows:
        m = AtlasMorphism(a.payload[0], a.payload[1], a.dom, a.cod)
        on_arrows[a] = Arr(minimal_space_arrow(m, which, checked=False).map, spaces[a.dom], spaces[a.cod])
    objs = list(dict.fromkeys(spaces.values()))
    ids = {o: Arr(Arrow.identity(o.points), o, o) for o in objs}
    # close the image arrows under composition
    arrows = set(on_arrows.values()) | set(ids.values())
    frontier = list(arrows)
    while frontier:
        new = []
        for f in list(arrows):
            for g in list(arrows):
                if f.cod == g.dom:
                    h = Arr(compose_arrows(g.payload, f.payload), f.dom, g.cod)
                    if h not in arrows:
                        arrows.add(h)
                        new.append(h)
        frontier = new
    dst = SmallCat.build(objs, sorted(arrows, key=lambda x: x.payload.key()), ids,
                         lambda g, f: compose_arrows(g, f), {"kind": "minimal", "which": which})
    return FunctorData(src, dst, spaces, on_arrows, f"{which}min")
