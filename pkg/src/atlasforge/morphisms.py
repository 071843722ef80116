"""m-atlas near morphisms, morphisms, their strictness taxonomy and composition."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .atlas import MAtlas, MChart, is_semi_maximal
from .errors import BudgetExceeded, CompositionUndefined, PreconditionError
from .fintop import Arrow, canon, compose as compose_arrows, iter_continuous
from .modelspace import ModelCategory, classify_m_morphism, is_model_function, subspace_relation

MORPHISM_BUDGET = 50_000


@dataclass(frozen=True)
class AtlasMorphism:
    """Labeled pair ``(f0, f1)`` from ``source`` to ``target``."""

    f0: Arrow
    f1: Arrow
    source: MAtlas
    target: MAtlas

    def __post_init__(self):
        if self.f0.dom != self.source.total.points or self.f0.cod != self.target.total.points:
            raise PreconditionError("f0 endpoints differ from the total carriers")
        if self.f1.dom != self.source.coord_space.points or self.f1.cod != self.target.coord_space.points:
            raise PreconditionError("f1 endpoints differ from the coordinate carriers")

    @staticmethod
    def of(f0: Arrow, f1: Arrow, source: MAtlas, target: MAtlas) -> "AtlasMorphism":
        """Checked constructor: both components must be model functions."""
        m = AtlasMorphism(f0, f1, source, target)
        if not is_model_function(source.total, target.total, f0):
            raise PreconditionError("f0 is not a model function")
        if not is_model_function(source.coord_space, target.coord_space, f1):
            raise PreconditionError("f1 is not a model function")
        return m

    def key(self) -> tuple:
        return (self.f0.graph, self.f1.graph)

    def __repr__(self) -> str:
        return f"AtlasMorphism(f0={self.f0!r}, f1={self.f1!r})"


@dataclass
class MorphismClassification:
    near: bool
    morphism: bool
    constrained: bool
    semi_strict: bool
    strict: bool
    witnesses: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)
    variant: str = "spaces"


def _pairs(f0: Arrow, source: MAtlas, target: MAtlas) -> Iterator[tuple]:
    """Chart pairs with nonempty ``I = U1 & f0^-1[U2]``, and that ``I``."""
    for c1 in source.sorted_charts:
        for c2 in target.sorted_charts:
            i = c1.patch & f0.preimage(c2.patch)
            if i:
                yield c1, c2, i


def _near_at(m: AtlasMorphism, c1: MChart, c2: MChart, i: frozenset, u: str):
    e1, e2, k1, k2 = m.source.total, m.target.total, m.source.coord_space, m.target.coord_space
    f0, f1 = m.f0, m.f1
    for u1 in e1.sorted_objects:
        if u not in u1 or not u1 <= i:
            continue
        v1 = c1.coord.image(u1)
        if v1 not in k1.objects:
            continue
        img0 = f0.image(u1)
        img1 = f1.image(v1)
        pins_src = {x: f1(c1.coord(x)) for x in u1}
        for u2 in e2.sorted_objects:
            if not img0 <= u2 or not u2 <= c2.patch:
                continue
            v2 = c2.coord.image(u2)
            if v2 not in k2.objects:
                continue
            pins: dict = {}
            for x in u1:
                y = c2.coord(f0(x))
                if pins.setdefault(y, pins_src[x]) != pins_src[x]:
                    pins = None
                    break
            if pins is None:
                continue
            for vh in k2.sorted_objects:
                if len(vh) != len(v2) or not img1 <= vh:
                    continue
                fh = next(k2.isos(v2, vh, fixed=pins), None)
                if fh is not None:
                    return {"U1": canon(u1), "V1": canon(v1), "U2": canon(u2), "V2": canon(v2),
                            "V2_hat": canon(vh), "bridge": fh}
    return None


def _morphism_at(m: AtlasMorphism, c1: MChart, c2: MChart, i: frozenset, u: str):
    f0, f1 = m.f0, m.f1
    for s in m.source.sorted_charts:
        if u not in s.patch or not s.patch <= i:
            continue
        if any(s.coord(x) != c1.coord(x) for x in s.patch):
            continue
        img = f0.image(s.patch)
        for t in m.target.sorted_charts:
            if not img <= t.patch or not t.patch <= c2.patch:
                continue
            if all(t.coord(f0(x)) == f1(s.coord(x)) for x in s.patch):
                return {"subchart": s, "chart": t}
    return None


def _constrained(b_objects, f: Arrow) -> bool:
    img = f.image()
    return any(img <= o for o in b_objects)


def composite(f0: Arrow, c1: MChart, c2: MChart, i: frozenset) -> Arrow:
    """``phi2 . f0 . phi1^-1`` on ``phi1[I]`` into ``V2``."""
    inv = c1.coord.inverse()
    dom = c1.coord.image(i)
    return Arrow.of(dom, c2.codomain, {v: c2.coord(f0(inv(v))) for v in dom})


def classify(
    m: AtlasMorphism,
    ambient: tuple | None = None,
    *,
    levels: frozenset | set | None = None,
) -> MorphismClassification:
    """Evaluate the taxonomy flags for ``m``.

    ``ambient`` is an optional pair of :class:`ModelCategory` for the
    coordinate side; it swaps the coordinate m-morphism tests for their
    category forms.  ``levels`` limits the work to a subset of
    ``{"near", "morphism", "strict"}`` (strict covers both strictness flags).
    """
    levels = frozenset(levels or {"near", "morphism", "strict"})
    src, dst = m.source, m.target
    if ambient is not None:
        for cat in ambient:
            if not isinstance(cat, ModelCategory):
                raise PreconditionError("ambient must be a pair of model categories")
    variant = "spaces" if ambient is None else "coordinate-categories"
    out = MorphismClassification(False, False, False, False, False, variant=variant)
    pairs = list(_pairs(m.f0, src, dst))

    if "near" in levels or "strict" in levels:
        near = True
        for c1, c2, i in pairs:
            for u in sorted(i):
                w = _near_at(m, c1, c2, i, u)
                if w is None:
                    near = False
                    out.failures.append(("near", c1, c2, u))
                    break
                out.witnesses[("near", c1, c2, u)] = w
            if not near:
                break
        out.near = near

    if "morphism" in levels:
        mor = True
        for c1, c2, i in pairs:
            for u in sorted(i):
                w = _morphism_at(m, c1, c2, i, u)
                if w is None:
                    mor = False
                    out.failures.append(("morphism", c1, c2, u))
                    break
                out.witnesses[("morphism", c1, c2, u)] = w
            if not mor:
                break
        out.morphism = mor

    out.constrained = _constrained(dst.total.objects, m.f0) and _constrained(dst.coord_space.objects, m.f1)

    if "strict" in levels and out.near:
        e1, e2, k1, k2 = src.total, dst.total, src.coord_space, dst.coord_space
        f0_local = classify_m_morphism(e1, e2, m.f0, "local", "strict")
        if ambient is None:
            f1_local = classify_m_morphism(k1, k2, m.f1, "local", "strict")
        else:
            f1_local = classify_m_morphism(k1, k2, m.f1, "local", "plain", ambient=ambient)
        comps = [(c1, c2, composite(m.f0, c1, c2, i)) for c1, c2, i in pairs]
        comp_local = all(
            classify_m_morphism(k1, k2, g, "local", "plain", ambient=ambient).holds for _, _, g in comps
        )
        out.semi_strict = bool(f0_local) and bool(f1_local) and comp_local
        if not out.semi_strict:
            out.failures.append(("semi_strict", f0_local.failures, f1_local.failures, comp_local))

        f0_glob = classify_m_morphism(e1, e2, m.f0, "global", "strict")
        if ambient is None:
            f1_glob = classify_m_morphism(k1, k2, m.f1, "global", "strict")
            comp_glob = all(k2.has_arrow(g) for _, _, g in comps)
        else:
            f1_glob = classify_m_morphism(k1, k2, m.f1, "global", "plain", ambient=ambient)
            comp_glob = all(
                classify_m_morphism(k1, k2, g, "global", "plain", ambient=ambient).holds for _, _, g in comps
            )
        out.strict = bool(f0_glob) and bool(f1_glob) and comp_glob
        if not out.strict:
            out.failures.append(("strict", f0_glob.failures, f1_glob.failures, comp_glob))
    return out


def equivalent(m1: AtlasMorphism, m2: AtlasMorphism) -> bool:
    if m1.source != m2.source or m1.target != m2.target:
        raise PreconditionError("equivalence needs the same source and target")
    return m1.f0 == m2.f0


def identity(a: MAtlas, b: MAtlas | None = None) -> AtlasMorphism:
    """Inclusion pair of ``a`` into ``b`` (``b`` defaults to ``a``)."""
    if b is None:
        b = a
    else:
        if not a.charts <= b.charts:
            raise PreconditionError("charts of the source are not charts of the target")
        if not subspace_relation(a.total, b.total).mod:
            raise PreconditionError("source total is not a model subspace of the target total")
        if not subspace_relation(a.coord_space, b.coord_space).mod:
            raise PreconditionError("source coordinates are not a model subspace of the target coordinates")
    return AtlasMorphism(
        Arrow.inclusion(a.total.points, b.total.points),
        Arrow.inclusion(a.coord_space.points, b.coord_space.points),
        a,
        b,
    )


def compose(m2: AtlasMorphism, m1: AtlasMorphism, *, check: bool = True) -> AtlasMorphism:
    """Labeled composite ``m2 . m1``.

    Two near morphisms compose only if ``m1`` is a morphism or the middle
    atlas is semi-maximal; otherwise :class:`CompositionUndefined`.
    """
    if m1.target != m2.source:
        raise PreconditionError("target of the first morphism is not the source of the second")
    if check:
        c1 = classify(m1, levels={"near", "morphism"})
        c2 = classify(m2, levels={"near"})
        if not (c1.near and c2.near):
            raise PreconditionError("both factors must be near morphisms")
        if not c1.morphism and not is_semi_maximal(m1.target):
            raise CompositionUndefined(
                "first factor is only a near morphism and the middle atlas is not semi-maximal"
            )
    return AtlasMorphism(compose_arrows(m2.f0, m1.f0), compose_arrows(m2.f1, m1.f1), m1.source, m2.target)


def iter_pairs(a: MAtlas, b: MAtlas, budget: int | None = MORPHISM_BUDGET) -> Iterator[AtlasMorphism]:
    """Every pair of model functions between the totals and the coordinates."""
    f0s = [
        f
        for f in iter_continuous(a.total.space, a.total.points, b.total.space, b.total.points)
        if is_model_function(a.total, b.total, f)
    ]
    f1s = [
        f
        for f in iter_continuous(a.coord_space.space, a.coord_space.points, b.coord_space.space, b.coord_space.points)
        if is_model_function(a.coord_space, b.coord_space, f)
    ]
    if budget is not None and len(f0s) * len(f1s) > budget:
        raise BudgetExceeded("morphism candidates", budget)
    for f0 in f0s:
        for f1 in f1s:
            yield AtlasMorphism(f0, f1, a, b)


@dataclass
class ClassicClassification:
    classic: bool
    semi_strict: bool
    strict: bool
    constrained: bool
    failures: list = field(default_factory=list)
    variant: str = "spaces"


def classify_classic(f: Arrow, source: MAtlas, target: MAtlas, ambient: tuple | None = None) -> ClassicClassification:
    """Classic flags for a single total-space map.

    ``ambient`` is an optional pair of model categories for the totals;
    it replaces the local/global m-morphism tests on ``f`` by their
    category forms.
    """
    e1, e2, k1, k2 = source.total, target.total, source.coord_space, target.coord_space
    if f.dom != e1.points or f.cod != e2.points:
        raise PreconditionError("map endpoints differ from the total carriers")
    if not is_model_function(e1, e2, f):
        raise PreconditionError("map is not a model function")
    fails = []
    classic = True
    for c1, c2, i in _pairs(f, source, target):
        g = composite(f, c1, c2, i)
        if not classify_m_morphism(k1, k2, g, "global").holds:
            classic = False
            fails.append(("classic", c1, c2))
            break
    if ambient is None:
        local = classify_m_morphism(e1, e2, f, "local").holds
        glob = classify_m_morphism(e1, e2, f, "global").holds
    else:
        local = classify_m_morphism(e1, e2, f, "local", ambient=ambient).holds
        glob = classify_m_morphism(e1, e2, f, "global", ambient=ambient).holds
    constrained = _constrained(e2.objects, f)
    return ClassicClassification(
        classic, classic and local, classic and glob, classic and constrained, fails,
        "spaces" if ambient is None else "total-categories",
    )

