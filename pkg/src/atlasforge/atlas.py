"""m-charts, compatibility, m-atlases and their maximal closure."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

from .errors import BudgetExceeded, PreconditionError
from .fintop import Arrow, canon, compose, iter_homeomorphisms, pset, set_key, set_repr
from .modelspace import ModelSpace, is_model_function, relative, trivial

CHART_BUDGET = 100_000


@dataclass(frozen=True)
class MChart:
    patch: frozenset
    codomain: frozenset
    coord: Arrow

    @staticmethod
    def of(patch: Iterable[str], codomain: Iterable[str], mapping: dict) -> "MChart":
        return MChart(pset(patch), pset(codomain), Arrow.of(patch, codomain, mapping))

    def key(self) -> tuple:
        return (canon(self.patch), canon(self.codomain), self.coord.graph)

    def __lt__(self, other: "MChart") -> bool:
        return self.key() < other.key()

    def __repr__(self) -> str:
        body = ",".join(f"{x}{y}" for x, y in self.coord.graph)
        return f"MChart({set_repr(self.patch)}->{set_repr(self.codomain)}: {body})"


@dataclass(frozen=True, eq=False)
class MAtlas:
    """Chart set together with its total and coordinate model spaces.

    ``topological`` marks a total that stands for a bare topological space;
    such totals are stored as their trivial model space.
    """

    charts: frozenset
    total: ModelSpace
    coord_space: ModelSpace
    topological: bool = False
    name: str = field(default="", compare=False)

    @cached_property
    def sorted_charts(self) -> list:
        return sorted(self.charts)

    @cached_property
    def _hash(self) -> int:
        return hash((self.charts, self.total, self.coord_space, self.topological))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if not isinstance(other, MAtlas):
            return NotImplemented
        return (
            self is other
            or (
                self.charts == other.charts
                and self.topological == other.topological
                and self.total == other.total
                and self.coord_space == other.coord_space
            )
        )

    def __repr__(self) -> str:
        label = self.name or "atlas"
        return f"MAtlas({label}, {len(self.charts)} charts, total={self.total!r}, coord={self.coord_space!r})"

    def with_charts(self, charts: Iterable[MChart], name: str = "") -> "MAtlas":
        return MAtlas(frozenset(charts), self.total, self.coord_space, self.topological, name)

    def charts_at(self, x: str) -> list:
        return [c for c in self.sorted_charts if x in c.patch]


def topological_atlas(charts: Iterable[MChart], total_space, coord_space: ModelSpace, name: str = "") -> MAtlas:
    """Atlas over a bare topological total, represented by its trivial model space."""
    return MAtlas(frozenset(charts), trivial(total_space), coord_space, True, name)


def chart_check(c: MChart, total: ModelSpace, coord: ModelSpace) -> tuple:
    """``(ok, failures)`` for the three chart conditions."""
    fails = []
    if not c.patch:
        fails.append("patch is empty")
    if c.patch not in total.objects:
        fails.append(f"patch {set_repr(c.patch)} is not a model neighbourhood")
    if c.codomain not in coord.objects:
        fails.append(f"codomain {set_repr(c.codomain)} is not a model neighbourhood")
    if c.coord.dom != c.patch or c.coord.cod != c.codomain:
        fails.append("coordinate map endpoints differ from patch/codomain")
    if fails:
        return False, fails
    if not c.coord.is_bijective():
        return False, ["coordinate map is not a bijection"]
    mu, mv = relative(total, c.patch), relative(coord, c.codomain)
    if not is_model_function(mu, mv, c.coord):
        fails.append("coordinate map is not a model function")
    elif not is_model_function(mv, mu, c.coord.inverse()):
        fails.append("inverse coordinate map is not a model function")
    return not fails, fails


def is_chart(c: MChart, total: ModelSpace, coord: ModelSpace) -> bool:
    return chart_check(c, total, coord)[0]


def subchart(c: MChart, u_prime: Iterable[str], total: ModelSpace | None = None) -> MChart:
    u = pset(u_prime)
    if not u:
        raise PreconditionError("subchart patch must be nonvoid")
    if not u <= c.patch:
        raise PreconditionError(f"{set_repr(u)} is not inside the patch")
    if total is not None and u not in total.objects:
        raise PreconditionError(f"{set_repr(u)} is not a model neighbourhood")
    v = c.coord.image(u)
    return MChart(u, v, c.coord.restrict(u, v))


def transition(c1: MChart, c2: MChart) -> Arrow | None:
    """``phi2 . phi1^-1`` on ``phi1[U1 & U2]``; None for disjoint patches."""
    i = c1.patch & c2.patch
    if not i:
        return None
    inv = c1.coord.inverse()
    dom = c1.coord.image(i)
    return Arrow.of(dom, c2.coord.image(i), {v: c2.coord(inv(v)) for v in dom})


def are_compatible(c1: MChart, c2: MChart, coord: ModelSpace) -> bool:
    t = transition(c1, c2)
    return t is None or coord.is_iso(t)


def chart_vs_atlas(c: MChart, a: MAtlas) -> bool:
    return all(are_compatible(c, d, a.coord_space) for d in a.sorted_charts)


def _check_spaces(a: MAtlas, c: MChart) -> None:
    if not c.patch <= a.total.points or not c.codomain <= a.coord_space.points:
        raise PreconditionError("chart does not live in the atlas spaces")


@dataclass
class AtlasReport:
    is_atlas: bool
    is_full: bool
    is_semi_maximal: bool
    is_maximal: bool
    failures: list


def semi_maximal_failures(a: MAtlas, *, first_only: bool = True) -> list:
    """Charts that semi-maximality forces into ``a`` but that are missing."""
    out = []
    e, cs = a.total, a.coord_space
    for c in a.sorted_charts:
        for u in e.sorted_objects:
            if not u or not u <= c.patch:
                continue
            v1 = c.coord.image(u)
            if v1 not in cs.objects:
                continue
            base = c.coord.restrict(u, v1)
            for v2 in cs.sorted_objects:
                for iso in cs.isos(v1, v2):
                    cand = MChart(u, v2, compose(iso, base))
                    if cand not in a.charts:
                        out.append(cand)
                        if first_only:
                            return out
    return out


def iter_candidate_charts(total: ModelSpace, coord: ModelSpace, budget: int | None = CHART_BUDGET) -> Iterator[MChart]:
    """Every chart of ``total`` in ``coord``, patches and codomains smallest first."""
    n = 0
    for u in total.sorted_objects:
        if not u:
            continue
        mu = relative(total, u)
        for v in coord.sorted_objects:
            if len(v) != len(u):
                continue
            mv = relative(coord, v)
            for phi in iter_homeomorphisms(total.space, u, coord.space, v):
                if not is_model_function(mu, mv, phi) or not is_model_function(mv, mu, phi.inverse()):
                    continue
                n += 1
                if budget is not None and n > budget:
                    raise BudgetExceeded("candidate charts", budget)
                yield MChart(u, v, phi)


def atlas_report(a: MAtlas, budget: int | None = CHART_BUDGET) -> AtlasReport:
    fails = []
    for c in a.sorted_charts:
        _check_spaces(a, c)
        ok, why = chart_check(c, a.total, a.coord_space)
        if not ok:
            fails.append((repr(c), why))
    charts = a.sorted_charts
    for i, c1 in enumerate(charts):
        for c2 in charts[i + 1:]:
            if not are_compatible(c1, c2, a.coord_space):
                fails.append((repr(c1), f"incompatible with {c2!r}"))
    covered = frozenset().union(*(c.patch for c in charts)) if charts else frozenset()
    if covered != a.total.points:
        fails.append(("cover", f"uncovered points {canon(a.total.points - covered)}"))
    is_atlas = not fails
    cod_cover = frozenset().union(*(c.codomain for c in charts)) if charts else frozenset()
    is_full = is_atlas and cod_cover == a.coord_space.points
    semi = is_atlas and not semi_maximal_failures(a)
    maximal = False
    if is_atlas:
        maximal = True
        for cand in iter_candidate_charts(a.total, a.coord_space, budget):
            if cand not in a.charts and chart_vs_atlas(cand, a):
                maximal = False
                fails.append(("maximal", f"extension {cand!r}"))
                break
    return AtlasReport(is_atlas, is_full, semi, maximal, fails)


def is_atlas(a: MAtlas) -> bool:
    charts = a.sorted_charts
    if not charts:
        return not a.total.points
    for c in charts:
        if not is_chart(c, a.total, a.coord_space):
            return False
    for i, c1 in enumerate(charts):
        for c2 in charts[i + 1:]:
            if not are_compatible(c1, c2, a.coord_space):
                return False
    return frozenset().union(*(c.patch for c in charts)) == a.total.points


def maximal_closure(a: MAtlas, budget: int | None = CHART_BUDGET, name: str = "") -> MAtlas:
    if not is_atlas(a):
        raise PreconditionError("maximal closure needs an atlas")
    keep = set(a.charts)
    for cand in iter_candidate_charts(a.total, a.coord_space, budget):
        if cand not in keep and chart_vs_atlas(cand, a):
            keep.add(cand)
    out = a.with_charts(keep, name or (a.name and f"max({a.name})"))
    if not is_atlas(out):  # pragma: no cover - compatible charts always extend an atlas
        raise PreconditionError("closure failed mutual compatibility")
    return out


def is_maximal(a: MAtlas, budget: int | None = CHART_BUDGET) -> bool:
    return all(
        cand in a.charts or not chart_vs_atlas(cand, a)
        for cand in iter_candidate_charts(a.total, a.coord_space, budget)
    )


def is_semi_maximal(a: MAtlas) -> bool:
    return not semi_maximal_failures(a)


def is_full(a: MAtlas) -> bool:
    cod = frozenset().union(*(c.codomain for c in a.charts)) if a.charts else frozenset()
    return cod == a.coord_space.points
