"""Finite topological spaces and the maps between them.

Every finite topology is determined by the minimal open neighbourhood
``M(x)`` of each point, so continuity reduces to ``f[M(x)] <= M(f(x))``.
All enumeration in the package bottoms out in :func:`iter_continuous`.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Callable, Iterable, Iterator, Mapping

import networkx as nx

from .errors import MalformedInput, PreconditionError

Point = str
PointSet = frozenset


def pset(xs: Iterable[Point] = ()) -> frozenset:
    return frozenset(xs)


def canon(s: Iterable[Point]) -> tuple:
    """Sorted tuple form used for ordering and serialization."""
    return tuple(sorted(s))


def set_key(s: Iterable[Point]) -> tuple:
    """Total order on point sets: smaller first, then lexicographic."""
    t = canon(s)
    return (len(t), t)


@dataclass(frozen=True)
class Arrow:
    """A total function between finite point sets, labeled with its endpoints.

    Two arrows with the same graph but different ``dom``/``cod`` are
    different arrows.
    """

    dom: frozenset
    cod: frozenset
    graph: tuple

    @staticmethod
    def of(dom: Iterable[Point], cod: Iterable[Point], mapping: Mapping[Point, Point]) -> "Arrow":
        dom, cod = pset(dom), pset(cod)
        if set(mapping) != set(dom):
            missing = sorted(set(dom) - set(mapping))
            extra = sorted(set(mapping) - set(dom))
            raise MalformedInput(f"map is not total on its domain (missing {missing}, extra {extra})")
        bad = sorted(x for x, y in mapping.items() if y not in cod)
        if bad:
            raise MalformedInput(f"map sends {bad} outside its codomain")
        return Arrow(dom, cod, tuple(sorted(mapping.items())))

    @staticmethod
    def identity(a: Iterable[Point]) -> "Arrow":
        a = pset(a)
        return Arrow(a, a, tuple((x, x) for x in sorted(a)))

    @staticmethod
    def inclusion(a: Iterable[Point], b: Iterable[Point]) -> "Arrow":
        a, b = pset(a), pset(b)
        if not a <= b:
            raise PreconditionError("inclusion needs a subset")
        return Arrow(a, b, tuple((x, x) for x in sorted(a)))

    @cached_property
    def table(self) -> dict:
        return dict(self.graph)

    def __call__(self, x: Point) -> Point:
        return self.table[x]

    def image(self, s: Iterable[Point] | None = None) -> frozenset:
        t = self.table
        return pset(t[x] for x in (self.dom if s is None else s))

    def preimage(self, s: Iterable[Point]) -> frozenset:
        s = set(s)
        return pset(x for x, y in self.graph if y in s)

    def restrict(self, a: Iterable[Point], b: Iterable[Point] | None = None) -> "Arrow":
        a = pset(a)
        if not a <= self.dom:
            raise PreconditionError("restriction domain is not inside the domain")
        b = self.cod if b is None else pset(b)
        t = self.table
        return Arrow.of(a, b, {x: t[x] for x in a})

    def with_cod(self, b: Iterable[Point]) -> "Arrow":
        return Arrow.of(self.dom, b, self.table)

    def is_injective(self) -> bool:
        return len(set(self.table.values())) == len(self.graph)

    def is_bijective(self) -> bool:
        return self.is_injective() and self.image() == self.cod

    def inverse(self) -> "Arrow":
        if not self.is_bijective():
            raise PreconditionError("arrow is not a bijection")
        return Arrow.of(self.cod, self.dom, {y: x for x, y in self.graph})

    def is_identity_graph(self) -> bool:
        return all(x == y for x, y in self.graph)

    def key(self) -> tuple:
        return (canon(self.dom), canon(self.cod), self.graph)

    def __lt__(self, other: "Arrow") -> bool:
        return self.key() < other.key()

    def __repr__(self) -> str:
        body = ", ".join(f"{x}->{y}" for x, y in self.graph)
        return f"Arrow({{{body}}}: {set_repr(self.dom)} -> {set_repr(self.cod)})"


def set_repr(s: Iterable[Point]) -> str:
    return "{" + ",".join(canon(s)) + "}"


def compose(g: Arrow, f: Arrow, *, strict: bool = True) -> Arrow:
    """``g . f``.  With ``strict`` the labels must match exactly."""
    if strict and f.cod != g.dom:
        raise PreconditionError(f"cannot compose: {set_repr(f.cod)} != {set_repr(g.dom)}")
    if not f.image() <= g.dom:
        raise PreconditionError("cannot compose: image escapes the next domain")
    gt = g.table
    return Arrow(f.dom, g.cod, tuple((x, gt[y]) for x, y in f.graph))


@dataclass(frozen=True)
class FinSpace:
    """A finite topological space given by its full open family."""

    points: frozenset
    opens: frozenset

    def __post_init__(self):
        pts = self.points
        ops = self.opens
        if frozenset() not in ops or pts not in ops:
            raise MalformedInput("opens must contain the empty set and the whole space")
        for u in ops:
            if not u <= pts:
                raise MalformedInput(f"open {set_repr(u)} is not a subset of the points")
        for u, v in combinations(ops, 2):
            if (u | v) not in ops or (u & v) not in ops:
                raise MalformedInput(f"opens not closed under union/intersection at {set_repr(u)}, {set_repr(v)}")

    @staticmethod
    def from_opens(points: Iterable[Point], opens: Iterable[Iterable[Point]]) -> "FinSpace":
        return FinSpace(pset(points), frozenset(pset(u) for u in opens) | {frozenset(), pset(points)})

    @staticmethod
    def from_subbasis(points: Iterable[Point], subbasis: Iterable[Iterable[Point]]) -> "FinSpace":
        pts = pset(points)
        sub = [pset(s) for s in subbasis]
        for s in sub:
            if not s <= pts:
                raise MalformedInput(f"subbasis set {set_repr(s)} is not a subset of the points")
        mins = {}
        for x in pts:
            m = pts
            for s in sub:
                if x in s:
                    m = m & s
            mins[x] = m
        return FinSpace(pts, _unions_of(mins.values()) | {pts})

    @staticmethod
    def discrete(points: Iterable[Point]) -> "FinSpace":
        pts = pset(points)
        return FinSpace.from_subbasis(pts, [{x} for x in pts])

    @staticmethod
    def indiscrete(points: Iterable[Point]) -> "FinSpace":
        pts = pset(points)
        return FinSpace(pts, frozenset({frozenset(), pts}))

    @cached_property
    def min_nbhd(self) -> dict:
        """Smallest open set containing each point."""
        out = {}
        for x in self.points:
            m = self.points
            for u in self.opens:
                if x in u:
                    m = m & u
            out[x] = m
        return out

    def is_open(self, s: Iterable[Point]) -> bool:
        return pset(s) in self.opens

    def sorted_opens(self) -> list:
        return sorted(self.opens, key=set_key)

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"FinSpace({set_repr(self.points)}, {len(self.opens)} opens)"


def _unions_of(generators: Iterable[frozenset]) -> frozenset:
    acc = {frozenset()}
    for g in set(generators):
        acc |= {u | g for u in acc}
    return frozenset(acc)


def relative_opens(s: FinSpace, carrier: Iterable[Point]) -> frozenset:
    c = pset(carrier)
    return frozenset(u & c for u in s.opens)


def subspace(s: FinSpace, carrier: Iterable[Point]) -> FinSpace:
    c = pset(carrier)
    if not c <= s.points:
        raise MalformedInput(f"carrier {set_repr(c - s.points)} is not inside the space")
    return FinSpace(c, relative_opens(s, c))


def pair(x: Point, y: Point) -> Point:
    """Point name of ``(x, y)`` in a product."""
    return f"({x},{y})"


def unpair(p: Point) -> tuple:
    if not (p.startswith("(") and p.endswith(")")):
        raise MalformedInput(f"{p!r} is not a product point")
    body = p[1:-1]
    depth = 0
    for i, ch in enumerate(body):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            return body[:i], body[i + 1:]
    raise MalformedInput(f"{p!r} is not a product point")


def product(s: FinSpace, t: FinSpace) -> FinSpace:
    pts = pset(pair(x, y) for x in s.points for y in t.points)
    # minimal neighbourhood of (x, y) is M(x) x M(y)
    gens = [
        pset(pair(a, b) for a in s.min_nbhd[x] for b in t.min_nbhd[y])
        for x in s.points
        for y in t.points
    ]
    return FinSpace(pts, _unions_of(gens) | {pts})


def rectangle(u: Iterable[Point], v: Iterable[Point]) -> frozenset:
    return pset(pair(x, y) for x in u for y in v)


def connected_components(s: FinSpace) -> list:
    """Partition into components, as sorted tuples in canonical order."""
    g = nx.Graph()
    g.add_nodes_from(s.points)
    for x, m in s.min_nbhd.items():
        g.add_edges_from((x, y) for y in m if y != x)
    return sorted(canon(c) for c in nx.connected_components(g))


def continuous_on(x_space: FinSpace, f: Arrow, y_space: FinSpace) -> bool:
    """Continuity of ``f`` from the subspace ``f.dom`` of X to the subspace ``f.cod`` of Y."""
    t = f.table
    a = f.dom
    mx, my = x_space.min_nbhd, y_space.min_nbhd
    for x in a:
        target = my[t[x]]
        for z in mx[x] & a:
            if t[z] not in target:
                return False
    return True


def is_continuous(dom: FinSpace, cod: FinSpace, mapping: Mapping[Point, Point]) -> bool:
    f = Arrow.of(dom.points, cod.points, mapping)
    return continuous_on(dom, f, cod)


@dataclass(frozen=True)
class CMap:
    """A continuous map between two finite spaces."""

    dom: FinSpace
    cod: FinSpace
    fn: Arrow

    @staticmethod
    def of(dom: FinSpace, cod: FinSpace, mapping: Mapping[Point, Point]) -> "CMap":
        fn = Arrow.of(dom.points, cod.points, mapping)
        if not continuous_on(dom, fn, cod):
            raise PreconditionError("map is not continuous")
        return CMap(dom, cod, fn)

    def __call__(self, x: Point) -> Point:
        return self.fn(x)

    def inverse(self) -> "CMap":
        return CMap.of(self.cod, self.dom, self.fn.inverse().table)

    def then(self, g: "CMap") -> "CMap":
        if self.cod != g.dom:
            raise PreconditionError("cannot compose maps with mismatched spaces")
        return CMap(self.dom, g.cod, compose(g.fn, self.fn))


def is_homeomorphism(f: CMap) -> bool:
    if not f.fn.is_bijective():
        return False
    if not continuous_on(f.dom, f.fn, f.cod):
        return False
    return continuous_on(f.cod, f.fn.inverse(), f.dom)


def iter_continuous(
    x_space: FinSpace,
    a: Iterable[Point],
    y_space: FinSpace,
    b: Iterable[Point],
    *,
    fixed: Mapping[Point, Point] | None = None,
    injective: bool = False,
    accept: Callable[[Point, Point], bool] | None = None,
) -> Iterator[Arrow]:
    """All continuous maps from subspace ``a`` of X to subspace ``b`` of Y.

    Yielded in lexicographic order of graph.  ``fixed`` pins values,
    ``injective`` prunes non-injective partial maps and ``accept`` filters
    individual assignments.
    """
    a = pset(a)
    b = pset(b)
    order = sorted(a)
    values = sorted(b)
    mx, my = x_space.min_nbhd, y_space.min_nbhd
    fixed = dict(fixed or {})
    if any(k not in a or v not in b for k, v in fixed.items()):
        return
    # below[x]: earlier points that lie in M(x); above[x]: earlier points whose M contains x
    pos = {x: i for i, x in enumerate(order)}
    below = {x: [z for z in mx[x] & a if z != x and pos[z] < pos[x]] for x in order}
    above = {x: [z for z in order[: pos[x]] if x in mx[z]] for x in order}
    assign: dict = {}
    used: set = set()

    def ok(x, v):
        mv = my[v]
        if any(assign[z] not in mv for z in below[x]):
            return False
        return not any(v not in my[assign[z]] for z in above[x])

    def rec(i):
        if i == len(order):
            yield Arrow(a, b, tuple((x, assign[x]) for x in order))
            return
        x = order[i]
        cands = [fixed[x]] if x in fixed else values
        for v in cands:
            if injective and v in used:
                continue
            if accept is not None and not accept(x, v):
                continue
            if not ok(x, v):
                continue
            assign[x] = v
            used.add(v)
            yield from rec(i + 1)
            used.discard(v)
            del assign[x]

    yield from rec(0)


def iter_homeomorphisms(x_space: FinSpace, a, y_space: FinSpace, b, *, fixed=None) -> Iterator[Arrow]:
    a, b = pset(a), pset(b)
    if len(a) != len(b):
        return
    for f in iter_continuous(x_space, a, y_space, b, fixed=fixed, injective=True):
        if continuous_on(y_space, f.inverse(), x_space):
            yield f
