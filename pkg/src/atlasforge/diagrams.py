"""Completing two-branch diagrams of maps by a bridging ambient arrow."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Literal

from .errors import PreconditionError
from .fintop import Arrow, canon, compose, pset
from .modelspace import ModelSpace

Kind = Literal["left", "right", "strong"]


@dataclass(frozen=True)
class NcdProblem:
    """Two chains out of a shared initial node, completed inside ``ambient``.

    ``initial`` is only needed when both chains are empty.
    """

    left_chain: tuple
    right_chain: tuple
    ambient: ModelSpace
    initial: frozenset | None = None

    def __post_init__(self):
        object.__setattr__(self, "left_chain", tuple(self.left_chain))
        object.__setattr__(self, "right_chain", tuple(self.right_chain))
        starts = {c[0].dom for c in (self.left_chain, self.right_chain) if c}
        if self.initial is not None:
            starts.add(pset(self.initial))
        if len(starts) != 1:
            raise PreconditionError("the two chains must start at the same node")
        object.__setattr__(self, "initial", starts.pop())
        for chain in (self.left_chain, self.right_chain):
            for f, g in zip(chain, chain[1:]):
                if f.cod != g.dom:
                    raise PreconditionError("chain links are not composable")

    @property
    def left_end(self) -> frozenset:
        return self.left_chain[-1].cod if self.left_chain else self.initial

    @property
    def right_end(self) -> frozenset:
        return self.right_chain[-1].cod if self.right_chain else self.initial

    def left_map(self) -> Arrow:
        return _chain_map(self.left_chain, self.initial)

    def right_map(self) -> Arrow:
        return _chain_map(self.right_chain, self.initial)


def _chain_map(chain: tuple, start: frozenset) -> Arrow:
    return reduce(lambda acc, f: compose(f, acc), chain, Arrow.identity(start))


@dataclass
class NcdVerdict:
    left: bool
    right: bool
    strong: bool
    witness: Arrow | None
    left_witness: Arrow | None = None
    right_witness: Arrow | None = None
    strong_witness: Arrow | None = None


def _pins(src: Arrow, dst: Arrow) -> dict | None:
    """Values ``h`` must take so that ``h . src = dst``; None if inconsistent."""
    pins: dict = {}
    for x, y in src.graph:
        z = dst(x)
        if pins.setdefault(y, z) != z:
            return None
    return pins


def _bridge(amb: ModelSpace, src: Arrow, dst: Arrow, a, b, kind: Kind) -> Arrow | None:
    """Least ambient arrow ``h: a -> b`` with ``h . src = dst``."""
    pins = _pins(src, dst)
    if pins is None:
        return None
    if kind == "strong":
        best = next(amb.isos(a, b, fixed=pins), None)
        back = _pins(dst, src)
        if back is not None:
            rev = next(amb.isos(b, a, fixed=back), None)
            if rev is not None:
                cand = rev.inverse()
                if best is None or cand < best:
                    best = cand
        return best
    return next(amb.hom(a, b, fixed=pins), None)


def complete_ncd(p: NcdProblem) -> NcdVerdict:
    amb = p.ambient
    um, vn = p.left_end, p.right_end
    for node in (um, vn):
        if node not in amb.objects:
            raise PreconditionError(f"terminal node {canon(node)} is not an ambient object")
    lm, rm = p.left_map(), p.right_map()
    lw = _bridge(amb, lm, rm, um, vn, "left")
    rw = _bridge(amb, rm, lm, vn, um, "left")
    sw = _bridge(amb, lm, rm, um, vn, "strong")
    witness = sw or lw or rw
    return NcdVerdict(lw is not None, rw is not None, sw is not None, witness, lw, rw, sw)


@dataclass
class LocalNcdResult:
    holds: bool
    per_point: dict = field(default_factory=dict)


def _point_search(p: NcdProblem, x: str, kind: Kind):
    """Try the restriction of the diagram to ``{x}``.

    Any working choice of subobjects still works after shrinking the
    initial node to ``{x}`` (all intermediate nodes shrink to images), so
    this loses nothing; only the two terminal nodes need to be ambient
    objects and are searched smallest first.
    """
    amb = p.ambient
    lm, rm = p.left_map(), p.right_map()
    lx, rx = lm(x), rm(x)
    us = [o for o in amb.sorted_objects if lx in o and o <= p.left_end]
    vs = [o for o in amb.sorted_objects if rx in o and o <= p.right_end]
    src = Arrow.of({x}, {lx}, {x: lx})
    dst = Arrow.of({x}, {rx}, {x: rx})
    for u in us:
        for v in vs:
            if kind == "right":
                h = _bridge(amb, dst, src, v, u, "left")
            else:
                h = _bridge(amb, src, dst, u, v, kind)
            if h is not None:
                left_nodes = [canon({x})] + [canon({f(y)}) for f, y in _trace(p.left_chain, x)]
                right_nodes = [canon({x})] + [canon({f(y)}) for f, y in _trace(p.right_chain, x)]
                left_nodes[-1] = canon(u)
                right_nodes[-1] = canon(v)
                return {"left_nodes": left_nodes, "right_nodes": right_nodes, "witness": h}
    return None


def _trace(chain: tuple, x: str):
    y = x
    for f in chain:
        yield f, y
        y = f(y)


def ncd_local(p: NcdProblem, at: str | None = None, kind: Kind = "strong") -> LocalNcdResult:
    """Nearly commutative at ``at``, or at every point of the initial node."""
    if at is not None:
        if at not in p.initial:
            raise PreconditionError(f"point {at!r} is not in the initial node")
        pts = [at]
    else:
        pts = sorted(p.initial)
    for node in (p.left_end, p.right_end):
        if node not in p.ambient.objects:
            raise PreconditionError(f"terminal node {canon(node)} is not an ambient object")
    per = {x: _point_search(p, x, kind) for x in pts}
    return LocalNcdResult(all(v is not None for v in per.values()), per)
