"""Hand-built reference fixtures.

The JSON documents under ``atlasforge/data`` describe the same objects;
tests check that loading them reproduces these constructions exactly.
"""
from __future__ import annotations

import math
from functools import lru_cache

from .fintop import Arrow, FinSpace

U_C = frozenset("abc")
U_D = frozenset("abd")
AB = frozenset("ab")


@lru_cache(None)
def sierp() -> FinSpace:
    return FinSpace.from_opens({"0", "1"}, [set(), {"1"}, {"0", "1"}])


@lru_cache(None)
def pc4() -> FinSpace:
    """Pseudocircle: a, b open points; c, d closed with neighbourhoods abc, abd."""
    return FinSpace.from_subbasis("abcd", [{"a"}, {"b"}, U_C, U_D])


@lru_cache(None)
def w_space() -> FinSpace:
    return FinSpace.from_subbasis("pqr", [{"p"}, {"q"}, {"p", "q", "r"}])


@lru_cache(None)
def disc2() -> FinSpace:
    return FinSpace.discrete({"0", "1"})


@lru_cache(None)
def one() -> FinSpace:
    return FinSpace.discrete({"*"})


@lru_cache(None)
def empty() -> FinSpace:
    return FinSpace.discrete(set())


def all_small_spaces() -> dict:
    return {
        "SIERP": sierp(),
        "PC4": pc4(),
        "W": w_space(),
        "DISC2": disc2(),
        "ONE": one(),
        "EMPTY": empty(),
    }


PHI_C = {"a": "p", "b": "q", "c": "r"}
PHI_D = {"a": "p", "b": "q", "d": "r"}


def phi_c() -> Arrow:
    return Arrow.of(U_C, "pqr", PHI_C)


def phi_d() -> Arrow:
    return Arrow.of(U_D, "pqr", PHI_D)


def bundle_total(twisted: bool) -> FinSpace:
    """Eight-point total over PC4 with two sheets; ``twisted`` swaps sheets over b."""
    sub = []
    for i in "01":
        j = "1" if i == "0" else "0"
        sub.append({f"a{i}"})
        sub.append({f"b{i}"})
        sub.append({f"a{i}", f"b{i}", f"c{i}"})
        sub.append({f"a{i}", f"b{j}" if twisted else f"b{i}", f"d{i}"})
    return FinSpace.from_subbasis([f"{x}{i}" for x in "abcd" for i in "01"], sub)


def pc4_atlas():
    """The two-chart PC4 atlas in ``trivial(W)``."""
    from .atlas import MAtlas, MChart
    from .modelspace import trivial

    charts = [MChart(U_C, frozenset("pqr"), phi_c()), MChart(U_D, frozenset("pqr"), phi_d())]
    return MAtlas(frozenset(charts), trivial(pc4()), trivial(w_space()), False, "PC4")


def bundle_protobundle(twisted: bool):
    from .bundles import GroupAction, Protobundle
    from .fintop import CMap

    e = bundle_total(twisted)
    act = GroupAction.swap(disc2())
    pi = CMap.of(e, pc4(), {p: p[0] for p in e.points})
    return Protobundle(e, pc4(), disc2(), pi, act.group, act, "MOBIUS" if twisted else "TRIV")


def bundle_atlas(twisted: bool):
    """Two charts over ``U_c`` and ``U_d``; the twisted one flips the sheets over b."""
    from .bundles import BundleAtlas, BundleChart

    b = bundle_protobundle(twisted)
    ys = disc2().points
    flip = {"0": "1", "1": "0"}
    c_map = {f"{x}{i}": f"({x},{i})" for x in U_C for i in "01"}
    d_map = {f"{x}{i}": f"({x},{flip[i] if twisted and x == 'b' else i})" for x in U_D for i in "01"}
    charts = [
        BundleChart.of(c_map, U_C, ys, c_map),
        BundleChart.of(d_map, U_D, ys, d_map),
    ]
    return BundleAtlas(b, frozenset(charts), b.name)


def triv_atlas():
    return bundle_atlas(False)


def mobius_atlas():
    return bundle_atlas(True)


# ---------------------------------------------------------------- C^k track

CIRCLE_HALF_WIDTH = 5.0
CIRCLE_OVERLAP = ((0.25, 4.0),)


def circle2():
    """Two stereographic charts of the circle, each with codomain (-5, 5).

    In north coordinates the overlap is ``1/5 < |x| < 5``; the transitions
    sample the compact part ``1/4 <= |x| <= 4`` on 16-point closed grids.
    """
    from .cknum import CkChartDesc, CkGluingData, CkMap, CkTransition, Region

    w = CIRCLE_HALF_WIDTH
    lo, hi = CIRCLE_OVERLAP[0]
    overlap = Region.of([[(-hi, -lo)], [(lo, hi)]], closed=True)
    charts = (CkChartDesc("N", Region.interval(-w, w), 21), CkChartDesc("S", Region.interval(-w, w), 21))
    inv = CkMap.rational("1/x1", name="1/x")
    ts = (CkTransition("N", "S", overlap, inv, resolution=16), CkTransition("S", "N", overlap, inv, resolution=16))
    return CkGluingData(charts, ts, Region.interval(-math.inf, math.inf), "CIRCLE2")
