"""C^k gluing data over Euclidean boxes, checked symbolically or by sampling.

Two evaluation modes share one interface:

* polynomial/rational expressions in ``x1..xn`` are differentiated exactly with
  sympy; smoothness is then a question of where denominators vanish;
* black-box callables are differentiated with central finite differences and
  Richardson extrapolation.  Sampling can refute smoothness but never prove it,
  so verdicts in this mode are labelled ``consistent with C^k at samples``.

A jump in a derivative is detected by comparing forward and backward one-sided
differences at each sample, so a kink is found only when a sample sits on it
(the default odd grids put one on the centre of symmetric boxes).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
import sympy
from sympy.parsing.sympy_parser import (
    convert_xor,
    parse_expr,
    rationalize,
    standard_transformations,
)

from .errors import AtlasForgeError, EvaluationError, MalformedInput, PreconditionError

OMEGA = "omega"
EXACT = "exact"
SAMPLED = "consistent with C^k at samples"


class CoverageError(AtlasForgeError):
    """A source sample reaches no target chart."""


def parse_order(k) -> int | float | str:
    """Normalise a smoothness class: a natural number, ``inf`` or ``omega``."""
    if isinstance(k, str):
        s = k.strip().lower()
        if s in ("inf", "infinity", "∞"):
            return math.inf
        if s in ("omega", "ω"):
            return OMEGA
        if s.isdigit():
            return int(s)
        raise MalformedInput(f"unknown smoothness class {k!r}")
    if isinstance(k, float) and math.isinf(k) and k > 0:
        return math.inf
    if isinstance(k, int) and not isinstance(k, bool) and k >= 0:
        return k
    raise MalformedInput(f"unknown smoothness class {k!r}")


def order_label(k) -> str:
    k = parse_order(k)
    return "inf" if k == math.inf else str(k)


@dataclass(frozen=True)
class CkConfig:
    tol: float = 1e-8          # inverse residual and commutation, absolute
    h: float = 1e-5            # base FD step; order j uses h * 10**(j-1)
    det_tol: float = 1e-12     # Jacobian determinants at or below this are singular
    jump_tol: float = 1e-3     # relative gap allowed between one-sided derivatives
    max_fd_order: int = 3      # black-box checks stop here for k = inf / omega
    report_order: int = 3      # symbolic derivatives tabulated in reports


DEFAULT = CkConfig()


# ---------------------------------------------------------------- regions

Interval = tuple  # (lo, hi)


@dataclass(frozen=True)
class Region:
    """Union of axis-aligned boxes.

    ``closed`` only affects sampling: closed grids include the box faces,
    open grids stay strictly inside.
    """

    boxes: tuple
    closed: bool = False

    @staticmethod
    def of(boxes: Iterable[Sequence[Sequence[float]]], closed: bool = False) -> "Region":
        bs = tuple(tuple((float(lo), float(hi)) for lo, hi in b) for b in boxes)
        if not bs:
            raise MalformedInput("region needs at least one box")
        dims = {len(b) for b in bs}
        if len(dims) != 1 or 0 in dims:
            raise MalformedInput("region boxes must share a positive dimension")
        for b in bs:
            for lo, hi in b:
                if math.isnan(lo) or math.isnan(hi) or not lo < hi:
                    raise MalformedInput(f"degenerate interval ({lo}, {hi})")
        return Region(bs, closed)

    @staticmethod
    def interval(lo: float, hi: float, closed: bool = False) -> "Region":
        return Region.of([[(lo, hi)]], closed)

    @property
    def dim(self) -> int:
        return len(self.boxes[0])

    def is_bounded(self) -> bool:
        return all(math.isfinite(v) for b in self.boxes for iv in b for v in iv)

    def contains(self, x: Sequence[float], slack: float = 0.0) -> bool:
        """Membership; ``slack`` widens every box (used for closed regions)."""
        closed = self.closed or slack > 0
        for b in self.boxes:
            if closed:
                if all(lo - slack <= xi <= hi + slack for (lo, hi), xi in zip(b, x)):
                    return True
            elif all(lo < xi < hi for (lo, hi), xi in zip(b, x)):
                return True
        return False

    def samples(self, resolution: int) -> np.ndarray:
        if not self.is_bounded():
            raise MalformedInput("cannot sample an unbounded region")
        if resolution < 1:
            raise MalformedInput("sample resolution must be positive")
        pts = []
        for b in self.boxes:
            axes = []
            for lo, hi in b:
                if self.closed:
                    axes.append(np.linspace(lo, hi, max(resolution, 2)))
                else:
                    axes.append(np.linspace(lo, hi, resolution + 2)[1:-1])
            pts.extend(itertools.product(*axes))
        return np.unique(np.asarray(pts, dtype=float), axis=0)

    def covers(self, other: "Region") -> bool:
        """Exact test that the open boxes of ``self`` cover the open boxes of ``other``.

        Points are probed on the grid generated by all box faces: every cell
        centre and every face coordinate, which is enough for box unions.
        """
        if other.dim != self.dim:
            return False
        probes_per_axis = []
        for axis in range(self.dim):
            cuts = sorted({iv[axis][s] for r in (self, other) for iv in r.boxes for s in (0, 1)})
            pts = [c for c in cuts if math.isfinite(c)]
            for lo, hi in zip(cuts, cuts[1:]):
                pts.append(_midpoint(lo, hi))
            probes_per_axis.append(sorted(set(pts)))
        opened = Region(other.boxes, False)
        mine = Region(self.boxes, False)
        return all(
            mine.contains(p) for p in itertools.product(*probes_per_axis) if opened.contains(p)
        )

    def to_json(self) -> dict:
        return {"boxes": [[list(iv) for iv in b] for b in self.boxes], "closed": self.closed}


def _midpoint(lo: float, hi: float) -> float:
    if math.isinf(lo) and math.isinf(hi):
        return 0.0
    if math.isinf(lo):
        return hi - 1.0
    if math.isinf(hi):
        return lo + 1.0
    return (lo + hi) / 2


# ---------------------------------------------------------------- maps

_TRANSFORMS = standard_transformations + (convert_xor, rationalize)


def variables(n: int) -> tuple:
    return tuple(sympy.Symbol(f"x{i + 1}", real=True) for i in range(n))


def parse_rational(text: str, n: int) -> sympy.Expr:
    """Parse one component over ``x1..xn``; only arithmetic with rational constants."""
    xs = variables(n)
    local = {str(s): s for s in xs}
    try:
        expr = parse_expr(text, local_dict=local, transformations=_TRANSFORMS, evaluate=True)
    except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as exc:
        raise MalformedInput(f"cannot parse expression {text!r}: {exc}") from exc
    if not isinstance(expr, sympy.Expr):
        raise MalformedInput(f"expression {text!r} is not arithmetic")
    _check_grammar(expr, set(xs), text)
    return expr


def _check_grammar(e: sympy.Expr, allowed: set, text: str) -> None:
    if isinstance(e, sympy.Symbol):
        if e not in allowed:
            raise MalformedInput(f"unknown variable {e} in {text!r}")
        return
    if isinstance(e, sympy.Rational):
        return
    if isinstance(e, sympy.Pow):
        if not isinstance(e.exp, sympy.Integer):
            raise MalformedInput(f"non-integer power in {text!r}")
        _check_grammar(e.base, allowed, text)
        return
    if isinstance(e, (sympy.Add, sympy.Mul)):
        for a in e.args:
            _check_grammar(a, allowed, text)
        return
    raise MalformedInput(f"{type(e).__name__} is outside the rational grammar in {text!r}")


def _finite(values: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise EvaluationError(f"{what} produced NaN or infinity")
    return values


@dataclass(frozen=True, eq=False)
class CkMap:
    """A map ``R^n -> R^d``, given by rational expressions or by a callable.

    Callables take a length-``n`` float array and return ``d`` numbers.
    """

    dim_in: int
    dim_out: int
    exprs: tuple | None = None
    func: Callable | None = None
    name: str = ""
    text: tuple | None = None  # source of black-box maps built from expressions

    @staticmethod
    def rational(exprs: Sequence[str] | str, dim_in: int = 1, name: str = "") -> "CkMap":
        es = (exprs,) if isinstance(exprs, str) else tuple(exprs)
        m = CkMap(dim_in, len(es), es, None, name or ",".join(es))
        m.sym  # parse eagerly so bad input fails at construction
        return m

    @staticmethod
    def black_box(func: Callable, dim_in: int = 1, dim_out: int = 1, name: str = "") -> "CkMap":
        return CkMap(dim_in, dim_out, None, func, name or getattr(func, "__name__", "f"))

    @staticmethod
    def expression(exprs: Sequence[str] | str, dim_in: int = 1, name: str = "") -> "CkMap":
        """Black-box map from any numeric sympy expression (``Abs``, ``sqrt``, ...)."""
        es = (exprs,) if isinstance(exprs, str) else tuple(exprs)
        xs = variables(dim_in)
        parsed = []
        for e in es:
            try:
                ex = parse_expr(e, local_dict={str(s): s for s in xs}, transformations=_TRANSFORMS)
            except (SyntaxError, TypeError, ValueError, sympy.SympifyError) as exc:
                raise MalformedInput(f"cannot parse expression {e!r}: {exc}") from exc
            extra = getattr(ex, "free_symbols", set()) - set(xs)
            if extra:
                raise MalformedInput(f"unknown variable {sorted(map(str, extra))[0]} in {e!r}")
            parsed.append(ex)
        lam = _lambdify(xs, parsed)
        func = lambda p: _apply(lam, np.atleast_2d(p), len(es))[0]  # noqa: E731
        return CkMap(dim_in, len(es), None, func, name or ",".join(es), es)

    @property
    def mode(self) -> str:
        return "polynomial" if self.exprs is not None else "black-box"

    @cached_property
    def vars(self) -> tuple:
        return variables(self.dim_in)

    @cached_property
    def sym(self) -> sympy.Matrix:
        if self.exprs is None:
            raise PreconditionError("black-box map has no symbolic form")
        return sympy.Matrix([parse_rational(e, self.dim_in) for e in self.exprs])

    @cached_property
    def _lam(self):
        return _lambdify(self.vars, list(self.sym))

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        """Evaluate on an ``(m, n)`` array of points; returns ``(m, d)``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.exprs is not None:
            out = _apply(self._lam, pts, self.dim_out)
        else:
            rows = []
            for p in pts:
                try:
                    v = self.func(p)
                except (ZeroDivisionError, ValueError, OverflowError) as exc:
                    raise EvaluationError(f"{self.name} failed at {p.tolist()}: {exc}") from exc
                rows.append(np.atleast_1d(np.asarray(v, dtype=float)))
            out = np.asarray(rows, dtype=float).reshape(len(pts), self.dim_out)
        return _finite(out, f"map {self.name}")

    def compose(self, inner: "CkMap", name: str = "") -> "CkMap":
        """``self . inner``; stays symbolic when both are."""
        if inner.dim_out != self.dim_in:
            raise PreconditionError("dimension mismatch in composition")
        label = name or f"{self.name}.{inner.name}"
        if self.exprs is not None and inner.exprs is not None:
            sub = dict(zip(self.vars, list(inner.sym)))
            exprs = tuple(str(sympy.cancel(e.xreplace(sub))) for e in self.sym)
            return CkMap.rational(exprs, inner.dim_in, label)
        return CkMap.black_box(lambda p: self(inner(np.atleast_2d(p)))[0], inner.dim_in, self.dim_out, label)


def _lambdify(xs, exprs):
    return sympy.lambdify(xs, exprs, modules="numpy")


def _apply(lam, pts: np.ndarray, d: int) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = lam(*pts.T)
    cols = [np.broadcast_to(np.asarray(v, dtype=float), (len(pts),)) for v in vals]
    return np.stack(cols, axis=1) if cols else np.zeros((len(pts), d))


# ---------------------------------------------------------------- derivatives

def _stencil(order: int, kind: str) -> list:
    """``(offset multiple, coefficient)`` pairs for an ``order``-th difference."""
    c = [math.comb(order, i) for i in range(order + 1)]
    if kind == "central":
        return [(i - order / 2, (-1) ** (order - i) * c[i]) for i in range(order + 1)]
    if kind == "forward":
        return [(i, (-1) ** (order - i) * c[i]) for i in range(order + 1)]
    return [(-i, (-1) ** i * c[i]) for i in range(order + 1)]


def _difference(f: CkMap, pts: np.ndarray, axis: int, order: int, h: float, kind: str) -> np.ndarray:
    acc = np.zeros((len(pts), f.dim_out))
    for off, coef in _stencil(order, kind):
        shifted = pts.copy()
        shifted[:, axis] += off * h
        acc += coef * f(shifted)
    return acc / h**order


def fd_derivative(f: CkMap, pts, axis: int = 0, order: int = 1, h: float = DEFAULT.h,
                  kind: str = "central") -> np.ndarray:
    """Pure partial ``d^order f / dx_axis^order`` with one Richardson step."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    step = h * 10 ** (order - 1)
    coarse = _difference(f, pts, axis, order, step, kind)
    fine = _difference(f, pts, axis, order, step / 2, kind)
    if kind == "central":
        return (4 * fine - coarse) / 3
    return 2 * fine - coarse


def symbolic_derivative(f: CkMap, pts, axis: int = 0, order: int = 1) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    x = f.vars[axis]
    d = [sympy.diff(e, x, order) for e in f.sym]
    return _finite(_apply(_lambdify(f.vars, d), pts, f.dim_out), f"derivative of {f.name}")


def jacobian(f: CkMap, pts, h: float = DEFAULT.h) -> np.ndarray:
    """``(m, d, n)`` Jacobians, exact in polynomial mode."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    cols = []
    for axis in range(f.dim_in):
        if f.mode == "polynomial":
            cols.append(symbolic_derivative(f, pts, axis, 1))
        else:
            cols.append(fd_derivative(f, pts, axis, 1, h))
    return np.stack(cols, axis=2)


def jacobian_det(f: CkMap, pts, h: float = DEFAULT.h) -> np.ndarray:
    if f.dim_in != f.dim_out:
        raise PreconditionError("Jacobian determinant needs a square map")
    if f.mode == "polynomial":
        det = sympy.cancel(f.sym.jacobian(f.vars).det())
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return _apply(_lambdify(f.vars, [det]), pts, 1)[:, 0]
    return np.linalg.det(jacobian(f, pts, h))


# ---------------------------------------------------------------- smoothness

@dataclass
class SmoothnessReport:
    passes: bool
    verdict: str
    derivative_report: dict
    failures: list = field(default_factory=list)


def _orders(k, cap: int) -> range:
    k = parse_order(k)
    top = cap if k in (math.inf, OMEGA) else min(int(k), cap)
    return range(1, top + 1)


def smoothness_check(f: CkMap, pts: np.ndarray, k, cfg: CkConfig = DEFAULT) -> SmoothnessReport:
    """C^k at the given samples: exact for rational maps, FD otherwise."""
    k = parse_order(k)
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    report: dict = {}
    fails: list = []
    f(pts)  # NaN / inf surface as EvaluationError
    if f.mode == "polynomial":
        for e, den in ((e, sympy.fraction(sympy.together(e))[1]) for e in f.sym):
            if den.free_symbols:
                vals = _apply(_lambdify(f.vars, [den]), pts, 1)[:, 0]
                bad = np.flatnonzero(np.abs(vals) <= cfg.det_tol)
                if bad.size:
                    fails.append(f"denominator of {e} vanishes at {pts[bad[0]].tolist()}")
        for j in _orders(k, cfg.report_order):
            for axis in range(f.dim_in):
                vals = symbolic_derivative(f, pts, axis, j)
                report[f"d{j}/dx{axis + 1}"] = float(np.max(np.abs(vals)))
        return SmoothnessReport(not fails, EXACT, report, fails)
    for j in _orders(k, cfg.max_fd_order):
        for axis in range(f.dim_in):
            central = fd_derivative(f, pts, axis, j, cfg.h, "central")
            fwd = fd_derivative(f, pts, axis, j, cfg.h, "forward")
            bwd = fd_derivative(f, pts, axis, j, cfg.h, "backward")
            gap = np.max(np.abs(fwd - bwd), axis=1)
            scale = np.maximum(1.0, np.max(np.abs(central), axis=1))
            bad = np.flatnonzero(gap > cfg.jump_tol * scale)
            report[f"d{j}/dx{axis + 1}"] = float(np.max(np.abs(central)))
            if bad.size:
                i = bad[0]
                fails.append(
                    f"order-{j} derivative along x{axis + 1} jumps at {pts[i].tolist()} "
                    f"(one-sided values differ by {gap[i]:.3g})"
                )
        if fails:
            break
    return SmoothnessReport(not fails, SAMPLED, report, fails)


# ---------------------------------------------------------------- gluing data

@dataclass(frozen=True)
class CkChartDesc:
    id: str
    codomain: Region
    resolution: int = 9

    def __post_init__(self):
        if self.codomain.closed:
            raise MalformedInput(f"chart {self.id}: codomain must be an open box union")
        if self.resolution < 1:
            raise MalformedInput(f"chart {self.id}: resolution must be positive")

    @property
    def dim(self) -> int:
        return self.codomain.dim

    def samples(self) -> np.ndarray:
        return self.codomain.samples(self.resolution)


@dataclass(frozen=True)
class CkTransition:
    """``t = phi_dst . phi_src^-1`` on a sampled part of the overlap."""

    src: str
    dst: str
    overlap: Region
    map: CkMap
    k: object = math.inf
    resolution: int = 9

    def samples(self) -> np.ndarray:
        return self.overlap.samples(self.resolution)


@dataclass(frozen=True)
class CkGluingData:
    charts: tuple
    transitions: tuple
    coord_region: Region
    name: str = ""

    def __post_init__(self):
        ids = [c.id for c in self.charts]
        if len(set(ids)) != len(ids):
            raise MalformedInput("duplicate chart ids")
        for c in self.charts:
            if c.dim != self.coord_region.dim:
                raise MalformedInput(f"chart {c.id} has the wrong dimension")
        seen = set()
        for t in self.transitions:
            for end in (t.src, t.dst):
                if end not in ids:
                    raise MalformedInput(f"transition refers to unknown chart {end!r}")
            if (t.src, t.dst) in seen:
                raise MalformedInput(f"duplicate transition {t.src}->{t.dst}")
            seen.add((t.src, t.dst))

    def chart(self, cid: str) -> CkChartDesc:
        for c in self.charts:
            if c.id == cid:
                return c
        raise MalformedInput(f"unknown chart {cid!r}")

    def transition(self, src: str, dst: str) -> CkTransition | None:
        for t in self.transitions:
            if t.src == src and t.dst == dst:
                return t
        return None


@dataclass
class TransitionReport:
    passes: bool
    max_inverse_residual: float
    min_abs_jacobian_det: float
    derivative_report: dict
    mode: str
    verdict: str
    failures: list = field(default_factory=list)


def _check_inside(pts: np.ndarray, region: Region, what: str) -> None:
    for p in pts:
        if not region.contains(p):
            raise MalformedInput(f"{what}: sample {p.tolist()} lies outside the declared domain")


def transition_diffeo_check(t: CkTransition, k=None, inverse: CkTransition | CkMap | None = None,
                            cfg: CkConfig = DEFAULT, domain: Region | None = None) -> TransitionReport:
    """Necessary (black-box) or exact-smoothness (rational) C^k diffeomorphism test.

    ``domain`` is the source chart codomain; when given, every overlap sample
    must lie inside it.
    """
    if inverse is None:
        raise PreconditionError(f"transition {t.src}->{t.dst} needs its inverse")
    k = parse_order(t.k if k is None else k)
    inv = inverse.map if isinstance(inverse, CkTransition) else inverse
    pts = t.samples()
    if domain is not None:
        _check_inside(pts, domain, f"transition {t.src}->{t.dst}")
    sm = smoothness_check(t.map, pts, k, cfg)
    fails = list(sm.failures)
    img = t.map(pts)
    if isinstance(inverse, CkTransition):
        outside = [p for p in img if not inverse.overlap.contains(p, slack=cfg.tol)]
        if outside:
            fails.append(f"image point {outside[0].tolist()} leaves the inverse overlap")
    residual = float(np.max(np.abs(inv(img) - pts))) if len(pts) else 0.0
    if residual > cfg.tol:
        fails.append(f"inverse residual {residual:.3g} exceeds {cfg.tol:g}")
    dets = np.abs(jacobian_det(t.map, pts, cfg.h))
    min_det = float(np.min(dets)) if len(dets) else math.inf
    if min_det <= cfg.det_tol:
        fails.append(f"Jacobian singular at {pts[int(np.argmin(dets))].tolist()}")
    return TransitionReport(not fails, residual, min_det, sm.derivative_report, t.map.mode, sm.verdict, fails)


@dataclass
class CkAtlasReport:
    is_atlas: bool
    is_full: bool
    non_degenerate: bool
    failures: list
    transitions: dict = field(default_factory=dict)


def _cocycle_failures(g: CkGluingData, cfg: CkConfig) -> list:
    out = []
    for a, b, c in itertools.permutations([ch.id for ch in g.charts], 3):
        tab, tbc, tac = g.transition(a, b), g.transition(b, c), g.transition(a, c)
        if not (tab and tbc and tac):
            continue
        pts = tab.samples()
        img = tab.map(pts)
        keep = [i for i, (p, q) in enumerate(zip(pts, img))
                if tbc.overlap.contains(q) and tac.overlap.contains(p)]
        if not keep:
            continue
        lhs = tbc.map(img[keep])
        rhs = tac.map(pts[keep])
        err = np.max(np.abs(lhs - rhs), axis=1)
        if np.max(err) > cfg.tol:
            i = int(np.argmax(err))
            out.append(f"cocycle {a}->{b}->{c} differs from {a}->{c} at {pts[keep][i].tolist()}")
    return out


def ck_atlas_report(g: CkGluingData, k=math.inf, cfg: CkConfig = DEFAULT) -> CkAtlasReport:
    k = parse_order(k)
    fails: list = []
    reports: dict = {}
    if not g.charts:
        return CkAtlasReport(False, False, False, ["empty chart set"])
    for t in g.transitions:
        back = g.transition(t.dst, t.src)
        if back is None:
            raise MalformedInput(f"transition {t.src}->{t.dst} has no inverse {t.dst}->{t.src}")
    for t in sorted(g.transitions, key=lambda t: (t.src, t.dst)):
        r = transition_diffeo_check(t, k, g.transition(t.dst, t.src), cfg, g.chart(t.src).codomain)
        reports[(t.src, t.dst)] = r
        fails.extend(f"{t.src}->{t.dst}: {why}" for why in r.failures)
        img = t.map(t.samples())
        dst = g.chart(t.dst).codomain
        if not all(dst.contains(q) for q in img):
            fails.append(f"{t.src}->{t.dst}: image leaves the codomain of {t.dst}")
    fails.extend(_cocycle_failures(g, cfg))
    union = Region(tuple(b for c in g.charts for b in c.codomain.boxes), False)
    is_atlas = not fails
    is_full = is_atlas and union.covers(g.coord_region)
    non_degenerate = any(c.codomain.boxes for c in g.charts)
    return CkAtlasReport(is_atlas, is_full, non_degenerate, fails, reports)


# ---------------------------------------------------------------- morphisms

@dataclass(frozen=True)
class CkLocalRep:
    """``phi_dst . f . phi_src^-1`` on ``domain`` (inside the source codomain)."""

    src: str
    dst: str
    domain: Region
    map: CkMap
    resolution: int = 9


@dataclass
class CkMorphismReport:
    is_morphism: bool
    is_classic: bool
    verdict: str
    failures: list = field(default_factory=list)


def ck_morphism_check(src: CkGluingData, dst: CkGluingData, f_charts: Iterable[CkLocalRep],
                      f1: CkMap | None = None, k=math.inf, cfg: CkConfig = DEFAULT) -> CkMorphismReport:
    """Classic form: every local representative is C^k.  Pair form: ``f1`` is
    C^k and, at every source sample, some representative agrees with it."""
    k = parse_order(k)
    reps = list(f_charts)
    fails: list = []
    verdict = EXACT
    for r in reps:
        src.chart(r.src), dst.chart(r.dst)
        pts = r.domain.samples(r.resolution)
        _check_inside(pts, src.chart(r.src).codomain, f"representative {r.src}->{r.dst}")
        sm = smoothness_check(r.map, pts, k, cfg)
        if sm.verdict == SAMPLED:
            verdict = SAMPLED
        fails.extend(f"{r.src}->{r.dst}: {why}" for why in sm.failures)
        target = dst.chart(r.dst).codomain
        img = r.map(pts)
        bad = [p for p, q in zip(pts, img) if not target.contains(q)]
        if bad:
            fails.append(f"{r.src}->{r.dst}: {bad[0].tolist()} maps outside the codomain of {r.dst}")
    for c in src.charts:
        mine = [r for r in reps if r.src == c.id]
        for p in c.samples():
            if not any(r.domain.contains(p) for r in mine):
                raise CoverageError(f"sample {p.tolist()} of chart {c.id} reaches no target chart")
    is_classic = not fails
    if f1 is None:
        return CkMorphismReport(False, is_classic, verdict, fails + ["no coordinate map f1 given"])
    pair_fails: list = []
    all_pts = np.concatenate([c.samples() for c in src.charts])
    sm = smoothness_check(f1, all_pts, k, cfg)
    pair_fails.extend(f"f1: {why}" for why in sm.failures)
    if sm.verdict == SAMPLED:
        verdict = SAMPLED
    for c in src.charts:
        mine = [r for r in reps if r.src == c.id]
        pts = c.samples()
        want = f1(pts)
        for p, w in zip(pts, want):
            if not any(r.domain.contains(p) and np.max(np.abs(r.map(p[None])[0] - w)) <= cfg.tol
                       for r in mine):
                pair_fails.append(f"no chart of {dst.name or 'target'} commutes with f1 at {c.id}:{p.tolist()}")
                break
    return CkMorphismReport(not pair_fails, is_classic, verdict, fails + pair_fails)


# ---------------------------------------------------------------- manifolds

@dataclass
class ManifoldReport:
    is_manifold_data: bool
    maximality: str
    is_full: bool
    failures: list


def manifold_check(g: CkGluingData, k=math.inf, cfg: CkConfig = DEFAULT) -> ManifoldReport:
    """Atlas validity; the maximal closure is cited as existing, never built."""
    r = ck_atlas_report(g, k, cfg)
    return ManifoldReport(r.is_atlas, "assumed", r.is_full, r.failures)


def restrict_transition(t: CkTransition, overlap: Region, resolution: int | None = None) -> CkTransition:
    return CkTransition(t.src, t.dst, overlap, t.map, t.k, resolution or t.resolution)


def inverse_of(t: CkTransition, inv_map: CkMap, overlap: Region | None = None) -> CkTransition:
    """The reverse transition; its overlap defaults to the box hull of the sampled image."""
    if overlap is None:
        img = t.map(t.samples())
        overlap = Region.of([list(zip(img.min(axis=0), img.max(axis=0)))], closed=True)
    return CkTransition(t.dst, t.src, overlap, inv_map, t.k, t.resolution)
