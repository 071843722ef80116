"""Fixture documents, check dispatch and reports.

Exit codes: 0 every check passed, 1 some check failed, 2 bad input or usage.
The document schema is described in ``docs/schema.md``.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from . import atlas as atl
from . import bundles as bun
from . import cknum
from .cats import build_atlas_category, check_category_laws
from .errors import AtlasForgeError, BudgetExceeded, MalformedInput
from .fintop import Arrow, CMap, FinSpace, canon, connected_components, product, pset
from .modelspace import ModelSpace, check_axioms, is_trivial, minimal_closure, trivial
from .morphisms import AtlasMorphism, classify

DOC_VERSION = 1
REPORT_SCHEMA = "atlasforge.report/1"
SECTIONS = ("spaces", "groups", "model_spaces", "atlases", "morphisms", "bundles", "ck_data")


class RefError(MalformedInput):
    """A name that does not resolve; the message carries the document path."""


@dataclass(frozen=True)
class CheckRequest:
    name: str
    target: Any
    params: dict = field(default_factory=dict)
    expect: dict | None = None


@dataclass
class FixtureDocument:
    version: int = DOC_VERSION
    spaces: dict = field(default_factory=dict)
    groups: dict = field(default_factory=dict)
    model_spaces: dict = field(default_factory=dict)
    atlases: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    bundles: dict = field(default_factory=dict)
    ck_data: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    name: str = ""


@dataclass
class CheckResult:
    name: str
    target: Any
    status: str  # pass | fail | error
    details: dict


@dataclass
class Report:
    document: str
    results: list

    @property
    def overall(self) -> str:
        return "pass" if all(r.status == "pass" for r in self.results) else "fail"


@dataclass(frozen=True)
class RunOptions:
    budget: int | None = None
    tol: float | None = None

    def ck_config(self) -> cknum.CkConfig:
        return cknum.CkConfig(tol=self.tol) if self.tol is not None else cknum.DEFAULT


# ---------------------------------------------------------------- parsing

def _need(d: dict, key: str, path: str):
    if not isinstance(d, dict) or key not in d:
        raise MalformedInput(f"{path}: missing field {key!r}")
    return d[key]


def _ref(table: dict, name, kind: str, path: str):
    if not isinstance(name, str) or name not in table:
        raise RefError(f"{path}: undefined {kind} {name!r}")
    return table[name]


def _mapping(raw, path: str) -> dict:
    if not isinstance(raw, dict):
        raise MalformedInput(f"{path}: a map is an object from points to points")
    return {str(k): str(v) for k, v in raw.items()}


def _points(raw, path: str) -> list:
    if not isinstance(raw, (list, str)):
        raise MalformedInput(f"{path}: expected a list of points")
    return [str(p) for p in raw]


def _parse_space(raw: dict, doc: FixtureDocument, path: str) -> FinSpace:
    if "discrete" in raw:
        return FinSpace.discrete(_points(raw["discrete"], path))
    if "product" in raw:
        a, b = raw["product"]
        return product(_ref(doc.spaces, a, "space", path), _ref(doc.spaces, b, "space", path))
    pts = _points(_need(raw, "points", path), path)
    if "opens" in raw:
        return FinSpace.from_opens(pts, [_points(u, path) for u in raw["opens"]])
    if "subbasis" in raw:
        return FinSpace.from_subbasis(pts, [_points(u, path) for u in raw["subbasis"]])
    raise MalformedInput(f"{path}: a space needs opens, subbasis, discrete or product")


def _parse_group(raw: dict, path: str) -> bun.FiniteGroup:
    if raw.get("z2"):
        return bun.FiniteGroup.z2()
    if "cyclic" in raw:
        return bun.FiniteGroup.cyclic(int(raw["cyclic"]))
    els = _points(_need(raw, "elements", path), path)
    rows = _need(raw, "table", path)
    if len(rows) != len(els) or any(len(r) != len(els) for r in rows):
        raise MalformedInput(f"{path}: table must be {len(els)}x{len(els)}")
    return bun.FiniteGroup.of(els, {(a, b): str(rows[i][j]) for i, a in enumerate(els) for j, b in enumerate(els)})


def _parse_action(raw, group: bun.FiniteGroup, fiber: FinSpace, path: str) -> bun.GroupAction:
    if raw == "swap":
        act = bun.GroupAction.swap(fiber)
        if act.group != group:
            raise MalformedInput(f"{path}: swap needs the two-element group")
        return act
    if not isinstance(raw, dict):
        raise MalformedInput(f"{path}: action is 'swap' or a table")
    table = {(str(y), str(g)): str(v) for y, row in raw.items() for g, v in row.items()}
    return bun.GroupAction.of(group, fiber, table)


def _parse_arrow(raw: dict, path: str) -> Arrow:
    return Arrow.of(_points(_need(raw, "dom", path), path), _points(_need(raw, "cod", path), path),
                    _mapping(_need(raw, "map", path), path))


def _parse_model_space(raw: dict, doc: FixtureDocument, name: str, path: str) -> ModelSpace:
    if "trivial" in raw:
        return trivial(_ref(doc.spaces, raw["trivial"], "space", path), name)
    if "grho" in raw:
        g = raw["grho"]
        base = _ref(doc.spaces, _need(g, "base", path), "space", path)
        fiber = _ref(doc.spaces, _need(g, "fiber", path), "space", path)
        group = _ref(doc.groups, _need(g, "group", path), "group", path)
        act = _parse_action(_need(g, "action", path), group, fiber, path + ".action")
        return bun.trivial_grho_space(base, fiber, group, act, name)
    space = _ref(doc.spaces, _need(raw, "space", path), "space", path)
    objects = [pset(_points(o, path)) for o in _need(raw, "objects", path)]
    arrows_raw = raw.get("arrows", "all")
    if raw.get("closure"):
        seeds = [] if arrows_raw == "all" else [_parse_arrow(a, path) for a in arrows_raw]
        return minimal_closure(space, objects, seeds, name=name)
    for o in objects:
        if o not in space.opens:
            raise MalformedInput(f"{path}: object {canon(o)} is not open")
    if arrows_raw == "all":
        return ModelSpace(space, frozenset(objects), None, name)
    return ModelSpace(space, frozenset(objects), frozenset(_parse_arrow(a, path) for a in arrows_raw), name)


def _parse_atlas(raw: dict, doc: FixtureDocument, name: str, path: str) -> atl.MAtlas:
    total = _ref(doc.model_spaces, _need(raw, "total", path), "model space", path + ".total")
    coord = _ref(doc.model_spaces, _need(raw, "coord", path), "model space", path + ".coord")
    charts = []
    for i, c in enumerate(_need(raw, "charts", path)):
        p = f"{path}.charts[{i}]"
        charts.append(atl.MChart.of(_points(_need(c, "patch", p), p), _points(_need(c, "codomain", p), p),
                                    _mapping(_need(c, "map", p), p)))
    return atl.MAtlas(frozenset(charts), total, coord, bool(raw.get("topological", False)), name)


def _parse_morphism(raw: dict, doc: FixtureDocument, path: str) -> AtlasMorphism:
    s = _ref(doc.atlases, _need(raw, "source", path), "atlas", path + ".source")
    t = _ref(doc.atlases, _need(raw, "target", path), "atlas", path + ".target")
    f0 = Arrow.of(s.total.points, t.total.points, _mapping(_need(raw, "f0", path), path + ".f0"))
    f1 = Arrow.of(s.coord_space.points, t.coord_space.points, _mapping(_need(raw, "f1", path), path + ".f1"))
    return AtlasMorphism(f0, f1, s, t)


def _parse_bundle(raw: dict, doc: FixtureDocument, name: str, path: str) -> bun.BundleAtlas:
    total = _ref(doc.spaces, _need(raw, "total", path), "space", path + ".total")
    base = _ref(doc.spaces, _need(raw, "base", path), "space", path + ".base")
    fiber = _ref(doc.spaces, _need(raw, "fiber", path), "space", path + ".fiber")
    group = _ref(doc.groups, _need(raw, "group", path), "group", path + ".group")
    act = _parse_action(_need(raw, "action", path), group, fiber, path + ".action")
    proj = CMap.of(total, base, _mapping(_need(raw, "projection", path), path + ".projection"))
    b = bun.Protobundle(total, base, fiber, proj, group, act, name)
    charts = []
    for i, c in enumerate(_need(raw, "charts", path)):
        p = f"{path}.charts[{i}]"
        charts.append(bun.BundleChart.of(_points(_need(c, "patch", p), p), _points(_need(c, "base_open", p), p),
                                         fiber.points, _mapping(_need(c, "map", p), p)))
    return bun.BundleAtlas(b, frozenset(charts), name)


def _bound(v) -> float:
    if isinstance(v, str):
        return float(v.replace("∞", "inf"))
    return float(v)


def _parse_region(raw, path: str, closed_default: bool = False) -> cknum.Region:
    boxes = _need(raw, "boxes", path)
    return cknum.Region.of([[(_bound(lo), _bound(hi)) for lo, hi in b] for b in boxes],
                           bool(raw.get("closed", closed_default)))


def _parse_ckmap(raw, dim: int, mode: str, path: str) -> cknum.CkMap:
    exprs = [raw] if isinstance(raw, str) else list(raw)
    if mode == "polynomial":
        return cknum.CkMap.rational(exprs, dim)
    if mode == "black-box":
        return cknum.CkMap.expression(exprs, dim)
    raise MalformedInput(f"{path}: mode must be polynomial or black-box")


def _parse_ck(raw: dict, name: str, path: str) -> cknum.CkGluingData:
    region = _parse_region(_need(raw, "coord_region", path), path + ".coord_region")
    charts = []
    for i, c in enumerate(raw.get("charts", [])):
        p = f"{path}.charts[{i}]"
        charts.append(cknum.CkChartDesc(str(_need(c, "id", p)), _parse_region(_need(c, "codomain", p), p),
                                        int(c.get("resolution", 9))))
    ids = {c.id for c in charts}
    ts = []
    for i, t in enumerate(raw.get("transitions", [])):
        p = f"{path}.transitions[{i}]"
        for end in ("from", "to"):
            if _need(t, end, p) not in ids:
                raise RefError(f"{p}.{end}: undefined chart {t[end]!r}")
        ts.append(cknum.CkTransition(
            t["from"], t["to"], _parse_region(_need(t, "overlap", p), p + ".overlap", True),
            _parse_ckmap(_need(t, "map", p), region.dim, t.get("mode", "polynomial"), p + ".map"),
            cknum.parse_order(t.get("k", "inf")), int(t.get("resolution", 9)),
        ))
    return cknum.CkGluingData(tuple(charts), tuple(ts), region, name)


def parse_document(source) -> FixtureDocument:
    """Load a document from a path, JSON text or an already-decoded dict."""
    name = ""
    if isinstance(source, dict):
        raw = source
    else:
        text = str(source)
        p = Path(text) if "\n" not in text and not text.lstrip().startswith("{") else None
        if p is not None:
            try:
                text = p.read_text()
            except OSError as exc:
                raise MalformedInput(f"cannot read {p}: {exc}") from exc
            name = p.stem
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInput(f"syntax error: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedInput("a document is a JSON object")
    version = raw.get("version")
    if version != DOC_VERSION:
        raise MalformedInput(f"unsupported document version {version!r}")
    unknown = set(raw) - set(SECTIONS) - {"version", "checks", "name"}
    if unknown:
        raise MalformedInput(f"unknown top-level field {sorted(unknown)[0]!r}")
    doc = FixtureDocument(version=version, name=str(raw.get("name", name)))
    for k, v in raw.get("spaces", {}).items():
        doc.spaces[k] = _parse_space(v, doc, f"spaces.{k}")
    for k, v in raw.get("groups", {}).items():
        doc.groups[k] = _parse_group(v, f"groups.{k}")
    for k, v in raw.get("model_spaces", {}).items():
        doc.model_spaces[k] = _parse_model_space(v, doc, k, f"model_spaces.{k}")
    for k, v in raw.get("atlases", {}).items():
        doc.atlases[k] = _parse_atlas(v, doc, k, f"atlases.{k}")
    for k, v in raw.get("morphisms", {}).items():
        doc.morphisms[k] = _parse_morphism(v, doc, f"morphisms.{k}")
    for k, v in raw.get("bundles", {}).items():
        doc.bundles[k] = _parse_bundle(v, doc, k, f"bundles.{k}")
    for k, v in raw.get("ck_data", {}).items():
        doc.ck_data[k] = _parse_ck(v, k, f"ck_data.{k}")
    for i, c in enumerate(raw.get("checks", [])):
        p = f"checks[{i}]"
        req = CheckRequest(str(_need(c, "name", p)), c.get("target"), dict(c.get("params", {})), c.get("expect"))
        if req.name not in CHECKS:
            raise MalformedInput(f"{p}: unknown check {req.name!r}")
        section = CHECKS[req.name][0]
        targets = req.target if isinstance(req.target, list) else [req.target]
        for t in targets:
            _ref(getattr(doc, section), t, section.rstrip("s").replace("_", " "), p + ".target")
        doc.checks.append(req)
    return doc


# ---------------------------------------------------------------- serialisation

def jsonable(x) -> Any:
    """Canonical JSON-ready form; sets become sorted lists."""
    if isinstance(x, Arrow):
        return {"dom": list(canon(x.dom)), "cod": list(canon(x.cod)), "map": dict(x.graph)}
    if isinstance(x, (frozenset, set)):
        items = [jsonable(v) for v in x]
        return sorted(items, key=lambda v: json.dumps(v, sort_keys=True))
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    return repr(x)


def _name_of(table: dict, obj, kind: str) -> str:
    for k, v in table.items():
        if v is obj:
            return k
    for k, v in table.items():
        if v == obj:
            return k
    raise MalformedInput(f"{kind} {obj!r} has no name in the document")


def _sets(xs) -> list:
    return [list(canon(s)) for s in sorted(xs, key=lambda s: (len(s), canon(s)))]


def _dump_space(s: FinSpace) -> dict:
    return {"points": list(canon(s.points)), "opens": _sets(s.opens)}


def _dump_group(g: bun.FiniteGroup) -> dict:
    return {"elements": list(g.elements), "table": [[g.op(a, b) for b in g.elements] for a in g.elements]}


def _dump_action(a: bun.GroupAction) -> dict:
    return {y: {g: a(y, g) for g in a.group.elements} for y in canon(a.fiber.points)}


def _dump_model_space(m: ModelSpace, doc: FixtureDocument) -> dict:
    if isinstance(m, bun.GrhoModelSpace) and m.group is not None:
        return {"grho": {
            "base": _name_of(doc.spaces, m.base, "space"),
            "fiber": _name_of(doc.spaces, m.fiber, "space"),
            "group": _name_of(doc.groups, m.group, "group"),
            "action": _dump_action(m.action),
        }}
    sname = _name_of(doc.spaces, m.space, "space")
    if is_trivial(m):
        return {"trivial": sname}
    out = {"space": sname, "objects": _sets(m.objects)}
    out["arrows"] = "all" if m.arrows is None else [jsonable(f) for f in sorted(m.arrows)]
    return out


def _dump_atlas(a: atl.MAtlas, doc: FixtureDocument) -> dict:
    return {
        "total": _name_of(doc.model_spaces, a.total, "model space"),
        "coord": _name_of(doc.model_spaces, a.coord_space, "model space"),
        "topological": a.topological,
        "charts": [{"patch": list(canon(c.patch)), "codomain": list(canon(c.codomain)), "map": dict(c.coord.graph)}
                   for c in a.sorted_charts],
    }


def _dump_bundle(a: bun.BundleAtlas, doc: FixtureDocument) -> dict:
    b = a.bundle
    return {
        "total": _name_of(doc.spaces, b.total, "space"),
        "base": _name_of(doc.spaces, b.base, "space"),
        "fiber": _name_of(doc.spaces, b.fiber, "space"),
        "group": _name_of(doc.groups, b.group, "group"),
        "action": _dump_action(b.action),
        "projection": dict(b.proj.fn.graph),
        "charts": [{"patch": list(canon(c.patch)), "base_open": list(canon(c.base_open)), "map": dict(c.coord.graph)}
                   for c in a.sorted_charts],
    }


def _dump_region(r: cknum.Region) -> dict:
    return {"boxes": jsonable([[list(iv) for iv in b] for b in r.boxes]), "closed": r.closed}


def _dump_ck(g: cknum.CkGluingData) -> dict:
    ts = []
    for t in g.transitions:
        if t.map.exprs is None and t.map.text is None:
            raise MalformedInput(f"transition {t.src}->{t.dst} is an opaque callable")
        ts.append({
            "from": t.src, "to": t.dst, "overlap": _dump_region(t.overlap),
            "map": list(t.map.exprs if t.map.exprs is not None else t.map.text),
            "mode": t.map.mode, "k": cknum.order_label(t.k), "resolution": t.resolution,
        })
    return {
        "coord_region": _dump_region(g.coord_region),
        "charts": [{"id": c.id, "codomain": _dump_region(c.codomain), "resolution": c.resolution} for c in g.charts],
        "transitions": ts,
    }


def dump_document(doc: FixtureDocument) -> dict:
    """Canonical dict form; ``parse_document(dump_document(d))`` rebuilds ``d``."""
    out: dict = {"version": doc.version}
    if doc.name:
        out["name"] = doc.name
    out["spaces"] = {k: _dump_space(v) for k, v in doc.spaces.items()}
    out["groups"] = {k: _dump_group(v) for k, v in doc.groups.items()}
    out["model_spaces"] = {k: _dump_model_space(v, doc) for k, v in doc.model_spaces.items()}
    out["atlases"] = {k: _dump_atlas(v, doc) for k, v in doc.atlases.items()}
    out["morphisms"] = {
        k: {"source": _name_of(doc.atlases, m.source, "atlas"), "target": _name_of(doc.atlases, m.target, "atlas"),
            "f0": dict(m.f0.graph), "f1": dict(m.f1.graph)}
        for k, m in doc.morphisms.items()
    }
    out["bundles"] = {k: _dump_bundle(v, doc) for k, v in doc.bundles.items()}
    out["ck_data"] = {k: _dump_ck(v) for k, v in doc.ck_data.items()}
    out["checks"] = [
        {"name": c.name, "target": c.target, "params": c.params, **({"expect": c.expect} if c.expect is not None else {})}
        for c in doc.checks
    ]
    return out


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False)


# ---------------------------------------------------------------- checks

def _budget(opts: RunOptions, default: int | None) -> int | None:
    return opts.budget if opts.budget is not None else default


def _flags(r) -> dict:
    return {f.name: getattr(r, f.name) for f in dataclasses.fields(r) if isinstance(getattr(r, f.name), bool)}


def check_axioms_op(doc, target, params, opts):
    r = check_axioms(doc.model_spaces[target])
    d = {"items": {str(k): v for k, v in r.items.items()}, "failed_items": r.failed_items(),
         "counterexamples": {str(k): v for k, v in r.counterexamples.items()}, "method": r.method}
    return r.passed, d


def check_atlas_report(doc, target, params, opts):
    r = atl.atlas_report(doc.atlases[target], _budget(opts, atl.CHART_BUDGET))
    return r.is_atlas, {**_flags(r), "failures": r.failures[:5]}


def check_maximal_closure(doc, target, params, opts):
    a = doc.atlases[target]
    b = _budget(opts, atl.CHART_BUDGET)
    m = atl.maximal_closure(a, b)
    r = atl.atlas_report(m, b)
    ok = r.is_atlas and r.is_full == atl.is_full(a) and r.is_semi_maximal and r.is_maximal and a.charts <= m.charts
    return ok, {"charts": len(m.charts), "seed_charts": len(a.charts), "extensive": a.charts <= m.charts,
                "idempotent": atl.maximal_closure(m, b) == m, **_flags(r)}


def check_category_laws_op(doc, target, params, opts):
    names = target if isinstance(target, list) else [target]
    objs = [doc.atlases[n] for n in names]
    if params.get("close", False):
        objs = [atl.maximal_closure(o, _budget(opts, atl.CHART_BUDGET)) for o in objs]
    c = build_atlas_category(objs, params.get("arrow_mode", "morphism"), params.get("restriction", "plain"),
                             budget=opts.budget)
    r = check_category_laws(c, max_triples=params.get("max_triples"))
    return r.passed, {"objects": len(c.objects), "arrows": len(c.arrows), "sampled": r.sampled,
                      "counterexamples": r.counterexamples[:3]}


def check_classify_morphism(doc, target, params, opts):
    r = classify(doc.morphisms[target])
    level = params.get("level", "morphism")
    flags = _flags(r)
    if level.replace("-", "_") not in flags:
        raise MalformedInput(f"unknown morphism level {level!r}")
    return flags[level.replace("-", "_")], {**flags, "variant": r.variant}


def check_bundle_atlas_report(doc, target, params, opts):
    r = bun.bundle_atlas_report(doc.bundles[target], _budget(opts, bun.BUNDLE_BUDGET))
    return r.is_atlas, {**_flags(r), "failures": [str(f) for f in r.failures[:5]]}


def check_bundle_closure(doc, target, params, opts):
    a = doc.bundles[target]
    b = _budget(opts, bun.BUNDLE_BUDGET)
    m = bun.bundle_maximal_closure(a, b)
    r = bun.bundle_atlas_report(m, b)
    ok = r.is_atlas and r.is_semi_maximal and r.is_maximal and r.cross_check_agrees
    return ok, {"charts": len(m.charts), "seed_charts": len(a.charts),
                "components": len(connected_components(m.bundle.total)), **_flags(r)}


def check_components(doc, target, params, opts):
    if target in doc.bundles:
        space = doc.bundles[target].bundle.total
    else:
        space = doc.spaces[target]
    comps = connected_components(space)
    return True, {"count": len(comps), "components": [list(canon(c)) for c in sorted(comps, key=canon)]}


def check_bundle_morphism_search(doc, target, params, opts):
    src, dst = (doc.bundles[t] for t in target)
    b = _budget(opts, bun.BUNDLE_BUDGET)
    if params.get("close", True):
        src, dst = bun.bundle_maximal_closure(src, b), bun.bundle_maximal_closure(dst, b)
    found = list(bun.iter_bundle_morphisms(src, dst, params.get("kind", "morphism"),
                                           bijective_E=bool(params.get("bijective_E", False)), budget=b))
    d = {"count": len(found)}
    if found:
        d["example"] = found[0].f_E
    return bool(found), d


def check_ck_atlas(doc, target, params, opts):
    r = cknum.ck_atlas_report(doc.ck_data[target], params.get("k", "inf"), opts.ck_config())
    d = {"is_atlas": r.is_atlas, "is_full": r.is_full, "non_degenerate": r.non_degenerate, "failures": r.failures,
         "transitions": {f"{a}->{b}": {"passes": t.passes, "min_abs_jacobian_det": t.min_abs_jacobian_det,
                                        "max_inverse_residual": t.max_inverse_residual, "verdict": t.verdict}
                         for (a, b), t in sorted(r.transitions.items())}}
    return r.is_atlas, d


def check_manifold(doc, target, params, opts):
    r = cknum.manifold_check(doc.ck_data[target], params.get("k", "inf"), opts.ck_config())
    return r.is_manifold_data, jsonable(r)


def check_transition(doc, target, params, opts):
    g = doc.ck_data[target]
    src, dst = _need(params, "from", "params"), _need(params, "to", "params")
    t, back = g.transition(src, dst), g.transition(dst, src)
    if t is None or back is None:
        raise MalformedInput(f"{target}: no transition pair {src}<->{dst}")
    r = cknum.transition_diffeo_check(t, params.get("k"), back, opts.ck_config(), g.chart(src).codomain)
    return r.passes, jsonable(r)


# name -> (section holding the target, operation)
CHECKS: dict[str, tuple[str, Callable]] = {
    "axioms": ("model_spaces", check_axioms_op),
    "atlas_report": ("atlases", check_atlas_report),
    "maximal_closure": ("atlases", check_maximal_closure),
    "category_laws": ("atlases", check_category_laws_op),
    "classify_morphism": ("morphisms", check_classify_morphism),
    "bundle_atlas_report": ("bundles", check_bundle_atlas_report),
    "bundle_maximal_closure": ("bundles", check_bundle_closure),
    "components": ("bundles", check_components),
    "bundle_morphism_search": ("bundles", check_bundle_morphism_search),
    "ck_atlas_report": ("ck_data", check_ck_atlas),
    "manifold_check": ("ck_data", check_manifold),
    "transition_check": ("ck_data", check_transition),
}


def _matches(details: dict, expect: dict) -> list:
    return [k for k, v in expect.items() if jsonable(details.get(k)) != jsonable(v)]


def run_checks(doc: FixtureDocument, opts: RunOptions = RunOptions()) -> Report:
    results = []
    for req in doc.checks:
        if req.name not in CHECKS:
            raise MalformedInput(f"unknown check {req.name!r}")
        op = CHECKS[req.name][1]
        try:
            ok, details = op(doc, req.target, req.params, opts)
        except MalformedInput:
            raise
        except BudgetExceeded as exc:
            results.append(CheckResult(req.name, req.target, "error", {"error": str(exc)}))
            continue
        except AtlasForgeError as exc:
            results.append(CheckResult(req.name, req.target, "error",
                                       {"error": f"{type(exc).__name__}: {exc}"}))
            continue
        details = jsonable(details)
        if req.expect is not None:
            miss = _matches(details, req.expect)
            ok = not miss
            details["expect"] = jsonable(req.expect)
            if miss:
                details["unmet"] = miss
        results.append(CheckResult(req.name, req.target, "pass" if ok else "fail", details))
    return Report(doc.name, results)


def report_json(r: Report) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "document": r.document,
        "overall": r.overall,
        "checks": [{"name": c.name, "target": c.target, "status": c.status, "details": c.details} for c in r.results],
    }


def _target_label(t) -> str:
    return ",".join(t) if isinstance(t, list) else str(t)


def emit_report(r: Report, fmt: str = "text", out=None) -> int:
    out = out or sys.stdout
    if fmt == "structured":
        out.write(dumps(report_json(r)) + "\n")
    elif fmt == "text":
        for c in r.results:
            out.write(f"{c.status.upper():5} {c.name} [{_target_label(c.target)}]\n")
            for k in sorted(c.details):
                v = c.details[k]
                if isinstance(v, (bool, int, float, str)) or v is None:
                    out.write(f"      {k}: {v}\n")
                elif isinstance(v, list) and v and all(isinstance(x, (int, str)) for x in v):
                    out.write(f"      {k}: {', '.join(map(str, v))}\n")
        out.write(f"overall: {r.overall} ({len(r.results)} checks)\n")
    else:
        raise MalformedInput(f"unknown format {fmt!r}")
    return 0 if r.overall == "pass" else 1


# ---------------------------------------------------------------- entry point

def _close(doc: FixtureDocument, target: str, opts: RunOptions) -> dict:
    if target == "atlas":
        b = _budget(opts, atl.CHART_BUDGET)
        doc.atlases = {k: atl.maximal_closure(a, b, name=k) for k, a in doc.atlases.items()}
    elif target == "bundle-atlas":
        b = _budget(opts, bun.BUNDLE_BUDGET)
        doc.bundles = {k: bun.bundle_maximal_closure(a, b, name=k) for k, a in doc.bundles.items()}
    else:
        raise MalformedInput(f"unknown close target {target!r}")
    doc.morphisms = {}
    doc.checks = []
    return dump_document(doc)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="atlas-forge", description="Check model-space, atlas, bundle and C^k fixtures.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file")
    common.add_argument("--budget", type=int, default=None, help="enumeration cap")
    common.add_argument("--tol", type=float, default=None, help="numeric tolerance for C^k checks")
    common.add_argument("--seed", type=int, default=None, help="accepted for compatibility; checks are deterministic")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="parse and resolve a document")
    c = sub.add_parser("close", parents=[common], help="emit the document with maximal closures")
    c.add_argument("--target", choices=["atlas", "bundle-atlas"], required=True)
    r = sub.add_parser("report", parents=[common], help="run the document's checks")
    r.add_argument("--format", choices=["text", "structured"], default="text")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    opts = RunOptions(args.budget, args.tol)
    try:
        doc = parse_document(args.file)
        if args.command == "validate":
            counts = ", ".join(f"{len(getattr(doc, s))} {s}" for s in SECTIONS)
            print(f"ok: {counts}, {len(doc.checks)} checks")
            return 0
        if args.command == "close":
            print(dumps(_close(doc, args.target, opts)))
            return 0
        return emit_report(run_checks(doc, opts), args.format)
    except AtlasForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
