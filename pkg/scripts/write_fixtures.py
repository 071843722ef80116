"""Regenerate the JSON fixtures under src/atlasforge/data.

The documents are written by hand-shaped dicts (subbasis form, readable
maps) rather than dumped, so they double as schema examples.
"""
import json
from pathlib import Path

DATA = Path(__file__).resolve().parents[1] / "src" / "atlasforge" / "data"

PC4 = {"points": list("abcd"), "subbasis": [["a"], ["b"], list("abc"), list("abd")]}
W = {"points": list("pqr"), "subbasis": [["p"], ["q"], list("pqr")]}
SIERP = {"points": ["0", "1"], "opens": [[], ["1"], ["0", "1"]]}
DISC2 = {"discrete": ["0", "1"]}


def pc4_doc():
    return {
        "version": 1,
        "name": "pc4",
        "spaces": {"PC4": PC4, "W": W},
        "model_spaces": {"T_PC4": {"trivial": "PC4"}, "T_W": {"trivial": "W"}},
        "atlases": {
            "PC4": {
                "total": "T_PC4",
                "coord": "T_W",
                "charts": [
                    {"patch": list("abc"), "codomain": list("pqr"), "map": {"a": "p", "b": "q", "c": "r"}},
                    {"patch": list("abd"), "codomain": list("pqr"), "map": {"a": "p", "b": "q", "d": "r"}},
                ],
            }
        },
        "morphisms": {
            "id_PC4": {"source": "PC4", "target": "PC4",
                       "f0": {x: x for x in "abcd"}, "f1": {x: x for x in "pqr"}},
        },
        "checks": [
            {"name": "axioms", "target": "T_PC4"},
            {"name": "atlas_report", "target": "PC4",
             "expect": {"is_atlas": True, "is_full": True, "is_maximal": False}},
            {"name": "maximal_closure", "target": "PC4"},
            # the seed atlas lacks the {a,b} subcharts that witness the morphism clause
            {"name": "classify_morphism", "target": "id_PC4", "params": {"level": "near"},
             "expect": {"near": True, "morphism": False}},
            {"name": "category_laws", "target": ["PC4"]},
        ],
    }


def sierp_doc():
    return {
        "version": 1,
        "name": "sierp",
        "spaces": {"SIERP": SIERP},
        "model_spaces": {
            "T_SIERP": {"trivial": "SIERP"},
            "MIN": {"closure": True, "space": "SIERP", "objects": [["1"], ["0", "1"]], "arrows": []},
        },
        "checks": [{"name": "axioms", "target": "T_SIERP"}, {"name": "axioms", "target": "MIN"}],
    }


def w_doc():
    return {
        "version": 1,
        "name": "w",
        "spaces": {"W": W},
        "model_spaces": {"T_W": {"trivial": "W"}},
        "checks": [{"name": "axioms", "target": "T_W"}],
    }


def broken_doc():
    """The inclusion {p} -> {p,q,r} is left out, so item 5 fails."""
    idm = lambda s: {"dom": s, "cod": s, "map": {x: x for x in s}}  # noqa: E731
    return {
        "version": 1,
        "name": "broken_axiom",
        "spaces": {"W": W},
        "model_spaces": {
            "BROKEN": {"space": "W", "objects": [["p"], list("pqr")],
                       "arrows": [idm(["p"]), idm(list("pqr"))]},
        },
        "checks": [{"name": "axioms", "target": "BROKEN"}],
    }


def bundle_space(twisted):
    sub = []
    for i in "01":
        j = "1" if i == "0" else "0"
        sub += [[f"a{i}"], [f"b{i}"], [f"a{i}", f"b{i}", f"c{i}"], [f"a{i}", f"b{j}" if twisted else f"b{i}", f"d{i}"]]
    return {"points": [f"{x}{i}" for x in "abcd" for i in "01"], "subbasis": sub}


def bundle_entry(twisted):
    flip = {"0": "1", "1": "0"}
    c = {f"{x}{i}": f"({x},{i})" for x in "abc" for i in "01"}
    d = {f"{x}{i}": f"({x},{flip[i] if twisted and x == 'b' else i})" for x in "abd" for i in "01"}
    return {
        "total": "E_MOB" if twisted else "E_TRIV",
        "base": "PC4",
        "fiber": "DISC2",
        "group": "Z2",
        "action": "swap",
        "projection": {f"{x}{i}": x for x in "abcd" for i in "01"},
        "charts": [
            {"patch": sorted(c), "base_open": list("abc"), "map": c},
            {"patch": sorted(d), "base_open": list("abd"), "map": d},
        ],
    }


def bundle_doc(which):
    twisted = which == "MOBIUS"
    total = "E_MOB" if twisted else "E_TRIV"
    return {
        "version": 1,
        "name": which.lower(),
        "spaces": {"PC4": PC4, "DISC2": DISC2, total: bundle_space(twisted)},
        "groups": {"Z2": {"z2": True}},
        "bundles": {which: bundle_entry(twisted)},
        "checks": [
            {"name": "bundle_atlas_report", "target": which,
             "expect": {"is_atlas": True, "is_full": True, "cross_check_agrees": True}},
            {"name": "bundle_maximal_closure", "target": which},
            {"name": "components", "target": which, "expect": {"count": 1 if twisted else 2}},
        ],
    }


def distinguisher_doc():
    return {
        "version": 1,
        "name": "mobius_vs_triv",
        "spaces": {"PC4": PC4, "DISC2": DISC2, "E_TRIV": bundle_space(False), "E_MOB": bundle_space(True)},
        "groups": {"Z2": {"z2": True}},
        "bundles": {"TRIV": bundle_entry(False), "MOBIUS": bundle_entry(True)},
        "checks": [
            {"name": "components", "target": "TRIV", "expect": {"count": 2}},
            {"name": "components", "target": "MOBIUS", "expect": {"count": 1}},
            {"name": "bundle_morphism_search", "target": ["MOBIUS", "TRIV"],
             "params": {"bijective_E": True}, "expect": {"count": 0}},
        ],
    }


def circle2_doc():
    overlap = {"boxes": [[[-4, -0.25]], [[0.25, 4]]], "closed": True}
    chart = lambda cid: {"id": cid, "codomain": {"boxes": [[[-5, 5]]]}, "resolution": 21}  # noqa: E731
    return {
        "version": 1,
        "name": "circle2",
        "ck_data": {
            "CIRCLE2": {
                "coord_region": {"boxes": [[["-inf", "inf"]]]},
                "charts": [chart("N"), chart("S")],
                "transitions": [
                    {"from": "N", "to": "S", "overlap": overlap, "map": ["1/x1"], "k": "inf", "resolution": 16},
                    {"from": "S", "to": "N", "overlap": overlap, "map": ["1/x1"], "k": "inf", "resolution": 16},
                ],
            },
            "KINK": {
                "coord_region": {"boxes": [[[-1, 1]]]},
                "charts": [chart("A"), chart("B")],
                "transitions": [
                    {"from": "A", "to": "B", "overlap": {"boxes": [[[-1, 1]]]}, "map": ["x1 + x1*Abs(x1)"],
                     "mode": "black-box", "k": 2},
                    {"from": "B", "to": "A", "overlap": {"boxes": [[[-1, 1]]]},
                     "map": ["sign(x1)*(sqrt(1 + 4*Abs(x1)) - 1)/2"], "mode": "black-box", "k": 2},
                ],
            },
        },
        "checks": [
            {"name": "ck_atlas_report", "target": "CIRCLE2", "params": {"k": "inf"}},
            {"name": "manifold_check", "target": "CIRCLE2", "params": {"k": "inf"},
             "expect": {"is_manifold_data": True, "maximality": "assumed"}},
            {"name": "transition_check", "target": "CIRCLE2", "params": {"from": "N", "to": "S", "k": "inf"},
             "expect": {"passes": True, "min_abs_jacobian_det": 0.0625}},
            {"name": "manifold_check", "target": "KINK", "params": {"k": 2},
             "expect": {"is_manifold_data": False}},
        ],
    }


DOCS = {
    "pc4": pc4_doc, "sierp": sierp_doc, "w": w_doc, "broken_axiom": broken_doc,
    "triv": lambda: bundle_doc("TRIV"), "mobius": lambda: bundle_doc("MOBIUS"),
    "mobius_vs_triv": distinguisher_doc, "circle2": circle2_doc,
}


def main():
    DATA.mkdir(parents=True, exist_ok=True)
    for name, build in DOCS.items():
        (DATA / f"{name}.json").write_text(json.dumps(build(), indent=2) + "\n")
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
