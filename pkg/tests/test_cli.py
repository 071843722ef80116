import json
from pathlib import Path

import pytest

from atlasforge import fixtures
from atlasforge.cli import (
    RefError,
    dump_document,
    dumps,
    emit_report,
    main,
    parse_document,
    report_json,
    run_checks,
)
from atlasforge.errors import MalformedInput

DATA = Path(__file__).resolve().parents[1] / "src" / "atlasforge" / "data"
EXPECTED_EXIT = {
    "sierp": 0,
    "w": 0,
    "pc4": 0,
    "triv": 0,
    "mobius": 0,
    "circle2": 0,
    "mobius_vs_triv": 0,
    "broken_axiom": 1,
}


@pytest.mark.parametrize("name", sorted(EXPECTED_EXIT))
def test_shipped_fixture_exit_codes(name, capsys):
    assert main(["report", str(DATA / f"{name}.json")]) == EXPECTED_EXIT[name]
    out = capsys.readouterr().out
    assert out.rstrip().splitlines()[-1].startswith("overall: ")


def test_fixture_files_match_constructions():
    assert parse_document(DATA / "pc4.json").atlases["PC4"] == fixtures.pc4_atlas()
    doc = parse_document(DATA / "mobius_vs_triv.json")
    assert doc.bundles["TRIV"] == fixtures.triv_atlas()
    assert doc.bundles["MOBIUS"] == fixtures.mobius_atlas()
    loaded, built = parse_document(DATA / "circle2.json").ck_data["CIRCLE2"], fixtures.circle2()
    assert loaded.charts == built.charts and loaded.coord_region == built.coord_region
    for a, b in zip(loaded.transitions, built.transitions):
        assert (a.src, a.dst, a.overlap, a.resolution) == (b.src, b.dst, b.overlap, b.resolution)
        assert a.map.sym == b.map.sym


@pytest.mark.parametrize("name", sorted(EXPECTED_EXIT))
def test_round_trip(name):
    first = dump_document(parse_document(DATA / f"{name}.json"))
    again = dump_document(parse_document(dumps(first)))
    assert again == first


def test_structured_report_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        main(["report", str(DATA / "pc4.json"), "--format", "structured"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]
    body = json.loads(outs[0])
    assert body["schema"] == "atlasforge.report/1" and body["overall"] == "pass"


def test_broken_axiom_details():
    r = run_checks(parse_document(DATA / "broken_axiom.json"))
    (res,) = r.results
    assert res.status == "fail"
    assert res.details["failed_items"] == [4, 5]


def test_dangling_reference(tmp_path, capsys):
    doc = {"version": 1, "model_spaces": {"M": {"trivial": "Q"}}, "checks": []}
    with pytest.raises(RefError, match="model_spaces.M.*'Q'"):
        parse_document(doc)
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    assert main(["validate", str(p)]) == 2
    assert "Q" in capsys.readouterr().err


@pytest.mark.parametrize(
    "doc",
    [
        {"version": 2},
        {"version": 1, "extra": {}},
        {"version": 1, "checks": [{"name": "nope", "target": "X"}]},
        {"version": 1, "spaces": {"S": {"points": ["a"], "opens": [["b"]]}}},
    ],
)
def test_malformed_documents(doc):
    with pytest.raises(MalformedInput):
        parse_document(doc)


def test_empty_check_list(capsys):
    r = run_checks(parse_document({"version": 1, "checks": []}))
    assert r.overall == "pass" and emit_report(r) == 0
    assert report_json(r)["checks"] == []


def test_bad_arguments():
    assert main(["report"]) == 2
    assert main(["close", str(DATA / "pc4.json"), "--target", "nothing"]) == 2


def test_close_then_validate(tmp_path, capsys):
    assert main(["close", str(DATA / "pc4.json"), "--target", "atlas"]) == 0
    closed = capsys.readouterr().out
    doc = json.loads(closed)
    assert len(doc["atlases"]["PC4"]["charts"]) == 10
    p = tmp_path / "closed.json"
    p.write_text(closed)
    assert main(["validate", str(p)]) == 0
