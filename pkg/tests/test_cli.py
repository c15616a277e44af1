import json

import pytest

from ssgraph.action import ActionSystem, GeneratorTable
from ssgraph.cli import EXIT_CAPPED, EXIT_INVALID, EXIT_OK, MODEL_SCHEMA, \
    REPORT_SCHEMA, canonical_bytes, emit_model, main, parse_model, \
    run_analysis
from ssgraph.errors import ParseError, ValidationError

from tests.conftest import make_loops_graph


def gen_file(tmp_path, name, *argv):
    path = tmp_path / name
    assert main(list(argv) + ["--json", str(path)]) == EXIT_OK
    return path


def load(path):
    return json.loads(path.read_bytes())


def doubling_model_path(tmp_path):
    # restriction words double in length forever, so default caps trip
    doubling = GeneratorTable("d", (0,), {(0, 0): 0, (0, 1): 1},
                              {(0, 0): (1, 1), (0, 1): ()})
    system = ActionSystem(make_loops_graph(2), (doubling,))
    path = tmp_path / "doubling.json"
    path.write_bytes(canonical_bytes(emit_model(system.graph, system)))
    return path


# -- gen and the document format -----------------------------------------

def test_gen_odometer_document(tmp_path):
    path = gen_file(tmp_path, "odo23.json", "gen", "odometer", "--n", "2,3")
    doc = load(path)
    assert doc["schema"] == MODEL_SCHEMA
    assert doc["k"] == 2
    assert doc["vertices"] == ["v0"]
    assert len(doc["edges"]) == 5
    assert len(doc["squares"]) == 6
    assert doc["metadata"] == {"model": "odometer", "n": [2, 3]}
    colors = sorted(set(e["color"] for e in doc["edges"]))
    assert colors == [1, 2]


def test_gen_emit_parse_emit_is_byte_stable(tmp_path):
    path = gen_file(tmp_path, "odo22.json", "gen", "odometer", "--n", "2,2")
    raw = path.read_bytes()
    doc = load(path)
    graph, system = parse_model(raw)
    again = canonical_bytes(emit_model(graph, system, doc["metadata"]))
    assert again == raw
    graph2, system2 = parse_model(again)
    assert canonical_bytes(emit_model(graph2, system2, doc["metadata"])) \
        == again


def test_gen_katsura_matrix_parsing(tmp_path):
    path = gen_file(tmp_path, "kat.json", "gen", "katsura",
                    "--t", "2,1;1,2", "--b", "1,1;1,1")
    doc = load(path)
    assert doc["metadata"]["t"] == [[2, 1], [1, 2]]
    assert doc["metadata"]["b"] == [[1, 1], [1, 1]]
    graph, system = parse_model(path.read_bytes())
    assert graph.k == 1
    assert graph.num_vertices == 2
    assert len(system.generators) == 1


def test_gen_writes_stdout_without_json_flag(capsys):
    assert main(["gen", "odometer", "--n", "2,2"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == MODEL_SCHEMA


# -- parse errors --------------------------------------------------------

def base_doc(tmp_path):
    return load(gen_file(tmp_path, "base.json", "gen", "odometer",
                         "--n", "2,2"))


def test_parse_rejects_structural_problems(tmp_path):
    doc = base_doc(tmp_path)

    bad = dict(doc, schema="ssgraph/0")
    with pytest.raises(ParseError, match="schema"):
        parse_model(bad)

    bad = dict(doc, k=0)
    with pytest.raises(ParseError, match="k must be"):
        parse_model(bad)

    bad = dict(doc, vertices=[])
    with pytest.raises(ParseError, match="vertices"):
        parse_model(bad)

    bad = dict(doc, k=True)
    with pytest.raises(ParseError, match="must be int"):
        parse_model(bad)

    with pytest.raises(ParseError, match="not valid JSON"):
        parse_model(b"{nope")


def test_parse_rejects_duplicate_edge_id(tmp_path):
    doc = base_doc(tmp_path)
    doc["edges"].append(dict(doc["edges"][0]))
    with pytest.raises(ParseError, match="duplicate edge id 0 in color 1"):
        parse_model(doc)


def test_parse_rejects_gapped_edge_ids(tmp_path):
    doc = base_doc(tmp_path)
    for entry in doc["edges"]:
        if entry["color"] == 1 and entry["id"] == 1:
            entry["id"] = 5
    with pytest.raises(ParseError, match="ids must be 0..1"):
        parse_model(doc)


def test_parse_rejects_bad_generator_rows(tmp_path):
    doc = base_doc(tmp_path)

    bad = json.loads(json.dumps(doc))
    bad["generators"][0]["edgeAction"][0]["edge"] = 9
    with pytest.raises(ParseError, match="unknown edge"):
        parse_model(bad)

    bad = json.loads(json.dumps(doc))
    rows = bad["generators"][0]["edgeAction"]
    rows.append(dict(rows[0]))
    with pytest.raises(ParseError, match="acted on twice"):
        parse_model(bad)

    bad = json.loads(json.dumps(doc))
    bad["generators"][0]["edgeAction"][0]["restrictionWord"] = [0]
    with pytest.raises(ParseError, match="nonzero signed"):
        parse_model(bad)

    bad = json.loads(json.dumps(doc))
    bad["generators"].append(bad["generators"][0])
    with pytest.raises(ParseError, match="repeated"):
        parse_model(bad)


def test_parse_rejects_cross_color_image(tmp_path):
    doc = base_doc(tmp_path)
    doc["generators"][0]["edgeAction"][0]["image"] = [2, 0]
    with pytest.raises(ValidationError, match="color preservation"):
        parse_model(doc)


def test_parse_flags_semantic_problems_only_when_asked(tmp_path):
    doc = base_doc(tmp_path)
    doc["squares"] = []
    parse_model(doc, validate=False)
    with pytest.raises(ValidationError, match="factorization"):
        parse_model(doc)


# -- validate ------------------------------------------------------------

def test_validate_accepts_generated_models(tmp_path, capsys):
    for argv in (("gen", "odometer", "--n", "2,3"),
                 ("gen", "odometer", "--n", "6,2,3"),
                 ("gen", "katsura", "--t", "3", "--b", "2")):
        path = gen_file(tmp_path, "m.json", *argv)
        assert main(["validate", str(path)]) == EXIT_OK
        doc = json.loads(capsys.readouterr().out)
        assert doc == {"valid": True, "problems": []}


def test_validate_reports_missing_square(tmp_path, capsys):
    doc = base_doc(tmp_path)
    doc["squares"] = doc["squares"][:-1]
    path = tmp_path / "nosq.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", str(path)]) == EXIT_INVALID
    out = json.loads(capsys.readouterr().out)
    assert not out["valid"]
    assert any("bijection" in p for p in out["problems"])


def test_validate_parse_error_exit(tmp_path, capsys):
    doc = base_doc(tmp_path)
    doc["edges"].append(dict(doc["edges"][0]))
    path = tmp_path / "dup.json"
    path.write_text(json.dumps(doc))
    assert main(["validate", str(path)]) == EXIT_INVALID
    err = capsys.readouterr().err
    assert "duplicate edge id 0 in color 1" in err


def test_validate_caps_exit(tmp_path, capsys):
    path = doubling_model_path(tmp_path)
    assert main(["validate", str(path)]) == EXIT_CAPPED
    assert "cap" in capsys.readouterr().err


# -- analyze -------------------------------------------------------------

def test_analyze_odometer_23(tmp_path):
    model = gen_file(tmp_path, "odo23.json", "gen", "odometer", "--n", "2,3")
    out = tmp_path / "report.json"
    assert main(["analyze", str(model), "--json", str(out)]) == EXIT_OK
    report = load(out)
    assert report["schema"] == REPORT_SCHEMA
    assert report["validation"]["valid"]
    assert report["stronglyConnected"]
    hyp = report["hypotheses"]
    assert hyp["finiteState"] and hyp["pseudoFree"] and hyp["locallyFaithful"]
    assert hyp["closureSize"] == 2
    assert hyp["degenerate"]
    assert report["perron"]["rhoInt"] == [2, 3]
    assert report["perron"]["x"] == [1.0]
    assert report["periodicity"]["rank"] == 0
    assert report["periodicity"]["basis"] == []
    assert report["kms"]["verdict"] == "unique KMS state"
    assert not report["capped"]


def test_analyze_balanced_machine_has_torus_verdict(tmp_path):
    model = gen_file(tmp_path, "odo22.json", "gen", "odometer", "--n", "2,2")
    out = tmp_path / "report.json"
    assert main(["analyze", str(model), "--json", str(out)]) == EXIT_OK
    report = load(out)
    assert report["periodicity"]["rank"] == 1
    assert report["periodicity"]["basis"] == [[1, -1]]
    assert report["kms"]["rank"] == 1
    assert "1-torus" in report["kms"]["verdict"]


def test_analyze_katsura_is_unique(tmp_path):
    model = gen_file(tmp_path, "kat.json", "gen", "katsura",
                     "--t", "2", "--b", "1")
    out = tmp_path / "report.json"
    assert main(["analyze", str(model), "--json", str(out)]) == EXIT_OK
    report = load(out)
    assert report["periodicity"]["rank"] == 0
    assert report["kms"]["verdict"] == "unique KMS state"


def test_analyze_invalid_model_stops_after_validation(tmp_path):
    doc = base_doc(tmp_path)
    doc["squares"] = doc["squares"][:-1]
    path = tmp_path / "nosq.json"
    path.write_text(json.dumps(doc))
    out = tmp_path / "report.json"
    assert main(["analyze", str(path), "--json", str(out)]) == EXIT_INVALID
    report = load(out)
    assert not report["validation"]["valid"]
    assert any("bijection" in p for p in report["validation"]["graph"])
    assert "perron" not in report
    assert "hypotheses" not in report


def test_analyze_caps_exit_and_report(tmp_path):
    model = doubling_model_path(tmp_path)
    out = tmp_path / "report.json"
    assert main(["analyze", str(model), "--json", str(out)]) == EXIT_CAPPED
    report = load(out)
    assert report["capped"]
    assert "cap" in report["validation"]["error"]
    assert not report["validation"]["valid"]


def test_analyze_report_bytes_are_stable(tmp_path):
    model = gen_file(tmp_path, "odo22.json", "gen", "odometer", "--n", "2,2")
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    assert main(["analyze", str(model), "--json", str(first)]) == EXIT_OK
    assert main(["analyze", str(model), "--json", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_run_analysis_accepts_in_memory_systems(odo23):
    report = run_analysis(odo23.graph, odo23)
    assert report["validation"]["valid"]
    assert report["periodicity"]["rank"] == 0


# -- per and kms-eval ----------------------------------------------------

def test_per_reports_lattice(tmp_path, capsys):
    model = gen_file(tmp_path, "odo22.json", "gen", "odometer", "--n", "2,2")
    assert main(["per", str(model)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["rank"] == 1
    assert doc["basis"] == [[1, -1]]

    model = gen_file(tmp_path, "odo23.json", "gen", "odometer", "--n", "2,3")
    assert main(["per", str(model)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc == {"rank": 0, "basis": [], "boxRadius": 4, "ballRadius": 3}


def test_kms_eval_character_trace(tmp_path):
    model = gen_file(tmp_path, "odo22.json", "gen", "odometer", "--n", "2,2")
    element = tmp_path / "element.json"
    element.write_text(json.dumps([{
        "mu": {"range": 0, "edges": []},
        "g": [],
        "nu": {"range": 0, "edges": []},
        "re": 1.0, "im": 0.0,
    }]))
    out = tmp_path / "kms.json"
    assert main(["kms-eval", str(model), "--trace", "character:0.3",
                 "--samples", "5", "--element", str(element),
                 "--json", str(out)]) == EXIT_OK
    doc = load(out)
    assert doc["exists"]
    assert doc["rank"] == 1
    assert doc["basis"] == [[1, -1]]
    assert doc["verify"]["ok"]
    assert doc["verify"]["maxDeviation"] < 1e-9
    assert doc["value"]["re"] == pytest.approx(1.0)
    assert doc["value"]["im"] == pytest.approx(0.0)


def test_kms_eval_bad_trace_exit(tmp_path, capsys):
    model = gen_file(tmp_path, "odo22.json", "gen", "odometer", "--n", "2,2")
    assert main(["kms-eval", str(model),
                 "--trace", "mixture:0.5@0.1"]) == EXIT_INVALID
    assert "convex" in capsys.readouterr().err
    assert main(["kms-eval", str(model),
                 "--trace", "banana"]) == EXIT_INVALID
    assert "unknown trace" in capsys.readouterr().err


def test_kms_eval_invalid_model_exit(tmp_path, capsys):
    doc = base_doc(tmp_path)
    doc["squares"] = []
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["kms-eval", str(path)]) == EXIT_INVALID
    assert "factorization" in capsys.readouterr().err
