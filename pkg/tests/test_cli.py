import json

import pytest

from glvortex.cli import canonical_json, parse_config_file, run


@pytest.fixture(scope="module")
def analyzed(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    fld = d / "line.glf3"
    assert run(["synth", "--kind", "straight_line", "--dims", "48", "--eps", "0.03", "--out", str(fld)]) == 0
    rep = d / "line.json"
    assert run(["analyze", str(fld), "--eps", "0.03", "--seed", "1", "--out", str(rep)]) == 0
    return d, fld, rep


def test_synth_writes_truth(analyzed):
    d, fld, _ = analyzed
    truth = json.loads((d / "line.truth.json").read_text())
    assert len(truth["filaments"]) == 1


def test_analyze_report_and_timings_sidecar(analyzed):
    d, _, rep = analyzed
    report = json.loads(rep.read_text())
    assert report["version"] == "v0.1.0"
    assert report["formats"] == {"glf3": 1, "report": 1}
    assert "timings" not in report
    assert (d / "line.timings.json").exists()


def test_analyze_is_byte_deterministic(analyzed, tmp_path):
    _, fld, rep = analyzed
    again = tmp_path / "again.json"
    assert run(["analyze", str(fld), "--eps", "0.03", "--seed", "1", "--threads", "3", "--out", str(again)]) == 0
    assert again.read_bytes() == rep.read_bytes()


def test_verify_accepts_and_detects_tampering(analyzed, tmp_path):
    _, fld, rep = analyzed
    assert run(["verify", str(rep), str(fld)]) == 0
    report = json.loads(rep.read_text())
    report["current"]["segments"][0][6] = 2
    bad = tmp_path / "bad.json"
    bad.write_text(canonical_json(report))
    assert run(["verify", str(bad), str(fld)]) == 3


def test_config_errors_exit_2(tmp_path):
    assert run(["synth", "--kind", "straight_line", "--eps", "-1", "--out", str(tmp_path / "x.glf3")]) == 2
    assert run(["analyze"]) == 2
    assert run(["nonsense"]) == 2


def test_config_file_is_overridden_by_flags(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\neps = 0.05\nkind = ring\n")
    # values stay strings until merged with the typed flags
    assert parse_config_file(cfg) == {"eps": "0.05", "kind": "ring"}
    out = tmp_path / "u.glf3"
    assert run(["synth", "--config", str(cfg), "--kind", "uniform", "--dims", "8", "--out", str(out)]) == 0
    assert json.loads(out.with_suffix(".truth.json").read_text()) == {"filaments": []}


def test_canonical_json_handles_non_finite():
    s = canonical_json({"b": float("inf"), "a": 0.1})
    assert s.index('"a"') < s.index('"b"')
    assert '"inf"' in s and "0.10000000000000001" in s


def test_dynamics_subcommand(tmp_path):
    f = tmp_path / "tv.glf3"
    assert run(["synth", "--kind", "translating_vortex", "--dims", "33", "--eps", "0.05", "--out", str(f)]) == 0
    out = tmp_path / "dyn.json"
    assert run(["dynamics", str(f), "--eps", "0.05", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert "product_estimate" in rep and "continuity" in rep
