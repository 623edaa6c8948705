import csv
import io
import json

import pytest

from conformal_mass import cli, pipeline
from conformal_mass.blowup import FIELD_NAMES
from conformal_mass.pipeline import ScenarioConfig, StageError


def run(capsys, *argv):
    rc = cli.main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_list_profiles(capsys):
    rc, out, _ = run(capsys, "list-profiles")
    assert rc == 0
    assert {"round-s4", "fs-cp2"} <= set(out.split())


def test_run_round_report(capsys):
    rc, out, _ = run(capsys, "run", "--profile", "round-s4", "--n", "1024", "--deterministic")
    assert rc == 0
    rep = json.loads(out)
    for k in ("mass_series", "mass_identity", "mass_fasymptote", "mass_flux"):
        assert abs(rep["mass"][k]) < 1e-6
    assert all(e["verdict"] in ("holds", "not-applicable") for e in rep["audits"].values())
    assert rep["solution"]["A"] == pytest.approx(1 / 12, abs=1e-9)
    assert "wall_clock_seconds" not in rep


def test_run_perturbed_falsification(capsys):
    rc, out, err = run(capsys, "run", "--profile", "perturbed-s4:eps=0.1", "--n", "1024", "--deterministic")
    assert rc == 0
    rep = json.loads(out)
    f = rep["falsification"]
    assert f["DG_residual"]["violated"] and f["F_nonpositive"]["violated"]
    assert "kappa_detected" in f
    assert rep["audits"]["mass_volume_gap"]["verdict"] == "not-applicable"


def test_deterministic_byte_identical(tmp_path, capsys):
    p = tmp_path / "report.json"
    blobs = []
    for _ in range(2):
        assert cli.main(["run", "--profile", "fs-cp2", "--n", "512", "--deterministic", "--out", str(p)]) == 0
        blobs.append(p.read_bytes())
    assert blobs[0] == blobs[1]


def test_toml_config_and_precedence(tmp_path, capsys):
    cfgfile = tmp_path / "c.toml"
    cfgfile.write_text('profile = "fs-cp2"\nn = 300\norder = 10\ndeterministic = true\n')
    rc, out, _ = run(capsys, "run", "--config", str(cfgfile), "--set", "n=400", "--n", "256")
    assert rc == 0
    rep = json.loads(out)
    assert rep["config"]["profile"] == "fs-cp2"
    assert rep["config"]["n"] == 256
    assert rep["config"]["order"] == 10


@pytest.mark.parametrize("argv", [
    ["run", "--set", "bogus=1"],
    ["run", "--set", "n"],
    ["run", "--profile", "no-such-profile"],
    ["run", "--profile", "perturbed-s4:eps=5"],
    ["run", "--set", "r0=5"],
    ["run", "--n", "-3"],
    ["convergence", "--levels", "1024"],
    ["run", "--config", "/nonexistent.toml"],
])
def test_config_errors(argv, capsys):
    rc, _, err = run(capsys, *argv)
    assert rc == 2
    assert err


def test_nested_toml_rejected(tmp_path, capsys):
    p = tmp_path / "nested.toml"
    p.write_text('[solver]\nn = 10\n')
    rc, _, err = run(capsys, "run", "--config", str(p))
    assert rc == 2 and "flat" in err


def _fake_stage(stage):
    def fake(cfg, profile=None):
        raise StageError(stage, "boom", {"config": cfg.to_dict()})
    return fake


@pytest.mark.parametrize("stage,code", [("solver", 3), ("quadrature", 4)])
def test_stage_exit_codes(monkeypatch, capsys, stage, code):
    monkeypatch.setattr(cli, "run_scenario", _fake_stage(stage))
    rc, out, _ = run(capsys, "run", "--deterministic")
    assert rc == code
    assert json.loads(out)["error"]["stage"] == stage


def test_strict_audit_failure(monkeypatch, capsys):
    def fake(cfg, profile=None):
        return {"audits": {"bishop": {"verdict": "fails"}}}
    monkeypatch.setattr(cli, "run_scenario", fake)
    assert run(capsys, "run")[0] == 0
    rc, _, err = run(capsys, "run", "--strict")
    assert rc == 5 and "bishop" in err


def test_dump_fields(capsys):
    rc, out, _ = run(capsys, "dump-fields", "--profile", "round-s4", "--n", "500")
    assert rc == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert tuple(rows[0]) == FIELD_NAMES
    assert len(rows) - 1 == 500
    i = FIELD_NAMES.index("F")
    assert max(abs(float(row[i])) for row in rows[1:]) < 1e-8


def test_convergence(capsys):
    rc, out, _ = run(capsys, "convergence", "--profile", "fs-cp2", "--levels", "256,512,1024")
    assert rc == 0
    tab = json.loads(out)
    assert [row["n"] for row in tab["levels"]] == [256, 512, 1024]
    for row in tab["levels"]:
        assert row["mass_series"] == pytest.approx(1.0, abs=1e-8)


def test_config_defaults_and_unknown_keys():
    cfg = ScenarioConfig()
    cfg.validate()
    with pytest.raises(KeyError):
        ScenarioConfig.from_mapping({"nope": 1})
    assert pipeline.to_jsonable({"x": float("nan")}) == {"x": None}
