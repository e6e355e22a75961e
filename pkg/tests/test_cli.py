import json
import os

import pytest

from podlim.cli import main
from podlim.scenarios import CONFIG_SCHEMA, ConfigError, run_config


def tm_config(tmp_path, **extra):
    cfg = {
        "kind": "two_machine_analysis",
        "outputs": str(tmp_path / "out"),
        "parameters": {"two_machine": {"M1": 2.0, "M2": 2.0, "D1": 0.0,
                                       "D2": 0.0, "X1": 0.1, "X2": 0.9}},
        "grid": {"min": 0.01, "max": 100.0, "points": 50},
    }
    cfg.update(extra)
    return cfg


def test_run_two_machine_analysis(tmp_path):
    cfg = tm_config(tmp_path)
    manifest_path = run_config(cfg)
    manifest = json.load(open(manifest_path))
    assert manifest["figure"] == "two_machine_analysis"
    names = {f["name"] for f in manifest["files"]}
    assert "channel_Gzu.csv" in names
    for f in manifest["files"]:
        assert len(f["sha256"]) == 64
        assert os.path.exists(tmp_path / "out" / f["name"])
    assert manifest["summary"]["q1"] == pytest.approx(0.745356, abs=1e-6)


def test_schema_rejects_bad_configs(tmp_path):
    bad = tm_config(tmp_path)
    del bad["parameters"]
    with pytest.raises(ConfigError):
        run_config(bad)
    bad2 = tm_config(tmp_path)
    bad2["kind"] = "unknown"
    with pytest.raises(ConfigError):
        run_config(bad2)
    bad3 = tm_config(tmp_path)
    bad3["parameters"] = {"two_machine": {"M1": 2.0}}
    with pytest.raises(ConfigError):
        run_config(bad3)


def test_cli_exit_codes(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(tm_config(tmp_path)))
    assert main(["run", str(cfg_path)]) == 0

    cfg_path.write_text("{not json")
    assert main(["run", str(cfg_path)]) == 2

    bad = tm_config(tmp_path)
    bad["kind"] = "nope"
    cfg_path.write_text(json.dumps(bad))
    assert main(["run", str(cfg_path)]) == 2

    assert main(["repro", "fig99", "--out", str(tmp_path / "x")]) == 2


def test_cli_schema_prints(capsys):
    assert main(["schema"]) == 0
    out = capsys.readouterr().out
    schema = json.loads(out)
    assert schema["title"] == CONFIG_SCHEMA["title"]


def test_repro_fig4_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main(["repro", "fig4", "--out", str(a)]) == 0
    assert main(["repro", "fig4", "--out", str(b)]) == 0
    for name in sorted(os.listdir(a)):
        with open(a / name, "rb") as fa, open(b / name, "rb") as fb:
            assert fa.read() == fb.read(), name
    manifest = json.load(open(a / "manifest.json"))
    assert manifest["annotations"]["band"][0] == pytest.approx(0.745356, abs=1e-6)
    assert manifest["annotations"]["band"][1] == pytest.approx(2.236068, abs=1e-6)
    assert manifest["note"] == "analog, not bit-reproduction"


def test_repro_fig7_sign_summary(tmp_path):
    out = tmp_path / "f7"
    assert main(["repro", "fig7", "--out", str(out)]) == 0
    manifest = json.load(open(out / "manifest.json"))
    s = manifest["summary"]
    assert s["favored_only_one"] is True


def test_manifest_schema_keys(tmp_path):
    out = tmp_path / "f4"
    assert main(["repro", "fig4", "--out", str(out)]) == 0
    manifest = json.load(open(out / "manifest.json"))
    assert set(manifest) == {"figure", "note", "files", "summary",
                             "annotations", "parameters"}
    for f in manifest["files"]:
        assert set(f) == {"name", "sha256", "plot"}


def test_run_filter_and_feedback_kinds(tmp_path):
    base = {"two_machine": {"M1": 2.0, "M2": 2.0, "D1": 0.05, "D2": 0.05,
                            "X1": 0.1, "X2": 0.9}}
    m1 = run_config({"kind": "filter_design", "outputs": str(tmp_path / "fd"),
                     "parameters": dict(base),
                     "grid": {"min": 0.01, "max": 100.0, "points": 80}})
    man = json.load(open(m1))
    assert man["summary"]["strictly_proper"] is True

    m2 = run_config({"kind": "feedback_analysis", "outputs": str(tmp_path / "fb"),
                     "parameters": dict(base, Kz=0.5),
                     "grid": {"min": 0.01, "max": 100.0, "points": 200}})
    man2 = json.load(open(m2))
    band = man2["summary"]["attenuation_band_R"]
    assert band is not None and band[0] > man2["summary"]["q1"]


def test_run_modal_linearize_synthesize_simulate(tmp_path):
    m = run_config({"kind": "modal", "outputs": str(tmp_path / "mo"),
                    "parameters": {"preset": "kundur_two_area"}})
    man = json.load(open(m))
    assert 0.4 <= man["summary"]["f1_hz"] <= 0.8

    m = run_config({"kind": "linearize", "outputs": str(tmp_path / "li"),
                    "parameters": {"preset": "kundur_two_area"}})
    man = json.load(open(m))
    assert man["summary"]["n_states"] > 5

    m = run_config({"kind": "synthesize", "outputs": str(tmp_path / "sy"),
                    "parameters": {"preset": "kundur_two_area",
                                   "design": "theta9"}})
    man = json.load(open(m))
    assert man["summary"]["achieved_zeta"] == pytest.approx(0.10, abs=1e-3)

    m = run_config({"kind": "simulate", "outputs": str(tmp_path / "si"),
                    "parameters": {"preset": "kundur_two_area",
                                   "disturbances": [{"bus": 11, "delta_P": 50.0,
                                                     "t_start": 0.5,
                                                     "duration": 1.0}],
                                   "t_end": 4.0}})
    man = json.load(open(m))
    assert man["summary"]["separated"] is False
    traj = (tmp_path / "si" / "trajectory.csv").read_text().splitlines()
    assert traj[0].startswith("t,")
    meta = json.loads((tmp_path / "si" / "trajectory_meta.json").read_text())
    assert meta["solver"] == "rk4" and "model_hash" in meta
