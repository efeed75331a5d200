import json
import subprocess
import sys

import numpy as np
import pytest

from contactkit import io
from contactkit.cli import main
from contactkit.config import PipelineConfig, load_config
from contactkit.metrics import evaluate
from contactkit.reward import write_log
from contactkit.sgcr import ContactMap

from scenes import handcrafted_logs


@pytest.fixture(scope="module")
def sphere_bundle(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli") / "sphere"
    assert main(["synth", "--shape", "sphere", "--out", str(root), "--resolution", "32", "--intents", "2"]) == 0
    return root


def read(path):
    return json.loads(path.read_text())


def test_validate_ok_and_broken(sphere_bundle, tmp_path, capsys):
    assert main(["validate", "--bundle", str(sphere_bundle)]) == 0
    import shutil
    broken = tmp_path / "broken"
    shutil.copytree(sphere_bundle, broken)
    (broken / "masks" / "mask_1_0.pgm").unlink()
    capsys.readouterr()
    assert main(["validate", "--bundle", str(broken)]) == 2
    assert "mask_1_0" in capsys.readouterr().out
    assert main(["run", "--bundle", str(broken), "--out", str(tmp_path / "o")]) == 2
    assert not (tmp_path / "o").exists()


def test_run_writes_all_outputs(sphere_bundle, tmp_path):
    out = tmp_path / "out"
    assert main(["run", "--bundle", str(sphere_bundle), "--out", str(out), "--threads", "2"]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == sorted(f"{kind}_{k}.{ext}" for k in (0, 1) for kind, ext in
                           [("contact_map", "json"), ("contact_map", "ply"), ("pseudo_pose", "json"),
                            ("diagnostics", "json")])
    cm = ContactMap.from_dict(read(out / "contact_map_0.json"))
    diag = read(out / "diagnostics_0.json")
    assert len(cm) == diag["final_points"] == diag["cloud_points"]
    pose = read(out / "pseudo_pose_1.json")
    assert pose["intent_id"] == 1 and len(pose["theta"]) == 20 and len(pose["objective_trace"]) == 13
    assert (out / "contact_map_0.ply").read_text().startswith("ply")


def test_run_single_intent_and_threads_agree(sphere_bundle, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--bundle", str(sphere_bundle), "--out", str(a), "--intent", "1"]) == 0
    assert main(["run", "--bundle", str(sphere_bundle), "--out", str(b), "--threads", "3"]) == 0
    assert sorted(p.name for p in a.iterdir()) == ["contact_map_1.json", "contact_map_1.ply",
                                                   "diagnostics_1.json", "pseudo_pose_1.json"]
    for name in ("contact_map_1.json", "pseudo_pose_1.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert main(["run", "--bundle", str(sphere_bundle), "--out", str(tmp_path / "c"), "--intent", "7"]) == 3


def test_run_config_from_env_var(sphere_bundle, tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"hand": "allegro_like", "ik": {"iters": 3}}))
    monkeypatch.setenv("CONTACTKIT_CONFIG", str(cfg))
    assert load_config().ik.iters == 3
    out = tmp_path / "out"
    assert main(["run", "--bundle", str(sphere_bundle), "--out", str(out), "--intent", "0"]) == 0
    pose = read(out / "pseudo_pose_0.json")
    assert len(pose["theta"]) == 16 and len(pose["objective_trace"]) == 4
    cfg.write_text(json.dumps({"ik": {"iters": 3}, "colour": "red"}))
    assert main(["run", "--bundle", str(sphere_bundle), "--out", str(tmp_path / "x")]) == 3


def test_pipeline_failure_leaves_no_partial_output(sphere_bundle, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"hand": str(tmp_path / "missing_hand.json")}))
    out = tmp_path / "out"
    assert main(["run", "--bundle", str(sphere_bundle), "--out", str(out), "--config", str(cfg)]) == 3
    assert not out.exists() or not any(out.iterdir())


def eval_inputs(tmp_path):
    logs = tmp_path / "logs"
    logs.mkdir()
    for log in handcrafted_logs():
        write_log(logs / f"{log.name}.jsonl", log.snapshots)
    maps = tmp_path / "maps"
    maps.mkdir()
    cm = ContactMap(0, np.zeros((1, 3)), np.ones(1), np.zeros(1, int))
    io.dump_json(maps / "contact_map_0.json", cm.to_dict())
    return logs, maps


def test_eval_report(tmp_path, capsys):
    logs, maps = eval_inputs(tmp_path)
    assert main(["eval", "--logs", str(logs), "--maps", str(maps), "--out", str(tmp_path / "r.json")]) == 0
    rep = read(tmp_path / "r.json")
    assert rep["gsr"] == 0.7 and rep["isr"] == 0.5 and rep["sd"] == 30 / 21
    expect = evaluate(handcrafted_logs(), {0: np.zeros((1, 3))})
    assert rep["msad"] == expect["msad"]
    capsys.readouterr()
    assert main(["eval", "--logs", str(logs), "--maps", str(maps)]) == 0
    assert json.loads(capsys.readouterr().out)["successes"] == 7


def test_eval_errors(tmp_path):
    logs, maps = eval_inputs(tmp_path)
    empty = tmp_path / "empty"
    empty.mkdir()
    assert main(["eval", "--logs", str(empty), "--maps", str(maps)]) == 4
    assert main(["eval", "--logs", str(logs), "--maps", str(empty)]) == 4
    other = tmp_path / "other"
    other.mkdir()
    io.dump_json(other / "contact_map_5.json", ContactMap(5, np.zeros((1, 3)), np.ones(1), np.zeros(1, int)).to_dict())
    io.dump_json(other / "contact_map_6.json", ContactMap(6, np.zeros((1, 3)), np.ones(1), np.zeros(1, int)).to_dict())
    assert main(["eval", "--logs", str(logs), "--maps", str(other)]) == 4


def test_synth_deterministic_and_bad_shape(tmp_path):
    for k in (0, 1):
        assert main(["synth", "--shape", "cube", "--out", str(tmp_path / f"b{k}"), "--resolution", "24",
                     "--seed", "3"]) == 0
    files = sorted(p.relative_to(tmp_path / "b0") for p in (tmp_path / "b0").rglob("*") if p.is_file())
    assert files
    for f in files:
        assert (tmp_path / "b0" / f).read_bytes() == (tmp_path / "b1" / f).read_bytes()
    with pytest.raises(SystemExit):
        main(["synth", "--shape", "teapot", "--out", str(tmp_path / "t")])


def test_config_init_round_trip(tmp_path):
    path = tmp_path / "c.json"
    assert main(["config", "init", "--out", str(path)]) == 0
    d = read(path)
    assert d["ik"]["lambda_dls"] == 0.05 and d["ik"]["iters"] == 12
    assert d["reward"]["beta"] == 0.55 and d["metrics"]["hold_steps"] == 20
    assert load_config(path) == PipelineConfig()


def test_module_entry_point(sphere_bundle):
    r = subprocess.run([sys.executable, "-m", "contactkit", "validate", "--bundle", str(sphere_bundle)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    r = subprocess.run([sys.executable, "-m", "contactkit", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "synth" in r.stdout
