import json
import subprocess
import sys

import pytest

from spinverify import satake
from spinverify.checks import REGISTRY, SCHEMA, check_ids, run_check
from spinverify.cli import main, run_suite
from spinverify.exact_algebra import ONE, W, series_from_poly
from spinverify.report import FIELD_ORDER

FAST = {"check_id": "factorization", "params": {"p": 3, "bound": 6}}


def cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "spinverify.cli", *args], capture_output=True, text=True, env=env)


def write_config(tmp_path, obj, name="suite.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_empty_config(tmp_path, capsys):
    assert main(["run", write_config(tmp_path, [])]) == 0
    assert json.loads(capsys.readouterr().out) == []


def test_single_check_passes(tmp_path, capsys):
    assert main(["run", write_config(tmp_path, [FAST])]) == 0
    (rep,) = json.loads(capsys.readouterr().out)
    assert rep["status"] == "pass"
    assert rep["schema"] == SCHEMA
    assert list(rep) == list(FIELD_ORDER)
    assert rep["runtime_ms"] is None


def test_report_fields():
    rep = run_check("factorization", {"p": 3, "bound": 4})
    assert set(rep) == {"schema", "check_id", "status", "params", "seed", "lhs", "rhs",
                        "max_discrepancy", "witness", "details", "runtime_ms"}
    assert rep["params"] == {"p": 3, "bound": 4}


@pytest.mark.parametrize("desc", [
    {"check_id": "nope"},
    {"check_id": "factorization", "params": {"bogus": 1}},
    {"check_id": "factorization", "params": {"p": 4}},
    {"check_id": "factorization", "extra": 1},
    {"check_id": "factorization", "seed": "x"},
    [1, 2],
])
def test_malformed_descriptor_gives_error_report(tmp_path, capsys, desc):
    assert main(["run", write_config(tmp_path, [desc, FAST])]) != 0
    bad, good = json.loads(capsys.readouterr().out)
    assert bad["status"] == "error" and "error" in bad["details"]
    assert good["status"] == "pass"


def test_unreadable_config(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert main(["run", str(path)]) == 2


def test_unknown_check_id_exit_code(capsys):
    assert main(["check", "nope"]) == 2


def test_json_output_is_byte_identical_across_runs(tmp_path):
    cfg = write_config(tmp_path, [FAST, {"check_id": "w-identity", "params": {"samples": 50, "k_samples": 5}, "seed": 4}])
    a, b = cli("run", cfg), cli("run", cfg)
    assert a.returncode == 0
    assert a.stdout == b.stdout
    assert '"status": "pass"' in a.stdout


def test_timing_records_runtime(tmp_path, capsys):
    main(["run", write_config(tmp_path, [FAST]), "--timing"])
    (rep,) = json.loads(capsys.readouterr().out)
    assert isinstance(rep["runtime_ms"], float)


def test_text_format(tmp_path, capsys):
    bad = {"check_id": "factorization", "params": {"p": 4}}
    main(["run", write_config(tmp_path, [FAST, bad]), "--format", "text"])
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("✓ factorization")
    assert lines[1].startswith("✗ factorization") and "[error]" in lines[1]


def test_series_mismatch_witness(monkeypatch):
    def wrong_central(assign, ctx, K):
        return assign.apply(series_from_poly({0: ONE, 2: W * 2}, K))

    monkeypatch.setattr(satake, "central_factor", wrong_central)
    rep = run_check("macdonald", {"p": [3], "K": 3})
    assert rep["status"] == "fail"
    w = rep["witness"]
    assert w["side"] == "weighted" and w["degree"] == 2 and "W" in w["difference"]


def test_flag_overrides_only_apply_where_accepted(capsys):
    assert main(["check", "factorization", "--p", "5", "--order", "3"]) != 0
    (rep,) = json.loads(capsys.readouterr().out)
    assert rep["status"] == "error"
    assert main(["check", "macdonald", "--p", "[3]", "--order", "2"]) == 0
    (rep,) = json.loads(capsys.readouterr().out)
    assert rep["params"]["p"] == [3] and rep["params"]["K"] == 2


def test_seed_flag(capsys):
    main(["check", "w-identity", "--seed", "9"])
    (rep,) = json.loads(capsys.readouterr().out)
    assert rep["seed"] == 9


def test_list_names_every_check(capsys):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    for cid in check_ids():
        assert cid in out
    assert set(check_ids()) == set(REGISTRY)


def test_parallel_run_keeps_config_order():
    cfg = [FAST, {"check_id": "orbits", "params": {"p": [3]}}, {"check_id": "factorization", "params": {"p": 4}},
           {"check_id": "w-identity", "params": {"samples": 20, "k_samples": 2}}]
    serial, c1 = run_suite(cfg, jobs=1)
    parallel, c2 = run_suite(cfg, jobs=3)
    assert [r["check_id"] for r in parallel] == ["factorization", "orbits", "factorization", "w-identity"]
    assert serial == parallel and c1 == c2 == 1


def test_jobs_from_environment(tmp_path):
    import os

    env = dict(os.environ, SPINVERIFY_JOBS="2")
    out = cli("run", write_config(tmp_path, [FAST, FAST]), env=env)
    assert out.returncode == 0
    assert len(json.loads(out.stdout)) == 2
