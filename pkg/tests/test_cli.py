"""Command-line entry points: configs, artifacts, exit codes, determinism."""

import hashlib
import json

import numpy as np
import pytest

from conehj import GridFunction, Partition
from conehj.cli import main

SOLVE_CONFIG = {
    "psi": {"kind": "quadratic-monotone", "slope": 0.5, "curvature": 0.5,
            "cap": 10.0},
    "xi": {"poly": {"2": 1.0}},
    "partition": {"uniform": 2},
    "times": [0.0, 0.5],
    "samples": [[0.1, 0.4], [0.0, 0.0]],
    "method": "hopf_lax_separable",
}


def _write(tmp_path, config, name="config.json"):
    p = tmp_path / name
    p.write_text(json.dumps(config))
    return str(p)


def _run(tmp_path, command, config, *extra):
    return main([command, "--config", _write(tmp_path, config),
                 "--out", str(tmp_path), *extra])


def test_solve_writes_csv_and_sidecar(tmp_path, capsys):
    assert _run(tmp_path, "solve", SOLVE_CONFIG) == 0
    raw = (tmp_path / "solve.csv").read_bytes()
    assert b"\r\n" in raw  # RFC-4180 line endings
    lines = raw.decode().strip().splitlines()
    assert lines[0] == "t,sample_id,value,method"
    # the t = 0 rows reproduce the initial condition exactly
    rows = [ln.split(",") for ln in lines[1:]]
    t0 = {int(r[1]): float(r[2]) for r in rows if float(r[0]) == 0.0}
    # psi(x) = integral of 0.5 r + 0.25 r^2 against cell weights 1/2
    expected0 = 0.5 * (0.5 * 0.1 + 0.25 * 0.01) + 0.5 * (0.5 * 0.4 + 0.25 * 0.16)
    assert t0[0] == pytest.approx(expected0, abs=1e-15)
    assert t0[1] == 0.0
    meta = json.loads((tmp_path / "solve.meta.json").read_text())
    blob = json.dumps(SOLVE_CONFIG, sort_keys=True).encode()
    assert meta["config_sha256"] == hashlib.sha256(blob).hexdigest()
    assert meta["seed"] == 0
    assert "version" in meta


def test_solve_reruns_are_byte_identical(tmp_path):
    assert _run(tmp_path, "solve", SOLVE_CONFIG, "--seed", "7") == 0
    first = (tmp_path / "solve.csv").read_bytes()
    assert _run(tmp_path, "solve", SOLVE_CONFIG, "--seed", "7") == 0
    assert (tmp_path / "solve.csv").read_bytes() == first


def test_solve_unknown_method_exits_1(tmp_path, capsys):
    cfg = dict(SOLVE_CONFIG, method="bogus")
    assert _run(tmp_path, "solve", cfg) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_config_keys_exit_1(tmp_path, capsys):
    cfg = dict(SOLVE_CONFIG, extra_knob=1)
    assert _run(tmp_path, "solve", cfg) == 1
    err = capsys.readouterr().err
    assert "extra_knob" in err and "allowed" in err


def test_missing_config_key_exits_1(tmp_path, capsys):
    cfg = {k: v for k, v in SOLVE_CONFIG.items() if k != "times"}
    assert _run(tmp_path, "solve", cfg) == 1
    assert "missing config key" in capsys.readouterr().err


def test_malformed_json_exits_1(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["solve", "--config", str(p), "--out", str(tmp_path)]) == 1
    assert "cannot read config" in capsys.readouterr().err


def test_missing_config_file_exits_1(tmp_path, capsys):
    assert main(["solve", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path)]) == 1
    assert "cannot read config" in capsys.readouterr().err


def _grid_function(convex: bool) -> GridFunction:
    j = Partition.uniform(2)
    if convex:
        fn = lambda x: float(np.sum(0.5 * x + 0.25 * x ** 2))
    else:
        fn = lambda x: float(-np.sum(x))
    return GridFunction.from_callable(j, fn, x_max=2.0, steps=7)


def test_fm_verify_pass_exits_0(tmp_path):
    cfg = {"function": _grid_function(convex=True).to_json()}
    assert _run(tmp_path, "fm-verify", cfg) == 0
    rep = json.loads((tmp_path / "fm_verify.json").read_text())
    assert rep["pass"]


def test_fm_verify_failure_exits_2_with_witness(tmp_path):
    cfg = {"function": _grid_function(convex=False).to_json()}
    assert _run(tmp_path, "fm-verify", cfg) == 2
    rep = json.loads((tmp_path / "fm_verify.json").read_text())
    assert not rep["pass"]
    assert rep["witness"] is not None


def test_converge_on_linear_data_exits_0(tmp_path):
    cfg = {
        "psi": {"kind": "softplus",
                "profile": {"weights": [0.5], "thresholds": [0.5],
                            "scales": [0.5]}},
        "xi": {"poly": {"2": 1.0}},
        "levels": [4, 8, 16],
        "points": 4,
        "radius": 2.0,
        "slope_max": -0.4,
    }
    assert _run(tmp_path, "converge", cfg) == 0
    lines = (tmp_path / "converge.csv").read_text().strip().splitlines()
    assert lines[0] == "level_size,error"
    assert len(lines) == 3  # two refinement gaps
    meta = json.loads((tmp_path / "converge.meta.json").read_text())
    assert meta["study"]["pass"]


def test_spinglass_artifacts_and_determinism(tmp_path):
    cfg = {
        "N_list": [2, 4],
        "beta": 0.5,
        "t_list": [0.25],
        "measure": {"atoms": [[[0.0]], [[0.3]]], "levels": [0.0, 0.5, 1.0]},
        "cascade": {"M": 32},
        "replicas": 60,
        "hj_level": 2,
    }
    assert _run(tmp_path, "spinglass", cfg, "--threads", "1") == 0
    first = (tmp_path / "spinglass.csv").read_bytes()
    assert _run(tmp_path, "spinglass", cfg, "--threads", "3") == 0
    assert (tmp_path / "spinglass.csv").read_bytes() == first
    bound = json.loads((tmp_path / "spinglass_bound.json").read_text())
    assert bound["0.25"]["pass"]


def test_values_use_17_significant_digits(tmp_path):
    assert _run(tmp_path, "solve", SOLVE_CONFIG) == 0
    lines = (tmp_path / "solve.csv").read_text().strip().splitlines()
    # round-tripping the printed value must be lossless
    for ln in lines[1:]:
        v = ln.split(",")[2]
        assert format(float(v), ".17g") == v
