"""Command line contract tests.

The exit-code contract under test: 0 success or certified, 1 malformed
input, 2 a run left the float range, 3 a hypothesis or certificate
failure, and nothing else. Commands run in process through main(), so
stdout and the written artifacts are both observable.
"""

import json
import math
from pathlib import Path

import pytest

from ptstab.cli import main

RATE_XI2 = {"T": 5.05, "offset": 0.0, "terms": [{"k": 2, "c": 1.0}]}


def run(*argv) -> int:
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def example1_dir(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("example1")
    assert run("simulate", "--preset", "example1", "--T", 5, "--out", out) == 0
    return out


@pytest.fixture(scope="module")
def rate_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("rates") / "xi2.json"
    path.write_text(json.dumps(RATE_XI2))
    return path


# --- simulate -------------------------------------------------------------------


def test_simulate_writes_all_artifacts(example1_dir):
    csv = (example1_dir / "example1.csv").read_text()
    assert csv.splitlines()[0] == "t,x1,x2,V1,V2,env1"
    assert csv.endswith("\n")
    meta = json.loads((example1_dir / "example1.meta.json").read_text())
    assert meta["integrator"]["steps"] > 1000
    assert meta["config"]["T"] == 5.0
    metrics = json.loads((example1_dir / "example1.metrics.json").read_text())
    assert abs(metrics["signals"]["x1"]["final"]) < 1e-3
    assert abs(metrics["signals"]["x2"]["final"]) < 1e-3


def test_figure_recipe_names_real_columns(example1_dir):
    meta = json.loads((example1_dir / "example1.meta.json").read_text())
    header = (example1_dir / "example1.csv").read_text().splitlines()[0].split(",")
    assert meta["figure"]["x"] == "t"
    for panel in meta["figure"]["panels"]:
        assert set(panel["columns"]) <= set(header)


def test_repeated_run_is_byte_identical(example1_dir, tmp_path):
    assert run("simulate", "--preset", "example1", "--T", 5, "--out", tmp_path) == 0
    first = (example1_dir / "example1.csv").read_bytes()
    second = (tmp_path / "example1.csv").read_bytes()
    assert first == second


def test_sweep_with_jobs_matches_serial_runs(example1_dir, tmp_path):
    code = run(
        "simulate", "--preset", "example1", "--preset", "remark2",
        "--jobs", 2, "--out", tmp_path,
    )
    assert code == 0
    assert (tmp_path / "remark2.csv").exists()
    sweep = (tmp_path / "example1.csv").read_bytes()
    # the sweep ran without --T; the default horizon is the same 5 s
    serial = (example1_dir / "example1.csv").read_bytes()
    assert sweep == serial


def test_duplicate_presets_get_distinct_labels(tmp_path):
    code = run(
        "simulate", "--preset", "remark2", "--preset", "remark2",
        "--jobs", 2, "--out", tmp_path,
    )
    assert code == 0
    assert (tmp_path / "remark2.csv").exists()
    assert (tmp_path / "remark2-2.csv").exists()
    assert (tmp_path / "remark2.csv").read_bytes() == (
        tmp_path / "remark2-2.csv"
    ).read_bytes()


def test_inline_system_and_json_format(tmp_path):
    spec = tmp_path / "benchmark-spec.json"
    spec.write_text(
        json.dumps(
            {
                "kind": "scalar",
                "phi": {"T": 2.0, "offset": 0.0, "terms": [{"k": 2, "c": 1.0}]},
                "v0": 1.0,
            }
        )
    )
    out = tmp_path / "runs"
    code = run("simulate", "--system", spec, "--format", "json", "--out", out)
    assert code == 0
    # inline runs are labeled "scalar" regardless of the --system file name
    table = json.loads((out / "scalar.json").read_text())
    assert table["names"] == ["t", "v", "V", "env"]
    assert table["series"]["v"][0] == 1.0


def test_empty_config_is_input_error(tmp_path, capsys):
    assert run("simulate", "--out", tmp_path) == 1
    assert "nothing to run" in capsys.readouterr().err


def test_unknown_preset_is_input_error(tmp_path, capsys):
    assert run("simulate", "--preset", "example9", "--out", tmp_path) == 1
    assert "SpecMismatch" in capsys.readouterr().err


def test_bad_config_file_is_input_error(tmp_path, capsys):
    bad = tmp_path / "cfg.json"
    bad.write_text("{not json")
    assert run("simulate", "--preset", "example1", "--config", bad) == 1
    assert "cannot read config" in capsys.readouterr().err


def test_residual_check_lands_in_metadata(tmp_path):
    code = run(
        "simulate", "--preset", "remark2", "--check-residuals", "--out", tmp_path
    )
    assert code == 0
    meta = json.loads((tmp_path / "remark2.meta.json").read_text())
    assert meta["residuals"]["V"]["satisfied"] is True


# --- verify ---------------------------------------------------------------------


def test_verify_preset_certified(tmp_path, capsys):
    assert run("verify", "--preset", "example2-paper", "--out", tmp_path) == 0
    out = capsys.readouterr().out
    assert "theorem T4: certified" in out
    assert "[pass] loop_gain_below_one" in out
    report = json.loads((tmp_path / "example2-paper.report.json").read_text())
    assert report["certified"] is True
    assert report["witnesses"]["delta"] > 0.0


def test_verify_boundary_spec_rejected(tmp_path, capsys):
    spec = tmp_path / "boundary.json"
    spec.write_text(
        json.dumps(
            {
                "topology": "feedback2",
                "systems": [
                    {"phi": {"T": 5.05, "terms": [{"k": 2, "c": 1.0}]}, "a": 1.0},
                    {"phi": {"T": 5.05, "terms": [{"k": 3, "c": 1.0}]}, "a": 1.0},
                ],
                "b": [[0.0, 1.0], [1.0, 0.0]],
            }
        )
    )
    assert run("verify", "--spec", spec, "--out", tmp_path) == 3
    out = capsys.readouterr().out
    assert "[FAIL] loop_gain_below_one" in out
    report = json.loads((tmp_path / "boundary.report.json").read_text())
    assert report["certified"] is False


def test_verify_malformed_spec(tmp_path, capsys):
    spec = tmp_path / "broken.json"
    spec.write_text(json.dumps({"topology": "ring", "systems": [], "b": []}))
    assert run("verify", "--spec", spec, "--out", tmp_path) == 1
    assert "SpecMismatch" in capsys.readouterr().err


def test_verify_needs_exactly_one_source(tmp_path):
    assert run("verify", "--out", tmp_path) == 1


# --- decay-rate -----------------------------------------------------------------


def _matrix_file(tmp_path: Path, a, b) -> Path:
    path = tmp_path / "matrix.json"
    path.write_text(json.dumps({"a": a, "b": b}))
    return path


def test_decay_rate_decoupled(tmp_path, capsys):
    path = _matrix_file(tmp_path, [1.0, 2.0], [[0.0, 0.0], [0.0, 0.0]])
    assert run("decay-rate", path, "--out", tmp_path) == 0
    result = json.loads((tmp_path / "matrix.decay.json").read_text())
    assert result["delta"] == pytest.approx(1.0, rel=1e-9)
    out = capsys.readouterr().out
    assert "bisection delta" in out


def test_decay_rate_published_gain_matrix(tmp_path):
    # gains as displayed to three decimals; the oracle below is the
    # dominant eigenvalue of [[-1, b1], [b2, -0.5]] by the quadratic formula
    b1, b2 = 0.608, 0.801
    path = _matrix_file(tmp_path, [1.0, 0.5], [[0.0, b1], [b2, 0.0]])
    assert run("decay-rate", path, "--out", tmp_path) == 0
    result = json.loads((tmp_path / "matrix.decay.json").read_text())
    tr, det = -1.5, 0.5 - b1 * b2
    oracle = -(tr + math.sqrt(tr * tr - 4.0 * det)) / 2.0
    assert result["delta"] == pytest.approx(oracle, abs=1e-8)
    assert result["delta"] == pytest.approx(0.00875, abs=5e-5)
    assert result["bisectionDelta"] == pytest.approx(oracle, abs=1e-8)


def test_decay_rate_non_hurwitz(tmp_path, capsys):
    path = _matrix_file(tmp_path, [1.0, 1.0], [[0.0, 2.0], [2.0, 0.0]])
    assert run("decay-rate", path, "--out", tmp_path) == 3
    assert "not diagonally stable" in capsys.readouterr().err


def test_decay_rate_malformed(tmp_path, capsys):
    path = tmp_path / "matrix.json"
    path.write_text(json.dumps({"a": [1.0]}))
    assert run("decay-rate", path, "--out", tmp_path) == 1
    path.write_text(json.dumps({"a": [1.0], "b": [[0.0, 1.0]]}))
    assert run("decay-rate", path, "--out", tmp_path) == 1
    capsys.readouterr()


# --- certify --------------------------------------------------------------------


def test_round_trip_simulation_to_certificate(example1_dir, rate_file, tmp_path):
    code = run(
        "certify", example1_dir / "example1.csv",
        "--signal", "x1", "--rate", rate_file, "--out", tmp_path,
    )
    assert code == 0
    report = json.loads((tmp_path / "x1.certificate.json").read_text())
    assert report["verdict"] == "certified"
    assert report["c"] == pytest.approx(1.0, rel=1e-2)


def test_certify_constant_signal_violated(rate_file, tmp_path):
    lines = ["t,y"] + [f"{0.05 * i},1.0" for i in range(101)]
    path = tmp_path / "flat.csv"
    path.write_text("\n".join(lines) + "\n")
    code = run(
        "certify", path, "--signal", "y", "--rate", rate_file, "--out", tmp_path
    )
    assert code == 3
    report = json.loads((tmp_path / "y.certificate.json").read_text())
    assert report["verdict"] == "violated"
    assert report["firstViolation"] is not None


def test_certify_rate_without_quadratic_floor(example1_dir, tmp_path, capsys):
    rate = tmp_path / "xi.json"
    rate.write_text(json.dumps({"T": 5.05, "terms": [{"k": 1, "c": 1.0}]}))
    code = run(
        "certify", example1_dir / "example1.csv",
        "--signal", "x1", "--rate", rate, "--out", tmp_path,
    )
    assert code == 1
    assert "NoQuadraticFloor" in capsys.readouterr().err


def test_certify_unknown_signal(example1_dir, rate_file, tmp_path, capsys):
    code = run(
        "certify", example1_dir / "example1.csv",
        "--signal", "x9", "--rate", rate_file, "--out", tmp_path,
    )
    assert code == 1
    assert "MissingSignal" in capsys.readouterr().err


def test_certify_missing_trajectory_file(rate_file, tmp_path):
    code = run(
        "certify", tmp_path / "nope.csv",
        "--signal", "x1", "--rate", rate_file, "--out", tmp_path,
    )
    assert code == 1
