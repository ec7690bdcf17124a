"""End-to-end CLI behavior through cli.main plus console-script smoke tests."""

import json
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

from rankmargin import cli
from rankmargin.data import parse_games
from rankmargin.evaluate import BenchmarkReport

SAMPLE = Path(__file__).resolve().parent.parent / "sample_data" / "games_sample.csv"


@pytest.fixture(scope="module")
def games_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "games.csv"
    rc = cli.main(
        ["synth", "--n", "240", "--rank-max", "25", "--seed", "5", "--out", str(path)]
    )
    assert rc == 0
    return path


def test_ingest_summarizes(games_csv, capsys):
    assert cli.main(["ingest", "--input", str(games_csv)]) == 0
    out = capsys.readouterr().out
    assert "games: 240" in out
    assert "distinct rank pairs:" in out
    assert "pure-error RMSE:" in out and " df" in out


def test_ingest_missing_file(tmp_path, capsys):
    missing = tmp_path / "nope.csv"
    assert cli.main(["ingest", "--input", str(missing)]) == 2
    err = capsys.readouterr().err
    assert "input file not found" in err and str(missing) in err


def test_split_writes_both_halves(games_csv, tmp_path, capsys):
    rc = cli.main(
        [
            "split", "--input", str(games_csv), "--split", "chrono",
            "--train-count", "180", "--out-dir", str(tmp_path),
        ]
    )
    assert rc == 0
    train = parse_games((tmp_path / "train.csv").read_text())
    valid = parse_games((tmp_path / "valid.csv").read_text())
    assert len(train) == 180 and len(valid) == 60
    assert max(g.date for g in train.games) <= min(g.date for g in valid.games)
    out = capsys.readouterr().out
    assert "train.csv (180 games)" in out


def test_split_random_needs_seed(games_csv, tmp_path, capsys):
    rc = cli.main(
        [
            "split", "--input", str(games_csv), "--split", "random",
            "--train-count", "180", "--out-dir", str(tmp_path),
        ]
    )
    assert rc == 2
    assert "seed" in capsys.readouterr().err


@pytest.mark.parametrize(
    "model,extra",
    [
        ("quadratic", []),
        ("gam", ["--df", "4"]),
        ("loess", ["--span", "0.5"]),
        ("kernel-iso", ["--sigma", "6"]),
        ("kernel-aniso", ["--sigma-x", "20", "--sigma-y", "5"]),
    ],
)
def test_fit_then_predict_each_model(games_csv, tmp_path, capsys, model, extra):
    model_file = tmp_path / f"{model}.json"
    rc = cli.main(
        ["fit", "--input", str(games_csv), "--model", model, "--out", str(model_file)]
        + extra
    )
    assert rc == 0
    doc = json.loads(model_file.read_text())
    assert doc["schema_version"] == 1
    assert doc["model"] == model
    rc = cli.main(
        [
            "predict", "--model-file", str(model_file),
            "--road-rank", "5", "--home-rank", "20",
        ]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert f"{model}: predicted margin (road 5.0 at home 20.0) = " in out
    assert cli.SIGN_NOTE in out


def test_fit_all_writes_five_files(games_csv, tmp_path):
    rc = cli.main(
        [
            "fit", "--input", str(games_csv), "--model", "all",
            "--span", "0.4", "--sigma", "6", "--sigma-x", "20", "--sigma-y", "5",
            "--out", str(tmp_path),
        ]
    )
    assert rc == 0
    for kind in ("quadratic", "gam", "loess", "kernel-iso", "kernel-aniso"):
        assert (tmp_path / f"{kind}.json").exists()


def test_fit_kernel_requires_sigma(games_csv, tmp_path, capsys):
    rc = cli.main(
        [
            "fit", "--input", str(games_csv), "--model", "kernel-iso",
            "--out", str(tmp_path / "k.json"),
        ]
    )
    assert rc == 2
    assert "--sigma" in capsys.readouterr().err


def test_predict_reference_coefficients(tmp_path, capsys):
    model_file = tmp_path / "quad.json"
    model_file.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "model": "quadratic",
                "payload": {
                    "beta0": -5.8,
                    "beta_r": -0.074,
                    "beta_h": 0.10,
                    "beta_rr": 4.7e-5,
                    "beta_hh": -1.2e-4,
                    "sigma_hat": 11.5,
                    "n_train": 4518,
                },
            }
        )
    )
    rc = cli.main(
        ["predict", "--model-file", str(model_file), "--road-rank", "100", "--home-rank", "100"]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "= -3.93" in out
    assert "positive margins favor the road team" in out
    rc = cli.main(
        ["predict", "--model-file", str(model_file), "--road-rank", "1", "--home-rank", "351"]
    )
    assert rc == 0
    assert "= 14.44" in capsys.readouterr().out


def test_predict_rejects_bad_model_files(tmp_path, capsys):
    garbled = tmp_path / "garbled.json"
    garbled.write_text("not json {{{")
    rc = cli.main(
        ["predict", "--model-file", str(garbled), "--road-rank", "1", "--home-rank", "2"]
    )
    assert rc == 2
    assert "not valid JSON" in capsys.readouterr().err

    wrong_version = tmp_path / "wrong.json"
    wrong_version.write_text(json.dumps({"schema_version": 99, "model": "quadratic"}))
    rc = cli.main(
        ["predict", "--model-file", str(wrong_version), "--road-rank", "1", "--home-rank", "2"]
    )
    assert rc == 2
    assert "schema_version" in capsys.readouterr().err

    rc = cli.main(
        ["predict", "--model-file", str(tmp_path / "absent.json"), "--road-rank", "1", "--home-rank", "2"]
    )
    assert rc == 2
    assert "model file not found" in capsys.readouterr().err

    incomplete = tmp_path / "incomplete.json"
    incomplete.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "model": "quadratic",
                "payload": {"coefficients": [-5.8, -0.074, 0.10, 4.7e-5, -1.2e-4]},
            }
        )
    )
    rc = cli.main(
        ["predict", "--model-file", str(incomplete), "--road-rank", "1", "--home-rank", "2"]
    )
    assert rc == 2
    assert "malformed 'quadratic' payload" in capsys.readouterr().err

    bad_loess = tmp_path / "bad_loess.json"
    bad_loess.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "model": "loess",
                "payload": {"road_ranks": [1, 2, 3], "home_ranks": [1, 2, 3]},
            }
        )
    )
    rc = cli.main(
        ["predict", "--model-file", str(bad_loess), "--road-rank", "1", "--home-rank", "2"]
    )
    assert rc == 2
    assert "malformed 'loess' payload" in capsys.readouterr().err


def test_predict_rejects_invalid_rank(tmp_path, capsys):
    model_file = tmp_path / "quad.json"
    model_file.write_text(
        json.dumps(
            {
                "schema_version": 1,
                "model": "quadratic",
                "payload": {
                    "beta0": 0.0, "beta_r": 0.0, "beta_h": 0.0,
                    "beta_rr": 0.0, "beta_hh": 0.0, "sigma_hat": 1.0, "n_train": 10,
                },
            }
        )
    )
    rc = cli.main(
        ["predict", "--model-file", str(model_file), "--road-rank", "0", "--home-rank", "2"]
    )
    assert rc == 2
    assert "ranks must be >= 1" in capsys.readouterr().err


def test_tune_loess(games_csv, tmp_path, capsys):
    rc = cli.main(
        [
            "tune", "--input", str(games_csv), "--model", "loess",
            "--span-grid", "0.4,0.8", "--folds", "5", "--out-dir", str(tmp_path),
        ]
    )
    assert rc == 0
    assert "best span:" in capsys.readouterr().out
    lines = (tmp_path / "loess_cv.csv").read_text().splitlines()
    assert lines[0] == "span,rmse"
    assert len(lines) == 3


def test_tune_kernel_iso(games_csv, tmp_path, capsys):
    rc = cli.main(
        [
            "tune", "--input", str(games_csv), "--model", "kernel-iso",
            "--sigma-grid", "4,8,16", "--out-dir", str(tmp_path),
        ]
    )
    assert rc == 0
    assert "best sigma:" in capsys.readouterr().out
    lines = (tmp_path / "kernel_cv.csv").read_text().splitlines()
    assert lines[0] == "mode,sigma,sigma_x,sigma_y,rmse"
    assert len(lines) == 4
    assert all(l.startswith("isotropic,") for l in lines[1:])


def test_tune_kernel_aniso(games_csv, tmp_path, capsys):
    rc = cli.main(
        [
            "tune", "--input", str(games_csv), "--model", "kernel-aniso",
            "--sigma-x-grid", "15,30", "--sigma-y-grid", "4,8",
            "--folds", "5", "--out-dir", str(tmp_path),
        ]
    )
    assert rc == 0
    assert "best (sigma_x, sigma_y):" in capsys.readouterr().out
    lines = (tmp_path / "kernel_cv.csv").read_text().splitlines()
    assert len(lines) == 5
    assert all(l.startswith("anisotropic,") for l in lines[1:])


def test_report_rejects_bad_span(games_csv, tmp_path, capsys):
    rc = cli.main(
        [
            "report", "--input", str(games_csv), "--span", "0",
            "--sigma", "8", "--sigma-x", "20", "--sigma-y", "5",
            "--out-dir", str(tmp_path),
        ]
    )
    assert rc == 2
    assert "span" in capsys.readouterr().err


REPORT_FILES = (
    "report.json",
    "report.txt",
    "residuals_quadratic.csv",
    "gam_components.csv",
    "loess_cv.csv",
    "kernel_cv.csv",
)


def _run_report(input_csv, out_dir):
    return cli.main(
        [
            "report", "--input", str(input_csv),
            "--partitions", "2", "--folds", "5",
            "--span-grid", "0.4,0.8", "--sigma-grid", "5,10",
            "--sigma-x-grid", "15,30", "--sigma-y-grid", "4,8",
            "--out-dir", str(out_dir),
        ]
    )


def test_report_on_bundled_sample(tmp_path, capsys):
    assert SAMPLE.exists(), "bundled sample data should ship with the repo"
    rc = _run_report(SAMPLE, tmp_path)
    assert rc == 0
    for name in REPORT_FILES:
        assert (tmp_path / name).exists(), name
    out = capsys.readouterr().out
    assert "Mean, validation" in out

    doc = json.loads((tmp_path / "report.json").read_text())
    table = BenchmarkReport.from_dict(doc["table"])
    assert table.columns[0] == "Pure error"
    assert len(table.columns) == 6
    assert doc["tuning"]["span"] in (0.4, 0.8)

    text = (tmp_path / "report.txt").read_text()
    assert "Lack of fit, quadratic regression:" in text
    assert "F = " in text and ") df, p = " in text
    assert "Smoothing parameters (tuned on training 1):" in text

    resid = (tmp_path / "residuals_quadratic.csv").read_text().splitlines()
    assert resid[0] == "fitted,studentized_residual"
    comp = (tmp_path / "gam_components.csv").read_text().splitlines()
    assert comp[0] == "component,rank,estimate,lower95,upper95"
    assert any(l.startswith("road,") for l in comp[1:])
    assert any(l.startswith("home,") for l in comp[1:])


def test_report_deterministic(games_csv, tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run_report(games_csv, a) == 0
    assert _run_report(games_csv, b) == 0
    capsys.readouterr()
    for name in REPORT_FILES:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_synth_deterministic(tmp_path):
    p1, p2, p3 = (tmp_path / f"s{i}.csv" for i in range(3))
    for path in (p1, p2):
        assert cli.main(["synth", "--n", "60", "--rank-max", "15", "--seed", "9", "--out", str(path)]) == 0
    assert cli.main(["synth", "--n", "60", "--rank-max", "15", "--seed", "10", "--out", str(p3)]) == 0
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_bytes() != p3.read_bytes()


def test_usage_error_exit_code(capsys):
    assert cli.main(["bogus-command"]) == 2
    capsys.readouterr()


def test_console_script_installed(tmp_path):
    exe = shutil.which("rankmargin")
    assert exe is not None, "console script should be on PATH after installation"
    out_csv = tmp_path / "g.csv"
    proc = subprocess.run(
        [exe, "synth", "--n", "30", "--rank-max", "10", "--seed", "3", "--out", str(out_csv)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out_csv.exists()
    proc = subprocess.run(
        [sys.executable, "-m", "rankmargin.cli", "ingest", "--input", str(out_csv)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "games: 30" in proc.stdout
