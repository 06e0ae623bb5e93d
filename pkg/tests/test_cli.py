"""CLI surface: outputs, metadata, reproducibility, exit codes."""

import csv
import io
import json
import math

import numpy as np
import pytest

from aretedp.cli import SEED_ENV_VAR, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# aretedp")
    rows = list(csv.reader(lines[1:]))
    return lines[0], rows[0], rows[1:]


def test_help_listed_subcommands(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for name in ("sample", "shares", "density", "cdf", "privacy", "search", "errors", "simulate", "report"):
        assert name in out


@pytest.mark.parametrize(
    "sub", ["sample", "shares", "density", "cdf", "privacy", "search", "errors", "simulate", "report"]
)
def test_subcommand_help_documents_defaults(sub, capsys):
    with pytest.raises(SystemExit) as exc:
        main([sub, "--help"])
    assert exc.value.code == 0
    assert "default" in capsys.readouterr().out


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["sample", "--mechanism", "arete", "--eps", "24", "--bogus"])
    assert exc.value.code == 2


def test_sample_rows_and_reproducibility(capsys):
    argv = ["sample", "--mechanism", "arete", "--eps", "24", "--sensitivity", "1", "--n", "50", "--seed", "7"]
    code1, out1, _ = run_cli(capsys, *argv)
    code2, out2, _ = run_cli(capsys, *argv)
    assert code1 == code2 == 0
    assert out1 == out2
    meta, header, rows = parse_csv(out1)
    assert header == ["value"]
    assert len(rows) == 50
    assert "seed=7" in meta


def test_sample_strict_refuses_low_epsilon(capsys):
    code, _, err = run_cli(capsys, "sample", "--mechanism", "arete", "--eps", "6", "--n", "5")
    assert code == 2
    assert "20 + 4*ln" in err


def test_sample_permissive_flags_metadata(capsys):
    code, out, _ = run_cli(
        capsys, "sample", "--mechanism", "arete", "--eps", "6", "--n", "5", "--permissive", "--seed", "1"
    )
    assert code == 0
    meta, _, rows = parse_csv(out)
    assert "verify empirically" in meta
    assert len(rows) == 5


def test_seed_env_override(capsys, monkeypatch):
    argv = ["sample", "--mechanism", "laplace", "--eps", "2", "--n", "5"]
    monkeypatch.setenv(SEED_ENV_VAR, "123")
    _, out_env, _ = run_cli(capsys, *argv)
    monkeypatch.delenv(SEED_ENV_VAR)
    _, out_default, _ = run_cli(capsys, *argv)
    _, out_explicit, _ = run_cli(capsys, *argv, "--seed", "123")
    assert "seed=123" in out_env.splitlines()[0]
    assert out_env != out_default
    assert out_env == out_explicit


def test_shares_output(capsys):
    code, out, _ = run_cli(
        capsys, "shares", "--target", "arete", "--eps", "24", "--participants", "8", "--seed", "3"
    )
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header == ["participant_index", "value"]
    assert [r[0] for r in rows] == [str(i) for i in range(8)]


def test_density_masses_sum(capsys):
    code, out, _ = run_cli(
        capsys, "density", "--mechanism", "arete", "--eps", "24", "--step", "0.001"
    )
    assert code == 0
    meta, header, rows = parse_csv(out)
    assert header == ["x", "mass"]
    masses = np.array([float(r[1]) for r in rows])
    assert abs(masses.sum() - 1.0) < 1e-5
    assert "step=0.001" in meta


def test_density_staircase(capsys):
    code, out, _ = run_cli(capsys, "density", "--mechanism", "staircase", "--eps", "2")
    assert code == 0
    _, _, rows = parse_csv(out)
    assert len(rows) > 100


def test_cdf_final_value(capsys):
    code, out, _ = run_cli(capsys, "cdf", "--mechanism", "laplace", "--eps", "8")
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header == ["x", "F"]
    assert float(rows[-1][1]) == pytest.approx(1.0, abs=1e-5)


def test_privacy_certificate(capsys, tmp_path):
    curve_path = tmp_path / "curve.csv"
    code, out, _ = run_cli(
        capsys,
        "privacy",
        "--mechanism", "arete",
        "--eps", "24",
        "--sensitivity", "1",
        "--curve", str(curve_path),
    )
    assert code == 0
    cert = json.loads(out)
    assert cert["eps_hat"] <= 24.0
    assert cert["certified"] is True
    assert any("theta" in str(a) for a in cert["assumptions"])
    meta, header, rows = parse_csv(curve_path.read_text())
    assert header == ["shift", "loss"]
    assert float(rows[0][1]) == 0.0


def test_privacy_staircase_analytic(capsys):
    code, out, _ = run_cli(capsys, "privacy", "--mechanism", "staircase", "--eps", "3")
    assert code == 0
    cert = json.loads(out)
    assert cert["eps_hat"] == pytest.approx(3.0)
    assert cert["certified"] is True


def test_errors_table(capsys):
    code, out, _ = run_cli(
        capsys, "errors", "--eps", "24,32", "--sensitivity", "1", "--samples", "2000", "--seed", "5"
    )
    assert code == 0
    _, header, rows = parse_csv(out)
    assert header[0] == "epsilon"
    assert float(rows[0][1]) == pytest.approx(1.0 / 24.0)
    assert len(rows) == 2


def test_search_json(capsys, tmp_path):
    trace_path = tmp_path / "trace.csv"
    code, out, _ = run_cli(
        capsys,
        "search",
        "--eps-target", "24",
        "--max-iters", "12",
        "--step", "0.004",
        "--half-width", "14",
        "--no-sweep",
        "--seed", "2",
        "--trace", str(trace_path),
    )
    assert code == 0
    result = json.loads(out)
    assert result["feasible"] is True
    assert set(result["best"]) == {"alpha", "theta", "lam"}
    _, header, rows = parse_csv(trace_path.read_text())
    assert header[:3] == ["alpha", "theta", "lam"]
    assert len(rows) >= 1


def test_simulate_roundtrip(capsys, tmp_path):
    config = {
        "n": 4,
        "value_range": [0.0, 1.0],
        "mechanism": "distributed-arete",
        "epsilon": 24.0,
        "trials": 25,
        "seed": 9,
        "values": [0.1, 0.2, 0.3, 0.4],
    }
    cfg_path = tmp_path / "sim.json"
    cfg_path.write_text(json.dumps(config))
    per_trial = tmp_path / "trials.csv"
    code, out, _ = run_cli(capsys, "simulate", "--config", str(cfg_path), "--per-trial", str(per_trial))
    assert code == 0
    report = json.loads(out)
    assert report["true_sum"] == pytest.approx(1.0)
    assert report["metadata"]["mechanism"] == "distributed-arete"
    _, header, rows = parse_csv(per_trial.read_text())
    assert header == ["trial", "noisy_sum"]
    assert len(rows) == 25


def test_simulate_rejects_unknown_keys(capsys, tmp_path):
    cfg_path = tmp_path / "sim.json"
    cfg_path.write_text(json.dumps({"n": 2, "value_range": [0, 1], "mechanism": "no-noise",
                                    "epsilon": 1.0, "trials": 1, "spurious": True}))
    code, _, err = run_cli(capsys, "simulate", "--config", str(cfg_path))
    assert code == 2
    assert "spurious" in err


def test_simulate_default_values(capsys, tmp_path):
    cfg_path = tmp_path / "sim.json"
    cfg_path.write_text(json.dumps({"n": 3, "value_range": [0.0, 3.0], "mechanism": "no-noise",
                                    "epsilon": 1.0, "trials": 2}))
    code, out, _ = run_cli(capsys, "simulate", "--config", str(cfg_path))
    assert code == 0
    # synthetic values are evenly spaced over the range
    assert json.loads(out)["true_sum"] == pytest.approx(0.0 + 1.5 + 3.0)


def test_output_file_writing(tmp_path, capsys):
    out_path = tmp_path / "samples.csv"
    code, stdout, _ = run_cli(
        capsys, "sample", "--mechanism", "laplace", "--eps", "4", "--n", "10",
        "--seed", "1", "-o", str(out_path)
    )
    assert code == 0
    assert stdout == ""
    meta, _, rows = parse_csv(out_path.read_text())
    assert len(rows) == 10
