"""Report rendering: figures land next to their CSV data."""

import numpy as np

from aretedp.report import cdf_comparison_report, density_shapes_report, privacy_loss_report


def _check_outputs(paths):
    png = [p for p in paths if p.suffix == ".png"]
    data = [p for p in paths if p.suffix == ".csv"]
    assert len(png) == 1 and len(data) == 1
    assert png[0].stat().st_size > 0
    lines = data[0].read_text().splitlines()
    assert lines[0].startswith("# ")
    assert len(lines) > 10


def test_density_shapes_report(tmp_path):
    _check_outputs(density_shapes_report(tmp_path, 10.0, 1.0))


def test_cdf_comparison_report(tmp_path):
    paths = cdf_comparison_report(tmp_path, [5.0, 10.0], 1.0)
    _check_outputs(paths)


def test_privacy_loss_report(tmp_path):
    paths = privacy_loss_report(tmp_path, 10.0, 1.0, points=41)
    _check_outputs(paths)
    rows = [l.split(",") for l in paths[1].read_text().splitlines()[2:]]
    arete_losses = np.array([float(r[2]) for r in rows if r[0] == "arete"])
    assert arete_losses[0] == 0.0
    assert np.all(np.diff(arete_losses) >= -1e-9)


def test_cli_report_invokes_renderer(tmp_path, capsys, monkeypatch):
    import aretedp.cli as cli

    calls = {}

    def fake_render(out_dir, sensitivity, seed):
        calls["args"] = (out_dir, sensitivity, seed)
        return [tmp_path / "x.png"]

    import aretedp.report as report

    monkeypatch.setattr(report, "render_all", fake_render)
    code = cli.main(["report", "--out-dir", str(tmp_path), "--seed", "4"])
    assert code == 0
    assert calls["args"] == (str(tmp_path), 1.0, 4)
    assert str(tmp_path / "x.png") in capsys.readouterr().out
