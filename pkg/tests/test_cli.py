"""Command-line interface and run configuration."""

import os

import numpy as np
import pandas as pd
import pytest

from heliocast.cli import main
from heliocast.errors import InputError
from heliocast.orchestrate import RunConfig, config_from_mapping, load_config


def test_run_config_validation_messages():
    with pytest.raises(InputError, match="window_days"):
        RunConfig(window_days=0)
    with pytest.raises(InputError, match="gibbs_iters"):
        RunConfig(gibbs_iters=100, gibbs_burn=100)
    with pytest.raises(InputError, match="samples"):
        RunConfig(samples=1, copula_on=True)
    with pytest.raises(InputError, match="copula_structure"):
        RunConfig(copula_structure="banded")
    with pytest.raises(InputError, match="model"):
        RunConfig(model="asymmetric")


def test_config_file_parsing(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "# comment line\n"
        "model = indep\n"
        "window_days=7   # trailing comment\n"
        "copula_on = off\n"
        "sweep_windows = 5, 10\n"
        "\n"
    )
    cfg = config_from_mapping(load_config(str(cfg_file)))
    assert cfg.model == "indep"
    assert cfg.window_days == 7
    assert cfg.copula_on is False
    assert cfg.sweep_windows == (5, 10)


def test_config_rejects_unknown_keys():
    with pytest.raises(InputError, match="unknown config key"):
        config_from_mapping({"windw_days": "7"})


def test_config_rejects_bad_types(tmp_path):
    with pytest.raises(InputError, match="integer"):
        config_from_mapping({"window_days": "seven"})
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("just-a-token\n")
    with pytest.raises(InputError, match="key=value"):
        load_config(str(cfg_file))


def test_simulate_determinism(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    assert main(["simulate", "--days", "30", "--seed", "1", "--out", a]) == 0
    assert main(["simulate", "--days", "30", "--seed", "1", "--out", b]) == 0
    for name in ("forecasts.csv", "production.csv", "mask.csv"):
        with open(os.path.join(a, name), "rb") as fa, open(os.path.join(b, name), "rb") as fb:
            assert fa.read() == fb.read()


def test_simulate_rejects_zero_days(tmp_path, capsys):
    assert main(["simulate", "--days", "0", "--out", str(tmp_path / "x")]) == 1
    assert "usage error" in capsys.readouterr().err


def test_unknown_flag_exits_with_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--bogus"])
    assert exc.value.code == 1


def test_missing_data_directory_is_a_data_error(tmp_path, capsys):
    code = main(
        [
            "forecast",
            "--data", str(tmp_path / "nowhere"),
            "--out", str(tmp_path / "out"),
        ]
    )
    assert code == 2
    assert "data error" in capsys.readouterr().err


def test_report_requires_a_forecast_run(tmp_path):
    assert main(["report", "--in", str(tmp_path)]) == 2


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_run")
    datadir, outdir = str(root / "data"), str(root / "out")
    assert main(["simulate", "--days", "34", "--seed", "6", "--out", datadir]) == 0
    code = main(
        [
            "forecast",
            "--data", datadir,
            "--out", outdir,
            "--from", "2021-01-28",
            "--to", "2021-01-31",
            "--model", "indep",
            "--copula",
            "--seed", "12",
            "--window-days", "10",
            "--samples", "300",
        ]
    )
    assert code == 0
    assert main(["report", "--in", outdir, "--histograms", str(root / "hist")]) == 0
    return root, outdir


def test_report_covers_day_blocks_and_aggregates(small_run):
    _, outdir = small_run
    report = pd.read_csv(os.path.join(outdir, "report.csv"))
    blocks = set(report["block"])
    assert {"day1", "day2", "day3", "sum", "max"} <= blocks
    crps = report[report["metric"] == "crps"]
    assert (crps["value"] >= 0).all()


def test_forecast_outputs_have_contracted_schemas(small_run):
    _, outdir = small_run
    traj = pd.read_csv(os.path.join(outdir, "trajectories.csv"))
    assert list(traj.columns) == ["date", "sample_id", "lead_h", "mw"]
    assert traj["mw"].min() >= 0.0
    assert set(traj["lead_h"]) == set(range(1, 73))
    arch = pd.read_csv(os.path.join(outdir, "archive.csv"))
    assert list(arch.columns) == ["date", "lead_h", "z"]
    corr = pd.read_csv(os.path.join(outdir, "correlation.csv"))
    assert list(corr.columns) == ["row_lead", "col_lead", "value"]
    assert len(corr) == 72 * 72
    m = corr["value"].to_numpy().reshape(72, 72)
    assert np.allclose(m, m.T) and np.allclose(np.diag(m), 1.0)


def test_histograms_are_written(small_run):
    root, _ = small_run
    hist = root / "hist"
    assert (hist / "pit_hist.csv").exists()
    assert (hist / "pit_hist.svg").exists()
    assert (hist / "band_depth_hist_copula.csv").exists()


def test_cli_flags_override_config_file(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("model=full\nseed=1\n")
    from heliocast import cli

    parser = cli.build_parser()
    args = parser.parse_args(
        ["forecast", "--config", str(cfg_file), "--model", "indep"]
    )
    cfg = cli._forecast_config(args)
    assert cfg.model == "indep"  # flag wins
    assert cfg.seed == 1  # file value survives
