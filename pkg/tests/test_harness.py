"""Tests for the experiment harness, config parsing, CSV output and CLI."""

from __future__ import annotations

import pytest

from sosim.cli import main
from sosim.delay_sources import DelaySourceSpec
from sosim.errors import ConfigError, DomainError, UsageError
from sosim.harness import (
    ExperimentConfig,
    MetricsRow,
    improvement_pct,
    parse_config,
    run_experiment,
    run_sweep,
    write_csv,
)

TWO_GAMMA = (
    DelaySourceSpec(kind="gamma", mean_ms=10.0, stddev_ms=1.0),
    DelaySourceSpec(kind="gamma", mean_ms=12.0, stddev_ms=5.0),
)

CONFIG_TEXT = """\
# sample experiment
scheduler = sos
epsilon = 0.05
object_size = 20
replications = 50
seed = 11
mode = oracle

[path]
kind = gamma
mean_ms = 10
stddev_ms = 1

[path]
kind = gamma
mean_ms = 12
stddev_ms = 5
propagation_ms = 2
"""


def small(scheduler="sos", **kw):
    defaults = dict(paths=TWO_GAMMA, scheduler=scheduler, object_size=20,
                    replications=50, seed=1)
    defaults.update(kw)
    return ExperimentConfig(**defaults)


# -- improvement_pct ---------------------------------------------------------


def test_improvement_examples():
    assert improvement_pct(200.0, 100.0) == pytest.approx(100.0)
    assert improvement_pct(5.0, 5.0) == 0.0
    assert improvement_pct(100.0, 200.0) == pytest.approx(-50.0)


def test_improvement_rejects_nonpositive():
    with pytest.raises(DomainError):
        improvement_pct(0.0, 1.0)
    with pytest.raises(DomainError):
        improvement_pct(1.0, -1.0)


# -- run_experiment ----------------------------------------------------------


def test_deterministic_paths_zero_variance():
    cfg = ExperimentConfig(
        paths=(DelaySourceSpec(kind="deterministic", mean_ms=3.0),
               DelaySourceSpec(kind="deterministic", mean_ms=5.0)),
        scheduler="sos", object_size=10, replications=25, seed=0,
    )
    row = run_experiment(cfg)
    assert row.p95_delay_ms == pytest.approx(row.mean_delay_ms)


def test_same_config_same_row():
    assert run_experiment(small()) == run_experiment(small())


def test_config_validation():
    with pytest.raises(UsageError):
        small(scheduler="minRTT")
    with pytest.raises(UsageError):
        ExperimentConfig(paths=TWO_GAMMA, object_size=None, page_spec=None)
    with pytest.raises(UsageError):
        small(replications=0)
    with pytest.raises(UsageError):
        ExperimentConfig(paths=(), object_size=5)


def test_fec_row_reports_redundancy():
    row = run_experiment(small(scheduler="sos_fec", gamma=0.0,
                               paths=(DelaySourceSpec(kind="gamma", mean_ms=10, stddev_ms=30),
                                      DelaySourceSpec(kind="gamma", mean_ms=12, stddev_ms=1))))
    assert row.redundancy_fraction > 0


# -- run_sweep ---------------------------------------------------------------


def test_sweep_single_value():
    rows = run_sweep(small(), "sigma", [5.0], axis_path=1)
    assert len(rows) == 1 and rows[0].label.startswith("sigma=5.0")


def test_sweep_empty_values():
    with pytest.raises(UsageError):
        run_sweep(small(), "sigma", [])


def test_sweep_axis_mismatch():
    with pytest.raises(UsageError):
        run_sweep(small(), "gamma", [0.5])  # gamma sweep on non-FEC scheduler
    with pytest.raises(UsageError):
        run_sweep(small(), "sigma", [1.0], axis_path=5)
    with pytest.raises(UsageError):
        run_sweep(small(), "unknown_axis", [1.0])


def test_object_size_sweep():
    rows = run_sweep(small(replications=30), "object_size", [1, 10, 100])
    assert [r.label.split("/")[0] for r in rows] == [
        "object_size=1", "object_size=10", "object_size=100"
    ]
    assert rows[0].p95_delay_ms < rows[2].p95_delay_ms


def test_sweep_baseline_shares_sources():
    rows = run_sweep(small(), "sigma", [1.0], baseline="sos", axis_path=1)
    # candidate vs itself on identical streams: exactly zero improvement
    assert rows[0].improvement_mean_pct == 0.0
    assert rows[0].improvement_p95_pct == 0.0


# -- CSV ---------------------------------------------------------------------


def test_write_csv_header_only(tmp_path):
    out = tmp_path / "r.csv"
    write_csv([], out)
    assert out.read_text().splitlines() == [
        "label,mean_delay_ms,p95_delay_ms,redundancy_fraction,"
        "improvement_mean_pct,improvement_p95_pct"
    ]


def test_write_csv_roundtrip(tmp_path):
    row = MetricsRow("x", 123.4567890123, 200.1, 0.25, None, -12.5)
    out = tmp_path / "r.csv"
    write_csv([row], out)
    lines = out.read_text().splitlines()
    assert len(lines) == 2
    cells = lines[1].split(",")
    assert cells[0] == "x"
    assert float(cells[1]) == pytest.approx(row.mean_delay_ms, rel=1e-6)
    assert cells[4] == ""
    assert float(cells[5]) == pytest.approx(-12.5, rel=1e-6)


# -- config files ------------------------------------------------------------


def test_parse_config(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text(CONFIG_TEXT)
    cfg = parse_config(f)
    assert cfg.scheduler == "sos"
    assert cfg.object_size == 20
    assert len(cfg.paths) == 2
    assert cfg.paths[1].propagation_ms == 2.0


def test_parse_config_unknown_key(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text("bogus = 1\n\n[path]\nkind = deterministic\nmean_ms = 1\n")
    with pytest.raises(ConfigError):
        parse_config(f)


def test_parse_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.cfg")


def test_parse_config_requires_paths(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text("object_size = 5\n")
    with pytest.raises(ConfigError):
        parse_config(f)


# -- CLI ---------------------------------------------------------------------


@pytest.fixture
def config_file(tmp_path):
    f = tmp_path / "exp.cfg"
    f.write_text(CONFIG_TEXT)
    return f


def test_cli_run(config_file, tmp_path, capsys):
    out = tmp_path / "out.csv"
    assert main(["run", "--config", str(config_file), "--out", str(out)]) == 0
    assert out.read_text().startswith("label,")


def test_cli_run_stdout(config_file, capsys):
    assert main(["run", "--config", str(config_file)]) == 0
    assert capsys.readouterr().out.startswith("label,")


def test_cli_sweep_deterministic_bytes(config_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--config", str(config_file), "--axis", "sigma",
            "--values", "1,5", "--axis-path", "1", "--baseline", "edf"]
    assert main(args + ["--out", str(a)]) == 0
    assert main(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_page(config_file, tmp_path):
    page = tmp_path / "page.csv"
    page.write_text("html,2,1,c1,1,t0\nimg,3,0,c2,0,dep:html:1\n")
    out = tmp_path / "out.csv"
    rc = main(["page", "--config", str(config_file), "--page-spec", str(page),
               "--out", str(out), "--ordering", "priority"])
    assert rc == 0
    assert len(out.read_text().splitlines()) == 2


def test_cli_page_estimated_mode(config_file, tmp_path):
    page = tmp_path / "page.csv"
    page.write_text("html,2,1,c1,1,t0\nimg,3,0,c2,0,dep:html:1\n")
    out = tmp_path / "out.csv"
    rc = main(["page", "--config", str(config_file), "--page-spec", str(page),
               "--mode", "estimated", "--out", str(out)])
    assert rc == 0
    assert len(out.read_text().splitlines()) == 2


def test_cli_bad_config_exit_code(tmp_path, capsys):
    f = tmp_path / "bad.cfg"
    f.write_text("nonsense\n")
    assert main(["run", "--config", str(f)]) == 2
    assert "error:" in capsys.readouterr().err


def test_cli_seed_override(config_file, capsys):
    assert main(["run", "--config", str(config_file), "--seed", "99"]) == 0
    out1 = capsys.readouterr().out
    assert main(["run", "--config", str(config_file), "--seed", "99"]) == 0
    assert capsys.readouterr().out == out1
