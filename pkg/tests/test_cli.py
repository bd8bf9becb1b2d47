from click.testing import CliRunner
import pytest

from backwave import subcommands
from backwave.cli import cli
from backwave.config import DATA_DIR, config_from_mapping
from backwave.report import read_csv, read_yaml


@pytest.fixture
def runner():
    return CliRunner()


def summary(path):
    table = read_csv(path)
    return dict(zip(table["quantity"], table["conventional_value"]))


def test_design(runner, tmp_path):
    result = runner.invoke(cli, ["design", "--out", str(tmp_path)])

    assert result.exit_code == 0, result.output
    values = summary(tmp_path / "design_summary.csv")
    assert 871 <= values["poling_period"] <= 872
    assert (tmp_path / "design.csv").read_text().startswith("# config_hash: ")


def test_missing_config(runner, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(cli, ["design", "--config", str(tmp_path / "missing.yaml"), "--out", str(out)])

    assert result.exit_code == 2
    assert "error[config]" in result.output
    assert not out.exists()


def test_bad_override(runner, tmp_path):
    result = runner.invoke(cli, ["cavity", "--out", str(tmp_path), "--override", "cavity.colour=red"])
    assert result.exit_code == 2


def test_pump_out_of_range(runner, tmp_path):
    result = runner.invoke(cli, ["design", "--out", str(tmp_path), "--override", "pump.wavelength_nm=300"])

    assert result.exit_code == 3
    assert "error[out_of_range]" in result.output


@pytest.mark.parametrize("index", ["200000", "10000000"])
def test_explicit_mode_index_out_of_range(runner, tmp_path, index):
    overrides = ["--override", f"cavity.mode_index.signal={index}", "--override", f"cavity.mode_index.idler={index}"]
    result = runner.invoke(cli, ["cavity", "--out", str(tmp_path)] + overrides)

    assert result.exit_code == 3
    assert "error[out_of_range]" in result.output
    assert result.exception is None or isinstance(result.exception, SystemExit)


def test_unwritable_output(runner, tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    result = runner.invoke(cli, ["design", "--out", str(blocker)])

    assert result.exit_code == 2
    assert "error[io_error]" in result.output


def test_failed_check_exits_with_verification_code(runner, tmp_path, monkeypatch):
    def failing(cfg, verify=False, seed=None):
        return subcommands.Result("design", checks=[subcommands.Check("forced", 1.0, 0.5)])

    monkeypatch.setitem(subcommands.SUBCOMMANDS, "design", failing)
    result = runner.invoke(cli, ["design", "--out", str(tmp_path), "--verify"])

    assert result.exit_code == 4
    assert "error[tolerance_exceeded]" in result.output
    verify = read_csv(tmp_path / "design_verify.csv")
    assert not verify["passed"].any()


def test_oracle_is_hidden(runner):
    result = runner.invoke(cli, ["--help"])

    assert result.exit_code == 0
    for name in ("dispersion", "design", "freespace", "cavity", "biphoton", "g2", "events", "report"):
        assert name in result.output
    assert "oracle" not in result.output


def test_cavity_verify(runner, tmp_path):
    result = runner.invoke(cli, ["cavity", "--out", str(tmp_path), "--verify"])

    assert result.exit_code == 0, result.output
    values = summary(tmp_path / "cavity_summary.csv")
    assert values["cluster_spacing"] == pytest.approx(1.76, rel=0.05)
    assert values["single_mode"] == 1
    assert read_csv(tmp_path / "cavity_verify.csv")["passed"].all()


def test_freespace_verify_covers_sinc_zero(runner, tmp_path):
    result = runner.invoke(cli, ["freespace", "--out", str(tmp_path), "--verify"])

    assert result.exit_code == 0, result.output
    checks = read_csv(tmp_path / "freespace_verify.csv").set_index("check")
    assert checks.loc["spatial_oracle_sinc_zero", "passed"]
    assert checks.loc["spatial_oracle_sinc_zero", "deviation"] < 1e-8


def test_biphoton_is_reproducible(runner, tmp_path):
    for name in ("a", "b"):
        result = runner.invoke(cli, ["biphoton", "--out", str(tmp_path / name)])
        assert result.exit_code == 0, result.output

    for artifact in ("spectrum.csv", "spectrum.svg", "biphoton_summary.csv", "biphoton.yaml"):
        assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


def test_report_scalars(runner, tmp_path):
    result = runner.invoke(cli, ["report", "--out", str(tmp_path)])

    assert result.exit_code == 0, result.output
    values = summary(tmp_path / "report_summary.csv")
    assert values["biphoton_linewidth"] == pytest.approx(1.7615, rel=1e-3)
    assert values["pair_rate"] == pytest.approx(1.31e5, rel=1e-3)
    assert values["correlation_time"] == pytest.approx(80.6, rel=2e-3)
    assert values["gain_linewidth_backward"] == pytest.approx(2.4225, rel=2e-3)
    assert values["backward_forward_ratio"] == pytest.approx(38.6, rel=0.01)
    assert 4e4 <= values["resonant_vs_forward_brightness_ratio"] <= 1.6e5


def test_report_echo_round_trip(runner, tmp_path):
    result = runner.invoke(cli, ["report", "--out", str(tmp_path), "--override", "pump.power_mw=1.0"])
    assert result.exit_code == 0, result.output

    document = read_yaml(tmp_path / "report.yaml")
    echoed = config_from_mapping(document["config"])

    assert echoed.pump.power_mw == 1.0
    assert echoed.config_hash() == document["config_hash"]


def test_events_seed(runner, tmp_path):
    args = ["events", "--override", "events.duration_s=0.05"]
    for name, seed in (("a", "3"), ("b", "3"), ("c", "4")):
        result = runner.invoke(cli, args + ["--out", str(tmp_path / name), "--seed", seed])
        assert result.exit_code == 0, result.output

    first = (tmp_path / "a" / "events.csv").read_bytes()
    assert first == (tmp_path / "b" / "events.csv").read_bytes()
    assert first != (tmp_path / "c" / "events.csv").read_bytes()
    assert b"# seed: 3\n" in first


@pytest.mark.slow
def test_events_verify(runner, tmp_path):
    result = runner.invoke(cli, ["events", "--out", str(tmp_path), "--verify"])

    assert result.exit_code == 0, result.output
    assert read_csv(tmp_path / "events_verify.csv")["passed"].all()


@pytest.mark.slow
@pytest.mark.parametrize("config", [None, "lossy.yaml"])
def test_biphoton_verify(runner, tmp_path, config):
    args = ["biphoton", "--out", str(tmp_path), "--verify"]
    if config:
        args += ["--config", str(DATA_DIR / config)]
    result = runner.invoke(cli, args)

    assert result.exit_code == 0, result.output
