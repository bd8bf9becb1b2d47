import re

import pytest

from backwave.biphoton import pair_rate
from backwave.config import (
    DATA_DIR,
    apply_overrides,
    build_calibration,
    build_cavity,
    build_crystal,
    config_from_mapping,
    load_config,
    pump_omega,
    pump_power,
)
from backwave.errors import ConfigError, MissingCalibration, UnsupportedSetting
from backwave.source import build_source, design


def test_default_config(default_config):
    assert default_config.crystal.length_cm == 3.0
    assert default_config.crystal.qpm_order == 3
    assert default_config.pump.power_mw == 0.77
    assert default_config.calibration.rate_per_watt == 1.7013e8
    assert re.fullmatch(r"[0-9a-f]{12}", default_config.config_hash())


def test_units_converted_once(default_config):
    crystal = build_crystal(default_config)

    assert crystal.length == pytest.approx(0.03)
    assert crystal.poling_period is None
    assert pump_power(default_config) == pytest.approx(0.77e-3)
    assert pump_omega(default_config) == pytest.approx(3.5408e15, rel=1e-4)


def test_echo_round_trip_keeps_hash(default_config):
    again = config_from_mapping(default_config.echo())
    assert again.config_hash() == default_config.config_hash()


def test_unknown_key(default_config):
    data = default_config.echo()
    data["pump"]["colour"] = "green"

    with pytest.raises(ConfigError) as e:
        config_from_mapping(data)

    assert "pump.colour" in str(e.value)
    assert e.value.exit_code == 2


def test_temperature_unsupported():
    with pytest.raises(UnsupportedSetting):
        load_config(overrides=["crystal.temperature_c=25"])


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.yaml")


@pytest.mark.parametrize("text", ["crystal: [", "- 1\n- 2\n"])
def test_malformed_file(tmp_path, text):
    path = tmp_path / "bad.yaml"
    path.write_text(text)

    with pytest.raises(ConfigError):
        load_config(path)


def test_overrides_change_hash(default_config):
    cfg = load_config(overrides=["pump.power_mw=1.5", "events.seed=7"])

    assert cfg.pump.power_mw == 1.5
    assert cfg.events.seed == 7
    assert cfg.config_hash() != default_config.config_hash()


def test_override_creates_section():
    data = apply_overrides({}, ["grids.tau.window=8"])
    assert data == {"grids": {"tau": {"window": 8}}}


@pytest.mark.parametrize("override", ["pump.power_mw", "=3", "pump.power_mw=abc", "pump.wavelength_nm.x=1"])
def test_bad_override(override):
    with pytest.raises(ConfigError):
        load_config(overrides=[override])


def test_negative_power_rejected():
    with pytest.raises(ConfigError):
        load_config(overrides=["pump.power_mw=-1"])


def test_mixed_mode_indices():
    cfg = load_config(overrides=["cavity.mode_index.signal=100000"])
    with pytest.raises(ConfigError):
        build_cavity(cfg)


def test_explicit_mode_indices(source):
    cfg = load_config(
        overrides=[f"cavity.mode_index.signal={source.pair.q}", f"cavity.mode_index.idler={source.pair.r}"]
    )
    cavity = build_cavity(cfg)

    assert cavity.mode_index_signal == source.pair.q
    assert cavity.mode_index_idler == source.pair.r


def test_both_calibrations():
    cfg = load_config(overrides=["calibration.kappa1_mhz=1.0"])
    with pytest.raises(MissingCalibration):
        build_calibration(cfg)


def test_dispersion_file_beside_config(tmp_path):
    (tmp_path / "custom.yaml").write_text((DATA_DIR / "ktp.yaml").read_text())
    config = tmp_path / "source.yaml"
    config.write_text((DATA_DIR / "default.yaml").read_text().replace("ktp.yaml", "custom.yaml"))

    crystal = design(load_config(config))
    assert crystal.poling_period == pytest.approx(871.4e-9, rel=1e-3)

    with pytest.raises(ConfigError):
        build_crystal(load_config(config, overrides=["crystal.dispersion=missing.yaml"]))


def test_lossy_config_keeps_coupling(source):
    lossy = build_source(load_config(DATA_DIR / "lossy.yaml"))

    assert lossy.kappa1 == pytest.approx(source.kappa1, rel=1e-12)
    assert lossy.rates.Gamma_s == pytest.approx(1.5 * lossy.rates.gamma_s, rel=1e-9)
    assert pair_rate(lossy.rates, lossy.kappa1) == pytest.approx(pair_rate(source.rates, source.kappa1) / 1.5**3, rel=1e-9)
