from dataclasses import replace
import math

import numpy as np
import pytest

from backwave import units
from backwave.biphoton import coefficients
from backwave.cavity import DecayRates
from backwave.errors import NotConverged, PhysicsError, ZeroDecay
from backwave.oracle import (
    Integrator,
    SeededRun,
    cavity_transfer_oracle,
    seeded_transfer,
    spatial_coupling_oracle,
    spatial_transfer,
    sweep_transfer,
    transfer_deviation,
)
from backwave.phasematch import Geometry, degenerate_signal, freespace_coefficients, spectral_zero

OMEGA_P = float(units.wavelength_to_omega(532e-9))
OMEGA_Q = 1e3
OMEGA_R = 2e3


def closed_form(rates, kappa1, detunings):
    coeffs = coefficients(rates, kappa1, OMEGA_Q, OMEGA_R, OMEGA_Q + np.asarray(detunings))
    return coeffs.A1, coeffs.C1


@pytest.mark.parametrize("rates_fixture", ["lossless_rates", "lossy_rates"])
def test_seeded_runs_match_closed_form(request, rates_fixture):
    rates = request.getfixturevalue(rates_fixture)
    kappa1 = 1e-4 * min(rates.Gamma_s, rates.Gamma_i)
    detunings = np.linspace(-3, 3, 7) * max(rates.Gamma_s, rates.Gamma_i)

    results = [seeded_transfer(rates, kappa1, SeededRun(detuning=float(d))) for d in detunings]
    A1, C1 = closed_form(rates, kappa1, detunings)

    assert transfer_deviation(results, A1, C1) < 1e-6
    assert all(r.drift <= 1e-9 for r in results)


def test_lossless_seeded_output_keeps_seed_power(lossless_rates):
    signal, idler = cavity_transfer_oracle(lossless_rates, 1e-4, SeededRun(detuning=0.3))
    assert abs(signal) == pytest.approx(1.0, rel=1e-6)
    assert abs(idler) < 1e-3


def test_adaptive_integrator_agrees(lossy_rates):
    kappa1 = 1e-4
    run = SeededRun(detuning=-0.8, integrator=Integrator.ADAPTIVE)
    result = seeded_transfer(lossy_rates, kappa1, run)
    A1, C1 = closed_form(lossy_rates, kappa1, [-0.8])

    assert transfer_deviation([result], A1, C1) < 1e-6


def test_seed_amplitude_scales_outputs(lossy_rates):
    unit = seeded_transfer(lossy_rates, 1e-4, SeededRun(detuning=0.5))
    scaled = seeded_transfer(lossy_rates, 1e-4, SeededRun(detuning=0.5, seed_amplitude=2j))

    assert scaled.signal_ratio == pytest.approx(unit.signal_ratio, rel=1e-9)
    assert scaled.idler_ratio == pytest.approx(unit.idler_ratio, rel=1e-9)


def test_too_short_to_settle(lossless_rates):
    with pytest.raises(NotConverged) as e:
        seeded_transfer(lossless_rates, 1e-4, SeededRun(detuning=0.0, duration=25.0))

    assert e.value.details["drift"] > 1e-9
    assert e.value.exit_code == 4


def test_duration_below_minimum(lossless_rates):
    with pytest.raises(PhysicsError):
        seeded_transfer(lossless_rates, 1e-4, SeededRun(detuning=0.0, duration=1.0))


def test_step_above_bound(lossless_rates):
    with pytest.raises(PhysicsError):
        seeded_transfer(lossless_rates, 1e-4, SeededRun(detuning=0.0, step=1.0))


def test_resolved_defaults(lossy_rates):
    run = SeededRun(detuning=4.0).resolved(lossy_rates)

    assert run.duration == pytest.approx(60 / 1.4)
    assert run.step == pytest.approx(1 / (50 * 4.0))


def test_zero_decay_rejected():
    rates = DecayRates(1e3, 1e3, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ZeroDecay):
        seeded_transfer(rates, 1e-4, SeededRun(detuning=0.0))


def test_sweep_table(lossy_rates):
    table = sweep_transfer(lossy_rates, 1e-4, [-1.0, 0.0, 1.0])

    assert list(table.columns) == [
        "detuning_rad_s",
        "signal_ratio_re",
        "signal_ratio_im",
        "idler_ratio_re",
        "idler_ratio_im",
        "drift",
    ]
    assert len(table) == 3
    assert table["signal_ratio_re"][0] == pytest.approx(table["signal_ratio_re"][2], rel=1e-6)


def test_trace_is_sampled(lossy_rates):
    result = seeded_transfer(lossy_rates, 1e-4, SeededRun(detuning=0.0))

    assert len(result.trace) <= 200
    assert result.trace["time_s"].iloc[0] == 0
    assert result.trace["signal_out_abs"].iloc[-1] == pytest.approx(abs(result.signal_out))


def test_spatial_oracle_matches_small_gain(crystal):
    kappa = 1e-5 / crystal.length
    center = degenerate_signal(OMEGA_P)
    omega = center + np.array([-2e9, 0.0, 5e9])
    closed = freespace_coefficients(crystal, kappa, omega, OMEGA_P)

    for k, w in enumerate(omega):
        t = spatial_transfer(crystal, kappa, float(w), OMEGA_P)
        for name in ("A", "B", "C", "D"):
            expected = getattr(closed, name)[k]
            assert abs(getattr(t, name) - expected) <= 1e-8 * abs(expected)


def test_spatial_oracle_phase_matched_gain(crystal):
    kappa = 0.5 / crystal.length
    t = spatial_transfer(crystal, kappa, degenerate_signal(OMEGA_P), OMEGA_P)

    assert abs(t.B) == pytest.approx(math.tan(0.5), rel=1e-8)
    assert abs(t.C) == pytest.approx(math.tan(0.5), rel=1e-8)
    assert abs(t.D) == pytest.approx(1 / math.cos(0.5), rel=1e-8)


def test_spatial_oracle_is_linear_in_seeds(crystal):
    kappa = 1e-3 / crystal.length
    omega = degenerate_signal(OMEGA_P) + 1e9
    t = spatial_transfer(crystal, kappa, omega, OMEGA_P)
    signal, idler = spatial_coupling_oracle(crystal, kappa, omega, OMEGA_P, signal_seed=2.0, idler_seed=1j)

    assert signal == pytest.approx(2 * t.A + 1j * t.B)
    assert idler == pytest.approx(2 * t.C + 1j * t.D)


def test_spatial_oracle_rejects_forward(crystal):
    with pytest.raises(PhysicsError):
        spatial_transfer(replace(crystal, geometry=Geometry.FORWARD), 1.0, degenerate_signal(OMEGA_P), OMEGA_P)


def test_spatial_oracle_at_sinc_zero(crystal):
    kappa = 1e-5 / crystal.length
    omega = spectral_zero(crystal, OMEGA_P)
    t = spatial_transfer(crystal, kappa, omega, OMEGA_P)
    closed = freespace_coefficients(crystal, kappa, omega, OMEGA_P)

    assert abs(t.B) < 1e-8
    assert abs(t.C) < 1e-8
    assert abs(t.B - complex(closed.B)) < 1e-8
    assert abs(t.A - complex(closed.A)) <= 1e-8
    assert abs(t.D - complex(closed.D)) <= 1e-8
