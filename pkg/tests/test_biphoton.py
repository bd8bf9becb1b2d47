import math
import warnings

from hypothesis import given, strategies as st
from scipy.integrate import quad
import numpy as np
import pytest

from backwave import units
from backwave.biphoton import (
    Calibration,
    biphoton_linewidth,
    biphoton_report,
    brightness,
    brightness_per_mw,
    coefficients,
    coherence_time,
    correlation_time,
    freespace_kappa,
    g2,
    g2_fourier,
    kappa1_from_pump,
    numerical_linewidth,
    pair_rate,
    pair_rate_quadrature,
    resonant_vs_forward_ratio,
    spectral_density,
    spectrum,
    spectrum_grid,
)
from backwave.cavity import DecayRates
from backwave.errors import GainTooLargeWarning, IncompatibleNormalization, MissingCalibration, PhysicsError, ZeroDecay
from backwave.phasematch import FreespaceReport, Geometry

KAPPA1 = 0.01


def grid_coefficients(rates, kappa1=KAPPA1, window=40.0, points=40001):
    Omega_q, Omega_r = 1e3, 2e3
    return coefficients(rates, kappa1, Omega_q, Omega_r, spectrum_grid(rates, Omega_q, window, points))


def test_spectrum_identity(lossy_rates):
    coeffs = grid_coefficients(lossy_rates)
    density, _ = spectrum(coeffs)
    closed = spectral_density(lossy_rates, KAPPA1, coeffs.signal_detuning, coeffs.idler_detuning)

    assert np.allclose(density, closed, rtol=1e-12, atol=0)


def test_coefficient_relations(lossless_rates):
    coeffs = grid_coefficients(lossless_rates, points=101)

    assert np.allclose(coeffs.C1, -coeffs.B1, rtol=1e-15)
    assert np.allclose(np.abs(coeffs.A1), 1.0, rtol=1e-12)
    assert np.allclose(np.abs(coeffs.D1), 1.0, rtol=1e-12)
    assert not coeffs.gain_too_large


def test_double_resonance_detunings(lossless_rates):
    coeffs = grid_coefficients(lossless_rates, points=11)
    assert np.allclose(coeffs.idler_detuning, -coeffs.signal_detuning, atol=1e-9)


def test_pair_rate_is_spectrum_integral(lossy_rates):
    coeffs = grid_coefficients(lossy_rates)
    assert pair_rate_quadrature(coeffs) == pytest.approx(pair_rate(lossy_rates, KAPPA1), rel=1e-3)


def test_closed_form_linewidth_matches_scan(lossy_rates):
    coeffs = grid_coefficients(lossy_rates)
    assert numerical_linewidth(coeffs) == pytest.approx(biphoton_linewidth(lossy_rates), rel=5e-3)


def test_equal_decay_linewidth():
    rates = DecayRates(1e3, 1e3, 2.0, 2.0, 2.0, 2.0)
    assert biphoton_linewidth(rates) == pytest.approx(2.0 * math.sqrt(math.sqrt(2) - 1), rel=1e-12)


def test_linewidth_narrower_than_either_mode(lossy_rates):
    assert biphoton_linewidth(lossy_rates) < min(lossy_rates.Gamma_s, lossy_rates.Gamma_i)


@given(st.floats(min_value=0.1, max_value=10.0), st.floats(min_value=0.1, max_value=10.0))
def test_linewidth_symmetric_in_bands(Gs, Gi):
    a = DecayRates(1e3, 1e3, Gs, Gi, Gs, Gi)
    b = DecayRates(1e3, 1e3, Gi, Gs, Gi, Gs)
    assert biphoton_linewidth(a) == pytest.approx(biphoton_linewidth(b), rel=1e-12)


def test_lossless_pair_rate(lossless_rates):
    expected = 4 * KAPPA1**2 / (lossless_rates.Gamma_s + lossless_rates.Gamma_i)
    assert pair_rate(lossless_rates, KAPPA1) == pytest.approx(expected, rel=1e-14)


def test_g2_integrates_to_pair_rate(lossless_rates):
    total, _ = quad(lambda t: float(g2(lossless_rates, KAPPA1, t)), -np.inf, 0, epsabs=1e-14)
    right, _ = quad(lambda t: float(g2(lossless_rates, KAPPA1, t)), 0, np.inf, epsabs=1e-14)

    assert total + right == pytest.approx(pair_rate(lossless_rates, KAPPA1), rel=1e-9)


def test_g2_shape(lossy_rates):
    rates = lossy_rates
    t = 0.7
    assert float(g2(rates, KAPPA1, -t)) == pytest.approx(float(g2(rates, KAPPA1, 0.0)) * math.exp(-rates.Gamma_s * t))
    assert float(g2(rates, KAPPA1, t)) == pytest.approx(float(g2(rates, KAPPA1, 0.0)) * math.exp(-rates.Gamma_i * t))
    assert float(g2(rates, KAPPA1, -1e-15)) == pytest.approx(float(g2(rates, KAPPA1, 0.0)), rel=1e-12)


def test_g2_accidentals(lossy_rates):
    base = g2(lossy_rates, KAPPA1, [0.0, 100.0])
    with_background = g2(lossy_rates, KAPPA1, [0.0, 100.0], include_accidentals=True)

    assert np.allclose(with_background - base, pair_rate(lossy_rates, KAPPA1) ** 2)


def test_correlation_time_is_g2_fwhm(lossy_rates):
    tau = np.linspace(-10, 10, 200001)
    values = g2(lossy_rates, KAPPA1, tau)
    above = tau[values >= values.max() / 2]

    assert above[-1] - above[0] == pytest.approx(correlation_time(lossy_rates), rel=1e-3)
    assert correlation_time(lossy_rates) == pytest.approx(math.log(2) * coherence_time(lossy_rates))


def test_g2_fourier_matches_closed_form(lossless_rates):
    tau = np.array([-4.0, -1.3, -0.2, 0.0, 0.25, 1.0, 3.5])
    closed = g2(lossless_rates, KAPPA1, tau)
    numeric = g2_fourier(lossless_rates, KAPPA1, tau)

    assert np.allclose(numeric, closed, rtol=1e-6, atol=0)


def test_default_scenario_scalars(source):
    report = biphoton_report(source.rates, source.kappa1, source.pair.Omega_q, source.pair.Omega_r, source.pump_power, source.omega_pump)

    assert units.rad_s_to_mhz(report.linewidth) == pytest.approx(1.7615, rel=1e-3)
    assert report.rate == pytest.approx(1.7013e8 * 0.77e-3, rel=1e-9)
    assert units.s_to_ns(report.correlation_time) == pytest.approx(80.6, rel=2e-3)
    assert report.brightness == pytest.approx(report.rate / 1.7615, rel=1e-3)
    assert report.brightness_per_mw == pytest.approx(report.brightness / 0.77, rel=1e-12)
    assert report.purity < 0.1
    assert not report.gain_too_large
    assert np.max(report.normalized_g2) == pytest.approx(1.0)


def test_kappa1_scales_with_sqrt_power(lossless_rates):
    cal = Calibration(rate_per_watt=1e5)
    k1 = kappa1_from_pump(1e-3, cal, lossless_rates)
    k4 = kappa1_from_pump(4e-3, cal, lossless_rates)

    assert abs(k4) == pytest.approx(2 * abs(k1), rel=1e-14)
    assert pair_rate(lossless_rates, k1) == pytest.approx(1e5 * 1e-3, rel=1e-12)


@given(st.floats(min_value=1e-6, max_value=1.0))
def test_pair_rate_linear_in_power(lossy_rates, power):
    cal = Calibration(rate_per_watt=2e6)
    rate = pair_rate(lossy_rates, kappa1_from_pump(power, cal, lossy_rates))
    reference = pair_rate(lossy_rates, kappa1_from_pump(1.0, cal, lossy_rates))

    assert rate == pytest.approx(reference * power, rel=1e-10)


def test_loss_lowers_rate_not_coupling(lossless_rates, lossy_rates):
    cal = Calibration(rate_per_watt=1e5)
    lossless = kappa1_from_pump(1e-3, cal, lossless_rates)
    lossy = kappa1_from_pump(1e-3, cal, lossy_rates)

    assert lossy == lossless
    assert pair_rate(lossy_rates, lossy) < pair_rate(lossless_rates, lossless)


def test_explicit_kappa1_calibration():
    cal = Calibration(kappa1=3.0, reference_power=1e-3)
    assert abs(kappa1_from_pump(4e-3, cal)) == pytest.approx(6.0)
    assert abs(kappa1_from_pump(4e-3, Calibration(kappa1=3.0))) == pytest.approx(3.0)


def test_phase_mismatch_reduces_coupling(lossless_rates):
    cal = Calibration(kappa1=1.0)
    length = 0.03
    mismatched = kappa1_from_pump(1e-3, cal, lossless_rates, delta_k_prime=math.pi / length, length=length)

    assert abs(mismatched) == pytest.approx(2 / math.pi, rel=1e-12)
    assert np.angle(mismatched) == pytest.approx(math.pi / 2)

    with pytest.raises(PhysicsError):
        kappa1_from_pump(1e-3, cal, delta_k_prime=1.0)


@pytest.mark.parametrize(
    "kwargs",
    [{}, {"rate_per_watt": 1.0, "kappa1": 1.0}, {"rate_per_watt": -1.0}, {"kappa1": 1.0, "reference_power": 0.0}],
)
def test_invalid_calibration(kwargs):
    with pytest.raises(MissingCalibration) as e:
        Calibration(**kwargs)

    assert e.value.exit_code == 2


def test_rate_calibration_needs_rates():
    with pytest.raises(MissingCalibration):
        kappa1_from_pump(1e-3, Calibration(rate_per_watt=1.0))


def test_gain_too_large_warning(lossless_rates):
    with pytest.warns(GainTooLargeWarning):
        coeffs = coefficients(lossless_rates, 0.5, 1e3, 2e3, [1e3])

    assert coeffs.gain_too_large

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        coefficients(lossless_rates, 0.1, 1e3, 2e3, [1e3])


def test_zero_decay():
    rates = DecayRates(1e3, 1e3, 0.0, 0.0, 0.0, 0.0)
    with pytest.raises(ZeroDecay):
        pair_rate(rates, 1.0)

    with pytest.raises(ZeroDecay):
        coefficients(rates, 1.0, 1e3, 2e3, [1e3])


def test_brightness_units():
    linewidth = units.mhz_to_rad_s(2.0)
    assert brightness(1e5, linewidth) == pytest.approx(5e4)
    assert brightness_per_mw(1e5, linewidth, 0.5e-3) == pytest.approx(1e5)

    with pytest.raises(PhysicsError):
        brightness(1e5, 0.0)


def test_freespace_kappa():
    assert freespace_kappa(2.0 + 0j, 1.0e8, 4.0e8) == pytest.approx(4 * 2.0 / 2.0e8)


def test_resonant_vs_forward_normalization():
    report = FreespaceReport(Geometry.FORWARD, rate=10.0, linewidth=100.0, pump_power=1e-3)
    resonant = FreespaceReport(Geometry.BACKWARD, rate=20.0, linewidth=2.0, pump_power=1e-3)
    assert resonant_vs_forward_ratio(resonant, report) == pytest.approx(100.0)

    other = FreespaceReport(Geometry.FORWARD, rate=10.0, linewidth=100.0, pump_power=2e-3)
    with pytest.raises(IncompatibleNormalization):
        resonant_vs_forward_ratio(resonant, other)


def test_loss_keeps_reflection_below_unity(lossy_rates):
    coeffs = grid_coefficients(lossy_rates, points=2001)

    assert np.all(np.abs(coeffs.A1) < 1)
    assert np.all(np.abs(coeffs.D1) < 1)


@given(st.floats(min_value=0.1, max_value=5.0))
def test_coupling_scaling(lossy_rates, scale):
    base = grid_coefficients(lossy_rates, points=4001)
    scaled = grid_coefficients(lossy_rates, kappa1=scale * KAPPA1, points=4001)
    density, width = spectrum(base)
    scaled_density, scaled_width = spectrum(scaled)

    assert np.allclose(scaled_density, scale**2 * density, rtol=1e-12, atol=0)
    assert scaled_width == width
    assert np.argmax(scaled_density) == np.argmax(density)
    assert numerical_linewidth(scaled) == pytest.approx(numerical_linewidth(base), rel=1e-9)

    tau = np.linspace(-5, 5, 1001)
    values = g2(lossy_rates, KAPPA1, tau)
    scaled_values = g2(lossy_rates, scale * KAPPA1, tau)
    assert np.allclose(scaled_values, scale**2 * values, rtol=1e-12, atol=0)

    above = tau[values >= values.max() / 2]
    scaled_above = tau[scaled_values >= scaled_values.max() / 2]
    assert scaled_above[-1] - scaled_above[0] == pytest.approx(above[-1] - above[0])
