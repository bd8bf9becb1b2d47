"""
Biphotons of the doubly resonant backward-wave source: input-output coefficients of the paired
cavity modes, signal spectrum and linewidth, pair rate, Glauber correlation function and
spectral brightness.

Frequencies are absolute angular frequencies [rad/s]; the idler partner of a signal at omega is
omega_i = omega_p - omega.
"""
from dataclasses import dataclass, field
from typing import Optional, Tuple
import logging
import math
import warnings

from scipy.constants import pi
from scipy.integrate import quad
import numpy as np

from backwave.cavity import DecayRates
from backwave.errors import (
    GainTooLargeWarning,
    IncompatibleNormalization,
    MissingCalibration,
    PhysicsError,
    ZeroDecay,
)
from backwave.phasematch import sinc
from backwave import spectral, units

logger = logging.getLogger(__name__)

LN2 = math.log(2)
SMALL_GAIN_RATIO = 0.3
SPECTRUM_WINDOW = 40.0
SPECTRUM_POINTS = 4001
TAU_WINDOW = 5.0
TAU_POINTS = 2001
FOURIER_EPSABS = 1e-13


@dataclass(frozen=True)
class Calibration:
    """
    Absolute scale of the cavity coupling.

    Either rate_per_watt, the pair rate per watt of pump that the mirror-limited cavity produces at
    exact phase matching, or an explicit kappa1 [rad/s] at reference_power [W] (any power if None).
    """
    rate_per_watt: Optional[float] = None
    kappa1: Optional[float] = None
    reference_power: Optional[float] = None

    def __post_init__(self) -> None:
        if self.rate_per_watt is None and self.kappa1 is None:
            raise MissingCalibration("Calibration needs either rate_per_watt or an explicit kappa1.")

        if self.rate_per_watt is not None and self.kappa1 is not None:
            raise MissingCalibration("Calibration takes rate_per_watt or kappa1, not both.")

        if self.rate_per_watt is not None and not self.rate_per_watt >= 0:
            raise MissingCalibration(f"rate_per_watt must be non-negative, got {self.rate_per_watt}.")

        if self.reference_power is not None and not self.reference_power > 0:
            raise MissingCalibration(f"Reference pump power must be positive, got {self.reference_power}.")


@dataclass(frozen=True)
class PairedModeCoefficients:
    """
    A1..D1 relating the output signal and conjugate idler to their inputs, on a signal frequency grid.
    """
    omega: np.ndarray
    A1: np.ndarray
    B1: np.ndarray
    C1: np.ndarray
    D1: np.ndarray
    kappa1: complex
    Omega_q: float
    Omega_r: float
    omega_pump: float
    rates: DecayRates = field(repr=False)
    gain_too_large: bool = False

    @property
    def signal_detuning(self) -> np.ndarray:
        return self.omega - self.Omega_q

    @property
    def idler_detuning(self) -> np.ndarray:
        return self.omega_pump - self.omega - self.Omega_r


@dataclass(frozen=True)
class BiphotonReport:
    """
    Spectral and temporal observables of the resonant source. Rates in rad/s, times in s.
    """
    omega: np.ndarray = field(repr=False)
    spectrum: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)
    g2: np.ndarray = field(repr=False)
    linewidth: float
    rate: float
    correlation_time: float
    coherence_time: float
    accidentals: float
    pump_power: float
    kappa1: complex
    gain_too_large: bool = False

    @property
    def brightness(self) -> float:
        """
        Pairs per second per MHz of biphoton linewidth.
        """
        return brightness(self.rate, self.linewidth)

    @property
    def brightness_per_mw(self) -> float:
        return brightness_per_mw(self.rate, self.linewidth, self.pump_power)

    @property
    def purity(self) -> float:
        """
        Pairs per coherence time, R1 (1/Gamma_s + 1/Gamma_i).
        """
        return self.rate * self.coherence_time

    @property
    def normalized_g2(self) -> np.ndarray:
        peak = np.max(self.g2)
        return self.g2 / peak if peak > 0 else np.zeros_like(self.g2)


def kappa1_from_pump(
    pump_power: float,
    calibration: Calibration,
    rates: DecayRates = None,
    delta_k_prime: float = 0.0,
    length: float = None,
) -> complex:
    """
    Cavity coupling kappa1 [rad/s] at the given pump power.

    |kappa1| scales as sqrt(P) |sinc(dk' L / 2)| and carries the phase exp(i dk' L / 2). A rate
    calibration is back-solved through the pair-rate formula of the mirror-limited cavity, so
    intracavity loss lowers the rate but leaves kappa1 untouched.
    """
    if not pump_power >= 0:
        raise PhysicsError(f"Pump power must be non-negative, got {pump_power}.")

    if delta_k_prime and length is None:
        raise PhysicsError("A non-zero mismatch dk' needs the crystal length.")

    if calibration.kappa1 is not None:
        magnitude = abs(calibration.kappa1)
        if calibration.reference_power is not None:
            magnitude *= math.sqrt(pump_power / calibration.reference_power)
    else:
        if rates is None:
            raise MissingCalibration("A rate-per-watt calibration needs the cavity decay rates.")
        _check_decay(rates)
        magnitude = math.sqrt(calibration.rate_per_watt * pump_power * (rates.gamma_s + rates.gamma_i) / 4)

    if not delta_k_prime:
        return complex(magnitude)

    phase = delta_k_prime * length / 2
    return complex(magnitude * float(sinc(phase)) * np.exp(1j * phase))


def coefficients(
    rates: DecayRates,
    kappa1: complex,
    Omega_q: float,
    Omega_r: float,
    omega,
    omega_pump: float = None,
) -> PairedModeCoefficients:
    """
    A1(omega)..D1(omega) of the doubly resonant cavity with omega_i = omega_p - omega.

    omega_pump defaults to Omega_q + Omega_r (exact double resonance).
    """
    _check_decay(rates)
    omega_pump = Omega_q + Omega_r if omega_pump is None else omega_pump
    omega = np.asarray(omega, dtype=float)

    gain_too_large = abs(kappa1) > SMALL_GAIN_RATIO * math.sqrt(rates.Gamma_s * rates.Gamma_i) / 2
    if gain_too_large:
        warnings.warn(
            f"|kappa1| = {abs(kappa1):.4g} rad/s is not small against sqrt(Gamma_s Gamma_i)/2; "
            "small-gain coefficients are inaccurate.",
            GainTooLargeWarning,
        )

    d_s = omega - Omega_q
    d_i = omega_pump - omega - Omega_r
    signal_pole = rates.Gamma_s / 2 - 1j * d_s
    idler_pole = rates.Gamma_i / 2 + 1j * d_i
    coupling = kappa1 * math.sqrt(rates.gamma_s * rates.gamma_i) / (signal_pole * idler_pole)

    return PairedModeCoefficients(
        omega=omega,
        A1=(rates.gamma_s - rates.Gamma_s / 2 + 1j * d_s) / signal_pole,
        B1=-1j * coupling,
        C1=1j * coupling,
        D1=(rates.gamma_i - rates.Gamma_i / 2 - 1j * d_i) / idler_pole,
        kappa1=kappa1,
        Omega_q=Omega_q,
        Omega_r=Omega_r,
        omega_pump=omega_pump,
        rates=rates,
        gain_too_large=gain_too_large,
    )


def spectral_density(rates: DecayRates, kappa1: complex, signal_detuning, idler_detuning) -> np.ndarray:
    """
    S1 = 8 gamma_s gamma_i |kappa1|^2 / (pi [4 d_s^2 + Gamma_s^2][4 d_i^2 + Gamma_i^2]) [s].
    """
    _check_decay(rates)
    d_s = np.asarray(signal_detuning, dtype=float)
    d_i = np.asarray(idler_detuning, dtype=float)

    return (
        8 * rates.gamma_s * rates.gamma_i * abs(kappa1) ** 2
        / (pi * (4 * d_s**2 + rates.Gamma_s**2) * (4 * d_i**2 + rates.Gamma_i**2))
    )


def spectrum(coeffs: PairedModeCoefficients) -> Tuple[np.ndarray, float]:
    """
    Signal spectral density |B1|^2 / 2 pi on the coefficient grid, with the closed-form linewidth.
    """
    return np.abs(coeffs.B1) ** 2 / (2 * pi), biphoton_linewidth(coeffs.rates)


def biphoton_linewidth(rates: DecayRates) -> float:
    """
    FWHM of S1 at double resonance [rad/s].
    """
    _check_decay(rates)
    gs2 = rates.Gamma_s**2
    gi2 = rates.Gamma_i**2

    return math.sqrt((math.sqrt(gs2**2 + 6 * gs2 * gi2 + gi2**2) - gs2 - gi2) / 2)


def numerical_linewidth(coeffs: PairedModeCoefficients) -> float:
    """
    FWHM of |B1|^2 scanned on the coefficient grid.
    """
    density, _ = spectrum(coeffs)
    return spectral.fwhm(coeffs.omega, density)


def pair_rate(rates: DecayRates, kappa1: complex) -> float:
    """
    R1 = 4 gamma_s gamma_i |kappa1|^2 / (Gamma_s Gamma_i (Gamma_s + Gamma_i)) [1/s].
    """
    _check_decay(rates)
    return (
        4 * rates.gamma_s * rates.gamma_i * abs(kappa1) ** 2
        / (rates.Gamma_s * rates.Gamma_i * (rates.Gamma_s + rates.Gamma_i))
    )


def pair_rate_quadrature(coeffs: PairedModeCoefficients) -> float:
    """
    Trapezoid integral of |B1|^2 / 2 pi over the coefficient grid.
    """
    density, _ = spectrum(coeffs)
    return spectral.integrate(coeffs.omega, density)


def g2(rates: DecayRates, kappa1: complex, tau, include_accidentals: bool = False) -> np.ndarray:
    """
    Glauber correlation of an idler at t + tau with a signal at t [1/s^2].

    4 Gamma_s Gamma_i |kappa1|^2 / (Gamma_s + Gamma_i)^2 times exp(Gamma_s tau) for tau < 0 and
    exp(-Gamma_i tau) for tau >= 0; the constant R1^2 accidental level is added on request.
    """
    _check_decay(rates)
    tau = np.asarray(tau, dtype=float)
    peak = 4 * rates.Gamma_s * rates.Gamma_i * abs(kappa1) ** 2 / (rates.Gamma_s + rates.Gamma_i) ** 2
    shape = np.where(tau < 0, np.exp(rates.Gamma_s * np.minimum(tau, 0)), np.exp(-rates.Gamma_i * np.maximum(tau, 0)))

    result = peak * shape
    if include_accidentals:
        result = result + pair_rate(rates, kappa1) ** 2

    return result


def g2_fourier(rates: DecayRates, kappa1: complex, tau) -> np.ndarray:
    """
    |(1/2 pi) integral of A1 C1* exp(i omega tau) d omega|^2 by direct adaptive quadrature.

    Evaluated at double resonance in units of the smaller decay rate with Fourier-weighted
    quadrature on the half line, so the integrand is never sampled on a discrete grid.
    """
    _check_decay(rates)
    scale = min(rates.Gamma_s, rates.Gamma_i)
    gs, gi = rates.gamma_s / scale, rates.gamma_i / scale
    Gs, Gi = rates.Gamma_s / scale, rates.Gamma_i / scale
    coupling = math.sqrt(gs * gi)

    def integrand(x: float) -> complex:
        signal_pole = Gs / 2 - 1j * x
        A1 = (gs - Gs / 2 + 1j * x) / signal_pole
        C1 = 1j * coupling / (signal_pole * (Gi / 2 - 1j * x))
        return A1 * np.conj(C1)

    def even(x: float) -> complex:
        return integrand(x) + integrand(-x)

    def odd(x: float) -> complex:
        return integrand(x) - integrand(-x)

    values = []
    for t in np.atleast_1d(np.asarray(tau, dtype=float)) * scale:
        if t == 0:
            re = quad(lambda x: even(x).real, 0, np.inf, epsabs=FOURIER_EPSABS, limit=500)[0]
            im = quad(lambda x: even(x).imag, 0, np.inf, epsabs=FOURIER_EPSABS, limit=500)[0]
            amplitude = complex(re, im)
        else:
            w = abs(t)
            sign = math.copysign(1.0, t)
            cos_re = _fourier_quad(lambda x: even(x).real, "cos", w)
            cos_im = _fourier_quad(lambda x: even(x).imag, "cos", w)
            sin_re = _fourier_quad(lambda x: odd(x).real, "sin", w)
            sin_im = _fourier_quad(lambda x: odd(x).imag, "sin", w)
            # integral of f e^{ixt} = cos part + i sign(t) sin part
            amplitude = complex(cos_re, cos_im) + 1j * sign * complex(sin_re, sin_im)

        values.append(abs(amplitude / (2 * pi)) ** 2)

    return abs(kappa1) ** 2 * np.asarray(values).reshape(np.shape(tau))


def correlation_time(rates: DecayRates) -> float:
    """
    FWHM of G2, T_c = ln 2 (1/Gamma_s + 1/Gamma_i) [s].
    """
    _check_decay(rates)
    return LN2 * (1 / rates.Gamma_s + 1 / rates.Gamma_i)


def coherence_time(rates: DecayRates) -> float:
    _check_decay(rates)
    return 1 / rates.Gamma_s + 1 / rates.Gamma_i


def accidental_level(rates: DecayRates, kappa1: complex) -> float:
    """
    The tau-independent R1^2 background of uncorrelated pairs [1/s^2].
    """
    return pair_rate(rates, kappa1) ** 2


def brightness(rate: float, linewidth: float) -> float:
    """
    R1 / (linewidth / 2 pi in MHz) [1/s/MHz].
    """
    if not linewidth > 0:
        raise PhysicsError(f"Linewidth must be positive, got {linewidth}.")

    return rate / units.rad_s_to_mhz(linewidth)


def brightness_per_mw(rate: float, linewidth: float, pump_power: float) -> float:
    if not pump_power > 0:
        raise PhysicsError(f"Pump power must be positive, got {pump_power}.")

    return brightness(rate, linewidth) / units.w_to_mw(pump_power)


def freespace_kappa(kappa1: complex, group_velocity_signal: float, group_velocity_idler: float) -> float:
    """
    Traveling-wave coupling [1/m] of a non-resonant crystal pumped like the cavity with coupling kappa1.

    kappa = 4 |kappa1| / sqrt(v_s v_i).
    """
    return 4 * abs(kappa1) / math.sqrt(group_velocity_signal * group_velocity_idler)


def resonant_vs_forward_ratio(resonant, freespace) -> float:
    """
    Ratio of rate-per-linewidth figures of two sources at the same pump power.

    Both arguments expose rate, linewidth (rad/s) and pump_power (W).
    """
    if not math.isclose(resonant.pump_power, freespace.pump_power, rel_tol=1e-12):
        raise IncompatibleNormalization(
            f"Sources compared at different pump powers ({resonant.pump_power} W vs {freespace.pump_power} W).",
        )

    return (resonant.rate / resonant.linewidth) / (freespace.rate / freespace.linewidth)


def spectrum_grid(rates: DecayRates, center: float, window: float = SPECTRUM_WINDOW, points: int = SPECTRUM_POINTS) -> np.ndarray:
    """
    Signal frequencies center +- window x max(Gamma).
    """
    _check_decay(rates)
    half = window * max(rates.Gamma_s, rates.Gamma_i)
    return center + np.linspace(-half, half, points)


def tau_grid(rates: DecayRates, window: float = TAU_WINDOW, points: int = TAU_POINTS) -> np.ndarray:
    """
    Delays +- window / min(Gamma).
    """
    _check_decay(rates)
    half = window / min(rates.Gamma_s, rates.Gamma_i)
    return np.linspace(-half, half, points)


def biphoton_report(
    rates: DecayRates,
    kappa1: complex,
    Omega_q: float,
    Omega_r: float,
    pump_power: float,
    omega_pump: float = None,
    spectrum_window: float = SPECTRUM_WINDOW,
    spectrum_points: int = SPECTRUM_POINTS,
    tau_window: float = TAU_WINDOW,
    tau_points: int = TAU_POINTS,
    include_accidentals: bool = False,
) -> BiphotonReport:
    omega = spectrum_grid(rates, Omega_q, spectrum_window, spectrum_points)
    coeffs = coefficients(rates, kappa1, Omega_q, Omega_r, omega, omega_pump)
    density, linewidth = spectrum(coeffs)
    tau = tau_grid(rates, tau_window, tau_points)

    report = BiphotonReport(
        omega=omega,
        spectrum=density,
        tau=tau,
        g2=g2(rates, kappa1, tau, include_accidentals),
        linewidth=linewidth,
        rate=pair_rate(rates, kappa1),
        correlation_time=correlation_time(rates),
        coherence_time=coherence_time(rates),
        accidentals=accidental_level(rates, kappa1),
        pump_power=pump_power,
        kappa1=kappa1,
        gain_too_large=coeffs.gain_too_large,
    )
    logger.info(
        f"Biphoton linewidth 2pi x {units.rad_s_to_mhz(linewidth):.3f} MHz, R1 = {report.rate:.4g} 1/s, "
        f"T_c = {units.s_to_ns(report.correlation_time):.2f} ns"
    )

    return report


def _fourier_quad(func, weight: str, wvar: float) -> float:
    return quad(func, 0, np.inf, weight=weight, wvar=wvar, epsabs=FOURIER_EPSABS, limlst=200, limit=1000)[0]


def _check_decay(rates: DecayRates) -> None:
    if rates.zero_decay:
        raise ZeroDecay("Cavity decay rate is zero; biphoton spectra and correlations are undefined.")
