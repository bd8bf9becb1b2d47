"""
Quasi-phase-matching design and the free-space (cavity-less) backward/forward SPDC spectra.

Sign convention: the exact mismatch is dk = k_p - K_G - k_s + k_i for the backward geometry
(idler counterpropagating) and k_p - K_G - k_s - k_i for the forward one, with omega_i = omega_p - omega_s.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Mapping, Optional, Tuple
import logging
import warnings

from scipy.constants import c, pi
from scipy.optimize import brentq
import numpy as np

from backwave.dispersion import Axis, SellmeierModel, dispersion_sample, wavevector
from backwave.errors import ConfigError, DegenerateForward, GainTooLargeWarning, NonPositiveDenominator
from backwave import units

logger = logging.getLogger(__name__)

# FWHM of sinc^2(x) is 2 x 1.3916 = 0.886 pi, i.e. dk L = 1.77 pi at the half-maximum points
GAIN_FWHM_FACTOR = 1.77 * pi
SINC2_HALF_WIDTH = 1.3915573
SMALL_GAIN_LIMIT = 0.3
DEGENERATE_FORWARD_TOLERANCE = 1e-6


class Geometry(str, Enum):
    BACKWARD = "backward"
    FORWARD = "forward"


@dataclass(frozen=True)
class CrystalSpec:
    """
    Nonlinear crystal: geometry, poling, polarization axes and dispersion data.

    poling_period may be None until the crystal is designed with `designed_crystal`.
    """
    length: float
    qpm_order: int
    dispersion: Mapping[Axis, SellmeierModel] = field(hash=False)
    poling_period: Optional[float] = None
    pump_axis: Axis = Axis.Y
    signal_axis: Axis = Axis.Y
    idler_axis: Axis = Axis.Z
    geometry: Geometry = Geometry.BACKWARD

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ConfigError(f"Crystal length must be positive, got {self.length}.")

        if self.poling_period is not None and not self.poling_period > 0:
            raise ConfigError(f"Poling period must be positive, got {self.poling_period}.")

        if int(self.qpm_order) != self.qpm_order or self.qpm_order < 1:
            raise ConfigError(f"QPM order must be a positive integer, got {self.qpm_order}.")

        missing = {self.pump_axis, self.signal_axis, self.idler_axis} - set(self.dispersion)
        if missing:
            raise ConfigError(f"No dispersion data for crystal axes {sorted(a.value for a in missing)}.")

    @property
    def pump(self) -> SellmeierModel:
        return self.dispersion[self.pump_axis]

    @property
    def signal(self) -> SellmeierModel:
        return self.dispersion[self.signal_axis]

    @property
    def idler(self) -> SellmeierModel:
        return self.dispersion[self.idler_axis]

    @property
    def lattice_vector(self) -> float:
        """
        K_G = 2 pi m / Lambda [1/m].
        """
        if self.poling_period is None:
            raise ConfigError("Crystal has no poling period; design it first.")

        return 2 * pi * self.qpm_order / self.poling_period


@dataclass(frozen=True)
class FreeSpaceCoefficients:
    """
    Small-gain two-port coefficients of the cavity-less backward-wave interaction on a frequency grid.
    """
    omega: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    kappa: float
    k_s: np.ndarray
    k_i: np.ndarray
    gain_too_large: bool = False

    @property
    def spectrum(self) -> np.ndarray:
        """
        S(omega) = |B|^2 / 2 pi.
        """
        return np.abs(self.B) ** 2 / (2 * pi)


@dataclass(frozen=True)
class FreespaceReport:
    """
    Rate and linewidth of a non-resonant source at a given pump power.
    """
    geometry: Geometry
    rate: float
    linewidth: float
    pump_power: float

    @property
    def brightness(self) -> float:
        """
        Rate per unit linewidth [1/s per rad/s].
        """
        return self.rate / self.linewidth


def degenerate_signal(omega_pump: float) -> float:
    return omega_pump / 2


def designed_crystal(crystal: CrystalSpec, lambda_pump: float, lambda_signal: float = None) -> CrystalSpec:
    """
    Return a copy of the crystal poled for its own geometry at the given wavelengths (degenerate by default).
    """
    lambda_signal = lambda_signal or 2 * lambda_pump
    period = qpm_poling_period(crystal, lambda_pump, lambda_signal)
    logger.info(f"{crystal.geometry.value} QPM period for m={crystal.qpm_order}: {units.m_to_nm(period):.2f} nm")

    return replace(crystal, poling_period=period)


def qpm_poling_period(crystal: CrystalSpec, lambda_pump: float, lambda_signal: float, geometry: Geometry = None) -> float:
    """
    Poling period Lambda = 2 pi m / (k_p - k_s + k_i) for the backward geometry, (k_p - k_s - k_i) for the forward one.
    """
    geometry = Geometry(geometry or crystal.geometry)
    omega_p = units.wavelength_to_omega(lambda_pump)
    omega_s = units.wavelength_to_omega(lambda_signal)
    k_p, k_s, k_i = k_vectors(crystal, omega_s, omega_p)

    denominator = k_p - k_s + k_i if geometry == Geometry.BACKWARD else k_p - k_s - k_i
    if not denominator > 0:
        raise NonPositiveDenominator(
            f"k-vector combination for the {geometry.value} geometry is {denominator:.6g} 1/m; no positive poling period exists.",
            denominator=float(denominator),
        )

    return float(2 * pi * crystal.qpm_order / denominator)


def k_vectors(crystal: CrystalSpec, omega_signal, omega_pump: float) -> Tuple:
    """
    Pump, signal and idler wavevectors with omega_i = omega_p - omega_s.
    """
    omega_signal = np.asarray(omega_signal, dtype=float)
    k_p = wavevector(crystal.pump, omega_pump)
    k_s = wavevector(crystal.signal, omega_signal)
    k_i = wavevector(crystal.idler, omega_pump - omega_signal)

    return k_p, k_s, k_i


def delta_k(crystal: CrystalSpec, omega_signal, omega_pump: float):
    """
    Exact k-vector mismatch [1/m] including the lattice vector.
    """
    k_p, k_s, k_i = k_vectors(crystal, omega_signal, omega_pump)
    if crystal.geometry == Geometry.BACKWARD:
        return k_p - crystal.lattice_vector - k_s + k_i

    return k_p - crystal.lattice_vector - k_s - k_i


def inverse_group_velocities(crystal: CrystalSpec, omega_pump: float, omega_signal: float = None) -> Tuple[float, float]:
    """
    1/v_s and 1/v_i [s/m] at the signal frequency (degenerate by default) and its idler partner.
    """
    omega_signal = omega_signal or degenerate_signal(omega_pump)
    s = dispersion_sample(crystal.signal, omega_signal)
    i = dispersion_sample(crystal.idler, omega_pump - omega_signal)

    return 1 / s.group_velocity, 1 / i.group_velocity


def group_velocity_mismatch(crystal: CrystalSpec, omega_pump: float, geometry: Geometry = None) -> float:
    """
    |dk / d omega_s| in the linear expansion: 1/v_s + 1/v_i (backward) or |1/v_s - 1/v_i| (forward).
    """
    geometry = Geometry(geometry or crystal.geometry)
    inv_vs, inv_vi = inverse_group_velocities(crystal, omega_pump)

    if geometry == Geometry.BACKWARD:
        return inv_vs + inv_vi

    mismatch = abs(inv_vs - inv_vi)
    if mismatch < DEGENERATE_FORWARD_TOLERANCE * (inv_vs + inv_vi):
        raise DegenerateForward(
            "Signal and idler group velocities coincide; the forward linewidth is not set by the linear term."
        )

    return mismatch


def linearized_delta_k(crystal: CrystalSpec, omega_signal, omega_pump: float):
    """
    First-order expansion of the mismatch about the degenerate frequency using group velocities.
    """
    omega_center = degenerate_signal(omega_pump)
    inv_vs, inv_vi = inverse_group_velocities(crystal, omega_pump)
    slope = -(inv_vs + inv_vi) if crystal.geometry == Geometry.BACKWARD else -(inv_vs - inv_vi)
    detuning = np.asarray(omega_signal, dtype=float) - omega_center

    return delta_k(crystal, omega_center, omega_pump) + slope * detuning


def gain_linewidth(crystal: CrystalSpec, omega_pump: float, geometry: Geometry = None) -> float:
    """
    Gain linewidth (FWHM of sinc^2) from the group-velocity expansion, 1.77 pi / (|dk/domega| L) [rad/s].
    """
    return GAIN_FWHM_FACTOR / (group_velocity_mismatch(crystal, omega_pump, geometry) * crystal.length)


def group_velocity_ratio(crystal: CrystalSpec, omega_pump: float) -> float:
    """
    Narrowing of the backward gain linewidth relative to the forward one, (1/v_s + 1/v_i) / |1/v_s - 1/v_i|.
    """
    return group_velocity_mismatch(crystal, omega_pump, Geometry.BACKWARD) / group_velocity_mismatch(
        crystal, omega_pump, Geometry.FORWARD
    )


def numerical_gain_linewidth(crystal: CrystalSpec, omega_pump: float) -> float:
    """
    FWHM of sinc^2(dk L / 2) on the exact mismatch, found by bracketed root finding on both sides of the peak.
    """
    estimate = 2 * SINC2_HALF_WIDTH / (_slope_magnitude(crystal, omega_pump) * crystal.length)
    center = degenerate_signal(omega_pump)

    def mismatch(detuning: float) -> float:
        return float(delta_k(crystal, center + detuning, omega_pump))

    def excess(detuning: float) -> float:
        return float(sinc(mismatch(detuning) * crystal.length / 2) ** 2) - 0.5

    peak = 0.0
    if mismatch(0.0) != 0:
        peak = brentq(mismatch, -1000 * estimate, 1000 * estimate, xtol=1e-12 * estimate)

    upper = brentq(excess, peak, peak + 2 * estimate, xtol=1e-12 * estimate)
    lower = brentq(excess, peak - 2 * estimate, peak, xtol=1e-12 * estimate)

    return upper - lower


def spectral_zero(crystal: CrystalSpec, omega_pump: float, order: int = 1) -> float:
    """
    Signal frequency above the phase-matching peak where |dk| L = 2 pi order, a zero of sinc^2(dk L / 2).
    """
    if order < 1:
        raise ValueError(f"Zero order must be a positive integer, got {order}.")

    estimate = 2 * SINC2_HALF_WIDTH / (_slope_magnitude(crystal, omega_pump) * crystal.length)
    center = degenerate_signal(omega_pump)

    def mismatch(detuning: float) -> float:
        return float(delta_k(crystal, center + detuning, omega_pump))

    def phase_excess(detuning: float) -> float:
        return abs(mismatch(detuning)) * crystal.length - 2 * pi * order

    peak = 0.0
    if mismatch(0.0) != 0:
        peak = brentq(mismatch, -1000 * estimate, 1000 * estimate, xtol=1e-12 * estimate)

    zero = brentq(phase_excess, peak, peak + 3 * order * estimate, xtol=1e-12 * estimate, rtol=1e-15)

    return center + zero


def sinc(x):
    """
    Unnormalized sinc, sin(x)/x.
    """
    return np.sinc(np.asarray(x) / pi)


def freespace_spectrum(crystal: CrystalSpec, kappa: float, omega, omega_pump: float) -> np.ndarray:
    """
    S(omega) = kappa^2 L^2 sinc^2(dk L / 2) / 2 pi on the exact mismatch.
    """
    L = crystal.length
    dk = delta_k(crystal, omega, omega_pump)

    return kappa**2 * L**2 * sinc(dk * L / 2) ** 2 / (2 * pi)


def freespace_coefficients(crystal: CrystalSpec, kappa: float, omega, omega_pump: float) -> FreeSpaceCoefficients:
    """
    Small-gain coefficients A, B, C, D of the backward two-port relating a_s(L), a_i^+(0) to a_s(0), a_i^+(L).
    """
    if crystal.geometry != Geometry.BACKWARD:
        raise ConfigError("Free-space two-port coefficients are defined for the backward geometry only.")

    L = crystal.length
    omega = np.asarray(omega, dtype=float)
    gain_too_large = abs(kappa) * L > SMALL_GAIN_LIMIT
    if gain_too_large:
        warnings.warn(f"kappa L = {abs(kappa) * L:.3g} exceeds {SMALL_GAIN_LIMIT}; small-gain coefficients are inaccurate.", GainTooLargeWarning)

    _, k_s, k_i = k_vectors(crystal, omega, omega_pump)
    dk = delta_k(crystal, omega, omega_pump)

    A = np.exp(1j * k_s * L)
    D = np.exp(1j * k_i * L)
    B = 1j * kappa * L * sinc(dk * L / 2) * np.exp(1j * (dk / 2 + k_s + k_i) * L)
    C = np.conj(B) * np.exp(1j * (k_s + k_i) * L)

    return FreeSpaceCoefficients(
        omega=omega, A=A, B=B, C=C, D=D, kappa=kappa, k_s=k_s, k_i=k_i, gain_too_large=gain_too_large,
    )


def freespace_rate(crystal: CrystalSpec, kappa: float, omega_pump: float) -> float:
    """
    Total pair rate of the non-resonant source, integral of S over omega = kappa^2 L / |dk/domega| [1/s].
    """
    return kappa**2 * crystal.length / _slope_magnitude(crystal, omega_pump)


def freespace_report(crystal: CrystalSpec, kappa: float, omega_pump: float, pump_power: float) -> FreespaceReport:
    """
    Rate and gain linewidth of the cavity-less source in the crystal's geometry.
    """
    return FreespaceReport(
        geometry=crystal.geometry,
        rate=freespace_rate(crystal, kappa, omega_pump),
        linewidth=gain_linewidth(crystal, omega_pump),
        pump_power=pump_power,
    )


def _slope_magnitude(crystal: CrystalSpec, omega_pump: float) -> float:
    return group_velocity_mismatch(crystal, omega_pump, crystal.geometry)
