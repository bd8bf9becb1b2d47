"""
Cavity mode structure of a standing-wave resonator filled by the crystal: free spectral range,
output-coupling and total decay rates, cluster spacing of signal/idler mode pairs and the
single-mode criterion.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple
import logging
import math

from scipy.constants import c, pi
from scipy.optimize import brentq

from backwave.dispersion import DispersionSample, SellmeierModel, dispersion_sample, refractive_index
from backwave.errors import ConfigError, NoPositiveRoot, OutOfRange, PhysicsError
from backwave.phasematch import CrystalSpec, degenerate_signal
from backwave import units

logger = logging.getLogger(__name__)

ROOT_POLISH_RTOL = 1e-12


@dataclass(frozen=True)
class CavitySpec:
    """
    Mirror reflectivities r, single-pass power losses xi and optional explicit mode indices (None = auto).
    """
    length: float
    reflectivity_signal: float
    reflectivity_idler: float
    loss_signal: float = 0.0
    loss_idler: float = 0.0
    mode_index_signal: Optional[int] = None
    mode_index_idler: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ConfigError(f"Cavity length must be positive, got {self.length}.")

        for name in ("reflectivity_signal", "reflectivity_idler"):
            r = getattr(self, name)
            if not 0 < r <= 1:
                raise ConfigError(f"Mirror {name.replace('_', ' ')} must lie in (0, 1], got {r}.")

        for name in ("loss_signal", "loss_idler"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"Single-pass {name.replace('_', ' ')} must be non-negative.")

        for name in ("mode_index_signal", "mode_index_idler"):
            q = getattr(self, name)
            if q is not None and (int(q) != q or q < 1):
                raise ConfigError(f"Cavity {name.replace('_', ' ')} must be a positive integer or auto, got {q}.")

        if (self.mode_index_signal is None) != (self.mode_index_idler is None):
            raise ConfigError("Cavity mode indices must be both explicit or both auto.")


@dataclass(frozen=True)
class DecayRates:
    """
    Mode spacing Delta, output coupling gamma and total decay Gamma per band [rad/s].
    """
    Delta_s: float
    Delta_i: float
    gamma_s: float
    gamma_i: float
    Gamma_s: float
    Gamma_i: float

    @property
    def zero_decay(self) -> bool:
        return self.Gamma_s == 0 or self.Gamma_i == 0

    @property
    def finesse_s(self) -> float:
        return self.Delta_s / self.Gamma_s if self.Gamma_s else math.inf

    @property
    def finesse_i(self) -> float:
        return self.Delta_i / self.Gamma_i if self.Gamma_i else math.inf

    @property
    def lossless(self) -> bool:
        return self.gamma_s == self.Gamma_s and self.gamma_i == self.Gamma_i


@dataclass(frozen=True)
class ClusterSpacing:
    """
    Cluster spacing with the quadratic coefficients M [s^2], N [s] and the positive roots found per sign.
    """
    spacing: float
    M: float
    N: float
    roots: Tuple[float, ...]
    discriminants: Tuple[float, float]


@dataclass(frozen=True)
class SingleModeCheck:
    single_mode: bool
    margin: float

    def __bool__(self) -> bool:
        return self.single_mode


@dataclass(frozen=True)
class ModePair:
    """
    Cold-cavity frequencies of the resonated signal (q) and idler (r) modes.

    mismatch = Omega_q + Omega_r - omega_p, zero when the pair is exactly double resonant.
    """
    Omega_q: float
    Omega_r: float
    q: int
    r: int
    omega_pump: float
    auto: bool

    @property
    def mismatch(self) -> float:
        return self.Omega_q + self.Omega_r - self.omega_pump


def mode_spacing(n_group: float, length: float) -> float:
    """
    Angular free spectral range of a standing-wave cavity of optical length n_group L, pi c / (n_group L).
    """
    if not n_group >= 1 or not length > 0:
        raise PhysicsError(f"Mode spacing needs n_group >= 1 and length > 0, got {n_group} and {length}.")

    return pi * c / (n_group * length)


def decay_rates(spec: CavitySpec, signal: DispersionSample, idler: DispersionSample) -> DecayRates:
    """
    gamma = Delta (1 - r) and Gamma = 2 xi Delta + gamma for both bands, Delta from the group index.
    """
    Delta_s = mode_spacing(signal.group_index, spec.length)
    Delta_i = mode_spacing(idler.group_index, spec.length)
    gamma_s = Delta_s * (1 - spec.reflectivity_signal)
    gamma_i = Delta_i * (1 - spec.reflectivity_idler)

    rates = DecayRates(
        Delta_s=Delta_s,
        Delta_i=Delta_i,
        gamma_s=gamma_s,
        gamma_i=gamma_i,
        Gamma_s=2 * spec.loss_signal * Delta_s + gamma_s,
        Gamma_i=2 * spec.loss_idler * Delta_i + gamma_i,
    )
    if rates.zero_decay:
        logger.warning("Cavity has zero total decay rate (r = 1, xi = 0); biphoton spectra are undefined.")

    return rates


def cavity_decay_rates(spec: CavitySpec, crystal: CrystalSpec, pair: ModePair) -> DecayRates:
    """
    Decay rates with the dispersion sampled at the resonated mode frequencies.
    """
    signal = dispersion_sample(crystal.signal, pair.Omega_q)
    idler = dispersion_sample(crystal.idler, pair.Omega_r)

    return decay_rates(spec, signal, idler)


def cluster_coefficients(crystal: CrystalSpec, omega_pump: float, omega_signal: float = None) -> Tuple[float, float]:
    """
    M and N of the cluster-spacing quadratic M dW^2 + N dW = +-1.
    """
    omega_s = omega_signal or degenerate_signal(omega_pump)
    omega_i = omega_pump - omega_s
    s = dispersion_sample(crystal.signal, omega_s)
    i = dispersion_sample(crystal.idler, omega_i)
    L = crystal.length

    M = L / (2 * pi * c) * (2 * (s.dn_domega + i.dn_domega) + omega_s * s.d2n_domega2 + omega_i * i.d2n_domega2)
    N = L / (pi * c) * (s.n - i.n + omega_s * s.dn_domega - omega_i * i.dn_domega)

    return M, N


def cluster_analysis(crystal: CrystalSpec, omega_pump: float, omega_signal: float = None) -> ClusterSpacing:
    M, N = cluster_coefficients(crystal, omega_pump, omega_signal)
    return solve_cluster_quadratic(M, N)


def cluster_spacing(crystal: CrystalSpec, omega_pump: float, omega_signal: float = None) -> float:
    """
    Frequency separation of adjacent energy-conserving signal/idler mode pairs [rad/s].
    """
    return cluster_analysis(crystal, omega_pump, omega_signal).spacing


def solve_cluster_quadratic(M: float, N: float) -> ClusterSpacing:
    """
    Smallest strictly positive root of M x^2 + N x = +1 or -1.
    """
    roots = []
    discriminants = []
    for rhs in (1.0, -1.0):
        discriminants.append(N**2 + 4 * M * rhs)
        roots.extend(x for x in _quadratic_roots(M, N, -rhs) if x > 0)

    if not roots:
        raise NoPositiveRoot(
            f"Cluster-spacing quadratics have no positive root (M={M:.4g}, N={N:.4g}, "
            f"discriminants {discriminants[0]:.4g}, {discriminants[1]:.4g}).",
            discriminants=tuple(discriminants),
        )

    roots = tuple(sorted(roots))

    return ClusterSpacing(spacing=roots[0], M=M, N=N, roots=roots, discriminants=tuple(discriminants))


def single_mode_check(cluster: float, gain_linewidth: float) -> SingleModeCheck:
    """
    Single mode pair within the gain linewidth iff the cluster spacing strictly exceeds it.
    """
    if not cluster > 0 or not gain_linewidth > 0:
        raise PhysicsError("Cluster spacing and gain linewidth must both be positive.")

    return SingleModeCheck(single_mode=cluster > gain_linewidth, margin=cluster / gain_linewidth)


def mode_number(model: SellmeierModel, length: float, omega: float) -> float:
    """
    Fractional standing-wave mode number n(omega) omega L / (pi c).
    """
    return float(refractive_index(model, omega) * omega * length / (pi * c))


def resonance_frequency(model: SellmeierModel, length: float, q: int, omega_guess: float) -> float:
    """
    Frequency of the q-th standing-wave mode, n(Omega) Omega L / c = q pi.
    """
    def offset(w: float) -> float:
        return mode_number(model, length, w) - q

    lam_lo, lam_hi = model.valid_range
    w_min = float(units.wavelength_to_omega(lam_hi * units.UM)) * (1 + 1e-12)
    w_max = float(units.wavelength_to_omega(lam_lo * units.UM)) * (1 - 1e-12)

    n0 = float(refractive_index(model, omega_guess))
    estimate = q * pi * c / (n0 * length)
    a, b = max(0.98 * estimate, w_min), min(1.02 * estimate, w_max)
    if not (a < b and offset(a) * offset(b) <= 0):
        a, b = w_min, w_max
        if offset(a) * offset(b) > 0:
            raise OutOfRange(
                f"Mode {q} of the {model.axis.value}-axis has no resonance inside the valid range "
                f"{model.valid_range} um (mode numbers {offset(a) + q:.6g}-{offset(b) + q:.6g}).",
                axis=model.axis.value,
            )

    return brentq(offset, a, b, xtol=1e-6, rtol=1e-15)


def resolve_mode_pair(spec: CavitySpec, crystal: CrystalSpec, omega_pump: float) -> ModePair:
    """
    Auto: the signal mode nearest degeneracy with the idler resonance placed at omega_p - Omega_q.
    Explicit indices: both cold-cavity frequencies from their own resonance conditions.
    """
    center = degenerate_signal(omega_pump)

    if spec.mode_index_signal is None:
        q = int(round(mode_number(crystal.signal, spec.length, center)))
        Omega_q = resonance_frequency(crystal.signal, spec.length, q, center)
        Omega_r = omega_pump - Omega_q
        r = int(round(mode_number(crystal.idler, spec.length, Omega_r)))

        return ModePair(Omega_q=Omega_q, Omega_r=Omega_r, q=q, r=r, omega_pump=omega_pump, auto=True)

    q, r = int(spec.mode_index_signal), int(spec.mode_index_idler)
    Omega_q = resonance_frequency(crystal.signal, spec.length, q, center)
    Omega_r = resonance_frequency(crystal.idler, spec.length, r, center)
    pair = ModePair(Omega_q=Omega_q, Omega_r=Omega_r, q=q, r=r, omega_pump=omega_pump, auto=False)
    logger.info(f"Mode pair q={q}, r={r} misses double resonance by {pair.mismatch:.4g} rad/s.")

    return pair


def mode_pair_offsets(cluster: float, count: int = 2) -> List[float]:
    """
    Signal detunings of the central and adjacent mode pairs, k x cluster spacing for |k| <= count.
    """
    return [k * cluster for k in range(-count, count + 1)]


def _quadratic_roots(a: float, b: float, c0: float) -> List[float]:
    """
    Real roots of a x^2 + b x + c0 = 0, stable against cancellation and polished by Newton steps.
    """
    if a == 0:
        return [-c0 / b] if b != 0 else []

    disc = b**2 - 4 * a * c0
    if disc < 0:
        return []

    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    roots = [q / a]
    if q != 0:
        roots.append(c0 / q)

    return [_polish(a, b, c0, x) for x in roots]


def _polish(a: float, b: float, c0: float, x: float) -> float:
    for _ in range(50):
        slope = 2 * a * x + b
        if slope == 0:
            break
        step = (a * x**2 + b * x + c0) / slope
        x -= step
        if abs(step) <= ROOT_POLISH_RTOL * abs(x):
            break

    return x
