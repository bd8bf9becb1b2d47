"""
Independent numerical checks of the closed-form transfer functions.

The cavity oracle integrates the coupled-mode equations of the paired cavity modes in time with
a classical seed; the spatial oracle solves the backward-wave coupled equations along the crystal
as a two-point boundary-value problem by shooting.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Tuple
import logging
import math

from scipy.integrate import solve_ivp
import numpy as np
import pandas as pd

from backwave.cavity import DecayRates
from backwave.errors import NotConverged, PhysicsError, ShootingDiverged, ZeroDecay
from backwave.phasematch import CrystalSpec, Geometry, delta_k, k_vectors

logger = logging.getLogger(__name__)

STEADY_STATE_RTOL = 1e-9
TRAILING_FRACTION = 0.1
DEFAULT_DURATION = 60.0
MIN_DURATION = 20.0
STEPS_PER_RATE = 50
TRACE_SAMPLES = 200
SHOOTING_RTOL = 1e-13
SHOOTING_ATOL = 1e-16


class Integrator(str, Enum):
    RK4 = "rk4"
    ADAPTIVE = "adaptive"


@dataclass(frozen=True)
class SeededRun:
    """
    Monochromatic signal seed at a detuning [rad/s] from the signal mode; the idler input is dark.
    """
    detuning: float
    seed_amplitude: complex = 1.0
    duration: float = None
    step: float = None
    integrator: Integrator = Integrator.RK4

    def resolved(self, rates: DecayRates) -> "SeededRun":
        """
        Fill in default duration and step for the given decay rates and check both bounds.
        """
        slowest = min(rates.Gamma_s, rates.Gamma_i)
        fastest = max(rates.Gamma_s, rates.Gamma_i, abs(self.detuning))
        duration = self.duration or DEFAULT_DURATION / slowest
        step = self.step or 1 / (STEPS_PER_RATE * fastest)

        if duration < MIN_DURATION / slowest * (1 - 1e-12):
            raise PhysicsError(f"Seeded run of {duration:.4g} s is shorter than {MIN_DURATION}/min(Gamma).")

        if step > 1 / (STEPS_PER_RATE * fastest) * (1 + 1e-12):
            raise PhysicsError(f"Step {step:.4g} s exceeds 1/({STEPS_PER_RATE} max(Gamma, |detuning|)).")

        return SeededRun(self.detuning, self.seed_amplitude, duration, step, Integrator(self.integrator))


@dataclass(frozen=True)
class TransferResult:
    """
    Steady-state output amplitudes of a seeded run and their ratios to the seed.
    """
    detuning: float
    signal_out: complex
    idler_out: complex
    seed_amplitude: complex
    drift: float
    trace: pd.DataFrame = field(repr=False, compare=False)

    @property
    def signal_ratio(self) -> complex:
        return self.signal_out / self.seed_amplitude

    @property
    def idler_ratio(self) -> complex:
        return self.idler_out / self.seed_amplitude


@dataclass(frozen=True)
class SpatialTransfer:
    """
    Two-port coefficients from the shooting solution; a_s(L) = A a_s(0) + B a_i^+(L), a_i^+(0) = C a_s(0) + D a_i^+(L).
    """
    omega: float
    A: complex
    B: complex
    C: complex
    D: complex


def cavity_transfer_oracle(rates: DecayRates, kappa1: complex, run: SeededRun) -> Tuple[complex, complex]:
    """
    Steady-state signal output and conjugate idler output of the seeded cavity.
    """
    result = seeded_transfer(rates, kappa1, run)
    return result.signal_out, result.idler_out


def seeded_transfer(rates: DecayRates, kappa1: complex, run: SeededRun) -> TransferResult:
    """
    Integrate the envelope equations in the frame rotating with the seed,

        x' = -(Gamma_s/2 - i d) x - i kappa1 y + sqrt(gamma_s) s
        y' = -(Gamma_i/2 - i d) y + i kappa1 x

    from empty modes; outputs are sqrt(gamma_s) x - s and sqrt(gamma_i) y.
    """
    if rates.zero_decay:
        raise ZeroDecay("Seeded runs need a cavity with non-zero decay.")

    run = run.resolved(rates)
    d = run.detuning
    s = complex(run.seed_amplitude)
    matrix = np.array(
        [[-(rates.Gamma_s / 2 - 1j * d), -1j * kappa1], [1j * kappa1, -(rates.Gamma_i / 2 - 1j * d)]],
        dtype=complex,
    )
    drive = np.array([math.sqrt(rates.gamma_s) * s, 0], dtype=complex)

    def rhs(_, y):
        return matrix @ y + drive

    if run.integrator == Integrator.RK4:
        times, states = _rk4(rhs, np.zeros(2, dtype=complex), run.duration, run.step)
    else:
        solution = solve_ivp(
            rhs,
            (0, run.duration),
            np.zeros(2, dtype=complex),
            method="DOP853",
            rtol=1e-12,
            atol=1e-14 * max(abs(s), 1e-300),
            dense_output=True,
        )
        if not solution.success:
            raise NotConverged(f"Adaptive integration failed: {solution.message}")
        times = np.linspace(0, run.duration, int(round(run.duration / run.step)) + 1)
        states = solution.sol(times).T

    outputs = np.column_stack([math.sqrt(rates.gamma_s) * states[:, 0] - s, math.sqrt(rates.gamma_i) * states[:, 1]])
    drift = _trailing_drift(times, outputs, run.duration)
    if drift > STEADY_STATE_RTOL:
        raise NotConverged(
            f"Seeded run at detuning {d:.4g} rad/s drifts by {drift:.3g} over the last "
            f"{TRAILING_FRACTION:.0%} of {run.duration:.4g} s.",
            drift=drift,
        )

    return TransferResult(
        detuning=d,
        signal_out=complex(outputs[-1, 0]),
        idler_out=complex(outputs[-1, 1]),
        seed_amplitude=s,
        drift=drift,
        trace=_trace(times, outputs),
    )


def sweep_transfer(rates: DecayRates, kappa1: complex, detunings, **run_options) -> pd.DataFrame:
    """
    Seeded runs over a detuning grid, one row per detuning with the signal and idler transfer ratios.
    """
    rows = []
    for d in np.asarray(detunings, dtype=float):
        result = seeded_transfer(rates, kappa1, SeededRun(detuning=float(d), **run_options))
        rows.append(
            {
                "detuning_rad_s": d,
                "signal_ratio_re": result.signal_ratio.real,
                "signal_ratio_im": result.signal_ratio.imag,
                "idler_ratio_re": result.idler_ratio.real,
                "idler_ratio_im": result.idler_ratio.imag,
                "drift": result.drift,
            }
        )
    logger.info(f"Swept {len(rows)} seeded cavity runs.")

    return pd.DataFrame(rows)


def spatial_transfer(crystal: CrystalSpec, kappa: float, omega: float, omega_pump: float) -> SpatialTransfer:
    """
    Shoot the backward-wave equations

        b_s' = i kappa b_i^+ exp(i dk z),  b_i^+' = i kappa b_s exp(-i dk z)

    across the crystal with two independent unit starts and solve the boundary conditions
    (signal given at z = 0, idler given at z = L) with the resulting transfer matrix.
    """
    if crystal.geometry != Geometry.BACKWARD:
        raise PhysicsError("The spatial oracle covers the backward geometry only.")

    L = crystal.length
    dk = float(delta_k(crystal, omega, omega_pump))
    _, k_s, k_i = (float(k) for k in k_vectors(crystal, omega, omega_pump))
    phi = _fundamental_matrix(kappa, dk, L)

    if not np.all(np.isfinite(phi)) or abs(phi[1, 1]) < 1e-12:
        raise ShootingDiverged(f"Shooting transfer matrix is singular or non-finite (Phi22 = {phi[1, 1]:.3g}).")

    p11, p12, p21, p22 = phi[0, 0], phi[0, 1], phi[1, 0], phi[1, 1]

    return SpatialTransfer(
        omega=float(omega),
        A=complex(np.exp(1j * k_s * L) * (p11 - p12 * p21 / p22)),
        B=complex(np.exp(1j * (k_s + k_i) * L) * p12 / p22),
        C=complex(-p21 / p22),
        D=complex(np.exp(1j * k_i * L) / p22),
    )


def spatial_coupling_oracle(
    crystal: CrystalSpec,
    kappa: float,
    omega: float,
    omega_pump: float,
    signal_seed: complex = 1.0,
    idler_seed: complex = 0.0,
) -> Tuple[complex, complex]:
    """
    Outputs a_s(L) and a_i^+(0) for the boundary seeds a_s(0) and a_i^+(L).
    """
    t = spatial_transfer(crystal, kappa, omega, omega_pump)
    return t.A * signal_seed + t.B * idler_seed, t.C * signal_seed + t.D * idler_seed


def _fundamental_matrix(kappa: float, dk: float, length: float) -> np.ndarray:
    def rhs(z, y):
        forward = np.exp(1j * dk * z)
        # two stacked solutions (b_s, b_i^+)
        return np.array(
            [
                1j * kappa * y[1] * forward,
                1j * kappa * y[0] / forward,
                1j * kappa * y[3] * forward,
                1j * kappa * y[2] / forward,
            ]
        )

    start = np.array([1, 0, 0, 1], dtype=complex)
    solution = solve_ivp(rhs, (0, length), start, method="DOP853", rtol=SHOOTING_RTOL, atol=SHOOTING_ATOL)
    if not solution.success:
        raise ShootingDiverged(f"Shooting integration failed: {solution.message}")

    end = solution.y[:, -1]
    # columns are the images of the unit starts
    return np.array([[end[0], end[2]], [end[1], end[3]]])


def _rk4(rhs: Callable, y0: np.ndarray, duration: float, step: float) -> Tuple[np.ndarray, np.ndarray]:
    n = int(math.ceil(duration / step))
    h = duration / n
    times = np.linspace(0, duration, n + 1)
    states = np.empty((n + 1, y0.size), dtype=complex)
    states[0] = y = y0

    for k in range(n):
        t = times[k]
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[k + 1] = y

    return times, states


def _trailing_drift(times: np.ndarray, outputs: np.ndarray, duration: float) -> float:
    """
    Largest relative change of the output vector over the trailing part of the run.
    """
    final = outputs[-1]
    scale = np.linalg.norm(final)
    tail = outputs[times >= (1 - TRAILING_FRACTION) * duration]
    change = np.max(np.linalg.norm(tail - final, axis=1))

    return float(change / scale) if scale > 0 else float(change)


def _trace(times: np.ndarray, outputs: np.ndarray) -> pd.DataFrame:
    index = np.unique(np.linspace(0, times.size - 1, TRACE_SAMPLES).astype(int))
    return pd.DataFrame(
        {
            "time_s": times[index],
            "signal_out_abs": np.abs(outputs[index, 0]),
            "idler_out_abs": np.abs(outputs[index, 1]),
        }
    )


def transfer_deviation(results: List[TransferResult], expected_signal, expected_idler) -> float:
    """
    Largest relative deviation of oracle ratios from expected signal and idler transfer values.
    """
    worst = 0.0
    for result, a, c in zip(results, np.asarray(expected_signal), np.asarray(expected_idler)):
        worst = max(worst, abs(result.signal_ratio - a) / abs(a))
        if abs(c) > 0:
            worst = max(worst, abs(result.idler_ratio - c) / abs(c))

    return worst
