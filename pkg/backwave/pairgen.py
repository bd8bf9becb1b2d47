"""
Stochastic signal/idler detection events and the coincidence histogram used to compare them with G2.
"""
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Tuple, Union
import logging
import math
import warnings

from numpy.random import PCG64, Generator, SeedSequence
from pandas import DataFrame
from scipy.optimize import curve_fit
from scipy.stats import kstest
import numpy as np
import pandas as pd

from backwave.errors import EmptyStream, InvalidDuration, IoError, PhysicsError, PurityWarning

logger = logging.getLogger(__name__)

SIGNAL = "S"
IDLER = "I"
PURITY_LIMIT = 0.1
MIN_BINS = 10
TIME_FORMAT = "%.12f"


class EventStream:
    """
    Time-ordered signal and idler detections inside [0, duration].
    """

    def __init__(
        self,
        records: DataFrame,
        duration: float,
        seed: int = None,
        config_hash: str = "",
        purity_warning: bool = False,
    ):
        self._validate_inputs(records, duration)

        self.records = records.sort_values(["time_s", "channel"], kind="mergesort").reset_index(drop=True)
        self.duration = duration
        self.seed = seed
        self.config_hash = config_hash
        self.purity_warning = purity_warning

    def __len__(self) -> int:
        return len(self.records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, EventStream):
            return NotImplemented

        return (
            self.duration == other.duration
            and self.seed == other.seed
            and self.config_hash == other.config_hash
            and self.records.equals(other.records)
        )

    @property
    def signal_times(self) -> np.ndarray:
        return self.records.loc[self.records["channel"] == SIGNAL, "time_s"].to_numpy()

    @property
    def idler_times(self) -> np.ndarray:
        return self.records.loc[self.records["channel"] == IDLER, "time_s"].to_numpy()

    @staticmethod
    def load(filepath: Union[str, Path]) -> "EventStream":
        """
        Load a stream from an event CSV written by `save`.
        """
        meta = {}
        with open(filepath, "r", encoding="utf-8") as f:
            for line in f:
                if not line.startswith("#"):
                    break
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()

        records = pd.read_csv(filepath, comment="#", dtype={"time_s": float, "channel": str})
        seed = meta.get("seed")

        return EventStream(
            records=records,
            duration=float(meta["duration_s"]),
            seed=int(seed) if seed not in (None, "", "None") else None,
            config_hash=meta.get("config_hash", ""),
        )

    def save(self, filepath: Union[str, Path]) -> None:
        """
        Write the stream as CSV (time_s with 12 decimals, channel S|I) behind a commented header.
        """
        filepath = Path(filepath)
        try:
            filepath.parent.mkdir(parents=True, exist_ok=True)
            with filepath.open("w", encoding="utf-8", newline="\n") as f:
                f.write(f"# config_hash: {self.config_hash}\n")
                f.write(f"# seed: {self.seed}\n")
                f.write(f"# duration_s: {self.duration!r}\n")
                self.records.to_csv(f, index=False, float_format=TIME_FORMAT, lineterminator="\n")
        except OSError as e:
            raise IoError(f"Cannot write {filepath}: {e}")

    def _validate_inputs(self, records: DataFrame, duration: float) -> None:
        _checked_duration(duration)

        if not {"time_s", "channel"} <= set(records.columns):
            raise ValueError("Event records need 'time_s' and 'channel' columns.")

        if not records["channel"].isin([SIGNAL, IDLER]).all():
            raise ValueError(f"Event channels must be '{SIGNAL}' or '{IDLER}'.")

        times = records["time_s"].to_numpy()
        if np.any(times < 0) or np.any(times > duration):
            raise ValueError("Event times must lie within [0, duration].")

        for channel in (SIGNAL, IDLER):
            t = np.sort(times[records["channel"].to_numpy() == channel])
            if np.any(np.diff(t) <= 0):
                raise ValueError(f"Event times in channel {channel} must be strictly increasing.")


@dataclass(frozen=True)
class CoincidenceHistogram:
    """
    Counts of idler-minus-signal delays within +-window.
    """
    bin_edges: np.ndarray
    counts: np.ndarray
    total_pairs: int
    delays: np.ndarray = field(repr=False)

    @property
    def bin_centers(self) -> np.ndarray:
        return (self.bin_edges[:-1] + self.bin_edges[1:]) / 2

    @property
    def bin_width(self) -> float:
        return float(self.bin_edges[1] - self.bin_edges[0])

    def g2_estimate(self, duration: float) -> np.ndarray:
        """
        Coincidence rate per unit delay [1/s^2], the empirical counterpart of G2.
        """
        return self.counts / (duration * self.bin_width)

    def to_frame(self) -> DataFrame:
        return pd.DataFrame({"tau_s": self.bin_centers, "count": self.counts})


def generate(rate: float, Gamma_s: float, Gamma_i: float, duration: float, seed: int = 0, config_hash: str = "") -> EventStream:
    """
    Poisson pair emissions at the given rate, each idler delayed from its signal by a draw from the
    normalized two-sided exponential exp(Gamma_s tau) (tau < 0), exp(-Gamma_i tau) (tau > 0).

    Three child streams of one PCG64 seed sequence draw the pair count, emission times and delays.
    """
    duration = _checked_duration(duration)

    if not rate >= 0:
        raise PhysicsError(f"Pair rate must be non-negative, got {rate}.")

    if not (Gamma_s > 0 and Gamma_i > 0):
        raise PhysicsError("Decay rates must be positive to sample pair delays.")

    purity = rate * (1 / Gamma_s + 1 / Gamma_i)
    purity_warning = purity > PURITY_LIMIT
    if purity_warning:
        warnings.warn(
            f"Pairs per coherence time is {purity:.3g} (> {PURITY_LIMIT}); pairs overlap in time.",
            PurityWarning,
        )

    count_stream, time_stream, delay_stream = (Generator(PCG64(s)) for s in SeedSequence(seed).spawn(3))

    n_pairs = int(count_stream.poisson(rate * duration))
    emission = np.sort(time_stream.uniform(0, duration, n_pairs))
    delays = sample_delays(delay_stream, n_pairs, Gamma_s, Gamma_i)
    idler = emission + delays

    signal = emission[(emission >= 0) & (emission <= duration)]
    idler = np.sort(idler[(idler >= 0) & (idler <= duration)])

    records = pd.DataFrame(
        {
            "time_s": np.concatenate([signal, idler]),
            "channel": [SIGNAL] * signal.size + [IDLER] * idler.size,
        }
    )
    logger.info(f"Generated {n_pairs} pairs over {duration:g} s (seed {seed}).")

    return EventStream(records, float(duration), seed, config_hash, purity_warning)


def sample_delays(rng: Generator, n: int, Gamma_s: float, Gamma_i: float) -> np.ndarray:
    """
    Inverse-CDF draws of the idler delay; the branch is a single uniform draw against P(tau > 0) = Gamma_s / (Gamma_s + Gamma_i).
    """
    branch = rng.random(n)
    u = rng.random(n)
    magnitude = -np.log1p(-u)
    positive = branch < Gamma_s / (Gamma_s + Gamma_i)

    return np.where(positive, magnitude / Gamma_i, -magnitude / Gamma_s)


def delay_cdf(tau, Gamma_s: float, Gamma_i: float) -> np.ndarray:
    """
    CDF of the normalized two-sided exponential delay distribution.
    """
    tau = np.asarray(tau, dtype=float)
    total = Gamma_s + Gamma_i
    left = Gamma_i / total * np.exp(Gamma_s * np.minimum(tau, 0))
    right = 1 - Gamma_s / total * np.exp(-Gamma_i * np.maximum(tau, 0))

    return np.where(tau < 0, left, right)


def histogram(stream: EventStream, window: float, bin_width: float) -> CoincidenceHistogram:
    """
    Start-stop histogram of every idler within +-window of every signal.
    """
    if not bin_width > 0:
        raise PhysicsError(f"Bin width must be positive, got {bin_width}.")

    if window < MIN_BINS * bin_width:
        raise PhysicsError(f"Window {window:g} s must span at least {MIN_BINS} bins of {bin_width:g} s.")

    signal = stream.signal_times
    idler = stream.idler_times
    if signal.size == 0 or idler.size == 0:
        raise EmptyStream("Coincidence histogram needs at least one signal and one idler event.")

    delays = _pair_delays(signal, idler, window)
    n_bins = int(round(2 * window / bin_width))
    edges = np.linspace(-window, window, n_bins + 1)
    counts, _ = np.histogram(delays, bins=edges)

    return CoincidenceHistogram(bin_edges=edges, counts=counts, total_pairs=int(delays.size), delays=delays)


def windowed_delay_cdf(tau, Gamma_s: float, Gamma_i: float, window: float, background: float = 0.0) -> np.ndarray:
    """
    CDF of delays recorded within +-window: the delay distribution truncated to the window, mixed
    with a uniform fraction `background` of accidental coincidences.
    """
    tau = np.clip(np.asarray(tau, dtype=float), -window, window)
    lo, hi = delay_cdf(-window, Gamma_s, Gamma_i), delay_cdf(window, Gamma_s, Gamma_i)
    truncated = (delay_cdf(tau, Gamma_s, Gamma_i) - lo) / (hi - lo)
    uniform = (tau + window) / (2 * window)

    return background * uniform + (1 - background) * truncated


def accidental_fraction(stream: EventStream, hist: CoincidenceHistogram) -> float:
    """
    Expected share of uncorrelated signal/idler combinations among the histogram entries.
    """
    window = float(hist.bin_edges[-1])
    expected = stream.signal_times.size * stream.idler_times.size * 2 * window / stream.duration

    return min(1.0, expected / hist.total_pairs) if hist.total_pairs else 0.0


def ks_test(
    delays: np.ndarray, Gamma_s: float, Gamma_i: float, window: float = None, background: float = 0.0
) -> Tuple[float, float]:
    """
    Kolmogorov-Smirnov statistic and p-value of delays against the analytic delay CDF.

    With a window the CDF is truncated to +-window and mixed with the accidental background fraction.
    """
    if window is None:
        cdf = partial(delay_cdf, Gamma_s=Gamma_s, Gamma_i=Gamma_i)
    else:
        cdf = partial(windowed_delay_cdf, Gamma_s=Gamma_s, Gamma_i=Gamma_i, window=window, background=background)

    result = kstest(np.asarray(delays, dtype=float), cdf)
    return float(result.statistic), float(result.pvalue)


def ks_threshold(n: int, significance: float = 0.01) -> float:
    """
    Asymptotic KS critical distance sqrt(-ln(alpha/2)/2) / sqrt(n); 1.63/sqrt(n) at 1 %.
    """
    return math.sqrt(-math.log(significance / 2) / 2) / math.sqrt(n)


def fit_decay_rates(hist: CoincidenceHistogram) -> Tuple[float, float]:
    """
    Least-squares fit of a exp(-Gamma |tau|) + b on each side of the histogram; returns (Gamma_s, Gamma_i).
    """
    centers = hist.bin_centers
    scale = float(np.max(np.abs(hist.bin_edges)))

    def model(x, a, rate, b):
        return a * np.exp(-rate * x) + b

    fitted = []
    for side in (centers < 0, centers > 0):
        x = np.abs(centers[side]) / scale
        y = hist.counts[side].astype(float)
        if y.sum() == 0:
            raise EmptyStream("No coincidences on one side of the histogram.")

        p0 = (max(y.max(), 1.0), 1 / max(np.average(x, weights=y + 1e-12), 1e-6), 0.0)
        params, _ = curve_fit(model, x, y, p0=p0, sigma=np.sqrt(np.maximum(y, 1.0)), maxfev=20000)
        fitted.append(params[1] / scale)

    return fitted[0], fitted[1]


def fitted_correlation_time(Gamma_s: float, Gamma_i: float) -> float:
    return math.log(2) * (1 / Gamma_s + 1 / Gamma_i)


def _checked_duration(duration) -> float:
    try:
        value = float(duration)
    except (TypeError, ValueError):
        raise InvalidDuration(f"Event stream duration must be a number, got {duration!r}.")

    if not (math.isfinite(value) and value > 0):
        raise InvalidDuration(f"Event stream duration must be positive and finite, got {duration}.")

    return value


def _pair_delays(signal: np.ndarray, idler: np.ndarray, window: float) -> np.ndarray:
    lo = np.searchsorted(idler, signal - window, side="left")
    hi = np.searchsorted(idler, signal + window, side="right")
    counts = hi - lo
    if counts.sum() == 0:
        return np.empty(0)

    starts = np.repeat(lo, counts)
    offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)

    return idler[starts + offsets] - np.repeat(signal, counts)
