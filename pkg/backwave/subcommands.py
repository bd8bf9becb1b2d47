"""
Computations behind each CLI subcommand and the checks run under --verify.

Every subcommand returns a Result holding scalars, plain tables and plot series; `run` writes
them to the output directory and raises ToleranceExceeded when a verification check fails.
"""
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence
import logging

from pandas import DataFrame
import numpy as np
import pandas as pd

from backwave import biphoton, cavity, oracle, pairgen, phasematch, units
from backwave.config import SourceConfig, build_crystal, pump_omega, pump_wavelength
from backwave.dispersion import dispersion_sample, finite_difference_derivatives
from backwave.errors import ToleranceExceeded
from backwave.phasematch import CrystalSpec, Geometry
from backwave.plots import emit_plot_grid
from backwave.report import Scalar, report_document, scalar_table, write_csv, write_yaml
from backwave.source import Source, build_source, design

logger = logging.getLogger(__name__)

ORACLE_KAPPA1_RATIO = 1e-4
ORACLE_KAPPA_LENGTH = 1e-5
ORACLE_DETUNINGS = 21
FOURIER_CHECK_POINTS = 41
MIN_FIT_PAIRS = 10_000


@dataclass(frozen=True)
class Check:
    name: str
    deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.deviation <= self.tolerance)


@dataclass
class PlotSeries:
    name: str
    series: DataFrame
    x: str
    y: List[str]
    xlabel: str
    ylabel: str
    title: str = ""
    markers: Sequence[float] = ()
    x_scale: float = 1.0


@dataclass
class Result:
    name: str
    scalars: List[Scalar] = field(default_factory=list)
    tables: Dict[str, DataFrame] = field(default_factory=dict)
    plots: List[PlotSeries] = field(default_factory=list)
    checks: List[Check] = field(default_factory=list)
    stream: Optional[pairgen.EventStream] = None

    def extend(self, other: "Result") -> None:
        self.scalars.extend(other.scalars)
        self.tables.update(other.tables)
        self.plots.extend(other.plots)
        self.checks.extend(other.checks)


def run(name: str, cfg: SourceConfig, out_dir: Path, verify: bool = False, seed: int = None) -> List[Path]:
    """
    Compute one subcommand, write its artifacts and enforce its checks when verify is set.
    """
    if name not in SUBCOMMANDS:
        raise ValueError(f"Unknown subcommand '{name}'.")

    result = SUBCOMMANDS[name](cfg, verify=verify, seed=seed)
    written = write_result(result, cfg, Path(out_dir))

    failed = [ch for ch in result.checks if not ch.passed]
    if failed:
        details = ", ".join(f"{ch.name} ({ch.deviation:.3g} > {ch.tolerance:.3g})" for ch in failed)
        raise ToleranceExceeded(f"{len(failed)} verification check(s) failed: {details}", checks=[ch.name for ch in failed])

    return written


def write_result(result: Result, cfg: SourceConfig, out_dir: Path) -> List[Path]:
    config_hash = cfg.config_hash()
    formats = cfg.output.formats
    written = []

    for table_name, table in result.tables.items():
        written.append(write_csv(table, out_dir / f"{table_name}.csv", config_hash))

    for plot in result.plots:
        written.extend(
            emit_plot_grid(
                plot.series,
                out_dir / plot.name,
                x=plot.x,
                y=plot.y,
                xlabel=plot.xlabel,
                ylabel=plot.ylabel,
                title=plot.title,
                config_hash=config_hash,
                markers=plot.markers,
                formats=formats,
                x_scale=plot.x_scale,
            )
        )

    if result.stream is not None:
        path = out_dir / "events.csv"
        result.stream.save(path)
        written.append(path)

    written.append(write_csv(scalar_table(result.scalars), out_dir / f"{result.name}_summary.csv", config_hash))
    if result.checks:
        checks = pd.DataFrame([{"check": ch.name, "deviation": ch.deviation, "tolerance": ch.tolerance, "passed": ch.passed} for ch in result.checks])
        written.append(write_csv(checks, out_dir / f"{result.name}_verify.csv", config_hash))

    written.append(write_yaml(report_document(result.name, config_hash, cfg.echo(), result.scalars), out_dir / f"{result.name}.yaml"))

    return written


def dispersion_result(cfg: SourceConfig, verify: bool = False, seed: int = None) -> Result:
    crystal = build_crystal(cfg)
    omega_p = pump_omega(cfg)
    omega_s = phasematch.degenerate_signal(omega_p)
    result = Result("dispersion")

    rows = []
    for role, model, omega in (("pump", crystal.pump, omega_p), ("signal", crystal.signal, omega_s), ("idler", crystal.idler, omega_p - omega_s)):
        sample = dispersion_sample(model, omega)
        _, fd_dn, fd_d2n = finite_difference_derivatives(model, omega)
        rows.append(
            {
                "role": role,
                "axis": model.axis.value,
                "wavelength_nm": units.m_to_nm(float(units.omega_to_wavelength(omega))),
                "n": sample.n,
                "dn_domega_s": sample.dn_domega,
                "d2n_domega2_s2": sample.d2n_domega2,
                "group_index": sample.group_index,
                "group_velocity_m_s": sample.group_velocity,
                "fd_dn_rel_diff": abs(fd_dn - sample.dn_domega) / abs(sample.dn_domega),
                "fd_d2n_rel_diff": abs(fd_d2n - sample.d2n_domega2) / abs(sample.d2n_domega2),
            }
        )
        result.scalars.append(Scalar(f"n_{role}", sample.n, "1"))
        result.scalars.append(Scalar(f"group_index_{role}", sample.group_index, "1"))
        if verify:
            result.checks.append(Check(f"fd_dn_{role}", rows[-1]["fd_dn_rel_diff"], 1e-8))
            result.checks.append(Check(f"group_index_identity_{role}", abs(sample.group_index - (sample.n + omega * sample.dn_domega)) / sample.group_index, 1e-10))

    result.tables["dispersion"] = pd.DataFrame(rows)

    lo = max(m.valid_range[0] for m in crystal.dispersion.values())
    hi = min(m.valid_range[1] for m in crystal.dispersion.values())
    wavelengths = np.linspace(lo, hi, 402)[1:-1] * units.UM
    scan = {"wavelength_nm": units.m_to_nm(wavelengths)}
    for axis, model in sorted(crystal.dispersion.items(), key=lambda kv: kv[0].value):
        omegas = units.wavelength_to_omega(wavelengths)
        scan[f"n_{axis.value}"] = [dispersion_sample(model, w).n for w in omegas]
        scan[f"group_index_{axis.value}"] = [dispersion_sample(model, w).group_index for w in omegas]
    scan = pd.DataFrame(scan)
    result.plots.append(
        PlotSeries("dispersion_scan", scan, "wavelength_nm", [col for col in scan.columns if col != "wavelength_nm"], "Wavelength [nm]", "Index", "Refractive and group index")
    )

    return result


def design_result(cfg: SourceConfig, verify: bool = False, seed: int = None) -> Result:
    crystal = design(cfg)
    lambda_p = pump_wavelength(cfg)
    lambda_s = 2 * lambda_p
    result = Result("design")

    rows = []
    for geometry in Geometry:
        period = phasematch.qpm_poling_period(crystal, lambda_p, lambda_s, geometry)
        rows.append({"geometry": geometry.value, "qpm_order": crystal.qpm_order, "poling_period_nm": units.m_to_nm(period), "first_order_period_nm": units.m_to_nm(period / crystal.qpm_order)})
        result.scalars.append(Scalar(f"poling_period_{geometry.value}", period, "m", units.m_to_nm(period), "nm"))

    result.scalars.append(Scalar("poling_period", crystal.poling_period, "m", units.m_to_nm(crystal.poling_period), "nm"))
    result.scalars.append(Scalar("lattice_vector", crystal.lattice_vector, "1/m"))
    result.tables["design"] = pd.DataFrame(rows)

    if verify:
        designed = phasematch.designed_crystal(replace(crystal, poling_period=None), lambda_p, lambda_s)
        dk = float(phasematch.delta_k(designed, units.wavelength_to_omega(lambda_s), units.wavelength_to_omega(lambda_p)))
        result.checks.append(Check("design_point_mismatch", abs(dk * designed.length), 1e-6))
        first = phasematch.qpm_poling_period(replace(crystal, qpm_order=1), lambda_p, lambda_s)
        period = phasematch.qpm_poling_period(crystal, lambda_p, lambda_s)
        result.checks.append(Check("period_order_scaling", abs(crystal.qpm_order * first - period) / period, 1e-12))

    return result


def freespace_result(cfg: SourceConfig, verify: bool = False, seed: int = None) -> Result:
    source = build_source(cfg)
    backward, forward = geometry_pair(source)
    omega_p = source.omega_pump
    kappa = source_freespace_kappa(source)
    result = Result("freespace")

    width_b = phasematch.gain_linewidth(backward, omega_p)
    width_f = phasematch.gain_linewidth(forward, omega_p)
    ratio = phasematch.group_velocity_ratio(backward, omega_p)
    numerical = phasematch.numerical_gain_linewidth(backward, omega_p)
    report_b = phasematch.freespace_report(backward, kappa, omega_p, source.pump_power)
    report_f = phasematch.freespace_report(forward, kappa, omega_p, source.pump_power)

    result.scalars.extend(
        [
            Scalar("gain_linewidth_backward", width_b, "rad/s", units.rad_s_to_ghz(width_b), "GHz (x 2pi)"),
            Scalar("gain_linewidth_backward_wavenumber", width_b, "rad/s", units.rad_s_to_wavenumber(width_b), "cm^-1 (x 2pi)"),
            Scalar("gain_linewidth_forward", width_f, "rad/s", units.rad_s_to_ghz(width_f), "GHz (x 2pi)"),
            Scalar("numerical_gain_linewidth_backward", numerical, "rad/s", units.rad_s_to_ghz(numerical), "GHz (x 2pi)"),
            Scalar("backward_forward_ratio", ratio, "1"),
            Scalar("freespace_kappa", kappa, "1/m"),
            Scalar("freespace_kappa_length", kappa * backward.length, "1"),
            Scalar("freespace_rate_backward", report_b.rate, "1/s"),
            Scalar("freespace_rate_forward", report_f.rate, "1/s"),
        ]
    )

    center = phasematch.degenerate_signal(omega_p)
    grids = cfg.grids.freespace
    detuning = np.linspace(-grids.window * width_f, grids.window * width_f, grids.points)
    omega = center + detuning
    series = pd.DataFrame(
        {
            "omega_rad_s": omega,
            "detuning_rad_s": detuning,
            "S_backward": phasematch.freespace_spectrum(backward, kappa, omega, omega_p),
            "S_forward": phasematch.freespace_spectrum(forward, kappa, omega, omega_p),
        }
    )
    cluster = cavity.cluster_spacing(backward, omega_p)
    result.plots.append(
        PlotSeries(
            "freespace_spectrum",
            series,
            "detuning_rad_s",
            ["S_backward", "S_forward"],
            "Signal detuning [GHz]",
            "Spectral density [s]",
            "Backward and forward gain with adjacent mode pairs",
            markers=[units.rad_s_to_ghz(d) for d in cavity.mode_pair_offsets(cluster)],
            x_scale=units.rad_s_to_ghz(1.0),
        )
    )

    if verify:
        result.checks.append(Check("numerical_gain_linewidth", abs(numerical - width_b) / width_b, 0.02))
        result.checks.extend(spatial_checks(backward, omega_p, width_b))

    return result


def cavity_result(cfg: SourceConfig, verify: bool = False, seed: int = None) -> Result:
    source = build_source(cfg)
    rates = source.rates
    crystal = source.crystal
    cluster = cavity.cluster_analysis(crystal, source.omega_pump)
    gain = phasematch.gain_linewidth(crystal, source.omega_pump)
    check = cavity.single_mode_check(cluster.spacing, gain)
    signal = dispersion_sample(crystal.signal, source.pair.Omega_q)
    idler = dispersion_sample(crystal.idler, source.pair.Omega_r)
    fsr_phase_s = cavity.mode_spacing(signal.n, source.cavity.length)
    fsr_phase_i = cavity.mode_spacing(idler.n, source.cavity.length)
    result = Result("cavity")

    row = {
        "Delta_s": rates.Delta_s,
        "Delta_i": rates.Delta_i,
        "gamma_s": rates.gamma_s,
        "gamma_i": rates.gamma_i,
        "Gamma_s": rates.Gamma_s,
        "Gamma_i": rates.Gamma_i,
        "finesse_s": rates.finesse_s,
        "finesse_i": rates.finesse_i,
        "phase_fsr_s": fsr_phase_s,
        "phase_fsr_i": fsr_phase_i,
        "cluster_spacing": cluster.spacing,
        "M": cluster.M,
        "N": cluster.N,
        "gain_linewidth": gain,
        "single_mode": check.single_mode,
        "single_mode_margin": check.margin,
        "q": source.pair.q,
        "r": source.pair.r,
        "Omega_q": source.pair.Omega_q,
        "Omega_r": source.pair.Omega_r,
        "double_resonance_mismatch": source.pair.mismatch,
    }
    result.tables["cavity"] = pd.DataFrame([row])

    result.scalars.extend(
        [
            Scalar("mode_spacing_signal", rates.Delta_s, "rad/s", units.rad_s_to_ghz(rates.Delta_s), "GHz (x 2pi)"),
            Scalar("mode_spacing_idler", rates.Delta_i, "rad/s", units.rad_s_to_ghz(rates.Delta_i), "GHz (x 2pi)"),
            Scalar("phase_index_fsr_signal", fsr_phase_s, "rad/s", units.rad_s_to_ghz(fsr_phase_s), "GHz (x 2pi)"),
            Scalar("phase_index_fsr_idler", fsr_phase_i, "rad/s", units.rad_s_to_ghz(fsr_phase_i), "GHz (x 2pi)"),
            Scalar("output_coupling_signal", rates.gamma_s, "rad/s", units.rad_s_to_mhz(rates.gamma_s), "MHz (x 2pi)"),
            Scalar("output_coupling_idler", rates.gamma_i, "rad/s", units.rad_s_to_mhz(rates.gamma_i), "MHz (x 2pi)"),
            Scalar("decay_rate_signal", rates.Gamma_s, "rad/s", units.rad_s_to_mhz(rates.Gamma_s), "MHz (x 2pi)"),
            Scalar("decay_rate_idler", rates.Gamma_i, "rad/s", units.rad_s_to_mhz(rates.Gamma_i), "MHz (x 2pi)"),
            Scalar("finesse_signal", rates.finesse_s, "1"),
            Scalar("finesse_idler", rates.finesse_i, "1"),
            Scalar("cluster_spacing", cluster.spacing, "rad/s", units.rad_s_to_wavenumber(cluster.spacing), "cm^-1 (x 2pi)"),
            Scalar("single_mode_margin", check.margin, "1"),
            Scalar("single_mode", float(check.single_mode), "1"),
        ]
    )

    if verify:
        spec = source.cavity
        identity = max(
            abs((rates.Gamma_s - rates.gamma_s) - 2 * spec.loss_signal * rates.Delta_s) / rates.Gamma_s,
            abs((rates.Gamma_i - rates.gamma_i) - 2 * spec.loss_idler * rates.Delta_i) / rates.Gamma_i,
        )
        result.checks.append(Check("decay_identity", identity, 1e-12))
        x = cluster.spacing
        residual = min(abs(cluster.M * x**2 + cluster.N * x - 1), abs(cluster.M * x**2 + cluster.N * x + 1))
        result.checks.append(Check("cluster_root_residual", residual, 1e-9))

    return result


def biphoton_result(cfg: SourceConfig, verify: bool = False, seed: int = None) -> Result:
    source = build_source(cfg)
    report = resonant_report(source)
    rates = source.rates
    result = Result("biphoton")

    detuning = report.omega - source.pair.Omega_q
    series = pd.DataFrame({"omega_rad_s": report.omega, "detuning_rad_s": detuning, "S1": report.spectrum})
    result.plots.append(
        PlotSeries("spectrum", series, "detuning_rad_s", ["S1"], "Signal detuning [MHz]", "Spectral density [s]", "Biphoton spectrum", x_scale=units.rad_s_to_mhz(1.0))
    )

    result.scalars.extend(biphoton_scalars(source, report))

    if verify:
        coeffs = biphoton.coefficients(rates, source.kappa1, source.pair.Omega_q, source.pair.Omega_r, report.omega, source.omega_pump)
        closed = biphoton.spectral_density(rates, source.kappa1, coeffs.signal_detuning, coeffs.idler_detuning)
        result.checks.append(Check("spectrum_identity", float(np.max(np.abs(report.spectrum - closed) / closed)), 1e-12))
        result.checks.append(Check("rate_quadrature", abs(biphoton.pair_rate_quadrature(coeffs) - report.rate) / report.rate, 1e-3))
        if abs(source.pair.mismatch) <= 1e-9 * source.pair.Omega_q:
            numerical = biphoton.numerical_linewidth(coeffs)
            result.checks.append(Check("linewidth_scan", abs(numerical - report.linewidth) / report.linewidth, 5e-3))
        if rates.lossless:
            unitarity = float(np.max(np.abs(np.abs(coeffs.A1) - 1)) + np.max(np.abs(np.abs(coeffs.D1) - 1)))
            result.checks.append(Check("lossless_unitarity", unitarity, 1e-12))
        result.checks.append(cavity_oracle_check(rates, source.pair.Omega_q, source.omega_pump))

    return result


def g2_result(cfg: SourceConfig, verify: bool = False, seed: int = None) -> Result:
    source = build_source(cfg)
    report = resonant_report(source)
    rates = source.rates
    result = Result("g2")

    series = pd.DataFrame({"tau_ns": units.s_to_ns(report.tau), "G2": report.g2, "G2_normalized": report.normalized_g2})
    result.plots.append(PlotSeries("g2", series, "tau_ns", ["G2"], "Delay idler - signal [ns]", "G2 [1/s^2]", "Glauber correlation"))

    result.scalars.extend(
        [
            Scalar("correlation_time", report.correlation_time, "s", units.s_to_ns(report.correlation_time), "ns"),
            Scalar("coherence_time", report.coherence_time, "s", units.s_to_ns(report.coherence_time), "ns"),
            Scalar("g2_peak", float(biphoton.g2(rates, source.kappa1, 0.0)), "1/s^2"),
            Scalar("accidentals", report.accidentals, "1/s^2"),
        ]
    )

    if verify:
        left = float(biphoton.g2(rates, source.kappa1, -1e-12 / max(rates.Gamma_s, rates.Gamma_i)))
        right = float(biphoton.g2(rates, source.kappa1, 0.0))
        result.checks.append(Check("g2_continuity", abs(left - right) / right, 1e-9))
        if rates.lossless:
            tau = np.linspace(-biphoton.TAU_WINDOW, biphoton.TAU_WINDOW, FOURIER_CHECK_POINTS) / min(rates.Gamma_s, rates.Gamma_i)
            closed = biphoton.g2(rates, source.kappa1, tau)
            fourier = biphoton.g2_fourier(rates, source.kappa1, tau)
            result.checks.append(Check("g2_fourier", float(np.max(np.abs(fourier - closed) / closed)), 1e-6))
        else:
            logger.info("Cavity has intracavity loss; skipping the Fourier-integral G2 comparison.")

    return result


def events_result(cfg: SourceConfig, verify: bool = False, seed: int = None) -> Result:
    source = build_source(cfg)
    rates = source.rates
    rate = biphoton.pair_rate(rates, source.kappa1)
    ev = cfg.events
    seed = ev.seed if seed is None else seed
    stream = pairgen.generate(rate, rates.Gamma_s, rates.Gamma_i, ev.duration_s, seed, source.config_hash)
    result = Result("events", stream=stream)

    window = units.ns_to_s(ev.window_ns) if ev.window_ns else 10 / min(rates.Gamma_s, rates.Gamma_i)
    bin_width = units.ns_to_s(ev.bin_ns) if ev.bin_ns else window / 100
    result.scalars.extend(
        [
            Scalar("pair_rate", rate, "1/s"),
            Scalar("signal_events", float(stream.signal_times.size), "1"),
            Scalar("idler_events", float(stream.idler_times.size), "1"),
            Scalar("purity", rate * biphoton.coherence_time(rates), "1"),
        ]
    )

    if stream.signal_times.size == 0 or stream.idler_times.size == 0:
        logger.warning("Event stream is empty; no coincidence histogram written.")
        return result

    hist = pairgen.histogram(stream, window, bin_width)
    expected = (biphoton.g2(rates, source.kappa1, hist.bin_centers) + rate**2) * stream.duration * hist.bin_width
    result.plots.append(
        PlotSeries(
            "histogram",
            pd.DataFrame({"tau_s": hist.bin_centers, "count": hist.counts, "expected": expected}),
            "tau_s",
            ["count", "expected"],
            "Delay idler - signal [ns]",
            "Coincidences per bin",
            "Coincidence histogram",
            x_scale=units.s_to_ns(1.0),
        )
    )
    result.scalars.append(Scalar("coincidences", float(hist.total_pairs), "1"))

    if hist.total_pairs >= MIN_FIT_PAIRS:
        fit_s, fit_i = pairgen.fit_decay_rates(hist)
        background = pairgen.accidental_fraction(stream, hist)
        statistic, pvalue = pairgen.ks_test(hist.delays, rates.Gamma_s, rates.Gamma_i, window, background)
        threshold = pairgen.ks_threshold(hist.total_pairs)
        result.scalars.extend(
            [
                Scalar("fitted_decay_rate_signal", fit_s, "rad/s", units.rad_s_to_mhz(fit_s), "MHz (x 2pi)"),
                Scalar("fitted_decay_rate_idler", fit_i, "rad/s", units.rad_s_to_mhz(fit_i), "MHz (x 2pi)"),
                Scalar("fitted_correlation_time", pairgen.fitted_correlation_time(fit_s, fit_i), "s", units.s_to_ns(pairgen.fitted_correlation_time(fit_s, fit_i)), "ns"),
                Scalar("accidental_fraction", background, "1"),
                Scalar("ks_statistic", statistic, "1"),
                Scalar("ks_pvalue", pvalue, "1"),
            ]
        )
        if verify:
            result.checks.append(Check("ks_distance", statistic, threshold))
            result.checks.append(Check("fitted_decay_signal", abs(fit_s - rates.Gamma_s) / rates.Gamma_s, 0.05))
            result.checks.append(Check("fitted_decay_idler", abs(fit_i - rates.Gamma_i) / rates.Gamma_i, 0.05))
    elif verify:
        logger.info(f"Only {hist.total_pairs} coincidences; statistical checks need {MIN_FIT_PAIRS}.")

    return result


def report_result(cfg: SourceConfig, verify: bool = False, seed: int = None) -> Result:
    """
    The full scalar table together with the spectrum, correlation and gain-overlay plots.
    """
    result = Result("report")
    for part in (design_result, freespace_result, cavity_result, biphoton_result, g2_result):
        sub = part(cfg, verify=verify, seed=seed)
        result.extend(sub)

    source = build_source(cfg)
    report = resonant_report(source)
    _, forward = geometry_pair(source)
    forward_report = phasematch.freespace_report(forward, source_freespace_kappa(source), source.omega_pump, source.pump_power)
    ratio = biphoton.resonant_vs_forward_ratio(report, forward_report)
    result.scalars.append(Scalar("resonant_vs_forward_brightness_ratio", ratio, "1"))

    names = {}
    for scalar in result.scalars:
        names.setdefault(scalar.name, scalar)
    result.scalars = list(names.values())

    return result


def oracle_result(cfg: SourceConfig, verify: bool = False, seed: int = None) -> Result:
    """
    Seeded cavity sweep at oracle-scale coupling with the convergence trace of the central run.
    """
    source = build_source(cfg)
    rates = source.rates
    kappa1 = ORACLE_KAPPA1_RATIO * min(rates.Gamma_s, rates.Gamma_i)
    detunings = np.linspace(-3, 3, ORACLE_DETUNINGS) * max(rates.Gamma_s, rates.Gamma_i)
    Omega_q = source.pair.Omega_q
    Omega_r = source.omega_pump - Omega_q
    result = Result("oracle")

    sweep = oracle.sweep_transfer(rates, kappa1, detunings)
    coeffs = biphoton.coefficients(rates, kappa1, Omega_q, Omega_r, Omega_q + detunings)
    sweep["A1_re"], sweep["A1_im"] = coeffs.A1.real, coeffs.A1.imag
    sweep["C1_re"], sweep["C1_im"] = coeffs.C1.real, coeffs.C1.imag
    signal = sweep["signal_ratio_re"] + 1j * sweep["signal_ratio_im"]
    idler = sweep["idler_ratio_re"] + 1j * sweep["idler_ratio_im"]
    sweep["signal_rel_dev"] = np.abs(signal - coeffs.A1) / np.abs(coeffs.A1)
    sweep["idler_rel_dev"] = np.abs(idler - coeffs.C1) / np.abs(coeffs.C1)
    result.tables["oracle_sweep"] = sweep

    trace = oracle.seeded_transfer(rates, kappa1, oracle.SeededRun(detuning=0.0)).trace
    result.tables["oracle_trace"] = trace

    deviation = float(max(sweep["signal_rel_dev"].max(), sweep["idler_rel_dev"].max()))
    result.scalars.append(Scalar("oracle_kappa1", kappa1, "rad/s"))
    result.scalars.append(Scalar("oracle_max_relative_deviation", deviation, "1"))
    if verify:
        result.checks.append(Check("cavity_transfer_oracle", deviation, 1e-6))

    return result


def resonant_report(source: Source) -> biphoton.BiphotonReport:
    grids = source.config.grids
    return biphoton.biphoton_report(
        source.rates,
        source.kappa1,
        source.pair.Omega_q,
        source.pair.Omega_r,
        source.pump_power,
        source.omega_pump,
        spectrum_window=grids.spectrum.window,
        spectrum_points=grids.spectrum.points,
        tau_window=grids.tau.window,
        tau_points=grids.tau.points,
        include_accidentals=grids.include_accidentals,
    )


def biphoton_scalars(source: Source, report: biphoton.BiphotonReport) -> List[Scalar]:
    return [
        Scalar("biphoton_linewidth", report.linewidth, "rad/s", units.rad_s_to_mhz(report.linewidth), "MHz (x 2pi)"),
        Scalar("pair_rate", report.rate, "1/s"),
        Scalar("correlation_time", report.correlation_time, "s", units.s_to_ns(report.correlation_time), "ns"),
        Scalar("brightness", report.rate / report.linewidth, "1/s per rad/s", report.brightness, "1/s/MHz"),
        Scalar("brightness_per_mw", report.brightness_per_mw, "1/s/MHz/mW"),
        Scalar("kappa1", abs(report.kappa1), "rad/s", units.rad_s_to_mhz(abs(report.kappa1)), "MHz (x 2pi)"),
        Scalar("delta_k_prime", source.delta_k_prime, "1/m"),
        Scalar("purity", report.purity, "1"),
        Scalar("accidentals", report.accidentals, "1/s^2"),
        Scalar("gain_too_large", float(report.gain_too_large), "1"),
    ]


def geometry_pair(source: Source):
    """
    Backward and forward crystals of the source's material and length, each poled for its own geometry.
    """
    base = replace(source.crystal, poling_period=None)
    lambda_p = pump_wavelength(source.config)
    lambda_s = float(units.omega_to_wavelength(source.pair.Omega_q))
    backward = phasematch.designed_crystal(replace(base, geometry=Geometry.BACKWARD), lambda_p, lambda_s)
    forward = phasematch.designed_crystal(replace(base, geometry=Geometry.FORWARD), lambda_p, lambda_s)

    return backward, forward


def source_freespace_kappa(source: Source) -> float:
    signal = dispersion_sample(source.crystal.signal, source.pair.Omega_q)
    idler = dispersion_sample(source.crystal.idler, source.omega_pump - source.pair.Omega_q)
    return biphoton.freespace_kappa(source.kappa1, signal.group_velocity, idler.group_velocity)


def spatial_checks(crystal: CrystalSpec, omega_pump: float, linewidth: float) -> List[Check]:
    """
    Shooting solution at oracle-scale coupling against the small-gain coefficients at a few detunings.
    """
    kappa = ORACLE_KAPPA_LENGTH / crystal.length
    center = phasematch.degenerate_signal(omega_pump)
    omega = center + np.array([-1.0, -0.25, 0.0, 0.4, 1.5]) * linewidth
    closed = phasematch.freespace_coefficients(crystal, kappa, omega, omega_pump)

    worst = 0.0
    for k, w in enumerate(omega):
        t = oracle.spatial_transfer(crystal, kappa, float(w), omega_pump)
        for name in ("A", "B", "C", "D"):
            expected = getattr(closed, name)[k]
            worst = max(worst, abs(getattr(t, name) - expected) / abs(expected))

    # B and C vanish at the first sinc zero, so compare them absolutely there
    w_zero = phasematch.spectral_zero(crystal, omega_pump)
    t = oracle.spatial_transfer(crystal, kappa, w_zero, omega_pump)
    closed = phasematch.freespace_coefficients(crystal, kappa, w_zero, omega_pump)
    at_zero = max(abs(t.B), abs(t.C), abs(t.B - complex(closed.B)), abs(t.C - complex(closed.C)))

    return [Check("spatial_oracle", worst, 1e-8), Check("spatial_oracle_sinc_zero", at_zero, 1e-8)]


def cavity_oracle_check(rates: cavity.DecayRates, Omega_q: float, omega_pump: float) -> Check:
    kappa1 = ORACLE_KAPPA1_RATIO * min(rates.Gamma_s, rates.Gamma_i)
    detunings = np.linspace(-3, 3, ORACLE_DETUNINGS) * max(rates.Gamma_s, rates.Gamma_i)
    coeffs = biphoton.coefficients(rates, kappa1, Omega_q, omega_pump - Omega_q, Omega_q + detunings)
    results = [oracle.seeded_transfer(rates, kappa1, oracle.SeededRun(detuning=float(d))) for d in detunings]

    return Check("cavity_transfer_oracle", oracle.transfer_deviation(results, coeffs.A1, coeffs.C1), 1e-6)


SUBCOMMANDS: Dict[str, Callable[..., Result]] = {
    "dispersion": dispersion_result,
    "design": design_result,
    "freespace": freespace_result,
    "cavity": cavity_result,
    "biphoton": biphoton_result,
    "g2": g2_result,
    "events": events_result,
    "report": report_result,
    "oracle": oracle_result,
}
