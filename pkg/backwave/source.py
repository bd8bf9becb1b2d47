"""
Assemble a fully resolved source from a configuration: designed crystal, resonated mode pair,
decay rates and the cavity coupling at the configured pump power.
"""
from dataclasses import dataclass, field
import logging

from backwave.biphoton import kappa1_from_pump
from backwave.cavity import CavitySpec, DecayRates, ModePair, cavity_decay_rates, resolve_mode_pair
from backwave.config import (
    SourceConfig,
    build_calibration,
    build_cavity,
    build_crystal,
    pump_omega,
    pump_power,
    pump_wavelength,
)
from backwave.phasematch import CrystalSpec, delta_k, designed_crystal
from backwave import units

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Source:
    config: SourceConfig = field(repr=False)
    crystal: CrystalSpec = field(repr=False)
    cavity: CavitySpec
    pair: ModePair
    rates: DecayRates
    omega_pump: float
    pump_power: float
    kappa1: complex
    delta_k_prime: float

    @property
    def config_hash(self) -> str:
        return self.config.config_hash()


def design(cfg: SourceConfig) -> CrystalSpec:
    """
    Crystal with its poling period; `auto` is designed for degenerate emission.
    """
    crystal = build_crystal(cfg)
    if crystal.poling_period is None:
        crystal = designed_crystal(crystal, pump_wavelength(cfg))

    return crystal


def build_source(cfg: SourceConfig) -> Source:
    """
    Resolve the mode pair first; an `auto` poling period is then designed at the resonated signal
    frequency so the paired modes are exactly phase matched.
    """
    crystal = build_crystal(cfg)
    cavity = build_cavity(cfg)
    omega_p = pump_omega(cfg)

    pair = resolve_mode_pair(cavity, crystal, omega_p)
    if crystal.poling_period is None:
        crystal = designed_crystal(crystal, pump_wavelength(cfg), float(units.omega_to_wavelength(pair.Omega_q)))

    rates = cavity_decay_rates(cavity, crystal, pair)
    dk_prime = float(delta_k(crystal, pair.Omega_q, omega_p))
    power = pump_power(cfg)
    kappa1 = kappa1_from_pump(power, build_calibration(cfg), rates, dk_prime, crystal.length)

    logger.info(
        f"Mode pair q={pair.q}, r={pair.r}; Gamma_s = 2pi x {units.rad_s_to_mhz(rates.Gamma_s):.3f} MHz, "
        f"Gamma_i = 2pi x {units.rad_s_to_mhz(rates.Gamma_i):.3f} MHz, |kappa1| = {abs(kappa1):.4g} rad/s"
    )

    return Source(
        config=cfg,
        crystal=crystal,
        cavity=cavity,
        pair=pair,
        rates=rates,
        omega_pump=omega_p,
        pump_power=power,
        kappa1=kappa1,
        delta_k_prime=dk_prime,
    )
