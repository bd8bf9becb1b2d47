import os

from hypothesis import settings
import pytest

from backwave.cavity import DecayRates
from backwave.config import load_config
from backwave.dispersion import Axis, constant_index_model, load_dispersion_file
from backwave.phasematch import CrystalSpec, designed_crystal
from backwave.source import build_source

settings.register_profile("dev", max_examples=25, deadline=None)
settings.register_profile("ci", max_examples=200, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))

PUMP_WAVELENGTH = 532e-9
CRYSTAL_LENGTH = 0.03


@pytest.fixture(scope="session")
def ktp():
    return load_dispersion_file()


@pytest.fixture(scope="session")
def crystal(ktp):
    """
    3 cm KTP, type II (y, y, z), third-order backward poling designed for degenerate 1064 nm pairs.
    """
    return designed_crystal(CrystalSpec(length=CRYSTAL_LENGTH, qpm_order=3, dispersion=ktp), PUMP_WAVELENGTH)


@pytest.fixture
def flat_crystal():
    """
    Dispersionless crystal with identical indices on both axes.
    """
    dispersion = {Axis.Y: constant_index_model(1.8, Axis.Y), Axis.Z: constant_index_model(1.8, Axis.Z)}
    return CrystalSpec(length=0.01, qpm_order=1, dispersion=dispersion, poling_period=1e-6)


@pytest.fixture(scope="session")
def default_config():
    return load_config()


@pytest.fixture(scope="session")
def source(default_config):
    return build_source(default_config)


@pytest.fixture(scope="session")
def lossless_rates():
    return DecayRates(Delta_s=1e3, Delta_i=1.1e3, gamma_s=1.0, gamma_i=0.9, Gamma_s=1.0, Gamma_i=0.9)


@pytest.fixture(scope="session")
def lossy_rates():
    return DecayRates(Delta_s=1e3, Delta_i=1.1e3, gamma_s=1.0, gamma_i=0.9, Gamma_s=1.4, Gamma_i=1.5)
