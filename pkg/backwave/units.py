"""
Conversions between the conventional units used in config files and reports
(nm, cm, mW, MHz, GHz, ns, cm^-1) and the SI angular-frequency units used for
all internal computation. No other module converts units.
"""
from scipy.constants import c, pi
import numpy as np

NM = 1e-9
UM = 1e-6
CM = 1e-2
MW = 1e-3
NS = 1e-9


def nm_to_m(value: float) -> float:
    return value * NM


def m_to_nm(value: float) -> float:
    return value / NM


def cm_to_m(value: float) -> float:
    return value * CM


def mw_to_w(value: float) -> float:
    return value * MW


def w_to_mw(value: float) -> float:
    return value / MW


def s_to_ns(value: float) -> float:
    return value / NS


def ns_to_s(value: float) -> float:
    return value * NS


def wavelength_to_omega(wavelength: float) -> float:
    """
    Vacuum wavelength [m] to angular frequency [rad/s].
    """
    return 2 * pi * c / np.asarray(wavelength)


def omega_to_wavelength(omega: float) -> float:
    """
    Angular frequency [rad/s] to vacuum wavelength [m].
    """
    return 2 * pi * c / np.asarray(omega)


def omega_to_um(omega: float) -> float:
    return omega_to_wavelength(omega) / UM


def rad_s_to_mhz(value: float) -> float:
    return value / (2 * pi * 1e6)


def mhz_to_rad_s(value: float) -> float:
    return value * 2 * pi * 1e6


def rad_s_to_ghz(value: float) -> float:
    return value / (2 * pi * 1e9)


def ghz_to_rad_s(value: float) -> float:
    return value * 2 * pi * 1e9


def rad_s_to_wavenumber(value: float) -> float:
    """
    Angular frequency interval [rad/s] to wavenumber interval [cm^-1], i.e. the X in 2π × X cm^-1.
    """
    return value / (2 * pi * c) * CM


def wavenumber_to_rad_s(value: float) -> float:
    return value * 2 * pi * c / CM
