"""
Refractive index, group velocity and frequency derivatives of the index for each
crystal axis, from Sellmeier data loaded at runtime.

All functions take the angular frequency in rad/s; the Sellmeier forms themselves
are evaluated in micrometers.
"""
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Mapping, Tuple, Union
import logging
import math

from ruamel.yaml import YAML
from scipy.constants import c
import numpy as np

from backwave.errors import InvalidModel, OutOfRange
from backwave import units

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"

ArrayLike = Union[float, np.ndarray]


class Axis(str, Enum):
    Y = "y"
    Z = "z"


class SellmeierForm(str, Enum):
    ONE_POLE_IR = "one-pole-ir"
    TWO_POLE_IR = "two-pole-ir"


FORM_COEFFICIENTS = {
    SellmeierForm.ONE_POLE_IR: ("A", "B", "C", "D"),
    SellmeierForm.TWO_POLE_IR: ("A", "B1", "C1", "B2", "C2", "D"),
}


@dataclass(frozen=True)
class SellmeierModel:
    """
    Sellmeier fit for one crystal axis.

    n^2 = A + sum_j B_j l^2 / (l^2 - C_j) - D l^2, l in micrometers, valid on valid_range (micrometers).
    """
    axis: Axis
    form: SellmeierForm
    coefficients: Mapping[str, float] = field(hash=False)
    valid_range: Tuple[float, float]
    citation: str = ""

    def __post_init__(self) -> None:
        self._validate()

    @property
    def poles(self) -> Tuple[Tuple[float, float], ...]:
        k = self.coefficients
        if self.form == SellmeierForm.ONE_POLE_IR:
            return ((k["B"], k["C"]),)

        return ((k["B1"], k["C1"]), (k["B2"], k["C2"]))

    def _validate(self) -> None:
        try:
            form = SellmeierForm(self.form)
        except ValueError:
            raise InvalidModel(f"Unknown Sellmeier form '{self.form}' for axis {self.axis}.")

        expected = set(FORM_COEFFICIENTS[form])
        given = set(self.coefficients)
        if expected != given:
            raise InvalidModel(
                f"Sellmeier form '{form.value}' requires coefficients {sorted(expected)}, got {sorted(given)}."
            )

        if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in self.coefficients.values()):
            raise InvalidModel(f"Sellmeier coefficients for axis {self.axis} must be finite real numbers.")

        lo, hi = self.valid_range
        if not 0 < lo < hi:
            raise InvalidModel(f"Invalid wavelength range {self.valid_range} for axis {self.axis}.")

        # Poles inside the range would make n(l) singular
        for _, pole in self.poles:
            if pole > 0 and lo <= math.sqrt(pole) <= hi:
                raise InvalidModel(f"Sellmeier pole at {math.sqrt(pole):.4f} um lies inside the valid range.")

        lam = np.linspace(lo, hi, 257)
        if np.any(_n_squared(self, lam) <= 1):
            raise InvalidModel(f"Sellmeier model for axis {self.axis} yields n <= 1 inside its valid range.")


@dataclass(frozen=True)
class DispersionSample:
    """
    Index, its first two frequency derivatives, and the derived group quantities at one frequency.
    """
    omega: float
    n: float
    dn_domega: float
    d2n_domega2: float
    group_index: float
    group_velocity: float

    @property
    def wavevector(self) -> float:
        return self.n * self.omega / c


def load_dispersion_file(path: Union[str, Path] = None) -> Dict[Axis, SellmeierModel]:
    """
    Load the Sellmeier records of a dispersion data file, one model per axis.
    """
    path = Path(path) if path else DATA_DIR / "ktp.yaml"
    if not path.is_file():
        raise InvalidModel(f"Dispersion data file {path} does not exist.")

    yaml = YAML(typ="safe")
    with path.open("r", encoding="utf-8") as f:
        data = yaml.load(f)

    if not isinstance(data, dict) or "axes" not in data:
        raise InvalidModel(f"Dispersion data file {path} has no 'axes' section.")

    models = {}
    for name, record in data["axes"].items():
        try:
            axis = Axis(str(name).lower())
            models[axis] = SellmeierModel(
                axis=axis,
                form=SellmeierForm(record["form"]),
                coefficients={k: float(v) for k, v in record["coefficients"].items()},
                valid_range=tuple(float(v) for v in record["valid_range_um"]),
                citation=record.get("citation", ""),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidModel(f"Malformed record for axis '{name}' in {path}: {e}")

    logger.info(f"Loaded {data.get('material', 'unknown')} dispersion data v{data.get('version', '?')} from {path}.")

    return models


def constant_index_model(n0: float, axis: Axis = Axis.Y, valid_range: Tuple[float, float] = (0.2, 10.0)) -> SellmeierModel:
    """
    Dispersionless model n = n0, expressed as a one-pole form with zeroed resonance and IR terms.
    """
    return SellmeierModel(
        axis=axis,
        form=SellmeierForm.ONE_POLE_IR,
        coefficients={"A": n0**2, "B": 0.0, "C": 0.0, "D": 0.0},
        valid_range=valid_range,
        citation="dispersionless",
    )


def refractive_index(model: SellmeierModel, omega: ArrayLike) -> ArrayLike:
    """
    Refractive index n(omega) of the model's axis.
    """
    lam = _wavelength_in_range(model, omega)
    return np.sqrt(_n_squared(model, lam))


def wavevector(model: SellmeierModel, omega: ArrayLike) -> ArrayLike:
    """
    Wavevector k = n(omega) omega / c [1/m].
    """
    return refractive_index(model, omega) * np.asarray(omega) / c


def index_derivatives(model: SellmeierModel, omega: float) -> Tuple[float, float, float]:
    """
    Analytic n, dn/domega and d2n/domega2 from the differentiated Sellmeier form.
    """
    lam = _wavelength_in_range(model, omega)
    f, f1, f2 = _n_squared_derivatives(model, lam)

    n = np.sqrt(f)
    n_l = f1 / (2 * n)
    n_ll = f2 / (2 * n) - f1**2 / (4 * n**3)

    # l = 2 pi c / omega, so dl/domega = -l/omega and d2l/domega2 = 2 l/omega^2
    dn = -n_l * lam / omega
    d2n = n_ll * (lam / omega) ** 2 + n_l * 2 * lam / omega**2

    return float(n), float(dn), float(d2n)


def finite_difference_derivatives(
    model: SellmeierModel, omega: float, rel_step: float = 1e-3, rel_step2: float = 1e-2
) -> Tuple[float, float, float]:
    """
    n, dn/domega and d2n/domega2 from central differences with one Richardson extrapolation step.
    """
    n0 = float(refractive_index(model, omega))

    def first(h: float) -> float:
        return (refractive_index(model, omega + h) - refractive_index(model, omega - h)) / (2 * h)

    def second(h: float) -> float:
        return (refractive_index(model, omega + h) - 2 * n0 + refractive_index(model, omega - h)) / h**2

    h1 = rel_step * omega
    h2 = rel_step2 * omega
    dn = (4 * first(h1 / 2) - first(h1)) / 3
    d2n = (4 * second(h2 / 2) - second(h2)) / 3

    return n0, float(dn), float(d2n)


def dispersion_sample(model: SellmeierModel, omega: float, method: str = "analytic", rel_step: float = 1e-3) -> DispersionSample:
    """
    Index, derivatives, group index and group velocity at one frequency.

    method is 'analytic' (default) or 'finite-difference'.
    """
    if method == "analytic":
        n, dn, d2n = index_derivatives(model, omega)
    elif method == "finite-difference":
        n, dn, d2n = finite_difference_derivatives(model, omega, rel_step=rel_step)
    else:
        raise ValueError(f"Derivative method '{method}' is not supported.")

    group_index = n + omega * dn

    return DispersionSample(
        omega=float(omega),
        n=n,
        dn_domega=dn,
        d2n_domega2=d2n,
        group_index=group_index,
        group_velocity=c / group_index,
    )


def _wavelength_in_range(model: SellmeierModel, omega: ArrayLike) -> ArrayLike:
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise OutOfRange("Angular frequency must be positive.")

    lam = units.omega_to_um(omega)
    lo, hi = model.valid_range
    if np.any(lam < lo) or np.any(lam > hi):
        bad = lam[(lam < lo) | (lam > hi)] if lam.ndim else lam
        raise OutOfRange(
            f"Wavelength {np.min(bad):.4f}-{np.max(bad):.4f} um outside the valid range "
            f"[{lo}, {hi}] um of the {model.axis.value}-axis model.",
            axis=model.axis.value,
        )

    return lam


def _n_squared(model: SellmeierModel, lam: ArrayLike) -> ArrayLike:
    k = model.coefficients
    l2 = np.asarray(lam) ** 2
    poles = sum(b * l2 / (l2 - cc) for b, cc in model.poles)

    return k["A"] + poles - k["D"] * l2


def _n_squared_derivatives(model: SellmeierModel, lam: ArrayLike) -> Tuple[ArrayLike, ArrayLike, ArrayLike]:
    """
    n^2 and its first and second derivatives with respect to wavelength (micrometers).
    """
    k = model.coefficients
    l2 = lam**2
    f = _n_squared(model, lam)
    f1 = -2 * k["D"] * lam
    f2 = -2 * k["D"]
    for b, cc in model.poles:
        d = l2 - cc
        f1 = f1 - 2 * b * cc * lam / d**2
        f2 = f2 + 2 * b * cc * (3 * l2 + cc) / d**3

    return f, f1, f2
