"""
Grid-based line-shape helpers shared by the free-space and cavity spectra.
"""
from typing import Tuple

from scipy.integrate import trapezoid
from scipy.signal import peak_widths
import numpy as np


def half_maximum_points(x: np.ndarray, y: np.ndarray) -> Tuple[float, float]:
    """
    Linearly interpolated abscissae where the main peak of y crosses half its maximum.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 3:
        raise ValueError("Line shape needs matching x and y grids with at least three points.")

    peak = int(np.argmax(y))
    if peak in (0, y.size - 1):
        raise ValueError("Line shape maximum lies on the grid edge; widen the window.")

    # Prominence fixed to the peak height so the reference level is exactly y_max / 2
    prominence_data = (np.array([y[peak]]), np.array([0]), np.array([y.size - 1]))
    _, _, left, right = peak_widths(y, [peak], rel_height=0.5, prominence_data=prominence_data)

    index = np.arange(x.size)
    return float(np.interp(left[0], index, x)), float(np.interp(right[0], index, x))


def fwhm(x: np.ndarray, y: np.ndarray) -> float:
    lower, upper = half_maximum_points(x, y)
    return upper - lower


def integrate(x: np.ndarray, y: np.ndarray) -> float:
    return float(trapezoid(y, x))
