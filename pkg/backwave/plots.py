"""
Plot grids: every series is written as CSV data next to a self-contained SVG rendering.
"""
from pathlib import Path
from typing import List, Sequence, Union
import logging

from matplotlib.figure import Figure
from pandas import DataFrame
import matplotlib

from backwave.errors import IoError
from backwave.report import write_csv

logger = logging.getLogger(__name__)

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "backwave"
matplotlib.rcParams["svg.fonttype"] = "path"


def emit_plot_grid(
    series: DataFrame,
    path: Union[str, Path],
    x: str,
    y: Sequence[str],
    xlabel: str,
    ylabel: str,
    title: str = "",
    config_hash: str = "",
    markers: Sequence[float] = (),
    formats: Sequence[str] = ("csv", "svg"),
    x_scale: float = 1.0,
) -> List[Path]:
    """
    Write `series` to <path>.csv and plot columns y against x to <path>.svg.

    x_scale multiplies the x column for display only; markers are vertical lines at display x positions.
    """
    if series.empty:
        raise ValueError("Plot series is empty.")

    path = Path(path)
    written = []
    if "csv" in formats:
        written.append(write_csv(series, path.with_suffix(".csv"), config_hash))

    if "svg" in formats:
        written.append(_render_svg(series, path.with_suffix(".svg"), x, y, xlabel, ylabel, title, config_hash, markers, x_scale))

    return written


def _render_svg(series, path, x, y, xlabel, ylabel, title, config_hash, markers, x_scale) -> Path:
    fig = Figure(figsize=(7, 4.5))
    ax = fig.subplots()
    for column in y:
        ax.plot(series[x] * x_scale, series[column], label=column, linewidth=1.2)

    for position in markers:
        ax.axvline(position, color="tab:red", linewidth=0.8, linestyle="--")

    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(f"{title} [{config_hash}]" if config_hash else title)
    if len(y) > 1:
        ax.legend()
    fig.tight_layout()

    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as e:
        raise IoError(f"Cannot write {path}: {e}")

    logger.info(f"Wrote {path}")
    return path
