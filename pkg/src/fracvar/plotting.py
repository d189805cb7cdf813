"""Figure rendering for the CLI report path.

Figures are written straight to files (Agg backend, no display); the
delimited outputs remain the primary artifacts and figures are opt-in.
"""

from __future__ import annotations

from typing import Dict, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .grid import GridFunction  # noqa: E402

_RC = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 130,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "font.size": 10,
}


def _new_axes(title: Optional[str], xlabel: str, ylabel: str):
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    return fig, ax


def _save(fig, path) -> None:
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_grid_function(gf: GridFunction, path, ylabel: str = "value",
                       title: Optional[str] = None) -> None:
    fig, ax = _new_axes(title, "t", ylabel)
    ax.plot(gf.nodes, gf.values, color="C0", label=ylabel)
    if gf.derivative_values is not None:
        ax.plot(gf.nodes, gf.derivative_values, color="C1", ls="--",
                label=f"d{ylabel}/dt")
        ax.legend()
    _save(fig, path)


def plot_series(x: Sequence[float], series: Dict[str, Sequence[float]], path,
                xlabel: str = "t", ylabel: str = "value",
                title: Optional[str] = None, logx: bool = False,
                logy: bool = False) -> None:
    fig, ax = _new_axes(title, xlabel, ylabel)
    for i, (label, ys) in enumerate(series.items()):
        ax.plot(np.asarray(x), np.asarray(ys), color=f"C{i % 10}", label=label)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    if len(series) > 1:
        ax.legend()
    _save(fig, path)


def plot_residual(nodes: np.ndarray, residual: np.ndarray, excluded: int, path,
                  title: Optional[str] = None) -> None:
    fig, ax = _new_axes(title, "t", "residual")
    ax.plot(nodes, residual, color="C0")
    if excluded > 0:
        for edge in (nodes[excluded], nodes[-excluded - 1]):
            ax.axvline(edge, color="C3", ls=":", alpha=0.7)
    _save(fig, path)
