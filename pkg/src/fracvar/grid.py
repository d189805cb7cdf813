"""Real-valued functions sampled on a uniform grid, with CSV round-tripping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import GridMismatchError, UsageError

#: CSV numeric format: 17 significant digits round-trips IEEE doubles exactly.
FLOAT_FORMAT = "%.17g"


@dataclass
class GridFunction:
    """Samples of y(t) at the n+1 uniform nodes of [a, b].

    ``derivative_values`` optionally carries analytic samples of y'(t); when
    absent, consumers fall back to second-order finite differences.
    """

    a: float
    b: float
    values: np.ndarray
    derivative_values: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size < 3:
            raise UsageError("GridFunction requires at least 3 nodes (n >= 2)")
        if not self.a < self.b:
            raise UsageError(f"GridFunction requires a < b, got ({self.a}, {self.b})")
        if self.derivative_values is not None:
            self.derivative_values = np.asarray(self.derivative_values, dtype=float)
            if self.derivative_values.shape != self.values.shape:
                raise UsageError("derivative_values must match values in shape")

    @property
    def n(self) -> int:
        return self.values.size - 1

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.values.size)

    @classmethod
    def from_callable(cls, fn: Callable, a: float, b: float, n: int,
                      derivative: Optional[Callable] = None) -> "GridFunction":
        t = np.linspace(a, b, n + 1)
        vals = np.asarray(fn(t), dtype=float)
        if vals.shape != t.shape:  # scalar-only callable
            vals = np.array([float(fn(ti)) for ti in t])
        dv = None
        if derivative is not None:
            dv = np.asarray(derivative(t), dtype=float)
            if dv.shape != t.shape:
                dv = np.array([float(derivative(ti)) for ti in t])
        return cls(a, b, vals, dv)

    def with_values(self, values: np.ndarray,
                    derivative_values: Optional[np.ndarray] = None) -> "GridFunction":
        return GridFunction(self.a, self.b, values, derivative_values)

    def require_same_grid(self, other: "GridFunction") -> None:
        if (self.n != other.n or abs(self.a - other.a) > 1e-12
                or abs(self.b - other.b) > 1e-12):
            raise GridMismatchError(
                f"grids differ: [{self.a}, {self.b}] n={self.n} "
                f"vs [{other.a}, {other.b}] n={other.n}")

    def fd_derivative(self) -> np.ndarray:
        """Second-order derivative samples: centred inside, one-sided at the ends."""
        return fd_derivative(self.values, self.h)

    def derivative_or_fd(self) -> np.ndarray:
        if self.derivative_values is not None:
            return self.derivative_values
        return self.fd_derivative()

    def to_csv(self, path) -> None:
        cols = [self.nodes, self.values]
        header = "t,value"
        if self.derivative_values is not None:
            cols.append(self.derivative_values)
            header += ",dvalue"
        np.savetxt(path, np.column_stack(cols), delimiter=",",
                   header=header, comments="", fmt=FLOAT_FORMAT)

    @classmethod
    def from_csv(cls, path) -> "GridFunction":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] < 2:
            raise UsageError(f"{path}: expected columns t,value[,dvalue]")
        t = data[:, 0]
        h = np.diff(t)
        if t.size < 3 or np.max(np.abs(h - h[0])) > 1e-9 * max(abs(t[-1] - t[0]), 1.0):
            raise UsageError(f"{path}: nodes must form a uniform grid")
        dv = data[:, 2] if data.shape[1] > 2 else None
        return cls(float(t[0]), float(t[-1]), data[:, 1], dv)


def fd_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Second-order stencils: centred inside, one-sided at the ends.

    The end stencils are written in difference form so constant inputs map to
    exactly zero.
    """
    values = np.asarray(values, dtype=float)
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    out[0] = (4.0 * (values[1] - values[0]) - (values[2] - values[0])) / (2.0 * h)
    out[-1] = (4.0 * (values[-1] - values[-2]) - (values[-1] - values[-3])) / (2.0 * h)
    return out


def trapezoid(values: np.ndarray, h: float) -> float:
    values = np.asarray(values, dtype=float)
    return float(h * (np.sum(values) - 0.5 * (values[0] + values[-1])))


def piecewise_linear_l1(values: np.ndarray, h: float) -> float:
    """Exact L1 norm of the piecewise-linear interpolant (splits sign changes)."""
    v = np.asarray(values, dtype=float)
    total = 0.0
    for vl, vr in zip(v[:-1], v[1:]):
        if vl * vr < 0.0:
            cross = vl / (vl - vr)
            total += 0.5 * h * (abs(vl) * cross + abs(vr) * (1.0 - cross))
        else:
            total += 0.5 * h * (abs(vl) + abs(vr))
    return total
