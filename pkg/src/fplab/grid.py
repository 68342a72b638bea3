"""Uniform 1-D grid, trapezoid quadrature, norms, and finite-difference stencils.

Everything downstream (PDE solvers, Monte Carlo binning, diagnostics) shares
this discretization, so quadrature and stencils are kept at a single,
consistent second order of accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid of ``n`` nodes on ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if not self.x_min < self.x_max:
            raise ValueError(f"empty interval: [{self.x_min}, {self.x_max}]")
        if self.n < 3:
            raise ValueError(f"need at least 3 nodes, got {self.n}")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid quadrature weights (half weight at the two end nodes)."""
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = self.spacing / 2
        return w


@dataclass(frozen=True)
class Field:
    """Real-valued function sampled on a grid, tagged with a time."""

    grid: Grid1D
    values: np.ndarray = field(repr=False)
    time: float = 0.0

    def __post_init__(self) -> None:
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(
                f"values shape {v.shape} does not match grid size {self.grid.n}"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray, time: float | None = None) -> "Field":
        return Field(self.grid, values, self.time if time is None else time)


class Norms(NamedTuple):
    l1: float
    l2: float
    linf: float


def make_grid(x_min: float, x_max: float, n: int) -> Grid1D:
    return Grid1D(float(x_min), float(x_max), int(n))


def require_same_grid(f: Field, g: Field) -> None:
    if f.grid != g.grid:
        raise ValueError(f"grid mismatch: {f.grid} vs {g.grid}")


def integrate(f: Field) -> float:
    """Composite trapezoid rule over the whole grid."""
    return float(np.dot(f.grid.weights, f.values))


def norms(f: Field, g: Field) -> Norms:
    """Trapezoid-weighted L1 and L2 distances plus the max-abs distance."""
    require_same_grid(f, g)
    d = f.values - g.values
    w = f.grid.weights
    return Norms(
        l1=float(np.dot(w, np.abs(d))),
        l2=float(np.sqrt(np.dot(w, d * d))),
        linf=float(np.max(np.abs(d))),
    )


# boundary stencils are written as combinations of differences so that
# constant fields differentiate to exactly zero

def _diff1(v: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2 * dx)
    out[0] = (4 * (v[1] - v[0]) - (v[2] - v[0])) / (2 * dx)
    out[-1] = -(4 * (v[-2] - v[-1]) - (v[-3] - v[-1])) / (2 * dx)
    return out


def _diff2(v: np.ndarray, dx: float) -> np.ndarray:
    out = np.empty_like(v)
    out[1:-1] = ((v[2:] - v[1:-1]) - (v[1:-1] - v[:-2])) / dx**2
    if len(v) >= 4:
        out[0] = (-5 * (v[1] - v[0]) + 4 * (v[2] - v[0]) - (v[3] - v[0])) / dx**2
        out[-1] = (-5 * (v[-2] - v[-1]) + 4 * (v[-3] - v[-1]) - (v[-4] - v[-1])) / dx**2
    else:
        # n == 3: the centered stencil is the best available at the ends
        out[0] = out[-1] = out[1]
    return out


def differentiate(f: Field, order: int) -> Field:
    """Discrete d/dx or d2/dx2, second-order centered stencils in the interior
    and one-sided second-order stencils at the two boundary nodes."""
    if order == 1:
        return f.with_values(_diff1(f.values, f.grid.spacing))
    if order == 2:
        return f.with_values(_diff2(f.values, f.grid.spacing))
    raise ValueError(f"order must be 1 or 2, got {order}")
