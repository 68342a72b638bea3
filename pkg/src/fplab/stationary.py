"""Stationary density of the autonomous problem and its consistency checks.

With the forcing off, the density exp(-2V(x)/sigma^2) (up to a constant) is a
fixed point of the drift-diffusion flow. ``stationary_residual`` and
``log_derivative_check`` verify the discrete version of that statement and are
expected to shrink at second order under grid refinement.
"""

from __future__ import annotations

import numpy as np

from .grid import Field, Grid1D, differentiate, integrate
from .problem import ProblemSpec

__all__ = [
    "stationary_density",
    "stationary_log_shift",
    "stationary_residual",
    "log_derivative_check",
]


def stationary_log_shift(spec: ProblemSpec, grid: Grid1D) -> float:
    """The potential shift used by ``stationary_density(normalize=False)``.

    Unnormalized values equal exp(-2*(V(x) - shift)/sigma^2); the shift is the
    minimum of V over the grid, which guards the exponential against overflow
    for stiff potentials. Normalization makes the shift irrelevant.
    """
    return float(spec.potential.evaluate(grid.nodes)[0].min())


def stationary_density(spec: ProblemSpec, grid: Grid1D, normalize: bool = True) -> Field:
    """Sample exp(-2V/sigma^2) on the grid.

    With ``normalize=True`` the field integrates to 1 (trapezoid rule); with
    ``normalize=False`` the constant is 1 against the shifted potential, see
    ``stationary_log_shift``.
    """
    v = spec.potential.evaluate(grid.nodes)[0]
    values = np.exp(-2 * (v - v.min()) / spec.sigma**2)
    f = Field(grid, values, time=0.0)
    if normalize:
        f = f.with_values(values / integrate(f))
    return f


def stationary_residual(phat: Field, spec: ProblemSpec) -> float:
    """Max-abs residual of the autonomous fixed-point equation
    d/dx[V'(x) p] + (sigma^2/2) d2p/dx2 = 0 under the grid stencils."""
    dv = spec.potential.evaluate(phat.grid.nodes)[1]
    transport = differentiate(phat.with_values(dv * phat.values), 1).values
    spread = (spec.sigma**2 / 2) * differentiate(phat, 2).values
    return float(np.max(np.abs(transport + spread)))


def log_derivative_check(phat: Field, spec: ProblemSpec) -> float:
    """Max-abs residual of the identity dp/dx = -(2/sigma^2) V'(x) p."""
    dv = spec.potential.evaluate(phat.grid.nodes)[1]
    lhs = differentiate(phat, 1).values
    return float(np.max(np.abs(lhs + (2 / spec.sigma**2) * dv * phat.values)))
