"""Closed-form reference solution for the periodically forced
Ornstein-Uhlenbeck process with unit reversion rate and zero long-term mean:

    dX = (-X + eps * cos t) dt + sigma dW,   X(0) = 0.

The density stays Gaussian for all time. Its mean solves the first-moment
equation m' = -m + eps * cos t with m(0) = 0, which integrates to
m(t) = (eps/2)(cos t + sin t - e^{-t}); its variance solves v' = -2v + sigma^2
with v(0) = 0, giving v(t) = sigma^2 (1 - e^{-2t}) / 2. Both are independently
checkable against a high-order ODE integrator and against Monte Carlo, which
is what makes this module usable as an oracle for the PDE solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .approx import assemble, fit_slope
from .evolution import SchemeConfig, solve_kappa
from .grid import Field, Grid1D
from .problem import CosinePerturbation, ProblemSpec, QuadraticPotential
from .stationary import stationary_density

__all__ = ["OUOracle", "z1", "ou_moments", "ou_exact_density", "ou_delta_order"]


def z1(t):
    """-sin t - cos t + e^{-t}; the mean of the forced process is -(eps/2) z1(t)."""
    t = np.asarray(t, dtype=float)
    out = -np.sin(t) - np.cos(t) + np.exp(-t)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class OUOracle:
    """Forced Ornstein-Uhlenbeck reference with reversion rate 1 and mean 0."""

    epsilon: float
    sigma: float

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def problem(self, domain: tuple[float, float] = (-6.0, 6.0),
                time_window: tuple[float, float] = (0.0, 20.0)) -> ProblemSpec:
        """The matching ProblemSpec (drift -x + eps*cos t)."""
        return ProblemSpec(
            potential=QuadraticPotential(theta=1.0, mu=0.0),
            perturbation=CosinePerturbation(amplitude=1.0, omega=1.0),
            epsilon=self.epsilon,
            sigma=self.sigma,
            domain=domain,
            time_window=time_window,
        )


def ou_moments(oracle: OUOracle, t: float) -> tuple[float, float]:
    """(mean, variance) of the process at time t >= 0."""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    mean = -(oracle.epsilon / 2) * z1(t)
    variance = oracle.sigma**2 * (1 - math.exp(-2 * t)) / 2
    return mean, variance


def ou_exact_density(oracle: OUOracle, t: float, grid: Grid1D) -> Field:
    """The Gaussian density at time t > 0 sampled on the grid."""
    if t <= 0:
        raise ValueError(f"density is a point mass at t = 0; need t > 0, got {t}")
    mean, variance = ou_moments(oracle, t)
    x = grid.nodes
    values = np.exp(-((x - mean) ** 2) / (2 * variance)) / math.sqrt(2 * math.pi * variance)
    return Field(grid, values, time=float(t))


def ou_delta_order(
    oracle: OUOracle,
    grid: Grid1D,
    scheme: SchemeConfig,
    epsilons,
    t_eval: float,
) -> float:
    """Fitted log-log slope of ||exact - ptilde||_inf against epsilon.

    ptilde is assembled from the stationary density and the numerically solved
    correction (which does not involve epsilon, so one solve serves every
    rung of the ladder). Errors of zero are rejected by the slope fit.
    """
    eps = sorted((float(e) for e in epsilons), reverse=True)
    if len(eps) < 3:
        raise ValueError("need at least 3 epsilon values")
    if eps[0] > 0.5 or eps[-1] <= 0:
        raise ValueError("epsilon values must lie in (0, 0.5]")

    spec = oracle.problem(domain=(grid.x_min, grid.x_max),
                          time_window=(0.0, max(t_eval, 20.0)))
    phat = stationary_density(spec, grid, normalize=True)
    endpoints_only = replace(scheme, snapshot_stride=10**9)
    kappa0 = Field(grid, np.zeros(grid.n), time=0.0)
    kappa = solve_kappa(spec, grid, endpoints_only, kappa0, 0.0, t_eval).final

    points = []
    for e in eps:
        exact = ou_exact_density(replace(oracle, epsilon=e), t_eval, grid)
        ptilde = assemble(phat, kappa, e)
        points.append((e, float(np.max(np.abs(exact.values - ptilde.values)))))
    return fit_slope(points)
