"""Independent reference computations used to pin expected test values.

Nothing here shares code paths with the package's solvers: the discrete fixed
point comes from a zero-flux recursion, slopes from the closed-form
least-squares expression, and moments from a high-order ODE integrator.
"""

import numpy as np
from scipy.integrate import solve_ivp

from fplab import Field, Grid1D


def fixed_point_density(spec, grid: Grid1D, advection: str = "central") -> Field:
    """Null state of the interface-flux discretization, unit trapezoid mass.

    A zero-flux steady state satisfies F_{i+1/2} = 0 at every interface, which
    fixes each node ratio p_{i+1}/p_i in closed form. Accumulated in log space
    to stay finite for stiff potentials.
    """
    x = grid.nodes
    dx = grid.spacing
    b = -spec.potential.evaluate((x[:-1] + x[1:]) / 2)[1]
    s2 = spec.sigma**2
    if advection == "central":
        log_ratio = np.log(s2 + b * dx) - np.log(s2 - b * dx)
    elif advection == "upwind":
        log_ratio = np.where(
            b >= 0,
            np.log1p(2 * b * dx / s2),
            -np.log1p(-2 * b * dx / s2),
        )
    else:
        raise ValueError(advection)
    logp = np.concatenate(([0.0], np.cumsum(log_ratio)))
    v = np.exp(logp - logp.max())
    v /= np.dot(grid.weights, v)
    return Field(grid, v, time=0.0)


def lsq_slope(xs, ys) -> float:
    """Closed-form least-squares slope of log y against log x."""
    lx = np.log(np.asarray(xs, dtype=float))
    ly = np.log(np.asarray(ys, dtype=float))
    n = len(lx)
    sxy = n * np.sum(lx * ly) - np.sum(lx) * np.sum(ly)
    sxx = n * np.sum(lx * lx) - np.sum(lx) ** 2
    return float(sxy / sxx)


def forced_mean_ode(epsilon: float, t_final: float) -> float:
    """Mean of dX = (-X + eps cos t) dt + sigma dW from X(0) = 0, integrated
    numerically at high order."""
    sol = solve_ivp(
        lambda t, m: -m + epsilon * np.cos(t),
        (0.0, t_final),
        [0.0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
        t_eval=[t_final],
    )
    return float(sol.y[0, -1])


def variance_ode(sigma: float, t_final: float) -> float:
    """Variance of the same process: v' = -2v + sigma^2 from v(0) = 0."""
    sol = solve_ivp(
        lambda t, v: -2 * v + sigma**2,
        (0.0, t_final),
        [0.0],
        method="DOP853",
        rtol=1e-12,
        atol=1e-14,
        t_eval=[t_final],
    )
    return float(sol.y[0, -1])


def deriv5(f, t: float, h: float = 1e-3) -> float:
    """Fourth-order five-point first derivative."""
    return (-f(t + 2 * h) + 8 * f(t + h) - 8 * f(t - h) + f(t - 2 * h)) / (12 * h)
