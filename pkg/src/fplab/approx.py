"""Perturbative approximation assembly and the order-verification study.

The approximation is ptilde = phat * (1 + eps * kappa). For the exact density
p the gap |p - ptilde| closes at second order in eps while |ptilde - phat| and
|p - phat| close at first order; ``scaling_study`` measures all three exponents
by a log-log slope fit over a ladder of eps values.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .evolution import SchemeConfig, Trajectory, solve_fpe, solve_kappa
from .grid import Field, Grid1D, Norms, differentiate, norms, require_same_grid
from .problem import ProblemSpec
from .stationary import stationary_density

__all__ = [
    "ErrorReport",
    "ScalingResult",
    "assemble",
    "approx_residual",
    "error_report",
    "scaling_study",
    "fit_slope",
]


@dataclass(frozen=True)
class ErrorReport:
    """Pairwise distances among the exact, corrected, and stationary densities
    at one time, plus the pointwise gap q = p - ptilde."""

    time: float
    q_field: Field
    norms_p_ptilde: Norms
    norms_ptilde_phat: Norms
    norms_p_phat: Norms


@dataclass(frozen=True)
class ScalingResult:
    """Per-epsilon error reports and the fitted log-log slopes."""

    epsilons: tuple[float, ...]
    reports: tuple[ErrorReport, ...]
    slope_p_ptilde: float
    slope_ptilde_phat: float
    slope_p_phat: float
    eval_time: float

    def __post_init__(self) -> None:
        if len(self.epsilons) < 3:
            raise ValueError("need at least 3 epsilon values")
        if any(b >= a for a, b in zip(self.epsilons, self.epsilons[1:])):
            raise ValueError("epsilons must be strictly decreasing")


def assemble(phat: Field, kappa: Field, epsilon: float) -> Field:
    """ptilde = phat * (1 + epsilon * kappa); the time tag comes from kappa."""
    require_same_grid(phat, kappa)
    return Field(phat.grid, phat.values * (1 + epsilon * kappa.values), time=kappa.time)


def error_report(p: Field, ptilde: Field, phat: Field) -> ErrorReport:
    require_same_grid(p, ptilde)
    require_same_grid(p, phat)
    if abs(p.time - ptilde.time) > 1e-9 * max(1.0, abs(p.time)):
        raise ValueError(f"time mismatch: p at t={p.time}, ptilde at t={ptilde.time}")
    q = Field(p.grid, p.values - ptilde.values, time=p.time)
    return ErrorReport(
        time=p.time,
        q_field=q,
        norms_p_ptilde=norms(p, ptilde),
        norms_ptilde_phat=norms(ptilde, phat),
        norms_p_phat=norms(p, phat),
    )


def approx_residual(phat: Field, kappa_traj: Trajectory, spec: ProblemSpec) -> float:
    """Max-abs residual of the assembled approximation against the modified
    density equation it satisfies,

        d(ptilde)/dt = d/dx[V'(x) ptilde] + (sigma^2/2) d2(ptilde)/dx2
                       - eps * d(phat)/dx * h(t),

    with centered time differences across the kappa snapshots. Expected
    O(dt^2 + dx^2) on theta = 0.5 output.
    """
    times = kappa_traj.times
    if len(times) < 3:
        raise ValueError("need at least 3 snapshots")
    steps = np.diff(times)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise ValueError("nonuniform snapshot spacing")
    dt_snap = float(steps[0])

    eps = spec.epsilon
    dv = spec.potential.evaluate(phat.grid.nodes)[1]
    dphat = differentiate(phat, 1).values
    ptilde = [assemble(phat, k, eps).values for k in kappa_traj.snapshots]

    worst = 0.0
    for k in range(1, len(times) - 1):
        t = float(times[k])
        lhs = (ptilde[k + 1] - ptilde[k - 1]) / (2 * dt_snap)
        mid = Field(phat.grid, ptilde[k], time=t)
        rhs = (
            differentiate(mid.with_values(dv * mid.values), 1).values
            + (spec.sigma**2 / 2) * differentiate(mid, 2).values
            - eps * dphat * float(spec.h(t))
        )
        worst = max(worst, float(np.max(np.abs((lhs - rhs)[1:-1]))))
    return worst


def fit_slope(points: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log y against log x."""
    if len(points) < 2:
        raise ValueError("need at least 2 points")
    if any(x <= 0 or y <= 0 for x, y in points):
        raise ValueError("all points must be strictly positive for a log-log fit")
    lx = np.log([x for x, _ in points])
    ly = np.log([y for _, y in points])
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def scaling_study(
    spec_base: ProblemSpec,
    grid: Grid1D,
    scheme: SchemeConfig,
    epsilons: Sequence[float],
    t_eval: float,
    workers: int = 1,
) -> ScalingResult:
    """Measure the three error exponents at ``t_eval``.

    For each epsilon the density is advanced from the normalized stationary
    state; the correction is epsilon-free and solved once from zero. Slopes are
    fitted on the max-abs errors. Per-epsilon solves may run in ``workers``
    threads; the result is reduced in epsilon order either way.
    """
    eps = sorted((float(e) for e in epsilons), reverse=True)
    if len(eps) < 3:
        raise ValueError("need at least 3 epsilon values")
    if len(set(eps)) != len(eps):
        raise ValueError("epsilon values must be distinct")
    if eps[0] > 0.5 or eps[-1] <= 0:
        raise ValueError("epsilon values must lie in (0, 0.5]")
    if eps[0] > 0.2:
        warnings.warn(
            f"epsilon = {eps[0]:g} is outside the asymptotic regime (> 0.2); "
            "fitted slopes may degrade",
            stacklevel=2,
        )
    t_start = spec_base.time_window[0]
    if not t_start < t_eval <= spec_base.time_window[1]:
        raise ValueError(f"t_eval = {t_eval} outside the time window {spec_base.time_window}")

    # endpoints are all the study needs; avoid storing thousands of snapshots
    many = replace(scheme, snapshot_stride=10**9)
    phat = stationary_density(spec_base, grid, normalize=True)
    kappa0 = Field(grid, np.zeros(grid.n), time=t_start)
    kappa = solve_kappa(spec_base, grid, many, kappa0, t_start, t_eval).final

    def run_one(e: float) -> ErrorReport:
        spec = replace(spec_base, epsilon=e)
        p = solve_fpe(spec, grid, many, phat, t_start, t_eval).final
        return error_report(p, assemble(phat, kappa, e), phat)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_one, eps))
    else:
        reports = [run_one(e) for e in eps]

    return ScalingResult(
        epsilons=tuple(eps),
        reports=tuple(reports),
        slope_p_ptilde=fit_slope([(e, r.norms_p_ptilde.linf) for e, r in zip(eps, reports)]),
        slope_ptilde_phat=fit_slope([(e, r.norms_ptilde_phat.linf) for e, r in zip(eps, reports)]),
        slope_p_phat=fit_slope([(e, r.norms_p_phat.linf) for e, r in zip(eps, reports)]),
        eval_time=float(t_eval),
    )
