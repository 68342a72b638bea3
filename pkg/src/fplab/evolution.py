"""Shared time-stepping engine for the two linear PDEs of the model.

``solve_fpe`` advances the density equation

    dp/dt = -d/dx[(-V'(x) + eps*h(t)) p] + (sigma^2/2) d2p/dx2

in conservative flux form: interface fluxes F_{i+1/2} with the drift evaluated
at the interfaces, zero flux through both truncation boundaries, and trapezoid
cell weights (half cells at the ends). With that pairing the trapezoid mass is
telescoping-exact, so conservation holds to solver roundoff per step.

``solve_kappa`` advances the correction equation

    dk/dt = -V'(x) dk/dx + (sigma^2/2) d2k/dx2 + (2/sigma^2) V'(x) h(t)

in advective form with homogeneous Neumann boundaries. The correction
multiplies a density that is negligible at the boundaries, so the committed
boundary error is confined to a thin layer there.

Both use the theta method (theta = 0.5 trapezoidal by default, theta = 1
implicit Euler), with a tridiagonal solve per step. Time-dependent
coefficients are evaluated at the start of the step for the explicit half and
at the end of the step for the implicit half, which preserves second order in
time at theta = 0.5.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from .errors import SolverError
from .grid import Field, Grid1D
from .problem import ProblemSpec, _is_time_dependent, require_valid

__all__ = ["SchemeConfig", "Trajectory", "solve_fpe", "solve_kappa", "pde_residual"]

_NEGATIVITY_TOL = -1e-12


@dataclass(frozen=True)
class SchemeConfig:
    """Numerical scheme parameters shared by both solvers."""

    dt: float = 1e-3
    theta: float = 0.5
    advection: str = "central"
    snapshot_stride: int = 100

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0.5 <= self.theta <= 1.0:
            raise ValueError(f"theta must lie in [0.5, 1], got {self.theta}")
        if self.advection not in ("central", "upwind"):
            raise ValueError(f"advection must be 'central' or 'upwind', got {self.advection!r}")
        if self.snapshot_stride < 1:
            raise ValueError(f"snapshot_stride must be >= 1, got {self.snapshot_stride}")


@dataclass(frozen=True)
class Trajectory:
    """Ordered snapshots of one PDE solve, all on a single grid."""

    snapshots: tuple[Field, ...]
    pde_kind: str
    advection: str = "central"

    def __post_init__(self) -> None:
        if not self.snapshots:
            raise ValueError("trajectory needs at least one snapshot")
        if self.pde_kind not in ("fpe", "kappa"):
            raise ValueError(f"pde_kind must be 'fpe' or 'kappa', got {self.pde_kind!r}")
        g = self.snapshots[0].grid
        times = [s.time for s in self.snapshots]
        if any(s.grid != g for s in self.snapshots):
            raise ValueError("all snapshots must share one grid")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("snapshot times must be strictly increasing")
        object.__setattr__(self, "snapshots", tuple(self.snapshots))

    @property
    def grid(self) -> Grid1D:
        return self.snapshots[0].grid

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots])

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    def at_time(self, t: float, tol: float = 1e-9) -> Field:
        for s in self.snapshots:
            if abs(s.time - t) <= tol * max(1.0, abs(t)):
                return s
        raise ValueError(f"no snapshot at t={t}")


# --------------------------------------------------------------------------
# tridiagonal machinery
#
# Diagonals are stored in the solve_banded layout: diag[i] is row i,
# upper[i] is entry (i-1, i), lower[i] is entry (i+1, i).
# --------------------------------------------------------------------------

def _apply(lower, diag, upper, v):
    out = diag * v
    out[:-1] += upper[1:] * v[1:]
    out[1:] += lower[:-1] * v[:-1]
    return out


def _fpe_diags(b_iface, dx, w, diffusion, upwind):
    """Flux-form operator rows from interface drift values (length n-1)."""
    n = len(w)
    if upwind:
        c_left = b_iface * (b_iface >= 0) + diffusion / dx
        c_right = b_iface * (b_iface < 0) - diffusion / dx
    else:
        c_left = b_iface / 2 + diffusion / dx
        c_right = b_iface / 2 - diffusion / dx
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    diag[:-1] -= c_left / w[:-1]
    upper[1:] = -c_right / w[:-1]
    diag[1:] += c_right / w[1:]
    lower[:-1] = c_left / w[1:]
    return lower, diag, upper


def _fpe_operator(spec: ProblemSpec, grid: Grid1D, advection: str):
    """Returns diags(t) for the flux-form density operator."""
    x = grid.nodes
    x_iface = (x[:-1] + x[1:]) / 2
    dv_iface = spec.potential.evaluate(x_iface)[1]
    dx = grid.spacing
    w = grid.weights
    diffusion = spec.sigma**2 / 2
    upwind = advection == "upwind"

    if _is_time_dependent(spec):
        def diags(t):
            b = -dv_iface + spec.epsilon * float(spec.h(t))
            return _fpe_diags(b, dx, w, diffusion, upwind)
    else:
        frozen = _fpe_diags(-dv_iface, dx, w, diffusion, upwind)

        def diags(t):
            return frozen

    return diags


def _kappa_operator(spec: ProblemSpec, grid: Grid1D, advection: str):
    """Returns (diags, source_profile): advective rows with Neumann ends and
    the spatial factor (2/sigma^2) V'(x) of the forcing term."""
    dv = spec.potential.evaluate(grid.nodes)[1]
    dx = grid.spacing
    d = spec.sigma**2 / 2 / dx**2
    n = grid.n
    lower = np.zeros(n)
    diag = np.zeros(n)
    upper = np.zeros(n)
    if advection == "upwind":
        adv = dv[1:-1]
        pos = adv >= 0
        diag[1:-1] = -2 * d - np.abs(adv) / dx
        upper[2:] = d + np.where(pos, 0.0, -adv / dx)
        lower[:-2] = d + np.where(pos, adv / dx, 0.0)
    else:
        diag[1:-1] = -2 * d
        upper[2:] = d - dv[1:-1] / (2 * dx)
        lower[:-2] = d + dv[1:-1] / (2 * dx)
    # Neumann ends: the mirrored ghost node cancels advection, doubles diffusion
    diag[0] = diag[-1] = -2 * d
    upper[1] = 2 * d
    lower[-2] = 2 * d
    return (lower, diag, upper), (2 / spec.sigma**2) * dv


def _step_plan(t0: float, t1: float, dt: float):
    """Full steps of dt plus one shortened step landing exactly on t1."""
    if not t0 < t1:
        raise ValueError(f"need t0 < t1, got [{t0}, {t1}]")
    total = t1 - t0
    n_full = int(math.floor(total / dt + 1e-9))
    remainder = total - n_full * dt
    if remainder <= 1e-9 * dt:
        remainder = 0.0
    return n_full, remainder


def _check_state(v, step, t, kind):
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise SolverError(
            f"{kind} solve went unstable: non-finite value at node {bad}, "
            f"step {step} (t={t:.6g})"
        )
    if kind == "fpe":
        vmin = v.min()
        if vmin < _NEGATIVITY_TOL:
            bad = int(np.argmin(v))
            raise SolverError(
                f"fpe solve lost positivity: p[{bad}] = {vmin:.3e} "
                f"< {_NEGATIVITY_TOL:g} at step {step} (t={t:.6g})"
            )


def _run_theta(grid, scheme, v0, t0, t1, make_diags, make_source, kind):
    """Common theta-method loop over [t0, t1]."""
    n_full, remainder = _step_plan(t0, t1, scheme.dt)
    n_total = n_full + (1 if remainder else 0)
    if n_total == 0:
        raise ValueError(f"time span [{t0}, {t1}] is shorter than one step")
    theta = scheme.theta
    v = np.array(v0, dtype=float)
    snaps = [Field(grid, v, time=t0)]
    last_snap_step = 0

    diags_next = make_diags(t0)
    ab = np.empty((3, grid.n))
    for step in range(1, n_total + 1):
        if step <= n_full:
            dtk = scheme.dt
            t_a = t0 + (step - 1) * scheme.dt
            t_b = t1 if (step == n_full and not remainder) else t0 + step * scheme.dt
        else:
            dtk = remainder
            t_a = t0 + n_full * scheme.dt
            t_b = t1
        diags_prev = diags_next
        diags_next = make_diags(t_b)

        rhs = v + (1 - theta) * dtk * _apply(*diags_prev, v)
        src = make_source(t_a, t_b)
        if src is not None:
            rhs += dtk * src
        lo, dg, up = diags_next
        ab[0, 1:] = -theta * dtk * up[1:]
        ab[0, 0] = 0.0
        ab[1, :] = 1.0 - theta * dtk * dg
        ab[2, :-1] = -theta * dtk * lo[:-1]
        ab[2, -1] = 0.0
        # finiteness is checked below, so skip scipy's own scan
        v = solve_banded((1, 1), ab, rhs, overwrite_ab=False, overwrite_b=True,
                         check_finite=False)
        _check_state(v, step, t_b, kind)

        if step % scheme.snapshot_stride == 0 or step == n_total:
            if step != last_snap_step:
                snaps.append(Field(grid, v, time=t_b))
                last_snap_step = step
    return Trajectory(tuple(snaps), pde_kind=kind, advection=scheme.advection)


# --------------------------------------------------------------------------
# public solvers
# --------------------------------------------------------------------------

def solve_fpe(
    spec: ProblemSpec,
    grid: Grid1D,
    scheme: SchemeConfig,
    p0: Field,
    t0: float,
    t1: float,
) -> Trajectory:
    """Advance the density from ``p0`` over [t0, t1].

    Snapshots are stored every ``snapshot_stride`` steps plus the final time.
    Raises ``SolverError`` on non-finite values or on negative values below
    the positivity tolerance, and ``ValidationError`` if the problem fails
    validation.
    """
    require_valid(spec)
    if p0.grid != grid:
        raise ValueError("p0 is not sampled on the requested grid")
    if p0.values.min() < 0:
        raise ValueError("p0 must be nonnegative")

    x_iface = (grid.nodes[:-1] + grid.nodes[1:]) / 2
    peclet = float(np.max(np.abs(spec.potential.evaluate(x_iface)[1]))
                   + spec.epsilon * spec.perturbation.bound)
    peclet *= grid.spacing / spec.sigma**2
    if scheme.advection == "central" and peclet > 2:
        warnings.warn(
            f"cell Peclet number {peclet:.2f} > 2 with central advection; "
            "expect oscillations (consider upwind or a finer grid)",
            stacklevel=2,
        )

    diags = _fpe_operator(spec, grid, scheme.advection)
    return _run_theta(grid, scheme, p0.values, t0, t1, diags,
                      lambda t_a, t_b: None, "fpe")


def solve_kappa(
    spec: ProblemSpec,
    grid: Grid1D,
    scheme: SchemeConfig,
    kappa0: Field,
    t0: float,
    t1: float,
) -> Trajectory:
    """Advance the first-order correction from ``kappa0`` over [t0, t1].

    The equation does not involve epsilon: the source is (2/sigma^2) V'(x) h(t),
    blended across the step consistently with the theta weighting.
    """
    if kappa0.grid != grid:
        raise ValueError("kappa0 is not sampled on the requested grid")

    diags, source_profile = _kappa_operator(spec, grid, scheme.advection)
    theta = scheme.theta

    def make_source(t_a, t_b):
        h_mix = (1 - theta) * float(spec.h(t_a)) + theta * float(spec.h(t_b))
        if h_mix == 0.0:
            return None
        return h_mix * source_profile

    return _run_theta(grid, scheme, kappa0.values, t0, t1,
                      lambda t: diags, make_source, "kappa")


# --------------------------------------------------------------------------
# a-posteriori consistency check
# --------------------------------------------------------------------------

def pde_residual(traj: Trajectory, spec: ProblemSpec) -> float:
    """Max-abs residual of the trajectory against its own semi-discrete PDE.

    Time derivatives are centered differences across snapshots; the right side
    reuses the solver's spatial operator, so a discrete steady state has
    residual at roundoff level. The max runs over interior nodes and interior
    snapshot times; expected O(dt^2) for theta = 0.5 output and O(dt) for
    theta = 1. Requires at least 3 uniformly spaced snapshots.
    """
    times = traj.times
    if len(times) < 3:
        raise ValueError("need at least 3 snapshots")
    steps = np.diff(times)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise ValueError("nonuniform snapshot spacing")
    dt_snap = float(steps[0])

    if traj.pde_kind == "fpe":
        diags = _fpe_operator(spec, traj.grid, traj.advection)

        def rhs_at(t, v):
            return _apply(*diags(t), v)
    else:
        kdiags, source_profile = _kappa_operator(spec, traj.grid, traj.advection)

        def rhs_at(t, v):
            return _apply(*kdiags, v) + source_profile * float(spec.h(t))

    worst = 0.0
    for k in range(1, len(times) - 1):
        lhs = (traj.snapshots[k + 1].values - traj.snapshots[k - 1].values) / (2 * dt_snap)
        rhs = rhs_at(float(times[k]), traj.snapshots[k].values)
        worst = max(worst, float(np.max(np.abs((lhs - rhs)[1:-1]))))
    return worst
