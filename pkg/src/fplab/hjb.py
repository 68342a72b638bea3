"""Hamilton-Jacobi diagnostics.

Writing a positive density as p = exp(-S/sigma^2) turns the density equation
into dS/dt + H(t, x, S_x, S_xx) = 0 with

    H = H0 + Hpert,
    H0    = sigma^2 V''(x) - V'(x) S_x - (sigma^2/2) S_xx + S_x^2 / 2,
    Hpert = eps * h(t) * S_x.

The stationary density has S = 2V + const, for which H0 vanishes identically;
``hjb_residual`` checks the discrete counterpart of the full equation on
solver or oracle output.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid1D, differentiate
from .problem import ProblemSpec
from .evolution import Trajectory

__all__ = ["HamiltonianEval", "to_hj_potential", "hamiltonian", "hjb_residual",
           "bulk_window"]

_TAIL_CUTOFF = 1e-8   # evaluate only where p >= cutoff * max(p); log noise below


@dataclass(frozen=True)
class HamiltonianEval:
    """Hamiltonian value at one evaluation point, split into the autonomous
    part and the forcing part; total = unperturbed + perturbed exactly."""

    total: float
    unperturbed: float
    perturbed: float


def bulk_window(p: Field) -> Field:
    """Restrict a density to the contiguous node range that clears the tail
    cutoff. Far-tail values (including harmless negative roundoff dust from a
    solver) carry no usable effective-potential information and are dropped."""
    v = p.values
    vmax = v.max()
    if vmax <= 0:
        raise ValueError("density has no positive values")
    keep = np.flatnonzero(np.abs(v) >= _TAIL_CUTOFF * vmax)
    i0, i1 = int(keep[0]), int(keep[-1])
    if i1 - i0 + 1 < 3:
        raise ValueError("fewer than 3 nodes clear the tail cutoff")
    nodes = p.grid.nodes
    sub = Grid1D(float(nodes[i0]), float(nodes[i1]), i1 - i0 + 1)
    return Field(sub, v[i0 : i1 + 1], time=p.time)


def to_hj_potential(p: Field, sigma: float) -> Field:
    """Effective potential S = -sigma^2 ln p; requires p > 0 everywhere.

    The round trip exp(-S/sigma^2) reproduces p to machine precision.
    """
    bad = np.flatnonzero(p.values <= 0)
    if bad.size:
        raise ValueError(
            f"density must be strictly positive; first offending node {int(bad[0])} "
            f"(x = {p.grid.nodes[int(bad[0])]:.6g}, value = {p.values[int(bad[0])]:.3e})"
        )
    return p.with_values(-sigma**2 * np.log(p.values))


def hamiltonian(spec: ProblemSpec, t: float, x: float, sx: float, sxx: float) -> HamiltonianEval:
    """Evaluate the split Hamiltonian at one point from given S_x and S_xx."""
    _, dv, d2v = spec.potential.evaluate(x)
    h0 = spec.sigma**2 * float(d2v) - float(dv) * sx - spec.sigma**2 / 2 * sxx + sx**2 / 2
    hp = spec.epsilon * float(spec.h(t)) * sx
    return HamiltonianEval(total=h0 + hp, unperturbed=h0, perturbed=hp)


def hjb_residual(traj: Trajectory, spec: ProblemSpec) -> float:
    """Max-abs residual of dS/dt + H over the trajectory.

    S_x and S_xx come from the grid stencils, dS/dt from centered differences
    across snapshots. Evaluation is restricted to interior nodes where the
    density exceeds the tail cutoff at the three snapshots involved; expected
    O(dt^2 + dx^2) on smooth positive solutions. Requires at least 3 uniformly
    spaced snapshots, strictly positive in the cutoff region.
    """
    times = traj.times
    if len(times) < 3:
        raise ValueError("need at least 3 snapshots")
    steps = np.diff(times)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise ValueError("nonuniform snapshot spacing")
    dt_snap = float(steps[0])

    grid = traj.grid
    x = grid.nodes
    sigma2 = spec.sigma**2
    _, dv, d2v = spec.potential.evaluate(x)

    masks = []
    effs = []
    for snap in traj.snapshots:
        v = snap.values
        vmax = v.max()
        if vmax <= 0:
            raise ValueError(f"snapshot at t = {snap.time:.6g} has no positive density")
        # the magnitude decides membership, so corrupt negative values in the
        # bulk are caught instead of silently masked away
        mask = np.abs(v) >= _TAIL_CUTOFF * vmax
        if np.any(v[mask] <= 0):
            bad = int(np.flatnonzero(mask & (v <= 0))[0])
            raise ValueError(
                f"nonpositive density inside the cutoff region at node {bad}, "
                f"t = {snap.time:.6g}"
            )
        with np.errstate(divide="ignore"):
            s = np.where(v > 0, -sigma2 * np.log(np.where(v > 0, v, 1.0)), np.inf)
        masks.append(mask)
        effs.append(s)

    worst = 0.0
    for k in range(1, len(times) - 1):
        t = float(times[k])
        s = effs[k]
        s_fld = Field(grid, np.where(np.isfinite(s), s, 0.0), time=t)
        sx = differentiate(s_fld, 1).values
        sxx = differentiate(s_fld, 2).values
        st = (effs[k + 1] - effs[k - 1]) / (2 * dt_snap)

        h0 = sigma2 * d2v - dv * sx - sigma2 / 2 * sxx + sx * sx / 2
        hp = spec.epsilon * float(spec.h(t)) * sx
        resid = st + h0 + hp

        # stencils at node i reach i-1 and i+1; demand the whole neighborhood
        # (in time and space) to be inside the cutoff
        ok = masks[k - 1] & masks[k] & masks[k + 1]
        ok = ok & np.roll(ok, 1) & np.roll(ok, -1)
        ok[0] = ok[-1] = False
        if np.any(ok):
            worst = max(worst, float(np.max(np.abs(resid[ok]))))
    return worst
