"""Euler-Maruyama simulation of the driving SDE and density cross-validation.

Paths advance by X <- X + b(t, X) dt + sigma sqrt(dt) Z. Randomness is drawn
from counter-based streams keyed by (seed, batch index) over fixed-size path
batches, so serial runs and any thread partition of the batches produce
bitwise-identical samples.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import SolverError
from .evolution import SchemeConfig, _step_plan, solve_fpe
from .grid import Field, Grid1D, norms
from .problem import ProblemSpec, require_valid
from .stationary import stationary_density

__all__ = [
    "PointStart",
    "StationaryStart",
    "MCConfig",
    "SampleSet",
    "simulate",
    "empirical_density",
    "mc_vs_pde",
]

_BATCH = 8192           # paths per substream; fixed so parallelism cannot reorder draws
_INIT_GRID_N = 1025     # resolution of the inverse-CDF table for stationary starts


@dataclass(frozen=True)
class PointStart:
    """All paths start at a single point."""

    x0: float = 0.0
    kind = "point"


@dataclass(frozen=True)
class StationaryStart:
    """Paths start from the discrete stationary density via inverse CDF."""

    kind = "stationary_sample"


InitialCondition = Union[PointStart, StationaryStart]


@dataclass(frozen=True)
class MCConfig:
    n_paths: int
    dt: float
    seed: int = 42
    initial: InitialCondition = StationaryStart()
    zero_noise: bool = False

    def __post_init__(self) -> None:
        if self.n_paths < 1:
            raise ValueError(f"n_paths must be >= 1, got {self.n_paths}")
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")


@dataclass(frozen=True)
class SampleSet:
    """Final path positions at one time."""

    time: float
    positions: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        p = np.array(self.positions, dtype=float)
        if p.ndim != 1 or len(p) == 0:
            raise ValueError("positions must be a nonempty 1-D array")
        if not np.all(np.isfinite(p)):
            raise ValueError("positions must be finite")
        p.setflags(write=False)
        object.__setattr__(self, "positions", p)

    @property
    def n_paths(self) -> int:
        return len(self.positions)


def _batch_rng(seed: int, batch: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(batch,))
    return np.random.Generator(np.random.Philox(seq))


def _inverse_cdf_table(spec: ProblemSpec):
    g = Grid1D(spec.domain[0], spec.domain[1], _INIT_GRID_N)
    phat = stationary_density(spec, g, normalize=True)
    x = g.nodes
    cell_mass = (phat.values[1:] + phat.values[:-1]) / 2 * g.spacing
    cdf = np.concatenate(([0.0], np.cumsum(cell_mass)))
    cdf /= cdf[-1]
    return cdf, x

def _simulate_batch(spec, mc, t0, t1, batch_index, size, cdf_table) -> np.ndarray:
    rng = _batch_rng(mc.seed, batch_index)
    if isinstance(mc.initial, PointStart):
        x = np.full(size, float(mc.initial.x0))
    else:
        cdf, xg = cdf_table
        x = np.interp(rng.random(size), cdf, xg)

    n_full, remainder = _step_plan(t0, t1, mc.dt)
    sigma = 0.0 if mc.zero_noise else spec.sigma
    dv = spec.potential.evaluate
    eps = spec.epsilon
    h = spec.h

    def advance(t, dtk):
        nonlocal x
        b = -dv(x)[1] + eps * float(h(t))
        x = x + b * dtk
        if sigma:
            x += sigma * math.sqrt(dtk) * rng.standard_normal(size)

    for k in range(n_full):
        advance(t0 + k * mc.dt, mc.dt)
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise SolverError(
                f"path {batch_index * _BATCH + bad} became non-finite "
                f"at step {k + 1} (t={t0 + (k + 1) * mc.dt:.6g})"
            )
    if remainder:
        advance(t0 + n_full * mc.dt, remainder)
        if not np.all(np.isfinite(x)):
            bad = int(np.flatnonzero(~np.isfinite(x))[0])
            raise SolverError(
                f"path {batch_index * _BATCH + bad} became non-finite "
                f"at the final step (t={t1:.6g})"
            )
    return x


def simulate(
    spec: ProblemSpec,
    mc: MCConfig,
    t0: float,
    t1: float,
    workers: int = 1,
) -> SampleSet:
    """Run ``mc.n_paths`` Euler-Maruyama paths from t0 to t1.

    The final partial step is shortened to land exactly on t1. Output is a
    deterministic function of (seed, n_paths, dt, initial); the worker count
    only affects wall time.
    """
    if not t0 < t1:
        raise ValueError(f"need t0 < t1, got [{t0}, {t1}]")
    require_valid(spec)

    cdf_table = None
    if isinstance(mc.initial, StationaryStart):
        cdf_table = _inverse_cdf_table(spec)

    n_batches = (mc.n_paths + _BATCH - 1) // _BATCH
    sizes = [min(_BATCH, mc.n_paths - k * _BATCH) for k in range(n_batches)]

    def run(k: int) -> np.ndarray:
        return _simulate_batch(spec, mc, t0, t1, k, sizes[k], cdf_table)

    if workers > 1 and n_batches > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(n_batches)))
    else:
        parts = [run(k) for k in range(n_batches)]
    return SampleSet(time=float(t1), positions=np.concatenate(parts))


def empirical_density(samples: SampleSet, grid: Grid1D) -> tuple[Field, float]:
    """Histogram the samples into node-centered cells and convert to a density.

    Cell widths are the trapezoid weights (half cells at the boundary nodes),
    so the trapezoid integral of the result equals the in-range sample
    fraction exactly. Samples outside [x_min, x_max] are excluded from the
    density and reported via the returned out-of-range fraction.
    """
    pos = samples.positions
    oor = (pos < grid.x_min) | (pos > grid.x_max)
    kept = pos[~oor]
    idx = np.rint((kept - grid.x_min) / grid.spacing).astype(np.intp)
    counts = np.bincount(idx, minlength=grid.n).astype(float)
    values = counts / (samples.n_paths * grid.weights)
    return Field(grid, values, time=samples.time), float(oor.mean())


def mc_vs_pde(
    spec: ProblemSpec,
    mc: MCConfig,
    grid: Grid1D,
    scheme: SchemeConfig,
    t1: float,
    workers: int = 1,
) -> float:
    """L1 distance between the empirical density of stationary-started paths
    and the PDE solution advanced from the stationary density, both at t1."""
    t0 = spec.time_window[0]
    samples = simulate(spec, replace(mc, initial=StationaryStart()), t0, t1, workers=workers)
    emp, _ = empirical_density(samples, grid)

    endpoints_only = replace(scheme, snapshot_stride=10**9)
    p0 = stationary_density(spec, grid, normalize=True)
    pde = solve_fpe(spec, grid, endpoints_only, p0, t0, t1).final
    return norms(emp, pde).l1
