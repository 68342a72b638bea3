"""Problem definition: confining potentials, time-periodic forcing, and the
separable drift field they compose.

The drift is b(t, x) = -V'(x) + epsilon * h(t). Potentials supply the triple
(V, V', V'') at any point of the truncated domain; perturbations supply the
bounded forcing h(t). ``validate`` enforces the standing assumptions that every
solver relies on (confinement, negligible boundary mass, a perturbation small
enough to stay in the perturbative regime).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ValidationError

__all__ = [
    "QuadraticPotential",
    "QuarticPotential",
    "LangevinPotential",
    "TablePotential",
    "Potential",
    "CosinePerturbation",
    "ZeroPerturbation",
    "Perturbation",
    "ProblemSpec",
    "ValidationReport",
    "drift",
    "potential_derivatives",
    "validate",
    "require_valid",
    "problem_from_dict",
    "load_problem",
]


# --------------------------------------------------------------------------
# potentials
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraticPotential:
    """V(x) = theta * (x - mu)^2 / 2, the mean-reverting well."""

    theta: float
    mu: float = 0.0
    kind = "quadratic"

    def __post_init__(self) -> None:
        if self.theta <= 0:
            raise ValueError(f"theta must be positive, got {self.theta}")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        d = x - self.mu
        return self.theta * d * d / 2, self.theta * d, np.full_like(x, self.theta)


@dataclass(frozen=True)
class QuarticPotential:
    """V(x) = a*x^4/4 - b*x^2/2, a double well when b > 0."""

    a: float
    b: float
    kind = "quartic"

    def __post_init__(self) -> None:
        if self.a <= 0:
            raise ValueError(f"a must be positive, got {self.a}")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        x2 = x * x
        return (
            self.a * x2 * x2 / 4 - self.b * x2 / 2,
            self.a * x2 * x - self.b * x,
            3 * self.a * x2 - self.b,
        )


@dataclass(frozen=True)
class LangevinPotential:
    """Potential of the nonlinear oscillation force
    -V'(y) = -a1*y + a2*(sin^2(y/2) - a3)*sin(y).

    The antiderivative is fixed by V(0) = 0:
    V(y) = a1*y^2/2 - a2*[(sin^2(y/2) - a3)^2 - a3^2].
    """

    a1: float
    a2: float
    a3: float
    kind = "langevin"

    def __post_init__(self) -> None:
        if self.a1 <= 0:
            raise ValueError(f"a1 must be positive, got {self.a1}")

    def evaluate(self, y):
        y = np.asarray(y, dtype=float)
        s2 = np.sin(y / 2) ** 2
        v = self.a1 * y * y / 2 - self.a2 * ((s2 - self.a3) ** 2 - self.a3**2)
        dv = self.a1 * y - self.a2 * (s2 - self.a3) * np.sin(y)
        d2v = self.a1 - self.a2 * (np.sin(y) ** 2 / 2 + (s2 - self.a3) * np.cos(y))
        return v, dv, d2v


@dataclass(frozen=True)
class TablePotential:
    """V sampled on a uniform grid of points; evaluation interpolates linearly
    and clamps outside the tabulated range (so stray Monte Carlo paths stay
    defined). Derivatives use second-order central differences of the table."""

    x: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    kind = "table"

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float)
        v = np.array(self.v, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or len(x) < 3:
            raise ValueError("table potential needs >= 3 aligned sample points")
        dx = np.diff(x)
        if np.any(dx <= 0) or not np.allclose(dx, dx[0], rtol=1e-9):
            raise ValueError("table sample points must be uniform and increasing")
        x.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)

    def evaluate(self, q):
        q = np.asarray(q, dtype=float)
        from .grid import _diff1, _diff2

        h = float(self.x[1] - self.x[0])
        dv = _diff1(self.v, h)
        d2v = _diff2(self.v, h)
        # np.interp clamps to the edge values outside the range
        return (
            np.interp(q, self.x, self.v),
            np.interp(q, self.x, dv),
            np.interp(q, self.x, d2v),
        )


Potential = Union[QuadraticPotential, QuarticPotential, LangevinPotential, TablePotential]


# --------------------------------------------------------------------------
# perturbations
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CosinePerturbation:
    """h(t) = amplitude * cos(omega * t)."""

    amplitude: float
    omega: float = 1.0
    kind = "cosine"

    def __post_init__(self) -> None:
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    def __call__(self, t):
        return self.amplitude * np.cos(self.omega * np.asarray(t, dtype=float))

    @property
    def bound(self) -> float:
        return abs(self.amplitude)


@dataclass(frozen=True)
class ZeroPerturbation:
    """h identically zero."""

    kind = "zero"

    def __call__(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    @property
    def bound(self) -> float:
        return 0.0


Perturbation = Union[CosinePerturbation, ZeroPerturbation]


# --------------------------------------------------------------------------
# the full problem
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ProblemSpec:
    """Single source of model truth: potential, forcing, noise, and windows."""

    potential: Potential
    perturbation: Perturbation
    epsilon: float
    sigma: float
    domain: tuple[float, float]
    time_window: tuple[float, float] = (0.0, 20.0)

    def __post_init__(self) -> None:
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        lo, hi = self.domain
        if not lo < hi:
            raise ValueError(f"empty domain: {self.domain}")
        t0, t1 = self.time_window
        if not (0 <= t0 < t1):
            raise ValueError(f"bad time window: {self.time_window}")
        object.__setattr__(self, "domain", (float(lo), float(hi)))
        object.__setattr__(self, "time_window", (float(t0), float(t1)))

    def h(self, t):
        return self.perturbation(t)


def potential_derivatives(spec: ProblemSpec, x):
    """The triple (V, V', V'') at x; accepts scalars or arrays."""
    v, dv, d2v = spec.potential.evaluate(x)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(v), float(dv), float(d2v)
    return v, dv, d2v


def drift(spec: ProblemSpec, t: float, x):
    """b(t, x) = -V'(x) + epsilon * h(t); accepts scalars or arrays in x."""
    dv = spec.potential.evaluate(x)[1]
    b = -dv + spec.epsilon * spec.perturbation(t)
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(b)
    return b


# --------------------------------------------------------------------------
# validation of the standing assumptions
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()

    def __str__(self) -> str:
        if self.ok and not self.warnings:
            return "ok"
        lines = ["ok" if self.ok else "invalid"]
        lines += [f"violation: {v}" for v in self.violations]
        lines += [f"warning: {w}" for w in self.warnings]
        return "\n".join(lines)


_BOUNDARY_TOL = 1e-8      # max allowed exp(-2V/sigma^2) at the boundary, relative
_GROWTH_TOL = 1e-6        # relative mass growth allowed under domain doubling
_SCAN_NODES = 8001        # scan resolution for the widest (4x) window


def validate(spec: ProblemSpec) -> ValidationReport:
    """Check the assumptions behind every downstream computation.

    Hard violations:
      (a) exp(-2V/sigma^2) at either truncation boundary exceeds 1e-8 of its
          maximum over the domain (domain too small to neglect boundary mass);
      (b) the mass integral keeps growing when the domain is doubled and
          quadrupled (potential is not confining);
      (c) V is not finite everywhere on the scan.

    Soft warning: epsilon * max|h| > max|V'| / 2 over the domain, outside the
    perturbative regime.
    """
    violations: list[str] = []
    warnings: list[str] = []

    lo, hi = spec.domain
    width = hi - lo
    center = (lo + hi) / 2
    # One scan over the 4x window; the 1x and 2x integrals are sub-slices.
    xw = np.linspace(center - 2 * width, center + 2 * width, _SCAN_NODES)
    vw = spec.potential.evaluate(xw)[0]
    if not np.all(np.isfinite(vw)):
        return ValidationReport(False, ("potential is not finite on the scan window",))

    w = np.exp(-2 * (vw - vw.min()) / spec.sigma**2)

    def sub_integral(k: float) -> float:
        mask = (xw >= center - k * width / 2) & (xw <= center + k * width / 2)
        return float(np.trapezoid(w[mask], xw[mask]))

    i1, i2, i4 = sub_integral(1), sub_integral(2), sub_integral(4)

    # (a) boundary decay on the domain itself
    dmask = (xw >= lo) & (xw <= hi)
    wd = w[dmask]
    wmax = wd.max()
    for side, val in (("x_min", wd[0]), ("x_max", wd[-1])):
        if val > _BOUNDARY_TOL * wmax:
            violations.append(
                f"boundary mass at {side}: exp(-2V/sigma^2) is "
                f"{val / wmax:.3e} of its maximum (> {_BOUNDARY_TOL:g}); "
                "the truncated domain is too small"
            )

    # (b) confinement: the mass integral must have converged on the domain
    if i2 > i1 * (1 + _GROWTH_TOL) or i4 > i2 * (1 + _GROWTH_TOL):
        violations.append(
            f"non-confining potential: mass integral grows under domain "
            f"doubling ({i1:.6g} -> {i2:.6g} -> {i4:.6g}); "
            "exp(-2V/sigma^2) is not normalizable"
        )

    # (c) perturbative regime (warning only)
    xd = xw[dmask]
    max_dv = float(np.max(np.abs(spec.potential.evaluate(xd)[1])))
    h_bound = spec.perturbation.bound
    if spec.epsilon * h_bound > max_dv / 2:
        warnings.append(
            f"perturbative regime violated: epsilon*max|h| = "
            f"{spec.epsilon * h_bound:.3g} exceeds max|V'|/2 = {max_dv / 2:.3g}"
        )

    return ValidationReport(not violations, tuple(violations), tuple(warnings))


def require_valid(spec: ProblemSpec) -> ValidationReport:
    """Raise ``ValidationError`` if the spec fails validation."""
    report = validate(spec)
    if not report.ok:
        raise ValidationError("; ".join(report.violations))
    return report


# --------------------------------------------------------------------------
# JSON configuration
# --------------------------------------------------------------------------

def _potential_from_dict(d: dict) -> Potential:
    kind = d.get("kind")
    if kind == "quadratic":
        return QuadraticPotential(theta=d["theta"], mu=d.get("mu", 0.0))
    if kind == "quartic":
        return QuarticPotential(a=d["a"], b=d["b"])
    if kind == "langevin":
        return LangevinPotential(a1=d["a1"], a2=d["a2"], a3=d["a3"])
    if kind == "table":
        return TablePotential(x=np.asarray(d["x"]), v=np.asarray(d["v"]))
    raise ValueError(f"unknown potential kind: {kind!r}")


def _perturbation_from_dict(d: dict) -> Perturbation:
    kind = d.get("kind")
    if kind == "cosine":
        return CosinePerturbation(amplitude=d["amplitude"], omega=d.get("omega", 1.0))
    if kind == "zero":
        return ZeroPerturbation()
    raise ValueError(f"unknown perturbation kind: {kind!r}")


def problem_from_dict(d: dict) -> ProblemSpec:
    """Build a ProblemSpec from the configuration schema, e.g.::

        {"potential": {"kind": "quadratic", "theta": 1.0, "mu": 0.0},
         "perturbation": {"kind": "cosine", "amplitude": 1.0, "omega": 1.0},
         "epsilon": 0.1, "sigma": 1.0,
         "domain": [-6.0, 6.0], "time_window": [0.0, 20.0]}
    """
    try:
        window = d.get("time_window", [0.0, 20.0])
        return ProblemSpec(
            potential=_potential_from_dict(d["potential"]),
            perturbation=_perturbation_from_dict(d["perturbation"]),
            epsilon=float(d["epsilon"]),
            sigma=float(d["sigma"]),
            domain=(float(d["domain"][0]), float(d["domain"][1])),
            time_window=(float(window[0]), float(window[1])),
        )
    except KeyError as exc:
        raise ValueError(f"configuration is missing required key {exc}") from exc


def load_problem(path: str) -> ProblemSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return problem_from_dict(json.load(fh))


def _is_time_dependent(spec: ProblemSpec) -> bool:
    """Whether the drift actually changes in time."""
    return spec.epsilon > 0 and spec.perturbation.bound > 0


def periodic_drift_period(spec: ProblemSpec) -> float | None:
    """Forcing period 2*pi/omega, or None when the drift is autonomous."""
    if isinstance(spec.perturbation, CosinePerturbation) and _is_time_dependent(spec):
        return 2 * math.pi / spec.perturbation.omega
    return None
