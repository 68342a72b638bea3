"""One-dimensional Fokker-Planck laboratory.

Computes the stationary density of a confining potential, the first-order
correction under small time-periodic forcing, and the fully time-dependent
density, then measures how fast the corrected approximation closes on the
exact solution as the forcing amplitude shrinks. Includes Euler-Maruyama
cross-validation and Hamilton-Jacobi residual diagnostics.
"""

from .analytic_ou import OUOracle, ou_delta_order, ou_exact_density, ou_moments, z1
from .approx import (
    ErrorReport,
    ScalingResult,
    assemble,
    approx_residual,
    error_report,
    fit_slope,
    scaling_study,
)
from .errors import SolverError, ValidationError
from .evolution import SchemeConfig, Trajectory, pde_residual, solve_fpe, solve_kappa
from .grid import Field, Grid1D, Norms, differentiate, integrate, make_grid, norms
from .hjb import HamiltonianEval, bulk_window, hamiltonian, hjb_residual, to_hj_potential
from .montecarlo import (
    MCConfig,
    PointStart,
    SampleSet,
    StationaryStart,
    empirical_density,
    mc_vs_pde,
    simulate,
)
from .problem import (
    CosinePerturbation,
    LangevinPotential,
    ProblemSpec,
    QuadraticPotential,
    QuarticPotential,
    TablePotential,
    ValidationReport,
    ZeroPerturbation,
    drift,
    load_problem,
    potential_derivatives,
    problem_from_dict,
    validate,
)
from .stationary import (
    log_derivative_check,
    stationary_density,
    stationary_log_shift,
    stationary_residual,
)

__version__ = "0.1.0"
