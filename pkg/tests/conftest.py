import pytest

from fplab import (
    CosinePerturbation,
    LangevinPotential,
    ProblemSpec,
    QuadraticPotential,
    QuarticPotential,
    ZeroPerturbation,
    make_grid,
)


@pytest.fixture(scope="session")
def ou_spec():
    """Unit-rate mean reversion with unit-amplitude cosine forcing."""
    return ProblemSpec(
        potential=QuadraticPotential(theta=1.0, mu=0.0),
        perturbation=CosinePerturbation(amplitude=1.0, omega=1.0),
        epsilon=0.1,
        sigma=1.0,
        domain=(-6.0, 6.0),
        time_window=(0.0, 20.0),
    )


@pytest.fixture(scope="session")
def quartic_spec():
    return ProblemSpec(
        potential=QuarticPotential(a=1.0, b=1.0),
        perturbation=ZeroPerturbation(),
        epsilon=0.0,
        sigma=1.0,
        domain=(-3.0, 3.0),
        time_window=(0.0, 20.0),
    )


@pytest.fixture(scope="session")
def langevin_spec():
    return ProblemSpec(
        potential=LangevinPotential(a1=1.0, a2=0.5, a3=0.25),
        perturbation=CosinePerturbation(amplitude=1.0, omega=1.0),
        epsilon=0.1,
        sigma=1.0,
        domain=(-6.0, 6.0),
        time_window=(0.0, 20.0),
    )


@pytest.fixture(scope="session")
def grid513():
    return make_grid(-6.0, 6.0, 513)
