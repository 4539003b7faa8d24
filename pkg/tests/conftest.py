import numpy as np
import pytest

from darcybrinkman.coefficients import CoefficientSet, ForcingSet
from darcybrinkman.grids import DomainSpec, build_grids


@pytest.fixture
def unit_spec():
    return DomainSpec()


@pytest.fixture
def small_grid(unit_spec):
    return build_grids(unit_spec, 8, 8, 8)


@pytest.fixture
def iso_coeffs():
    return CoefficientSet.isotropic()


@pytest.fixture
def default_forcing():
    return ForcingSet.constant(f2_T=1.0, h1=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
