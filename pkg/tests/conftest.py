import numpy as np
import pytest

from siegel.characters import enumerate_psi_q, kronecker_character
from siegel.coefficients import CoeffTable, nu_table, upsilon_table
from siegel.interval import WeightPair
from siegel.mollifier import MollifierContext, TableSet, build_tables
from siegel.params import AnalysisParams


@pytest.fixture(scope="session")
def chi5():
    return kronecker_character(5)


@pytest.fixture(scope="session")
def psi7(chi5):
    return enumerate_psi_q(7, 5)[0]


@pytest.fixture(scope="session")
def params():
    return AnalysisParams(5, 20.0)


@pytest.fixture(scope="session")
def weight(params):
    return WeightPair(params.delta, params.d)


@pytest.fixture(scope="session")
def tables(chi5, params):
    return build_tables(chi5, params, capF=200)


@pytest.fixture(scope="session")
def ctx(psi7, chi5, params, tables):
    return MollifierContext(psi7, chi5, params, tables)


def synthetic_tables(chi, Q: float, plus=None, minus=None) -> TableSet:
    """λ tables that vanish except at the given entries; ν, υ are genuine but short."""
    limit = int(np.floor(Q ** 1.5))
    lp = CoeffTable.synthetic("lambda_plus", limit, plus or {})
    lm = CoeffTable.synthetic("lambda_minus", limit, minus or {})
    return TableSet(nu_table(chi, 10), upsilon_table(chi, 10), lp, lm, 10)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)

