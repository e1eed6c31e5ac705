import numpy as np
import pytest

from qheom.bath import DrudeParams, build_expansion
from qheom.heom import SystemModel

DEFAULT_PARAMS = DrudeParams(lam=0.3, gamma=0.5, beta=2.5)


def random_unitary(rng, n=2):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_density(rng, n=4, rank=None):
    rank = n if rank is None else rank
    v = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = v @ v.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def system():
    return SystemModel.build(epsilon=1.5, J=1.0)


@pytest.fixture(scope="session")
def params():
    return DEFAULT_PARAMS


@pytest.fixture(scope="session")
def expansion2():
    return build_expansion(DEFAULT_PARAMS, 2)


VERDICTS = {}


def record_verdict(number, ok, detail):
    VERDICTS[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        ok, detail = VERDICTS[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
