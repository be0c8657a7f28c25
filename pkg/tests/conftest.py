import warnings
from functools import lru_cache

import numpy as np
import pytest

from aclr.evolution import diagonalize
from aclr.model import ChainSpec

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@lru_cache(maxsize=None)
def chain(L, two_s=1, **couplings):
    spec = ChainSpec(L=L, two_s=two_s).replace(**couplings) if couplings else ChainSpec(L=L, two_s=two_s)
    return spec, diagonalize(spec)


def kron_chain(ops_by_site, L):
    """Test-only explicit Kronecker product, site 1 leftmost."""
    out = np.array([[1.0 + 0j]])
    for j in range(1, L + 1):
        out = np.kron(out, ops_by_site.get(j, np.eye(2)))
    return out


def pauli_xy_hamiltonian(L, jx=-2.0, jy=-4.0, hx=2.2, hy=2.2):
    """Independent spin-1/2 build from Pauli matrices (S = sigma/2)."""
    sx, sy = PAULI_X / 2, PAULI_Y / 2
    H = np.zeros((2**L, 2**L), dtype=complex)
    for j in range(1, L + 1):
        k = j % L + 1
        H += jx * kron_chain({j: sx}, L) @ kron_chain({k: sx}, L)
        H += jy * kron_chain({j: sy}, L) @ kron_chain({k: sy}, L)
        H += hx * kron_chain({j: sx}, L) + hy * kron_chain({j: sy}, L)
    return H


@pytest.fixture(scope="session")
def chain10():
    return chain(10)


@pytest.fixture(scope="session")
def chain8():
    return chain(8)


@pytest.fixture(scope="session")
def chain6():
    return chain(6)


@pytest.fixture(scope="session")
def revival10(chain10):
    from aclr.revival import build_revival

    spec, eig = chain10
    return build_revival(eig, 5.0, spec)


@pytest.fixture(autouse=True)
def _quiet_short_tstar():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=r"\|<psi\(0\)\|psi\(t\*\)>\|")
        yield
