import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from aclr.errors import ContractError
from aclr.evolution import (
    dymarsky_state,
    eigendecompose,
    evolve,
    expectation,
    normalize,
    observable_series,
    overlap,
    propagator,
    sample_infinite_temperature,
    spin_expectations,
    thermal_state,
)
from aclr.model import ChainSpec, build_hamiltonian, embed_local, spin_matrices

from conftest import chain


def random_state(dim, seed):
    rng = np.random.default_rng(seed)
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def test_zero_hamiltonian():
    eig = eigendecompose(np.zeros((4, 4), dtype=complex))
    assert np.all(eig.energies == 0)
    assert np.allclose(eig.vectors.conj().T @ eig.vectors, np.eye(4))


def test_non_hermitian_rejected():
    with pytest.raises(ContractError):
        eigendecompose(np.array([[0, 1], [0, 0]], dtype=complex))


def test_trace_zero_L4():
    _, eig = chain(4)
    assert abs(eig.energies.sum()) <= 1e-9


def test_eigensystem_invariants(chain6):
    spec, eig = chain6
    H = build_hamiltonian(spec)
    V, E = eig.vectors, eig.energies
    assert np.all(np.diff(E) >= 0)
    assert np.max(np.abs(H @ V - V * E)) <= 1e-9 * eig.width
    assert np.max(np.abs(V.conj().T @ V - np.eye(spec.dim))) <= 1e-10
    assert np.max(np.abs((V * E) @ V.conj().T - H)) <= 1e-9 * eig.width


def test_propagator_identity_and_group(chain6):
    _, eig = chain6
    assert np.allclose(propagator(eig, 0.0), np.eye(eig.dim), atol=1e-12)
    U, Uinv = propagator(eig, 1.7), propagator(eig, -1.7)
    assert np.max(np.abs(U @ Uinv - np.eye(eig.dim))) <= 1e-9


def test_propagator_matches_expm(chain6):
    # oracle: Pade scaling-and-squaring on -iHt, no eigenvectors involved
    spec, eig = chain6
    H = build_hamiltonian(spec)
    U = propagator(eig, 1.0)
    assert np.max(np.abs(U - sla.expm(-1j * H))) <= 1e-8


def test_evolve_basics(chain6):
    spec, eig = chain6
    psi = random_state(spec.dim, 1)
    assert np.array_equal(evolve(eig, psi, 0.0), psi) or np.allclose(evolve(eig, psi, 0.0), psi, atol=1e-14)
    back = evolve(eig, evolve(eig, psi, 2.3), -2.3)
    assert np.max(np.abs(back - psi)) <= 1e-9
    n = eig.vectors[:, 7]
    assert np.allclose(evolve(eig, n, 1.1), np.exp(-1.1j * eig.energies[7]) * n, atol=1e-12)


def test_evolve_dimension_mismatch(chain6):
    _, eig = chain6
    with pytest.raises(ContractError):
        evolve(eig, np.ones(3), 1.0)


@settings(max_examples=25, deadline=None)
@given(t=st.floats(-20, 20), seed=st.integers(0, 2**32 - 1),
       a=st.complex_numbers(max_magnitude=3), b=st.complex_numbers(max_magnitude=3))
def test_unitarity_linearity_energy(t, seed, a, b):
    spec, eig = chain(6)
    psi = random_state(spec.dim, seed)
    phi = random_state(spec.dim, seed + 1)
    out = evolve(eig, psi, t)
    assert abs(np.linalg.norm(out) - 1) <= 1e-10
    lhs = evolve(eig, a * psi + b * phi, t)
    rhs = a * out + b * evolve(eig, phi, t)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * max(1.0, abs(a) + abs(b))
    e0 = np.sum(np.abs(eig.to_eigenbasis(psi)) ** 2 * eig.energies)
    e1 = np.sum(np.abs(eig.to_eigenbasis(out)) ** 2 * eig.energies)
    assert abs(e1 - e0) <= 1e-9 * eig.width


def test_eigenbasis_evolution_matches_expm(chain6):
    spec, eig = chain6
    H = build_hamiltonian(spec)
    psi = random_state(spec.dim, 4)
    for t in (0.3, 2.0, 7.5):
        assert np.max(np.abs(evolve(eig, psi, t) - sla.expm(-1j * t * H) @ psi)) <= 1e-8


def test_expectation_all_up_and_all_down():
    spec = ChainSpec(L=4, two_s=3)
    up = np.zeros(spec.dim, dtype=complex)
    up[0] = 1
    down = np.zeros(spec.dim, dtype=complex)
    down[-1] = 1
    assert spin_expectations(up, spec)["sz"] == pytest.approx(1.0)
    assert spin_expectations(down, spec)["sz"] == pytest.approx(-1.0)
    sz1 = embed_local(spin_matrices(3)["sz"], 1, spec)
    assert expectation(up, sz1) == pytest.approx(1.5)


def test_local_expectation_matches_dense_operator():
    spec = ChainSpec(L=4, two_s=2)
    psi = random_state(spec.dim, 9)
    ops = spin_matrices(2)
    for site in (1, 3, 4):
        got = spin_expectations(psi, spec, site, normalized=False)
        for k in ("sx", "sy", "sz"):
            assert got[k] == pytest.approx(expectation(psi, embed_local(ops[k], site, spec)), abs=1e-12)


def test_expectation_random_phase_superposition():
    spec = ChainSpec(L=10)
    rng = np.random.default_rng(0)
    sz = spin_matrices(1)["sz"]
    vals = []
    for _ in range(20):
        psi = np.exp(2j * np.pi * rng.random(spec.dim)) / np.sqrt(spec.dim)
        vals.append(spin_expectations(psi, spec)["sz"])
    # uniform moduli: site-1 weight is exactly 1/2 up, 1/2 down
    assert np.max(np.abs(vals)) <= 3 / np.sqrt(spec.dim)
    assert sz.shape == (2, 2)


def test_expectation_requires_normalized():
    spec = ChainSpec(L=2)
    op = embed_local(spin_matrices(1)["sz"], 1, spec)
    psi = np.array([2, 0, 0, 0], dtype=complex)
    with pytest.raises(ContractError):
        expectation(psi, op)
    assert expectation(psi, op, renormalize=True) == pytest.approx(0.5)


def test_overlap_basics():
    a = np.zeros(4, dtype=complex)
    b = np.zeros(4, dtype=complex)
    a[0], b[1] = 1, 1
    assert overlap(a, a) == 1
    assert overlap(a, b) == 0
    assert overlap(1j * a, a) == pytest.approx(-1j)
    with pytest.raises(ContractError):
        overlap(a, np.ones(3))


def test_infinite_temperature_state(chain10):
    spec, eig = chain10
    energies = []
    states = []
    for seed in range(20):
        psi = sample_infinite_temperature(eig, seed)
        assert abs(np.linalg.norm(psi) - 1) <= 1e-12
        c = eig.to_eigenbasis(psi)
        energies.append(np.sum(np.abs(c) ** 2 * eig.energies))
        states.append(psi)
    bound = 4 * eig.width / np.sqrt(spec.dim)
    assert np.max(np.abs(energies)) <= bound
    assert abs(overlap(states[0], states[1])) <= 5 / np.sqrt(spec.dim)


def test_same_seed_same_state(chain6):
    _, eig = chain6
    assert np.array_equal(sample_infinite_temperature(eig, 11), sample_infinite_temperature(eig, 11))


def test_thermal_state_support(chain6):
    spec, eig = chain6
    psi = thermal_state(eig, 3, site=2, spec=spec)
    assert spin_expectations(psi, spec, 2)["sz"] == pytest.approx(1.0, abs=1e-12)


def test_dymarsky_t0_returns_psi0(chain6):
    spec, eig = chain6
    psi0 = thermal_state(eig, 0, 1, spec)
    assert np.array_equal(dymarsky_state(eig, psi0, 0.0), psi0)


def test_dymarsky_half_revival(chain10):
    spec, eig = chain10
    v0, v1 = [], []
    for seed in range(5):
        psi = dymarsky_state(eig, thermal_state(eig, seed, 1, spec), 5.0)
        v0.append(spin_expectations(psi, spec)["sz"])
        v1.append(spin_expectations(evolve(eig, psi, 5.0), spec)["sz"])
        assert abs(v0[-1] - v1[-1]) <= 0.05
        assert 0.35 <= v0[-1] <= 0.65 and 0.35 <= v1[-1] <= 0.65


def test_observable_series_shape_and_t0(chain6):
    spec, eig = chain6
    psi = thermal_state(eig, 2, 1, spec)
    times = np.linspace(0, 3, 31)
    ser = observable_series(eig, psi, 1, times, spec)
    assert ser.sx.shape == ser.sy.shape == ser.sz.shape == times.shape
    direct = spin_expectations(psi, spec)
    assert ser.sz[0] == pytest.approx(direct["sz"], abs=1e-12)
    assert ser.sx[0] == pytest.approx(direct["sx"], abs=1e-12)
    for comp in (ser.sx, ser.sy, ser.sz):
        assert np.all(np.abs(comp) <= 1 + 1e-12)


def test_observable_series_rejects_unsorted(chain6):
    spec, eig = chain6
    with pytest.raises(ContractError):
        observable_series(eig, thermal_state(eig, 0, 1, spec), 1, [1.0, 0.5], spec)

