import numpy as np
import pytest
import scipy.linalg as sla

from aclr.errors import ContractError, DegeneracyError
from aclr.evolution import evolve, spin_expectations
from aclr.model import ChainSpec, basis_digits
from aclr.revival import (
    build_revival,
    pairwise_overlaps,
    predicted_high_spin_value,
    revival_system,
    revival_value,
    solve_reservoir,
    superpose_revivals,
    xi_slope,
)

from conftest import chain, pauli_xy_hamiltonian


def test_revival_matches_independent_route(chain6):
    # oracle: Pauli-Kronecker H, expm propagator, dense numpy solve
    spec, eig = chain6
    t = 4.0
    U = sla.expm(-1j * t * pauli_xy_hamiltonian(6))
    b = 2**5
    M = U[b:, :b]
    A = np.linalg.solve(M, np.eye(b)[0])
    raw = np.concatenate([A, np.zeros(b)])
    out = U @ raw
    xi = np.sum(np.abs(out[:b]) ** 2)
    c = build_revival(eig, t, spec)
    assert c.xi == pytest.approx(xi, rel=1e-8)
    assert np.allclose(c.state, raw / np.linalg.norm(raw), atol=1e-10)
    assert c.predicted_value == pytest.approx((xi - 1) / (xi + 1), abs=1e-10)


def test_block_exactness_and_initial_value(revival10, chain10):
    spec, eig = chain10
    c = revival10
    b = spec.block
    raw = np.zeros(spec.dim, dtype=complex)
    raw[:b] = c.reservoir_amplitudes
    out = evolve(eig, raw, c.t_star)
    target = np.zeros(b)
    target[0] = 1
    assert np.max(np.abs(out[b:] - target)) <= 1e-10
    assert c.block_error <= 1e-10
    assert spin_expectations(c.state, spec)["sz"] == pytest.approx(1.0, abs=1e-12)
    assert c.residual <= 1e-10


def test_measured_value_equals_prediction(revival10, chain10):
    _, eig = chain10
    assert revival_value(eig, revival10) == pytest.approx(revival10.predicted_value, abs=1e-8)


def test_designated_index_is_bottom_block_first():
    spec, eig = chain(4)
    c = build_revival(eig, 3.0, spec)
    assert c.designated_index == 2**3 + 1
    assert basis_digits(c.designated_index, 2, 4) == (0, 1, 1, 1)


def test_global_phase_covariance(chain6):
    spec, eig = chain6
    c1 = build_revival(eig, 3.5, spec)
    c2 = build_revival(eig, 3.5, spec, d=np.exp(0.7j))
    assert np.allclose(c2.reservoir_amplitudes, np.exp(0.7j) * c1.reservoir_amplitudes, atol=1e-10)
    assert c2.xi == pytest.approx(c1.xi, rel=1e-10)


@pytest.mark.parametrize("site", [2, 4, 6])
def test_site_covariance(chain6, site):
    spec, eig = chain6
    base = build_revival(eig, 3.5, spec)
    moved = build_revival(eig, 3.5, spec.replace(revival_site=site))
    assert revival_value(eig, moved) == pytest.approx(revival_value(eig, base), abs=1e-9)
    assert spin_expectations(moved.state, spec, site)["sz"] == pytest.approx(1.0, abs=1e-12)


def test_solver_identity_and_errors():
    sol = solve_reservoir(np.eye(4), d=2.0, rhs_row=1)
    assert np.allclose(sol.A, [0, 2, 0, 0])
    assert sol.condition_estimate == pytest.approx(1.0)
    with pytest.raises(ContractError):
        solve_reservoir(np.eye(3), d=0)
    with pytest.raises(DegeneracyError):
        solve_reservoir(np.zeros((3, 3)))
    with pytest.raises(DegeneracyError):
        solve_reservoir(np.diag([1.0, 1e-14, 1.0]))
    with pytest.raises(ContractError):
        solve_reservoir(np.ones((2, 3)))


def test_tstar_zero_is_degenerate(chain6):
    spec, eig = chain6
    # U(0) = 1 has a vanishing off-diagonal block
    with pytest.raises(DegeneracyError):
        solve_reservoir(revival_system(eig, 0.0, spec).matrix)
    with pytest.raises(ContractError):
        build_revival(eig, 0.0, spec)


def test_system_shapes():
    spec, eig = chain(3)
    assert revival_system(eig, 1.0, spec).matrix.shape == (4, 4)
    spec3, eig3 = chain(2, two_s=2)
    sysm = revival_system(eig3, 1.0, spec3)
    assert sysm.matrix.shape == (3, 3)
    assert sysm.designated_index == 7


def test_integrable_control_short_time_warns():
    spec, eig = chain(4)
    with pytest.warns(RuntimeWarning):
        build_revival(eig, 0.2, spec)


def test_xi_slope_exact_on_synthetic():
    table = [(L, 2.0 ** (0.8 * L + 1)) for L in (4, 6, 8)]
    assert xi_slope(table) == pytest.approx(0.8)


def test_xi_grows_with_length():
    xis = [build_revival(chain(L)[1], 5.0, chain(L)[0]).xi for L in (6, 8, 10)]
    assert xis[0] < xis[1] < xis[2]


def test_superposition_helpers(chain6):
    spec, eig = chain6
    cs = [build_revival(eig, t, spec) for t in (3.0, 4.5)]
    psi = superpose_revivals(cs)
    assert np.linalg.norm(psi) == pytest.approx(1.0)
    ov = pairwise_overlaps([c.state for c in cs])
    assert np.allclose(np.diag(ov), 1.0)
    assert np.allclose(ov, ov.T)
    with pytest.raises(ContractError):
        superpose_revivals([])
    with pytest.raises(ContractError):
        superpose_revivals(cs, weights=[1.0])


def test_high_spin_prediction():
    assert [predicted_high_spin_value(k) for k in (1, 2, 3, 4)] == [1.0, 0.5, pytest.approx(1 / 3), 0.25]
    with pytest.raises(ContractError):
        predicted_high_spin_value(0)


def test_spin_one_initial_value_and_block():
    spec, eig = chain(4, two_s=2)
    c = build_revival(eig, 4.0, spec)
    assert spin_expectations(c.state, spec)["sz"] == pytest.approx(1.0, abs=1e-12)
    assert c.block_error <= 1e-9
    assert revival_value(eig, c) == pytest.approx(c.predicted_value, abs=1e-8)


def test_invalid_designated_offset(chain6):
    spec, eig = chain6
    with pytest.raises(ContractError):
        revival_system(eig, 1.0, spec, designated_offset=spec.block)
    assert isinstance(ChainSpec(L=6).block, int)
