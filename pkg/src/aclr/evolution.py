"""Exact time evolution through the eigenbasis of H.

States are plain complex numpy vectors in basis order (see :mod:`aclr.model`).
Propagation never forms ``U(t)`` unless :func:`propagator` is called
explicitly: ``psi(t) = V (exp(-i E t) * (V^dagger psi))``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from aclr import rng as rngmod
from aclr.errors import ContractError
from aclr.model import ChainSpec, build_hamiltonian, site_levels, spin_matrices

HERMITIAN_RTOL = 1e-12
NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues (ascending) and eigenvector columns of a Hermitian H."""

    energies: np.ndarray
    vectors: np.ndarray
    spec: ChainSpec | None = None

    @property
    def dim(self) -> int:
        return self.energies.shape[0]

    @property
    def width(self) -> float:
        return float(self.energies[-1] - self.energies[0])

    def to_eigenbasis(self, psi: np.ndarray) -> np.ndarray:
        return self.vectors.conj().T @ psi

    def from_eigenbasis(self, c: np.ndarray) -> np.ndarray:
        return self.vectors @ c


@dataclass(frozen=True, eq=False)
class ObservableSeries:
    """Normalized single-site spin components ``<S^a_site>/S`` along a time grid."""

    times: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    site: int = 1

    def value_at(self, t: float, component: str = "sz") -> float:
        idx = int(np.argmin(np.abs(self.times - t)))
        if not np.isclose(self.times[idx], t, atol=1e-9):
            raise KeyError(f"time {t} is not on the grid")
        return float(getattr(self, component)[idx])


def check_hermitian(H: np.ndarray) -> None:
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ContractError(f"operator must be square, got shape {H.shape}")
    scale = max(float(np.max(np.abs(H))), 1e-300) if H.size else 1.0
    if H.size and float(np.max(np.abs(H - H.conj().T))) > HERMITIAN_RTOL * scale:
        raise ContractError("operator is not Hermitian")


def eigendecompose(H: np.ndarray, spec: ChainSpec | None = None) -> EigenSystem:
    check_hermitian(H)
    energies, vectors = np.linalg.eigh(H)
    energies.setflags(write=False)
    vectors.setflags(write=False)
    return EigenSystem(energies=energies, vectors=vectors, spec=spec)


def diagonalize(spec: ChainSpec) -> EigenSystem:
    """Shortcut: build H for ``spec`` and diagonalize it."""
    return eigendecompose(build_hamiltonian(spec), spec)


def propagator(eig: EigenSystem, t: float) -> np.ndarray:
    """Dense ``U(t) = V diag(exp(-i E t)) V^dagger``."""
    V = eig.vectors
    return (V * np.exp(-1j * eig.energies * t)) @ V.conj().T


def _check_dim(eig: EigenSystem, psi: np.ndarray) -> None:
    if psi.shape[0] != eig.dim:
        raise ContractError(f"state dimension {psi.shape[0]} != Hilbert dimension {eig.dim}")


def evolve(eig: EigenSystem, psi: np.ndarray, t: float) -> np.ndarray:
    """``psi(t)``; ``psi`` may also be a ``(dim, n)`` stack of column states."""
    psi = np.asarray(psi, dtype=complex)
    _check_dim(eig, psi)
    phases = np.exp(-1j * eig.energies * t)
    if psi.ndim == 2:
        phases = phases[:, None]
    return eig.from_eigenbasis(phases * eig.to_eigenbasis(psi))


def evolve_many(eig: EigenSystem, psi: np.ndarray, times, chunk: int = 64):
    """Yield ``(times_chunk, states)`` with states as columns, one matvec per time."""
    psi = np.asarray(psi, dtype=complex)
    _check_dim(eig, psi)
    times = np.asarray(times, dtype=float)
    c = eig.to_eigenbasis(psi)
    for start in range(0, len(times), chunk):
        ts = times[start : start + chunk]
        phases = np.exp(-1j * np.outer(eig.energies, ts))
        yield ts, eig.from_eigenbasis(phases * c[:, None])


def norm(psi: np.ndarray) -> float:
    return float(np.linalg.norm(psi))


def normalize(psi: np.ndarray) -> np.ndarray:
    n = norm(psi)
    if n == 0:
        raise ContractError("cannot normalize the zero vector")
    return np.asarray(psi, dtype=complex) / n


def overlap(a: np.ndarray, b: np.ndarray) -> complex:
    """``<a|b>``, conjugate-linear in ``a``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ContractError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def _prepare(psi: np.ndarray, renormalize: bool) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    n = norm(psi)
    if abs(n - 1.0) > NORM_TOL:
        if not renormalize:
            raise ContractError(f"state is not normalized (norm {n:.3e})")
        psi = psi / n
    return psi


def expectation(psi: np.ndarray, op: np.ndarray, renormalize: bool = False) -> float:
    """``<psi|op|psi>`` for a Hermitian ``op``; the imaginary residue is dropped."""
    psi = _prepare(psi, renormalize)
    if op.shape != (psi.shape[0], psi.shape[0]):
        raise ContractError(f"operator shape {op.shape} does not match state {psi.shape}")
    val = np.vdot(psi, op @ psi)
    if abs(val.imag) > 1e-8 * max(1.0, abs(val.real)):
        raise ContractError("operator is not Hermitian (complex expectation value)")
    return float(val.real)


def local_expectation(psi, op: np.ndarray, site: int, spec: ChainSpec) -> np.ndarray:
    """``<op_site>`` without forming the embedded operator.

    ``psi`` may be a single state or a ``(dim, n)`` stack of columns; the
    result is a float or an array of ``n`` floats.  States must be normalized.
    """
    psi = np.asarray(psi, dtype=complex)
    single = psi.ndim == 1
    cols = psi[:, None] if single else psi
    left, right = spec.g ** (site - 1), spec.g ** (spec.L - site)
    t = cols.reshape(left, spec.g, right, cols.shape[1])
    vals = np.einsum("aibn,ij,ajbn->n", t.conj(), op, t).real
    return float(vals[0]) if single else vals


def spin_expectations(psi, spec: ChainSpec, site: int = 1, normalized: bool = True) -> dict:
    """``<S^x>, <S^y>, <S^z>`` on ``site``, divided by S when ``normalized``."""
    ops = spin_matrices(spec.two_s)
    scale = spec.spin if normalized else 1.0
    return {k: local_expectation(psi, ops[k], site, spec) / scale for k in ("sx", "sy", "sz")}


def observable_series(eig: EigenSystem, psi: np.ndarray, site: int, times,
                      spec: ChainSpec | None = None) -> ObservableSeries:
    spec = spec or eig.spec
    if spec is None:
        raise ContractError("observable_series needs a ChainSpec")
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0):
        raise ContractError("times must be an ascending 1-D sequence")
    psi = _prepare(psi, renormalize=False)
    out = {"sx": [], "sy": [], "sz": []}
    for _, states in evolve_many(eig, psi, times):
        vals = spin_expectations(states, spec, site)
        for k in out:
            out[k].append(vals[k])
    arrays = {k: np.concatenate(v) if v else np.zeros(0) for k, v in out.items()}
    return ObservableSeries(times=times, site=site, **arrays)


def sample_infinite_temperature(eig: EigenSystem, rng) -> np.ndarray:
    """Random superposition of all eigenstates with complex-Gaussian weights."""
    gen = rngmod.as_generator(rng)
    c = rngmod.complex_gaussian(gen, eig.dim)
    c /= np.linalg.norm(c)
    return eig.from_eigenbasis(c)


def thermal_state(eig: EigenSystem, rng, site: int = 1, spec: ChainSpec | None = None) -> np.ndarray:
    """``|+S>_site ⊗ |Psi_inf>`` on the remaining sites.

    An infinite-temperature sample is projected onto the block where ``site``
    sits at its top level.  Complex-Gaussian amplitudes are invariant under
    change of basis, so the projected reservoir is Haar-typical.
    """
    spec = spec or eig.spec
    psi = sample_infinite_temperature(eig, rng)
    mask = site_levels(spec, site) == spec.g - 1
    return normalize(np.where(mask, psi, 0.0))


def dymarsky_state(eig: EigenSystem, psi0: np.ndarray, t_star: float) -> np.ndarray:
    """Normalized ``|psi0> + |psi0(-t*)>``: revives to half the initial value at t*."""
    psi0 = _prepare(psi0, renormalize=False)
    if t_star == 0:
        return psi0.copy()
    return normalize(psi0 + evolve(eig, psi0, -t_star))
