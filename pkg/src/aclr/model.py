"""Spin-S chain: basis codec, spin matrices, Hamiltonian and translations.

Basis convention
----------------
A basis state is labelled by per-site *levels* ``d_j`` in ``[0, g-1]``
(``g = 2S + 1``), where level ``g-1`` is ``m = +S`` and level 0 is ``m = -S``.
The 1-based index is ``i = g**L - n`` with ``n`` the base-``g`` number whose
most significant digit is site 1.  Index 1 is therefore all spins up and
index ``g**L`` all spins down.

With the single-site matrices ordered from ``m = +S`` down to ``m = -S`` this
is exactly the ordering produced by ``np.kron(op_1, op_2, ..., op_L)``, so
operator embedding is a plain Kronecker product.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from functools import reduce

import numpy as np
import scipy.sparse as sp

from aclr.errors import ContractError, DimensionError, InvalidSpecError

DEFAULT_MAX_DIM = 2**14
DEFAULT_COUPLINGS = (-2.0, -4.0, 2.2, 2.2)


def dimension_cap() -> int:
    """Dense-matrix budget; ``ACLR_MAX_DIM`` overrides the default."""
    raw = os.environ.get("ACLR_MAX_DIM")
    if raw is None:
        return DEFAULT_MAX_DIM
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InvalidSpecError(f"ACLR_MAX_DIM must be an integer, got {raw!r}") from exc
    if cap < 4:
        raise InvalidSpecError(f"ACLR_MAX_DIM must be >= 4, got {cap}")
    return cap


@dataclass(frozen=True)
class Couplings:
    jx: float = DEFAULT_COUPLINGS[0]
    jy: float = DEFAULT_COUPLINGS[1]
    hx: float = DEFAULT_COUPLINGS[2]
    hy: float = DEFAULT_COUPLINGS[3]


@dataclass(frozen=True)
class ChainSpec:
    """Periodic chain of ``L`` spins ``S = two_s / 2``.

    ``revival_site`` is 1-based.  Construction fails if ``g**L`` exceeds
    :func:`dimension_cap`.
    """

    L: int
    two_s: int = 1
    couplings: Couplings = field(default_factory=Couplings)
    revival_site: int = 1

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 2:
            raise InvalidSpecError(f"chain length must be an integer >= 2, got {self.L}")
        if int(self.two_s) != self.two_s or self.two_s < 1:
            raise InvalidSpecError(f"two_s must be an integer >= 1, got {self.two_s}")
        if not 1 <= self.revival_site <= self.L:
            raise InvalidSpecError(
                f"revival_site must lie in [1, {self.L}], got {self.revival_site}"
            )
        cap = dimension_cap()
        if self.dim > cap:
            raise DimensionError(
                f"g**L = {self.g}**{self.L} = {self.dim} exceeds the dense cap {cap} "
                "(set ACLR_MAX_DIM to override)"
            )

    @property
    def g(self) -> int:
        return self.two_s + 1

    @property
    def spin(self) -> float:
        return self.two_s / 2

    @property
    def dim(self) -> int:
        return self.g**self.L

    @property
    def block(self) -> int:
        """Size of one site-1 level block, ``g**(L-1)``."""
        return self.g ** (self.L - 1)

    def replace(self, **changes) -> "ChainSpec":
        data = {
            "L": self.L,
            "two_s": self.two_s,
            "couplings": self.couplings,
            "revival_site": self.revival_site,
        }
        coupling_changes = {k: changes.pop(k) for k in ("jx", "jy", "hx", "hy") if k in changes}
        if coupling_changes:
            data["couplings"] = Couplings(**{**asdict(self.couplings), **coupling_changes})
        data.update(changes)
        return ChainSpec(**data)

    def to_dict(self) -> dict:
        c = self.couplings
        return {
            "L": self.L,
            "two_s": self.two_s,
            "jx": c.jx,
            "jy": c.jy,
            "hx": c.hx,
            "hy": c.hy,
            "revival_site": self.revival_site,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ChainSpec":
        if "L" not in data:
            raise InvalidSpecError("chain record is missing 'L'")
        defaults = Couplings()
        couplings = Couplings(
            jx=float(data.get("jx", defaults.jx)),
            jy=float(data.get("jy", defaults.jy)),
            hx=float(data.get("hx", defaults.hx)),
            hy=float(data.get("hy", defaults.hy)),
        )
        return cls(
            L=int(data["L"]),
            two_s=int(data.get("two_s", 1)),
            couplings=couplings,
            revival_site=int(data.get("revival_site", 1)),
        )


def spin_matrices(two_s: int) -> dict[str, np.ndarray]:
    """Spin-S matrices in the S^z eigenbasis, ordered ``m = +S, ..., -S``.

    Returns a dict with keys ``"sx"``, ``"sy"``, ``"sz"``.
    """
    if int(two_s) != two_s or two_s < 1:
        raise InvalidSpecError(f"two_s must be an integer >= 1, got {two_s}")
    s = two_s / 2
    m = s - np.arange(two_s + 1)
    # S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>; |m+1> sits one row above |m>
    raising = np.diag(np.sqrt(s * (s + 1) - m[1:] * (m[1:] + 1)), k=1).astype(complex)
    lowering = raising.conj().T
    return {
        "sx": (raising + lowering) / 2,
        "sy": (raising - lowering) / 2j,
        "sz": np.diag(m).astype(complex),
    }


def basis_rank(digits, g: int) -> int:
    """1-based basis index of a level tuple (site 1 first)."""
    digits = [int(d) for d in digits]
    if not digits:
        raise IndexError("empty digit sequence")
    n = 0
    for d in digits:
        if not 0 <= d < g:
            raise IndexError(f"level {d} outside [0, {g - 1}]")
        n = n * g + d
    return g ** len(digits) - n


def basis_digits(index: int, g: int, L: int) -> tuple[int, ...]:
    """Inverse of :func:`basis_rank`."""
    dim = g**L
    if not 1 <= index <= dim:
        raise IndexError(f"basis index {index} outside [1, {dim}]")
    n = dim - index
    out = []
    for _ in range(L):
        n, d = divmod(n, g)
        out.append(d)
    return tuple(reversed(out))


def site_levels(spec: ChainSpec, site: int) -> np.ndarray:
    """Level of ``site`` for every basis state, in basis order (0-based array)."""
    _check_site(spec, site)
    positions = np.arange(spec.dim)
    local = (positions // spec.g ** (spec.L - site)) % spec.g
    return spec.g - 1 - local


def _check_site(spec: ChainSpec, site: int) -> None:
    if not 1 <= site <= spec.L:
        raise IndexError(f"site {site} outside [1, {spec.L}]")


def _embed_sparse(op, site: int, spec: ChainSpec) -> sp.csr_matrix:
    left = sp.identity(spec.g ** (site - 1), dtype=complex, format="csr")
    right = sp.identity(spec.g ** (spec.L - site), dtype=complex, format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")


def embed_local(op: np.ndarray, site: int, spec: ChainSpec) -> np.ndarray:
    """Dense ``1 ⊗ ... ⊗ op ⊗ ... ⊗ 1`` with ``op`` on ``site`` (1-based)."""
    op = np.asarray(op)
    if op.shape != (spec.g, spec.g):
        raise ContractError(f"local operator must be {spec.g}x{spec.g}, got {op.shape}")
    _check_site(spec, site)
    return _embed_sparse(op, site, spec).toarray()


def build_hamiltonian(spec: ChainSpec) -> np.ndarray:
    """Dense periodic XY chain with in-plane fields.

    ``H = sum_j Jx Sx_j Sx_{j+1} + Jy Sy_j Sy_{j+1} + hx Sx_j + hy Sy_j`` with
    ``S_{L+1} = S_1``.  At ``L = 2`` the two bonds coincide and are both kept.
    """
    ops = spin_matrices(spec.two_s)
    c = spec.couplings
    sx = [_embed_sparse(ops["sx"], j, spec) for j in range(1, spec.L + 1)]
    sy = [_embed_sparse(ops["sy"], j, spec) for j in range(1, spec.L + 1)]
    terms = []
    for j in range(spec.L):
        k = (j + 1) % spec.L
        terms.append(c.jx * (sx[j] @ sx[k]) + c.jy * (sy[j] @ sy[k]))
        terms.append(c.hx * sx[j] + c.hy * sy[j])
    H = reduce(lambda a, b: a + b, terms).toarray()
    # exact Hermitian symmetrisation; only removes rounding in the products
    return (H + H.conj().T) / 2


def translation_permutation(spec: ChainSpec, power: int = 1) -> np.ndarray:
    """0-based array ``perm`` with ``T**power |k> = |perm[k]>``.

    ``T`` moves the level on site ``j`` to site ``j+1`` (site ``L`` wraps to 1).
    """
    g, L = spec.g, spec.L
    shift = power % L
    positions = np.arange(spec.dim)
    if shift == 0:
        return positions
    # digits most-significant first; rolling right moves site j -> j+shift
    tail = g**shift
    return (positions % tail) * g ** (L - shift) + positions // tail


def translation_operator(spec: ChainSpec) -> np.ndarray:
    """Dense cyclic translation unitary (a permutation matrix)."""
    perm = translation_permutation(spec)
    T = np.zeros((spec.dim, spec.dim), dtype=complex)
    T[perm, np.arange(spec.dim)] = 1.0
    return T
