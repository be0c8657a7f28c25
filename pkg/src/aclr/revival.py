"""Initial states whose edge spin revives almost completely at a chosen time.

Site 1 starts at its top level (``m = +S``) and the remaining sites carry a
reservoir amplitude vector ``A``.  ``A`` is tuned so that at ``t*`` the
bottom block of the evolved state (site 1 at ``m = -S``) vanishes except for
one designated entry equal to ``d``:

    U(t*)[bottom, top] @ A = d * e_row

With ``d = 1`` the top-block weight ``xi = sum |C_i|**2`` of the evolved
unnormalized state fixes the revival: for S = 1/2 it is ``(xi-1)/(xi+1)``.
Other revival sites follow from translating the site-1 construction.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from aclr.errors import ContractError, DegeneracyError
from aclr.evolution import EigenSystem, evolve, normalize, spin_expectations
from aclr.model import ChainSpec, basis_digits, site_levels, translation_permutation

log = logging.getLogger(__name__)

MAX_CONDITION = 1e12
SHORT_TSTAR_OVERLAP = 0.1


@dataclass(frozen=True, eq=False)
class RevivalSystem:
    matrix: np.ndarray
    rhs_row: int  # 0-based row inside the bottom block
    designated_index: int  # 1-based global basis index


@dataclass(frozen=True, eq=False)
class ReservoirSolution:
    A: np.ndarray
    residual: float
    condition_estimate: float


@dataclass(frozen=True, eq=False)
class RevivalConstruction:
    spec: ChainSpec
    t_star: float
    state: np.ndarray
    reservoir_amplitudes: np.ndarray
    designated_index: int
    xi: float
    residual: float
    condition_estimate: float
    overlap_at_tstar: float
    predicted_value: float
    leakage: float
    block_error: float
    d: complex = 1.0
    extras: dict = field(default_factory=dict)

    @property
    def site(self) -> int:
        return self.spec.revival_site


def revival_system(eig: EigenSystem, t_star: float, spec: ChainSpec,
                   designated_offset: int = 0) -> RevivalSystem:
    """Bottom-rows x top-columns block of ``U(t*)`` for site 1.

    Built straight from the eigenvectors, so the full propagator is never
    materialized.
    """
    b = spec.block
    if not 0 <= designated_offset < b:
        raise ContractError(f"designated_offset must lie in [0, {b - 1}]")
    V = eig.vectors
    phases = np.exp(-1j * eig.energies * t_star)
    bottom = V[-b:, :]
    top = V[:b, :]
    M = (bottom * phases) @ top.conj().T
    first_bottom = b * (spec.g - 1) + 1
    return RevivalSystem(matrix=M, rhs_row=designated_offset,
                         designated_index=first_bottom + designated_offset)


def solve_reservoir(M: np.ndarray, d: complex = 1.0, rhs_row: int = 0,
                    scale: float = 1.0) -> ReservoirSolution:
    """Solve ``M A = d e_rhs_row`` by pivoted LU plus one refinement step.

    ``scale`` is the norm of the operator ``M`` was cut from (1 for a block
    of a unitary); a block at roundoff level relative to it counts as zero.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractError(f"revival matrix must be square, got {M.shape}")
    if d == 0:
        raise ContractError("d = 0 only admits the trivial reservoir A = 0")
    n = M.shape[0]
    rhs = np.zeros(n, dtype=complex)
    rhs[rhs_row] = d

    anorm = float(np.linalg.norm(M, 1))
    if anorm <= 100 * n * np.finfo(float).eps * scale:
        raise DegeneracyError("revival system is identically zero (t* = 0?)")
    with warnings.catch_warnings():
        warnings.simplefilter("error", sla.LinAlgWarning)
        try:
            lu, piv = sla.lu_factor(M, check_finite=True)
        except (sla.LinAlgWarning, np.linalg.LinAlgError) as exc:
            raise DegeneracyError(
                "revival system is singular; this can happen for free or integrable dynamics"
            ) from exc
    (gecon,) = sla.get_lapack_funcs(("gecon",), (lu,))
    rcond, info = gecon(lu, anorm, norm="1")
    condition = np.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or condition > MAX_CONDITION:
        raise DegeneracyError(
            f"revival system is numerically degenerate (condition ~ {condition:.2e}); "
            "this can happen for free or integrable dynamics"
        )

    A = sla.lu_solve((lu, piv), rhs)
    A = A + sla.lu_solve((lu, piv), rhs - M @ A)
    residual = float(np.linalg.norm(M @ A - rhs) / np.linalg.norm(rhs))
    return ReservoirSolution(A=A, residual=residual, condition_estimate=float(condition))


def _level_weights(psi: np.ndarray, spec: ChainSpec, site: int = 1) -> np.ndarray:
    levels = site_levels(spec, site)
    return np.bincount(levels, weights=np.abs(psi) ** 2, minlength=spec.g)


def relabel_to_site(psi: np.ndarray, spec: ChainSpec, site: int) -> np.ndarray:
    """Translate a state so that whatever sat on site 1 now sits on ``site``."""
    if site == 1:
        return psi.copy()
    perm = translation_permutation(spec, site - 1)
    out = np.empty_like(psi)
    out[perm] = psi
    return out


def build_revival(eig: EigenSystem, t_star: float, spec: ChainSpec | None = None,
                  d: complex = 1.0, designated_offset: int = 0) -> RevivalConstruction:
    spec = spec or eig.spec
    if t_star <= 0:
        raise ContractError(f"t_star must be positive, got {t_star}")
    system = revival_system(eig, t_star, spec, designated_offset)
    sol = solve_reservoir(system.matrix, d=d, rhs_row=system.rhs_row)

    b = spec.block
    raw = np.zeros(spec.dim, dtype=complex)
    raw[:b] = sol.A
    evolved = evolve(eig, raw, t_star)

    target = np.zeros(b, dtype=complex)
    target[system.rhs_row] = d
    block_error = float(np.max(np.abs(evolved[-b:] - target)))

    # with |d| = 1 the xi-formula for S=1/2 holds literally
    scale = abs(d)
    weights = _level_weights(evolved / scale, spec)
    xi = float(weights[spec.g - 1])
    m = (np.arange(spec.g) - spec.spin) / spec.spin
    predicted = float(weights @ m / weights.sum())
    leakage = float(np.sqrt(max(0.0, 1.0 - xi / weights.sum())))

    raw_norm2 = float(np.vdot(raw, raw).real)
    overlap_t = abs(np.vdot(raw, evolved)) / raw_norm2
    if overlap_t > SHORT_TSTAR_OVERLAP:
        warnings.warn(
            f"|<psi(0)|psi(t*)>| = {overlap_t:.3f} > {SHORT_TSTAR_OVERLAP}: t* = {t_star} "
            "may be too short for the reservoir to dephase",
            RuntimeWarning,
            stacklevel=2,
        )

    state = relabel_to_site(normalize(raw), spec, spec.revival_site)
    designated = system.designated_index
    if spec.revival_site != 1:
        perm = translation_permutation(spec, spec.revival_site - 1)
        designated = int(perm[designated - 1]) + 1
    log.debug("revival L=%d 2S=%d t*=%g xi=%.4g cond=%.3g", spec.L, spec.two_s, t_star,
              xi, sol.condition_estimate)
    return RevivalConstruction(
        spec=spec,
        t_star=float(t_star),
        state=state,
        reservoir_amplitudes=sol.A,
        designated_index=designated,
        xi=xi,
        residual=sol.residual,
        condition_estimate=sol.condition_estimate,
        overlap_at_tstar=float(overlap_t),
        predicted_value=predicted,
        leakage=leakage,
        block_error=block_error,
        d=d,
        extras={"designated_digits": basis_digits(designated, spec.g, spec.L)},
    )


def revival_value(eig: EigenSystem, construction: RevivalConstruction, t: float | None = None) -> float:
    """Measured ``<S^z_site(t)>/S``; defaults to ``t = t*``."""
    t = construction.t_star if t is None else t
    psi = evolve(eig, construction.state, t)
    return spin_expectations(psi, construction.spec, construction.site)["sz"]


def xi_scaling(lengths, t_star: float, base: ChainSpec | None = None) -> list[tuple[int, float]]:
    """``(L, xi)`` for each chain length, everything else taken from ``base``."""
    from aclr.evolution import diagonalize

    base = base or ChainSpec(L=min(lengths))
    table = []
    for L in lengths:
        spec = base.replace(L=L, revival_site=1)
        table.append((L, build_revival(diagonalize(spec), t_star, spec).xi))
    return table


def xi_slope(table) -> float:
    """Least-squares slope of log2(xi) against L."""
    Ls = np.array([row[0] for row in table], dtype=float)
    logs = np.log2([row[1] for row in table])
    return float(np.polyfit(Ls, logs, 1)[0])


def pairwise_overlaps(states) -> np.ndarray:
    S = np.array([np.asarray(s) for s in states])
    return np.abs(S.conj() @ S.T)


def superpose_revivals(constructions, weights=None) -> np.ndarray:
    """Normalized weighted sum of revival states (equal weights by default)."""
    if not constructions:
        raise ContractError("need at least one construction")
    dims = {c.state.shape[0] for c in constructions}
    if len(dims) != 1:
        raise ContractError(f"constructions have mismatched dimensions {sorted(dims)}")
    if weights is None:
        weights = np.ones(len(constructions))
    if len(weights) != len(constructions):
        raise ContractError("one weight per construction is required")
    total = sum(w * c.state for w, c in zip(weights, constructions))
    return normalize(total)


def predicted_high_spin_value(two_s: int) -> float:
    """Large-L revival value ``1/(2S)``."""
    if two_s < 1:
        raise ContractError(f"two_s must be >= 1, got {two_s}")
    return 1.0 / two_s
