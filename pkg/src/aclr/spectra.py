"""Level statistics: momentum sectors, unfolding, consecutive-gap ratios."""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from aclr.errors import ContractError, SymmetryError
from aclr.evolution import check_hermitian
from aclr.model import ChainSpec, translation_permutation

log = logging.getLogger(__name__)

POISSON_MEAN_R = 2 * np.log(2) - 1  # 0.3863
GOE_MEAN_R = 0.5307
GUE_MEAN_R = 0.5996
MIN_LEVELS = 50


@dataclass(frozen=True, eq=False)
class SectorSpectrum:
    k: int
    levels: np.ndarray
    dimension: int


@dataclass(frozen=True, eq=False)
class SpacingStats:
    mean_r: float
    r_values: np.ndarray
    unfolded_spacings: np.ndarray | None = None
    histogram: tuple[np.ndarray, np.ndarray] | None = None
    n_degenerate: int = 0


def _translation_as_permutation(T) -> np.ndarray:
    """Accept either a permutation array or a dense permutation matrix."""
    T = np.asarray(T)
    if T.ndim == 1:
        return T.astype(np.int64)
    cols = np.argmax(np.abs(T), axis=0)
    if not np.allclose(np.abs(T[cols, np.arange(T.shape[1])]), 1.0):
        raise ContractError("translation operator must be a permutation matrix")
    return cols


def _orbits(perm: np.ndarray) -> list[np.ndarray]:
    """Cycles of the permutation, each listed as r, T r, T^2 r, ..."""
    seen = np.zeros(perm.shape[0], dtype=bool)
    cycles = []
    for start in range(perm.shape[0]):
        if seen[start]:
            continue
        cyc = [start]
        seen[start] = True
        nxt = perm[start]
        while nxt != start:
            cyc.append(nxt)
            seen[nxt] = True
            nxt = perm[nxt]
        cycles.append(np.array(cyc))
    return cycles


def momentum_basis(perm: np.ndarray, L: int, k: int, orbits=None) -> sp.csc_matrix:
    """Orthonormal columns spanning the range of ``P_k = (1/L) sum_j w^{-kj} T^j``.

    ``P_k`` applied to an orbit representative is nonzero only when the
    orbit period ``p`` satisfies ``k p = 0 (mod L)``; it is then the uniform
    phase-weighted sum over the orbit.
    """
    orbits = _orbits(perm) if orbits is None else orbits
    rows, cols, vals = [], [], []
    col = 0
    for cyc in orbits:
        p = len(cyc)
        if (k * p) % L:
            continue
        j = np.arange(p)
        rows.append(cyc)
        cols.append(np.full(p, col))
        vals.append(np.exp(-2j * np.pi * k * j / L) / np.sqrt(p))
        col += 1
    dim = perm.shape[0]
    if col == 0:
        return sp.csc_matrix((dim, 0), dtype=complex)
    return sp.csc_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, col)
    )


def momentum_sectors(H: np.ndarray, T, L: int, ks=None, workers: int = 1,
                     tol: float = 1e-10) -> list[SectorSpectrum]:
    """Diagonalize ``H`` separately in each translation eigenspace."""
    check_hermitian(H)
    perm = _translation_as_permutation(T)
    # T H T^dagger in index form: (T H T^+)[perm[a], perm[b]] = H[a, b]
    scale = max(float(np.max(np.abs(H))), 1.0)
    if float(np.max(np.abs(H[np.ix_(perm, perm)] - H))) > tol * scale:
        raise SymmetryError("Hamiltonian does not commute with the translation operator")
    orbits = _orbits(perm)
    ks = range(L) if ks is None else ks

    def one(k):
        B = momentum_basis(perm, L, k, orbits)
        if B.shape[1] == 0:
            return SectorSpectrum(k=k, levels=np.zeros(0), dimension=0)
        HB = (B.conj().T @ (B.T @ H.T).T)
        HB = (HB + HB.conj().T) / 2
        return SectorSpectrum(k=k, levels=np.linalg.eigvalsh(HB), dimension=B.shape[1])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, ks))
    return [one(k) for k in ks]


def chain_sectors(spec: ChainSpec, H: np.ndarray, ks=None, workers: int = 1):
    return momentum_sectors(H, translation_permutation(spec), spec.L, ks=ks, workers=workers)


def generic_momenta(L: int) -> list[int]:
    """Momenta other than 0 and L/2, where reflection still mixes sectors."""
    return [k for k in range(L) if k != 0 and 2 * k != L]


def unfold(levels, degree: int = 10, trim: float = 0.05) -> np.ndarray:
    """Unfolded nearest-neighbour spacings.

    The integrated density of states of the trimmed spectrum is fitted by a
    polynomial of ``degree``; levels are mapped through it and differenced.
    """
    E = np.sort(np.asarray(levels, dtype=float))
    if E.size < MIN_LEVELS:
        raise ContractError(f"unfolding needs at least {MIN_LEVELS} levels, got {E.size}")
    if degree < 3:
        raise ContractError("unfolding polynomial degree must be >= 3")
    cut = int(np.floor(trim * E.size))
    E = E[cut : E.size - cut] if cut else E
    staircase = np.arange(1, E.size + 1, dtype=float)
    fit = np.polynomial.Polynomial.fit(E, staircase, deg=degree)
    return np.diff(fit(E))


def spacing_ratios(levels, rel_tol: float = 1e-10) -> SpacingStats:
    """``r_n = min(s_n, s_{n+1}) / max(s_n, s_{n+1})`` over consecutive gaps.

    Gaps below ``rel_tol`` times the spectral width count as degeneracies and
    are dropped (with a warning) before forming ratios.
    """
    E = np.asarray(levels, dtype=float)
    if E.size < MIN_LEVELS:
        raise ContractError(f"spacing ratios need at least {MIN_LEVELS} levels, got {E.size}")
    if np.any(np.diff(E) < 0):
        raise ContractError("levels must be sorted ascending")
    s = np.diff(E)
    width = max(E[-1] - E[0], np.finfo(float).tiny)
    degenerate = s <= rel_tol * width
    n_deg = int(degenerate.sum())
    if n_deg:
        warnings.warn(f"{n_deg} degenerate gaps excluded from ratios", RuntimeWarning, stacklevel=2)
        s = s[~degenerate]
    r = np.minimum(s[:-1], s[1:]) / np.maximum(s[:-1], s[1:])
    return SpacingStats(mean_r=float(r.mean()) if r.size else float("nan"), r_values=r,
                        n_degenerate=n_deg)


def pooled_ratios(sectors, ks=None, rel_tol: float = 1e-10) -> dict:
    """Per-sector and pooled mean r over the chosen momenta."""
    chosen = [s for s in sectors if ks is None or s.k in set(ks)]
    per_sector = {}
    all_r = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for sec in chosen:
            if sec.levels.size < MIN_LEVELS:
                continue
            st = spacing_ratios(sec.levels, rel_tol)
            per_sector[sec.k] = st.mean_r
            all_r.append(st.r_values)
    r = np.concatenate(all_r) if all_r else np.zeros(0)
    return {"mean_r": float(r.mean()) if r.size else float("nan"), "n_ratios": int(r.size),
            "per_sector": per_sector, "r_values": r}


def level_statistics(sectors, ks=None, degree: int = 10, bins=None) -> SpacingStats:
    """Pooled r statistics plus a histogram of per-sector unfolded spacings."""
    pooled = pooled_ratios(sectors, ks)
    spacings = [unfold(s.levels, degree) for s in sectors
                if (ks is None or s.k in set(ks)) and s.levels.size >= MIN_LEVELS]
    sp_all = np.concatenate(spacings) if spacings else np.zeros(0)
    bins = np.linspace(0, 4, 41) if bins is None else bins
    counts, edges = np.histogram(sp_all, bins=bins)
    return SpacingStats(mean_r=pooled["mean_r"], r_values=pooled["r_values"],
                        unfolded_spacings=sp_all, histogram=(edges, counts))
