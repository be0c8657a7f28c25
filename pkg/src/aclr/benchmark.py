"""Benchmarking state preparation with a reviving target state.

A prepared state is modelled as the ideal reservoir plus a random
unit-modulus vector of norm ``lambda``.  Sweeping ``lambda`` relates the
overlap with the ideal state (preparation error E) to the loss of revival
``delta = 1 - <S^z(t*)>/S``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from aclr import rng as rngmod
from aclr.errors import ContractError, FitError
from aclr.evolution import EigenSystem, evolve, spin_expectations
from aclr.model import site_levels
from aclr.revival import RevivalConstruction


@dataclass(frozen=True, eq=False)
class SweepResult:
    lambda_grid: np.ndarray
    mean_sz: np.ndarray
    stderr_sz: np.ndarray
    mean_error: np.ndarray
    n_realizations: int
    seed: int
    sz: np.ndarray  # (n_lambda, n_realizations)
    error: np.ndarray  # same shape, preparation error per realization

    @property
    def delta(self) -> np.ndarray:
        return 1.0 - self.mean_sz


def _support(construction: RevivalConstruction) -> np.ndarray:
    spec = construction.spec
    return np.flatnonzero(site_levels(spec, construction.site) == spec.g - 1)


def perturb_target(construction: RevivalConstruction, lam: float, rng) -> np.ndarray:
    """Ideal revival state with ``lam / sqrt(g**(L-1)) * sum_n c_n |b_n>`` added.

    ``|c_n| = 1`` with uniform random phases; the sum runs over the block
    where the revival site is at its top level, so the local factor is kept.
    """
    if lam < 0:
        raise ContractError(f"perturbation strength must be >= 0, got {lam}")
    ideal = construction.state
    if lam == 0:
        return ideal.copy()
    gen = rngmod.as_generator(rng)
    idx = _support(construction)
    out = ideal.copy()
    out[idx] += lam / np.sqrt(idx.size) * rngmod.unit_phases(gen, idx.size)
    return out / np.linalg.norm(out)


def preparation_error(ideal: np.ndarray, experimental: np.ndarray) -> float:
    """``|<ideal|experimental>|`` for normalized states."""
    ideal = np.asarray(ideal)
    experimental = np.asarray(experimental)
    if ideal.shape != experimental.shape:
        raise ContractError(f"dimension mismatch: {ideal.shape} vs {experimental.shape}")
    return float(min(1.0, abs(np.vdot(ideal, experimental))))


def _one_lambda(eig, construction, lam, li, n, seed):
    states = np.empty((construction.state.shape[0], n), dtype=complex)
    errors = np.empty(n)
    for i in range(n):
        gen = rngmod.substream(seed, rngmod.SWEEP, li, i)
        psi = perturb_target(construction, lam, gen)
        states[:, i] = psi
        errors[i] = preparation_error(construction.state, psi)
    evolved = evolve(eig, states, construction.t_star)
    sz = spin_expectations(evolved, construction.spec, construction.site)["sz"]
    return np.asarray(sz, dtype=float), errors


def lambda_sweep(eig: EigenSystem, construction: RevivalConstruction, lambda_grid,
                 n_realizations: int = 40, base_seed: int = 0, workers: int = 1) -> SweepResult:
    """Mean revival and preparation error over random perturbations per lambda.

    Realization ``i`` at grid index ``j`` always draws from
    ``substream(base_seed, SWEEP, j, i)``; each lambda is one task, so the
    output is bit-identical for any ``workers``.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ContractError("lambda grid must be a non-empty ascending sequence")
    if n_realizations < 1:
        raise ContractError("need at least one realization")

    def task(j):
        return _one_lambda(eig, construction, grid[j], j, n_realizations, base_seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, range(grid.size)))
    else:
        results = [task(j) for j in range(grid.size)]

    sz = np.array([r[0] for r in results])
    err = np.array([r[1] for r in results])
    if n_realizations > 1:
        stderr = sz.std(axis=1, ddof=1) / np.sqrt(n_realizations)
    else:
        stderr = np.zeros(grid.size)
    return SweepResult(lambda_grid=grid, mean_sz=sz.mean(axis=1), stderr_sz=stderr,
                       mean_error=err.mean(axis=1), n_realizations=n_realizations,
                       seed=base_seed, sz=sz, error=err)


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares ``y = slope x + intercept``; returns (slope, intercept, r2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 2 or np.ptp(x) == 0:
        raise FitError("cannot fit a line to constant or single-point abscissae")
    slope, intercept = np.polyfit(x, y, 1)
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return float(slope), float(intercept), r2


def linear_region(x, y, min_points: int = 4) -> tuple[int, int, float]:
    """Contiguous window ``[start, stop)`` with the best r2 (longer wins ties)."""
    x = np.asarray(x, dtype=float)
    if x.size < min_points:
        raise FitError(f"need at least {min_points} points, got {x.size}")
    best = None
    for start in range(x.size - min_points + 1):
        for stop in range(start + min_points, x.size + 1):
            try:
                r2 = linear_fit(x[start:stop], y[start:stop])[2]
            except FitError:
                continue
            key = (round(r2, 12), stop - start)
            if best is None or key > best[0]:
                best = (key, start, stop, r2)
    if best is None:
        raise FitError("no window with a usable fit")
    return best[1], best[2], best[3]


def fit_error_relation(sweep: SweepResult, min_points: int = 4) -> dict:
    """Fit E against delta over the window where the revival is most linear in lambda."""
    if sweep.lambda_grid.size < min_points:
        raise FitError(f"need at least {min_points} grid points")
    start, stop, revival_r2 = linear_region(sweep.lambda_grid, sweep.mean_sz, min_points)
    delta = sweep.delta[start:stop]
    if np.ptp(delta) == 0:
        raise FitError("revival discrepancy is constant over the linear region")
    slope, intercept, r2 = linear_fit(delta, sweep.mean_error[start:stop])
    return {
        "slope": slope,
        "intercept": intercept,
        "r2": r2,
        "region": {
            "start": start,
            "stop": stop,
            "lambda_min": float(sweep.lambda_grid[start]),
            "lambda_max": float(sweep.lambda_grid[stop - 1]),
            "revival_r2": revival_r2,
        },
    }
