"""Delayed reveal of a secret bit string.

Device ``i`` carries bit ``b_i``: a revival state for site ``l_i`` at ``t*_i``
when ``b_i = 1``, or the same local product state on a thermal reservoir
when ``b_i = 0``.  Both look identical at ``t = 0``.  Only someone who
measures ``S^z_{l_i}`` at ``t*_i`` (the key) sees the difference; measuring
earlier collapses the state and destroys the revival.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from aclr import rng as rngmod
from aclr.errors import ContractError
from aclr.evolution import EigenSystem, evolve, thermal_state
from aclr.model import ChainSpec, site_levels
from aclr.revival import build_revival

DEFAULT_COPIES = 400
DEFAULT_THRESHOLD = 0.5


@dataclass(frozen=True)
class KeyEntry:
    site: int
    t_star: float


@dataclass(frozen=True)
class SecretKey:
    entries: tuple[KeyEntry, ...]
    spec: ChainSpec
    n_copies: int = DEFAULT_COPIES
    threshold: float = DEFAULT_THRESHOLD

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(
            e if isinstance(e, KeyEntry) else KeyEntry(int(e[0]), float(e[1])) for e in self.entries
        ))
        if not self.entries:
            raise ContractError("a key needs at least one (site, t*) entry")
        for e in self.entries:
            if not 1 <= e.site <= self.spec.L:
                raise ContractError(f"key site {e.site} outside [1, {self.spec.L}]")
            if e.t_star <= 0:
                raise ContractError(f"key times must be positive, got {e.t_star}")
        if self.n_copies < 1:
            raise ContractError("n_copies must be >= 1")
        if not 0 < self.threshold < 1:
            raise ContractError("threshold must lie in (0, 1)")

    @property
    def q(self) -> int:
        return len(self.entries)

    def shifted(self, dt) -> "SecretKey":
        """Same key with every time moved by ``dt`` (scalar or per entry)."""
        dts = np.broadcast_to(np.asarray(dt, dtype=float), (self.q,))
        return SecretKey(
            entries=tuple(KeyEntry(e.site, e.t_star + float(d)) for e, d in zip(self.entries, dts)),
            spec=self.spec, n_copies=self.n_copies, threshold=self.threshold,
        )


@dataclass(frozen=True, eq=False)
class Codebook:
    device_states: tuple[np.ndarray, ...]
    spec: ChainSpec
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class DecodeResult:
    bits: tuple[int, ...]
    estimates: np.ndarray
    stderr: np.ndarray

    @property
    def bitstring(self) -> str:
        return "".join(str(b) for b in self.bits)


def random_key(spec: ChainSpec, q: int, seed: int, t_range=(4.0, 8.0), **kw) -> SecretKey:
    gen = rngmod.substream(seed, rngmod.ENCODE, 2**32 - 1)
    sites = gen.integers(1, spec.L + 1, size=q)
    times = np.round(gen.uniform(*t_range, size=q), 3)
    return SecretKey(entries=tuple(KeyEntry(int(s), float(t)) for s, t in zip(sites, times)),
                     spec=spec, **kw)


def parse_bits(bits) -> tuple[int, ...]:
    if isinstance(bits, str):
        if not bits or set(bits) - {"0", "1"}:
            raise ContractError(f"bit string must contain only 0/1, got {bits!r}")
        return tuple(int(b) for b in bits)
    out = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in out):
        raise ContractError("bits must be 0 or 1")
    return out


def encode_secret(bits, key: SecretKey, eig: EigenSystem, seed: int = 0) -> Codebook:
    """One device state per key entry; bit 0 devices get a fresh thermal reservoir."""
    bits = parse_bits(bits)
    if len(bits) != key.q:
        raise ContractError(f"{len(bits)} bits but the key has {key.q} entries")
    states = []
    for i, (b, entry) in enumerate(zip(bits, key.entries)):
        if b:
            spec = key.spec.replace(revival_site=entry.site)
            states.append(build_revival(eig, entry.t_star, spec).state)
        else:
            gen = rngmod.substream(seed, rngmod.ENCODE, i)
            states.append(thermal_state(eig, gen, entry.site, key.spec))
    return Codebook(device_states=tuple(states), spec=key.spec)


def born_probabilities(psi: np.ndarray, site: int, spec: ChainSpec) -> np.ndarray:
    """Outcome probabilities for the level of ``site`` (index = level, g-1 = +S)."""
    p = np.bincount(site_levels(spec, site), weights=np.abs(psi) ** 2, minlength=spec.g)
    total = p.sum()
    if abs(total - 1.0) > 1e-10:
        raise ContractError(f"state is not normalized (total probability {total:.3e})")
    return p / total


def projective_measure(psi: np.ndarray, site: int, spec: ChainSpec, rng) -> tuple[int, np.ndarray]:
    """Sample a level of ``site`` and collapse; returns ``(level, post-measurement state)``."""
    gen = rngmod.as_generator(rng)
    p = born_probabilities(psi, site, spec)
    outcome = int(gen.choice(spec.g, p=p))
    collapsed = np.where(site_levels(spec, site) == outcome, psi, 0.0)
    return outcome, collapsed / np.linalg.norm(collapsed)


def _levels_to_sz(levels, spec: ChainSpec) -> np.ndarray:
    return (np.asarray(levels, dtype=float) - spec.spin) / spec.spin


def measure_device(eig: EigenSystem, psi: np.ndarray, site: int, t: float, n_copies: int,
                   spec: ChainSpec, rng) -> tuple[float, float]:
    """Mean and standard error of ``S^z/S`` from ``n_copies`` single shots at ``t``."""
    gen = rngmod.as_generator(rng)
    p = born_probabilities(evolve(eig, psi, t), site, spec)
    outcomes = _levels_to_sz(gen.choice(spec.g, size=n_copies, p=p), spec)
    stderr = outcomes.std(ddof=1) / np.sqrt(n_copies) if n_copies > 1 else float("nan")
    return float(outcomes.mean()), float(stderr)


def decode_with_key(codebook: Codebook, key: SecretKey, eig: EigenSystem, seed: int = 0,
                    workers: int = 1) -> DecodeResult:
    """Measure every device at its key time; bit is 1 iff the estimate clears the threshold."""
    if len(codebook.device_states) != key.q:
        raise ContractError(f"codebook has {len(codebook.device_states)} devices, key has {key.q}")

    def task(i):
        entry = key.entries[i]
        gen = rngmod.substream(seed, rngmod.DECODE, i)
        return measure_device(eig, codebook.device_states[i], entry.site, entry.t_star,
                              key.n_copies, key.spec, gen)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, range(key.q)))
    else:
        results = [task(i) for i in range(key.q)]
    est = np.array([r[0] for r in results])
    err = np.array([r[1] for r in results])
    return DecodeResult(bits=tuple(int(v >= key.threshold) for v in est), estimates=est, stderr=err)


def premature_measurement(eig: EigenSystem, psi: np.ndarray, site: int, t_measure: float,
                          t_star: float, spec: ChainSpec, rng) -> float:
    """``<S^z_site(t*)>/S`` after an eavesdropper's projective measurement at ``t_measure``."""
    if not 0 <= t_measure <= t_star:
        raise ContractError("measurement time must lie in [0, t*]")
    _, collapsed = projective_measure(evolve(eig, psi, t_measure), site, spec, rng)
    later = evolve(eig, collapsed, t_star - t_measure)
    p = born_probabilities(later, site, spec)
    return float(p @ _levels_to_sz(np.arange(spec.g), spec))
