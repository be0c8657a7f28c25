"""Command-line front end.

Each subcommand writes data files (CSV/JSON) plus a ``manifest.json`` with
everything needed to re-run it.  Exit codes: 0 ok, 1 computation error,
2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from aclr import __version__
from aclr import io as aio
from aclr.benchmark import fit_error_relation, lambda_sweep
from aclr.chrono import decode_with_key, encode_secret, parse_bits, random_key
from aclr.errors import ACLRError, DimensionError, InvalidSpecError
from aclr.evolution import (
    diagonalize,
    dymarsky_state,
    observable_series,
    thermal_state,
)
from aclr.model import ChainSpec, Couplings, build_hamiltonian
from aclr.revival import build_revival, pairwise_overlaps, superpose_revivals
from aclr.spectra import chain_sectors, generic_momenta, level_statistics, pooled_ratios

log = logging.getLogger("aclr")

# largest single-core dense problem we pick by default (5**5); S=1/2 uses L=10
DESK_DIM = 3125
DEFAULT_TIMES = "0:10:0.05"


class UsageError(Exception):
    pass


def default_length(two_s: int) -> int:
    if two_s == 1:
        return 10
    g = two_s + 1
    L = 2
    while g ** (L + 1) <= DESK_DIM:
        L += 1
    return L


def parse_range(text: str) -> np.ndarray:
    """``"start:stop:step"`` inclusive of ``stop``; a comma list is also accepted."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step)) + 1
            return np.round(start + step * np.arange(n), 12)
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected start:stop:step or a comma list") from None


def parse_floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad number list {text!r}") from None


def _chain_args(p: argparse.ArgumentParser, t_star: bool = True, times: bool = True) -> None:
    d = Couplings()
    g = p.add_argument_group("chain")
    g.add_argument("--length", "-L", type=int, default=None,
                   help="sites (default 10 for S=1/2, else the largest desk-size L)")
    g.add_argument("--two-s", type=int, default=1, help="2S (1 = spin-1/2)")
    g.add_argument("--jx", type=float, default=d.jx)
    g.add_argument("--jy", type=float, default=d.jy)
    g.add_argument("--hx", type=float, default=d.hx)
    g.add_argument("--hy", type=float, default=d.hy)
    g.add_argument("--site", type=int, default=1, help="revival / observed site (1-based)")
    if t_star:
        p.add_argument("--t-star", type=float, default=5.0)
    if times:
        p.add_argument("--times", default=DEFAULT_TIMES, help="start:stop:step (inclusive)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")


def _common(p: argparse.ArgumentParser, seed: bool = False) -> None:
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--workers", type=int, default=1)
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aclr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"aclr {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("thermal", help="edge spin on a thermal reservoir")
    _chain_args(p, t_star=False)
    _common(p, seed=True)

    p = sub.add_parser("revive", help="almost complete revival at t*")
    _chain_args(p)
    _common(p)

    p = sub.add_parser("superpose", help="equal-weight superposition of revival states")
    _chain_args(p, t_star=False)
    p.add_argument("--t-stars", default="3.5,7.0")
    _common(p)

    p = sub.add_parser("higher-spin", help="revival for several spins S")
    _chain_args(p)
    p.add_argument("--spins", default="1,2,3,4", help="comma list of 2S values")
    p.add_argument("--lengths", default=None, help="comma list of L, one per spin")
    _common(p)

    p = sub.add_parser("dymarsky", help="half-revival superposition baseline")
    _chain_args(p)
    _common(p, seed=True)

    p = sub.add_parser("sweep", help="preparation-error benchmark over lambda")
    _chain_args(p, times=False)
    p.add_argument("--lambdas", default="0:3.5:0.5")
    p.add_argument("--realizations", type=int, default=40)
    _common(p, seed=True)

    p = sub.add_parser("spectra", help="momentum-resolved level statistics")
    _chain_args(p, t_star=False, times=False)
    p.add_argument("--degree", type=int, default=10, help="unfolding polynomial degree")
    _common(p)

    p = sub.add_parser("keygen", help="random delayed-reveal key")
    _chain_args(p, t_star=False, times=False)
    p.add_argument("--q", type=int, required=True, help="number of bits")
    p.add_argument("--t-min", type=float, default=4.0)
    p.add_argument("--t-max", type=float, default=8.0)
    p.add_argument("--n-copies", type=int, default=400)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--key-out", type=Path, default=Path("key.json"))
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("encode", help="write a codebook for a bit string")
    p.add_argument("--bits", required=True)
    p.add_argument("--key", type=Path, required=True)
    _common(p, seed=True)

    p = sub.add_parser("decode", help="measure a codebook with a key")
    p.add_argument("--key", type=Path, required=True)
    p.add_argument("--book", type=Path, required=True)
    p.add_argument("--time-shift", type=float, default=0.0,
                   help="add to every key time (tamper demo)")
    _common(p, seed=True)
    return parser


def spec_from_args(args, two_s: int | None = None, length: int | None = None) -> ChainSpec:
    two_s = args.two_s if two_s is None else two_s
    L = length or args.length or default_length(two_s)
    return ChainSpec(
        L=L, two_s=two_s,
        couplings=Couplings(jx=args.jx, jy=args.jy, hx=args.hx, hy=args.hy),
        revival_site=args.site,
    )


def _base_manifest(args, **extra) -> dict:
    out = {"command": args.command, "version": __version__}
    out.update(extra)
    return out


def _write_series(series, out: Path, stem: str, fmt: str) -> str:
    if fmt == "json":
        name = f"{stem}.json"
        aio.dump_json({"t": series.times.tolist(), "sx": series.sx.tolist(),
                       "sy": series.sy.tolist(), "sz": series.sz.tolist()}, out / name)
    else:
        name = f"{stem}.csv"
        aio.write_series_csv(series, out / name)
    return name


def _construction_summary(c) -> dict:
    return {
        "t_star": c.t_star,
        "xi": c.xi,
        "predicted_value": c.predicted_value,
        "residual": c.residual,
        "condition_estimate": c.condition_estimate,
        "overlap_at_tstar": c.overlap_at_tstar,
        "leakage": c.leakage,
        "designated_index": c.designated_index,
    }


def cmd_thermal(args) -> dict:
    spec = spec_from_args(args)
    times = parse_range(args.times)
    eig = diagonalize(spec)
    psi = thermal_state(eig, args.seed, args.site, spec)
    series = observable_series(eig, psi, args.site, times, spec)
    energy = float(np.real(np.vdot(eig.to_eigenbasis(psi), eig.energies * eig.to_eigenbasis(psi))))
    name = _write_series(series, args.out, "thermal", args.format)
    return _base_manifest(args, spec=spec.to_dict(), seed=args.seed, times=args.times,
                          energy=energy, spectral_width=eig.width, files=[name])


def cmd_revive(args) -> dict:
    spec = spec_from_args(args)
    times = parse_range(args.times)
    eig = diagonalize(spec)
    c = build_revival(eig, args.t_star, spec)
    series = observable_series(eig, c.state, args.site, times, spec)
    name = _write_series(series, args.out, "revive", args.format)
    aio.dump_json(aio.revival_to_dict(c), args.out / "revival.json")
    return _base_manifest(args, spec=spec.to_dict(), times=args.times,
                          construction=_construction_summary(c), files=[name, "revival.json"])


def cmd_superpose(args) -> dict:
    spec = spec_from_args(args)
    times = parse_range(args.times)
    t_stars = parse_floats(args.t_stars)
    if not t_stars:
        raise UsageError("--t-stars needs at least one time")
    eig = diagonalize(spec)
    cons = [build_revival(eig, t, spec) for t in t_stars]
    psi = superpose_revivals(cons)
    series = observable_series(eig, psi, args.site, times, spec)
    name = _write_series(series, args.out, "superpose", args.format)
    return _base_manifest(args, spec=spec.to_dict(), times=args.times,
                          constructions=[_construction_summary(c) for c in cons],
                          pairwise_overlaps=pairwise_overlaps([c.state for c in cons]).tolist(),
                          files=[name])


def cmd_higher_spin(args) -> dict:
    spins = [int(x) for x in parse_floats(args.spins)]
    lengths = [int(x) for x in parse_floats(args.lengths)] if args.lengths else None
    if lengths is not None and len(lengths) != len(spins):
        raise UsageError("--lengths needs one entry per spin")
    specs = [spec_from_args(args, two_s=s, length=lengths[i] if lengths else None)
             for i, s in enumerate(spins)]
    times = parse_range(args.times)
    runs, files = [], []
    for spec in specs:
        log.info("higher-spin: 2S=%d L=%d (dim %d)", spec.two_s, spec.L, spec.dim)
        eig = diagonalize(spec)
        c = build_revival(eig, args.t_star, spec)
        series = observable_series(eig, c.state, args.site, times, spec)
        files.append(_write_series(series, args.out, f"spin_2S{spec.two_s}_L{spec.L}", args.format))
        runs.append({"spec": spec.to_dict(), "construction": _construction_summary(c),
                     "target_value": 1.0 / spec.two_s})
        del eig
    return _base_manifest(args, times=args.times, runs=runs, files=files)


def cmd_dymarsky(args) -> dict:
    spec = spec_from_args(args)
    times = parse_range(args.times)
    eig = diagonalize(spec)
    psi0 = thermal_state(eig, args.seed, args.site, spec)
    psi = dymarsky_state(eig, psi0, args.t_star)
    series = observable_series(eig, psi, args.site, times, spec)
    name = _write_series(series, args.out, "dymarsky", args.format)
    return _base_manifest(args, spec=spec.to_dict(), t_star=args.t_star, seed=args.seed,
                          times=args.times, files=[name])


def cmd_sweep(args) -> dict:
    spec = spec_from_args(args)
    grid = parse_range(args.lambdas)
    if args.realizations < 1:
        raise UsageError("--realizations must be >= 1")
    eig = diagonalize(spec)
    c = build_revival(eig, args.t_star, spec)
    sweep = lambda_sweep(eig, c, grid, args.realizations, args.seed, workers=args.workers)
    aio.write_rows_csv(
        args.out / "sweep.csv", ["lambda", "mean_sz", "stderr_sz", "mean_E", "n"],
        [(lam, m, s, e, sweep.n_realizations) for lam, m, s, e in
         zip(sweep.lambda_grid, sweep.mean_sz, sweep.stderr_sz, sweep.mean_error)],
    )
    fit = fit_error_relation(sweep)
    aio.dump_json({"slope": fit["slope"], "intercept": fit["intercept"], "r2": fit["r2"],
                   "region": fit["region"]}, args.out / "fit.json")
    return _base_manifest(args, spec=spec.to_dict(), seed=args.seed, lambdas=args.lambdas,
                          realizations=args.realizations, construction=_construction_summary(c),
                          files=["sweep.csv", "fit.json"])


def cmd_spectra(args) -> dict:
    spec = spec_from_args(args)
    if args.degree < 3:
        raise UsageError("--degree must be >= 3")
    H = build_hamiltonian(spec)
    sectors = chain_sectors(spec, H, workers=args.workers)
    del H
    ks = generic_momenta(spec.L)
    aio.write_rows_csv(args.out / "spectra.csv", ["k", "level"],
                       [(s.k, e) for s in sectors for e in s.levels])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        pooled = pooled_ratios(sectors, ks)
        stats = level_statistics(sectors, ks, degree=args.degree)
    edges, counts = stats.histogram
    aio.dump_json({
        "mean_r": pooled["mean_r"] if pooled["n_ratios"] else None,
        "n_ratios": pooled["n_ratios"],
        "per_sector": {str(k): v for k, v in pooled["per_sector"].items()},
        "momenta": ks,
        "unfolding_degree": args.degree,
        "unfolded_mean_spacing": (float(stats.unfolded_spacings.mean())
                                  if stats.unfolded_spacings.size else None),
        "spacing_histogram": {"edges": edges.tolist(), "counts": counts.tolist()},
    }, args.out / "rstats.json")
    return _base_manifest(args, spec=spec.to_dict(),
                          sector_dims={str(s.k): s.dimension for s in sectors},
                          files=["spectra.csv", "rstats.json"])


def cmd_keygen(args) -> dict:
    spec = spec_from_args(args)
    if args.q < 1:
        raise UsageError("--q must be >= 1")
    key = random_key(spec, args.q, args.seed, (args.t_min, args.t_max),
                     n_copies=args.n_copies, threshold=args.threshold)
    aio.dump_json(aio.key_to_dict(key), args.key_out)
    return {}


def cmd_encode(args) -> dict:
    key = aio.key_from_dict(aio.load_json(args.key))
    bits = parse_bits(args.bits)
    eig = diagonalize(key.spec)
    book = encode_secret(bits, key, eig, seed=args.seed)
    aio.dump_json(aio.codebook_to_list(book), args.out / "codebook.json")
    # the bits themselves are deliberately not recorded
    return _base_manifest(args, spec=key.spec.to_dict(), seed=args.seed, q=key.q,
                          files=["codebook.json"])


def cmd_decode(args) -> dict:
    key = aio.key_from_dict(aio.load_json(args.key))
    book_path = args.book / "codebook.json" if args.book.is_dir() else args.book
    book = aio.codebook_from_list(aio.load_json(book_path))
    if book.spec != key.spec:
        raise ACLRError("codebook and key describe different chains")
    if args.time_shift:
        key = key.shifted(args.time_shift)
    eig = diagonalize(key.spec)
    res = decode_with_key(book, key, eig, seed=args.seed, workers=args.workers)
    print(res.bitstring)
    aio.dump_json({"bits": res.bitstring, "estimates": res.estimates.tolist(),
                   "stderr": res.stderr.tolist(), "time_shift": args.time_shift},
                  args.out / "decoded.json")
    return _base_manifest(args, spec=key.spec.to_dict(), seed=args.seed,
                          time_shift=args.time_shift, files=["decoded.json"])


COMMANDS = {
    "thermal": cmd_thermal,
    "revive": cmd_revive,
    "superpose": cmd_superpose,
    "higher-spin": cmd_higher_spin,
    "dymarsky": cmd_dymarsky,
    "sweep": cmd_sweep,
    "spectra": cmd_spectra,
    "keygen": cmd_keygen,
    "encode": cmd_encode,
    "decode": cmd_decode,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    if getattr(args, "seed", 0) < 0:
        parser.error("--seed must be non-negative")
    try:
        # cheap validation up front so bad flags never reach a diagonalization
        if hasattr(args, "length") and args.command != "higher-spin":
            spec_from_args(args)
        if getattr(args, "times", None):
            parse_range(args.times)
        if hasattr(args, "out"):
            args.out.mkdir(parents=True, exist_ok=True)
        manifest = COMMANDS[args.command](args)
    except (UsageError, InvalidSpecError, DimensionError) as exc:
        parser.error(str(exc))
    except (ACLRError, OSError, ValueError) as exc:
        print(f"aclr {args.command}: error: {exc}", file=sys.stderr)
        return 1
    if manifest:
        aio.dump_json(manifest, args.out / "manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
