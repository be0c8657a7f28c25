"""File formats: state / revival / key JSON records and CSV series.

All writers are byte-stable: fixed key order, ``\\n`` newlines, and CSV
numbers printed with 12 significant digits.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from aclr.chrono import Codebook, KeyEntry, SecretKey
from aclr.errors import ContractError
from aclr.evolution import ObservableSeries
from aclr.model import ChainSpec
from aclr.revival import RevivalConstruction

STATE_FORMAT = "aclr-state-v1"
REVIVAL_FORMAT = "aclr-revival-v1"
KEY_FORMAT = "aclr-key-v1"


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


def dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8", newline="\n")


def load_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _check_format(data: dict, expected: str) -> None:
    got = data.get("format") if isinstance(data, dict) else None
    if got != expected:
        raise ContractError(f"expected a {expected!r} record, got {got!r}")


def state_to_dict(psi: np.ndarray, spec: ChainSpec) -> dict:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (spec.dim,):
        raise ContractError(f"state has shape {psi.shape}, spec expects ({spec.dim},)")
    return {
        "format": STATE_FORMAT,
        "spec": spec.to_dict(),
        "amplitudes": [[float(z.real), float(z.imag)] for z in psi],
    }


def state_from_dict(data: dict) -> tuple[np.ndarray, ChainSpec]:
    _check_format(data, STATE_FORMAT)
    spec = ChainSpec.from_dict(data["spec"])
    amps = np.asarray(data["amplitudes"], dtype=float)
    if amps.shape != (spec.dim, 2):
        raise ContractError(f"amplitude list has shape {amps.shape}, expected ({spec.dim}, 2)")
    return amps[:, 0] + 1j * amps[:, 1], spec


def revival_to_dict(c: RevivalConstruction) -> dict:
    return {
        "format": REVIVAL_FORMAT,
        "state": state_to_dict(c.state, c.spec),
        "t_star": c.t_star,
        "xi": c.xi,
        "residual": c.residual,
        "designated_index": c.designated_index,
        "overlap_at_tstar": c.overlap_at_tstar,
        "condition_estimate": c.condition_estimate,
        "predicted_value": c.predicted_value,
        "leakage": c.leakage,
    }


def revival_from_dict(data: dict) -> dict:
    """Parsed revival record: the state, its spec and the scalar diagnostics."""
    _check_format(data, REVIVAL_FORMAT)
    psi, spec = state_from_dict(data["state"])
    out = {k: v for k, v in data.items() if k not in ("format", "state")}
    out.update(state=psi, spec=spec)
    return out


def key_to_dict(key: SecretKey) -> dict:
    return {
        "format": KEY_FORMAT,
        "spec": key.spec.to_dict(),
        "n_copies": key.n_copies,
        "threshold": key.threshold,
        "entries": [{"site": e.site, "t_star": e.t_star} for e in key.entries],
    }


def key_from_dict(data: dict) -> SecretKey:
    _check_format(data, KEY_FORMAT)
    try:
        entries = tuple(KeyEntry(int(e["site"]), float(e["t_star"])) for e in data["entries"])
    except (KeyError, TypeError) as exc:
        raise ContractError(f"malformed key entries: {exc}") from exc
    return SecretKey(
        entries=entries,
        spec=ChainSpec.from_dict(data["spec"]),
        n_copies=int(data.get("n_copies", 400)),
        threshold=float(data.get("threshold", 0.5)),
    )


def codebook_to_list(book: Codebook) -> list:
    return [state_to_dict(psi, book.spec) for psi in book.device_states]


def codebook_from_list(items: list) -> Codebook:
    if not items:
        raise ContractError("codebook is empty")
    states, specs = zip(*(state_from_dict(d) for d in items))
    if len(set(specs)) != 1:
        raise ContractError("codebook devices disagree on the chain spec")
    return Codebook(device_states=tuple(states), spec=specs[0])


def write_series_csv(series: ObservableSeries, path) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "sx", "sy", "sz"])
        for row in zip(series.times, series.sx, series.sy, series.sz):
            w.writerow([fmt(v) for v in row])


def read_series_csv(path) -> ObservableSeries:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return ObservableSeries(times=data[:, 0], sx=data[:, 1], sy=data[:, 2], sz=data[:, 3])


def write_rows_csv(path, header, rows) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, (int, str)) else fmt(v) for v in row])
