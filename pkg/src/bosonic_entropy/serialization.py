"""State specs, JSON state schema, CSV writing and run manifests."""

from __future__ import annotations

import csv
import json
import math
import os
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .fock import coherent_state, fock_state, thermal_state


class StateSpecError(ValueError):
    """A state description could not be parsed."""


def _complex(text: str) -> complex:
    t = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(t)
    except ValueError as exc:
        raise StateSpecError(f"not a complex number: {text!r}") from exc


def parse_state(spec: str, dim: int):
    """Vector or density matrix from ``fock:K``, ``coherent:A``, ``thermal:M`` or a JSON file path."""
    if ":" in spec and not os.path.exists(spec):
        kind, _, arg = spec.partition(":")
        kind = kind.strip().lower()
        try:
            if kind == "fock":
                if not re.fullmatch(r"\s*\d+\s*", arg):
                    raise StateSpecError(f"Fock level must be a nonnegative integer: {arg!r}")
                return fock_state(int(arg), dim)
            if kind == "coherent":
                return coherent_state(_complex(arg), dim)
            if kind == "thermal":
                return thermal_state(float(arg), dim)
        except (IndexError, ValueError) as exc:
            raise StateSpecError(str(exc)) from exc
        raise StateSpecError(f"unknown state kind {kind!r}")
    path = Path(spec)
    if not path.exists():
        raise StateSpecError(f"state spec {spec!r} is neither a constructor string nor a file")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise StateSpecError(f"{spec}: invalid JSON ({exc})") from exc
    state = state_from_json(data)
    return _resize(state, dim)


def _resize(state, dim):
    if state.shape[0] == dim:
        return state
    if state.ndim == 1:
        out = np.zeros(dim, dtype=complex)
    else:
        out = np.zeros((dim, dim), dtype=complex)
    k = min(dim, state.shape[0])
    if state.ndim == 1:
        out[:k] = state[:k]
    else:
        out[:k, :k] = state[:k, :k]
    return out


def state_to_json(state) -> dict:
    state = np.asarray(state, dtype=complex)
    if state.ndim == 1:
        return {"dim": int(state.size), "amps": [[float(z.real), float(z.imag)] for z in state]}
    return {
        "dim": int(state.shape[0]),
        "rows": [[[float(z.real), float(z.imag)] for z in row] for row in state],
    }


def state_from_json(data: dict):
    try:
        dim = int(data["dim"])
        if "amps" in data:
            arr = np.array([complex(re_, im) for re_, im in data["amps"]], dtype=complex)
            shape = (dim,)
        else:
            arr = np.array([[complex(re_, im) for re_, im in row] for row in data["rows"]], dtype=complex)
            shape = (dim, dim)
    except (KeyError, TypeError, ValueError) as exc:
        raise StateSpecError(f"malformed state JSON: {exc}") from exc
    if arr.shape != shape:
        raise StateSpecError(f"state JSON has shape {arr.shape}, expected {shape}")
    return arr


def fmt(x) -> str:
    """17-significant-digit text for floats; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return ""
        return "%.17g" % x
    return str(x)


def write_csv(path: Path, header, rows) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def write_json(path: Path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, tuple)):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


@dataclass
class RunManifest:
    subcommand: str
    params: dict
    seeds: list
    version: str
    dims: dict
    outputs: list = field(default_factory=list)
    duration_s: float = 0.0

    def write(self, out_dir: Path) -> Path:
        return write_json(Path(out_dir) / "manifest.json", asdict(self))
