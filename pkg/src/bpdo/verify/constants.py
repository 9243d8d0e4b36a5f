"""Frozen constants table.

Each implicit constant is measured once on a deterministic ensemble,
multiplied by a headroom factor and stored in ``data/constants.json``.
Later runs compare fresh measurements against the stored bounds.  The
environment variable ``BPDO_CONSTANTS_PATH`` points at an alternative table.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Mapping, Optional

__all__ = ["TABLE_VERSION", "HEADROOM", "constants_path", "load_constants", "get_constant", "write_constants"]

TABLE_VERSION = 1
HEADROOM = 1.25
ENV_VAR = "BPDO_CONSTANTS_PATH"
_DEFAULT = Path(__file__).resolve().parent.parent / "data" / "constants.json"


def constants_path() -> Path:
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else _DEFAULT


def load_constants(path: Optional[os.PathLike] = None) -> dict:
    """Return the table as ``{"version", "headroom", "constants", "measured"}``."""
    p = Path(path) if path is not None else constants_path()
    if not p.exists():
        return {"version": TABLE_VERSION, "headroom": HEADROOM, "constants": {}, "measured": {}}
    with open(p) as fh:
        table = json.load(fh)
    if table.get("version") != TABLE_VERSION:
        raise ValueError(f"constants table {p} has version {table.get('version')}, expected {TABLE_VERSION}")
    return table


def get_constant(name: str, table: Optional[Mapping] = None) -> float:
    table = load_constants() if table is None else table
    try:
        return float(table["constants"][name])
    except KeyError:
        raise KeyError(f"constant {name!r} is not frozen; run the freeze script") from None


def write_constants(constants: Mapping[str, float], measured: Mapping[str, float],
                    path: Optional[os.PathLike] = None, notes: Optional[Mapping[str, str]] = None) -> Path:
    p = Path(path) if path is not None else constants_path()
    p.parent.mkdir(parents=True, exist_ok=True)
    table = {
        "version": TABLE_VERSION,
        "headroom": HEADROOM,
        "constants": {k: float(constants[k]) for k in sorted(constants)},
        "measured": {k: float(measured[k]) for k in sorted(measured)},
        "notes": dict(sorted((notes or {}).items())),
    }
    with open(p, "w") as fh:
        json.dump(table, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return p
