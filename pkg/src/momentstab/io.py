"""File formats: matrices as CSV, configs and reports as JSON.

Every artifact carries a metadata block (tool name, version, SHA-256 of the
canonical configuration). No timestamps are written, so identical inputs
give byte-identical files.
"""

import csv
import hashlib
import json
import os
from typing import Iterable, Optional

import numpy as np

from .errors import ConfigError

TOOL = "momentstab"


def _version() -> str:
    from . import __version__

    return __version__


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default)


def config_hash(config: Optional[dict]) -> str:
    """SHA-256 of the canonical config; keys starting with ``_`` are local bookkeeping and skipped."""
    public = {k: v for k, v in (config or {}).items() if not k.startswith("_")}
    return hashlib.sha256(canonical_json(public).encode("utf-8")).hexdigest()


def metadata(config: Optional[dict]) -> dict:
    return {"tool": TOOL, "version": _version(), "config_sha256": config_hash(config)}


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _clean(o):
    """Replace non-finite floats by strings so the output stays valid JSON."""
    if isinstance(o, dict):
        return {k: _clean(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_clean(v) for v in o]
    if isinstance(o, (float, np.floating)) and not np.isfinite(o):
        return str(float(o))
    return o


def dumps(obj, config: Optional[dict] = None) -> str:
    payload = {"meta": metadata(config), **json.loads(json.dumps(obj, default=_default))}
    return json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n"


def write_json(path: str, obj, config: Optional[dict] = None) -> str:
    text = dumps(obj, config)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return path


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return x


def write_csv(path: str, columns: Iterable[str], rows: Iterable, config: Optional[dict] = None) -> str:
    """CSV with ``# key: value`` metadata lines ahead of the header row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for k, v in metadata(config).items():
            fh.write(f"# {k}: {v}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(columns))
        for r in rows:
            w.writerow([_fmt(x) for x in r])
    return path


def read_csv_rows(path: str):
    """Header and rows of a CSV written by :func:`write_csv` (metadata skipped)."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    return header, [r for r in reader]


def read_matrix_csv(path: str) -> np.ndarray:
    """One matrix row per line, no header; ``#`` comment lines ignored."""
    try:
        with open(path, encoding="utf-8") as fh:
            rows = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
        A = np.array([[float(x) for x in r.split(",")] for r in rows])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read matrix from {path}: {exc}") from exc
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigError(f"matrix in {path} is not square")
    return A


def write_matrix_csv(path: str, A) -> str:
    with open(path, "w", encoding="utf-8") as fh:
        for row in np.asarray(A, dtype=float):
            fh.write(",".join(repr(float(x)) for x in row) + "\n")
    return path


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    cfg.setdefault("_base_dir", os.path.dirname(os.path.abspath(path)))
    return cfg
