"""Report serialization: JSON with 17 significant digits and an isolated header.

Every report is ``{"header": {...}, "body": {...}}``. Only the header
carries run metadata that changes between identical runs (the
timestamp), so bodies are byte-identical for a fixed config and seed.
"""

from __future__ import annotations

import datetime
import json
import math
import re
from importlib import metadata

import numpy as np

_TOKEN = "\u0000f17:"
# json.dumps escapes the NUL in the token, so match its escaped spelling
_TOKEN_RE = re.compile(r'"\\u0000f17:([^"]*)"')


def _prepare(obj):
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return bool(obj) if obj is not None else None
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return _TOKEN + format(x, ".17g")
    if isinstance(obj, complex):
        return [_prepare(obj.real), _prepare(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): _prepare(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_prepare(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _prepare(obj.tolist())
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def dumps17(obj, indent: int | None = 2) -> str:
    """JSON text with every float written as ``%.17g``; NaN and inf become null."""
    text = json.dumps(_prepare(obj), indent=indent, sort_keys=False, ensure_ascii=True)
    return _TOKEN_RE.sub(lambda m: m.group(1), text)


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def make_header(command: str) -> dict:
    return {
        "tool": "djcsim",
        "version": _version(),
        "command": command,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
    }


def write_report(path, command: str, body: dict) -> None:
    with open(path, "w") as fh:
        fh.write(dumps17({"header": make_header(command), "body": body}))
        fh.write("\n")


def read_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
