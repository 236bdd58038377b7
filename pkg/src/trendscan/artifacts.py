"""Deterministic file output helpers.

Every artifact this package writes goes through these functions: floats
are always rendered with 17 significant digits (full double round-trip),
JSON key order follows construction order, and line endings are fixed, so
re-running an analysis with the same inputs produces byte-identical
files.
"""
from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

__all__ = ["fmt_float", "json_dumps", "write_json", "read_json",
           "sha256_file", "write_csv"]


def fmt_float(x) -> str:
    """Render a finite float with 17 significant digits."""
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x}")
    return format(x, ".17g")


def _render(obj, pieces: list[str], indent: int) -> None:
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            pieces.append("{}")
            return
        pieces.append("{\n")
        for i, (k, v) in enumerate(obj.items()):
            pieces.append(f"{pad}  {json.dumps(str(k))}: ")
            _render(v, pieces, indent + 1)
            pieces.append(",\n" if i < len(obj) - 1 else "\n")
        pieces.append(pad + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            pieces.append("[]")
            return
        pieces.append("[\n")
        for i, v in enumerate(seq):
            pieces.append(pad + "  ")
            _render(v, pieces, indent + 1)
            pieces.append(",\n" if i < len(seq) - 1 else "\n")
        pieces.append(pad + "]")
    elif isinstance(obj, bool) or obj is None:
        pieces.append(json.dumps(obj))
    elif isinstance(obj, (int, np.integer)):
        pieces.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        pieces.append(fmt_float(obj))
    elif isinstance(obj, (str, np.str_)):
        pieces.append(json.dumps(str(obj)))
    elif isinstance(obj, np.datetime64):
        pieces.append(json.dumps(str(obj)))
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__} to JSON")


def json_dumps(obj) -> str:
    """JSON text with floats at 17 significant digits."""
    pieces: list[str] = []
    _render(obj, pieces, 0)
    return "".join(pieces)


def write_json(path, obj) -> None:
    Path(path).write_text(json_dumps(obj) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_csv(path, header: list[str], rows) -> None:
    """CSV with \\n line endings; floats via fmt_float, other cells via str."""
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, (float, np.floating)):
                cells.append(fmt_float(cell))
            elif cell is None:
                cells.append("")
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
