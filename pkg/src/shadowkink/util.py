"""Small shared helpers: sign-change counting, deterministic file output."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

SIGN_TOL = 1e-12


def sign_changes(values, nodes=None, ztol: float = SIGN_TOL):
    """Count strict sign alternations of ``values``, ignoring near-zero entries.

    Entries with ``|v| < ztol`` carry no sign (tail noise must not create
    crossings).  Returns ``(count, zero)`` where ``zero`` is the linearly
    interpolated crossing location if there is exactly one change and
    ``nodes`` was given, else None.
    """
    v = np.asarray(values, dtype=float)
    nz = np.nonzero(np.abs(v) >= ztol)[0]
    if nz.size < 2:
        return 0, None
    s = np.sign(v[nz])
    flips = np.nonzero(np.diff(s) != 0)[0]
    count = int(flips.size)
    zero = None
    if count == 1 and nodes is not None:
        i, j = nz[flips[0]], nz[flips[0] + 1]
        x = np.asarray(nodes, dtype=float)
        zero = float(x[i] - v[i] * (x[j] - x[i]) / (v[j] - v[i]))
    return count, zero


def fnum(x: float) -> str:
    """Compact float format used in output file names."""
    return format(float(x), "g")


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path, header, columns) -> Path:
    """Write columns in full-precision scientific notation (17 significant digits)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    cols = [np.asarray(c, dtype=float) for c in columns]
    lines = [",".join(header)]
    for row in zip(*cols):
        lines.append(",".join("%.17e" % x for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path
