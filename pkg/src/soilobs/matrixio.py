"""Coordinate-list matrix dumps and the plain-text report.

A dump holds any number of named dense matrices.  Each block starts with a
header line ``%matrix <name> <rows> <cols> <nnz>`` followed by ``nnz`` lines
``<row> <col> <value>`` with 1-based indices and 17 significant digits.
Zero entries are omitted.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

HEADER = "%%soilobs coordinate dump"


def dump_matrices(path, matrices: dict) -> None:
    lines = [HEADER]
    for name, M in matrices.items():
        M = np.atleast_2d(np.asarray(M, dtype=float))
        if M.ndim != 2:
            raise ValueError(f"{name}: only 2-D arrays can be dumped")
        if any(c.isspace() for c in name):
            raise ValueError(f"matrix name {name!r} contains whitespace")
        rows, cols = np.nonzero(M)
        lines.append(f"%matrix {name} {M.shape[0]} {M.shape[1]} {rows.size}")
        lines.extend(f"{i + 1} {j + 1} {M[i, j]:.17g}" for i, j in zip(rows, cols))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_matrices(path) -> dict:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != HEADER:
        raise ConfigError(f"{path}: not a matrix dump")
    out = {}
    pos = 1
    while pos < len(lines):
        head = lines[pos].split()
        if len(head) != 5 or head[0] != "%matrix":
            raise ConfigError(f"{path}:{pos + 1}: expected a %matrix header")
        name, r, c, nnz = head[1], int(head[2]), int(head[3]), int(head[4])
        M = np.zeros((r, c))
        for line in lines[pos + 1:pos + 1 + nnz]:
            i, j, v = line.split()
            M[int(i) - 1, int(j) - 1] = float(v)
        out[name] = M
        pos += 1 + nnz
    return out


def format_value(v) -> str:
    """Shortest round-trip text for report values."""
    if v is None:
        return "none"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, complex):
        return f"{v.real!r}{v.imag:+}j"
    if isinstance(v, (tuple, list)):
        return ", ".join(format_value(x) for x in v)
    return str(v)


def write_report(path, sections: dict) -> None:
    """``sections`` maps a section title to an ordered ``{key: value}`` dict."""
    lines = []
    for title, items in sections.items():
        lines.append(f"[{title}]")
        lines.extend(f"{k} = {format_value(v)}" for k, v in items.items())
        lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines))


def read_report(path) -> dict:
    sections, current = {}, None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = sections.setdefault(line[1:-1], {})
            elif current is not None and " = " in line:
                k, v = line.split(" = ", 1)
                current[k] = v
    return sections
