"""CSV/JSON writers. Every file is written atomically (temp file + rename)."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path

import numpy as np


def write_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "" if value is None else str(value)


def csv_text(header, rows, digest: str, comments=()) -> str:
    """CSV body preceded by ``#`` comment lines carrying the config digest."""
    buf = io.StringIO()
    buf.write(f"# config_digest={digest}\n")
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows, digest: str, comments=()) -> Path:
    return write_atomic(path, csv_text(header, rows, digest, comments))


def write_residual_curve(path, t, y, y_hat, digest):
    rows = zip(t, y, y_hat, np.asarray(y) - np.asarray(y_hat))
    return write_csv(path, ["t", "y", "y_hat", "residual"], rows, digest)


def write_kernels(out_dir, expansion, digest, k1_points=200, k2_points=100):
    """Identified kernels on uniform grids; the second-order kernel uses the symmetrized coefficients."""
    out_dir = Path(out_dir)
    T = expansion.basis.T
    s = np.linspace(0.0, T, k1_points)
    p1 = write_csv(out_dir / "kernel_k1.csv", ["s", "k1"], zip(s, expansion.k1(s)), digest)
    g = np.linspace(0.0, T, k2_points)
    k2 = expansion.k2(g[:, None], g[None, :])
    rows = ((g[i], g[j], k2[i, j]) for i in range(k2_points) for j in range(k2_points))
    p2 = write_csv(out_dir / "kernel_k2.csv", ["s1", "s2", "k2"], rows, digest)
    return p1, p2


def write_system(out_dir, system, digest):
    out_dir = Path(out_dir)
    labels = system.column_labels()
    mrows = ([t, *row] for t, row in zip(system.grid.nodes, system.matrix))
    p1 = write_csv(out_dir / "matrix.csv", ["t", *labels], mrows, digest,
                   [f"grid={system.grid.scheme.value}", "m,m1,m2=" + ",".join(map(str, system.sizes))])
    p2 = write_csv(out_dir / "rhs.csv", ["t", "y"], zip(system.grid.nodes, system.rhs), digest)
    return p1, p2
