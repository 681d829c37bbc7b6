"""Plain-text emission of fields, tables, and trajectories.

Floats are written with 17 significant digits so every double round-trips
exactly; all writers emit rows in a fixed order, which makes outputs
byte-reproducible for a fixed config and seed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .grid import GridSpec
from .model import RealField
from .dynamics import TrajectoryRecord


def fmt(x) -> str:
    return f"{float(x):.17g}"


def write_field(path, grid: GridSpec, columns: dict[str, np.ndarray]):
    """Field file: a key-value header (kind, n, R, M, components), one row per
    cell with the node coordinate followed by the component values."""
    names = list(columns)
    lines = [f"kind={grid.kind} n={grid.dimension} R={fmt(grid.extent)} "
             f"M={grid.cells} components={len(names)} names={','.join(names)}"]
    data = [np.asarray(columns[name], dtype=float) for name in names]
    for i in range(grid.cells):
        row = [fmt(grid.nodes[i])] + [fmt(col[i]) for col in data]
        lines.append(" ".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_field(path) -> tuple[GridSpec, dict[str, np.ndarray]]:
    """Inverse of write_field; rebuilds the grid from the header."""
    lines = Path(path).read_text().strip().splitlines()
    header = dict(item.split("=", 1) for item in lines[0].split())
    grid = GridSpec.from_record({"kind": header["kind"], "n": header["n"],
                                 "R": header["R"], "M": header["M"]})
    names = header["names"].split(",")
    body = np.array([[float(tok) for tok in line.split()] for line in lines[1:]])
    if body.shape != (grid.cells, len(names) + 1):
        raise ValueError("field file body does not match its header")
    return grid, {name: body[:, j + 1].copy() for j, name in enumerate(names)}


def write_real_field(path, field: RealField):
    write_field(path, field.grid, {"u1": field.u1, "u2": field.u2})


def read_real_field(path) -> RealField:
    grid, cols = read_field(path)
    return RealField(grid, cols["u1"], cols["u2"])


def write_csv(path, header: list[str], rows):
    """CSV with %.17g numeric formatting; non-floats are written via str()."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, (int, float, np.floating)) else str(v)
                              for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def write_trajectory(path, record: TrajectoryRecord):
    rows = zip(record.times, record.energy, record.charge1, record.charge2,
               record.dist, record.lyapunov)
    write_csv(path, ["t", "E", "C1", "C2", "dist", "V"], rows)
