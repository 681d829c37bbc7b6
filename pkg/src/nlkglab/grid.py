"""Cell-centered grids on a segment or a radial ball, with quadrature and difference operators.

Two geometries are supported: a uniform line grid on [-R, R] and a radial
grid on [0, R] representing a ball in R^n (n >= 3).  Nodes sit at cell
centers, staggered off r = 0, so the radial Laplacian never touches the
coordinate singularity.  Fields are implicitly extended by zero outside the
outer boundary (homogeneous Dirichlet) and by even reflection across r = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LINE = "line"
RADIAL = "radial"


def sphere_area(n: int) -> float:
    """Area of the unit sphere in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


@dataclass(eq=False)
class GridSpec:
    """Uniform cell-centered grid with midpoint quadrature weights.

    Attributes
    ----------
    kind : "line" or "radial"
    dimension : ambient dimension (1 for line grids, n >= 3 for radial)
    extent : half-width of the segment, or ball radius
    cells : number of cells M
    spacing : cell width h (2R/M for line, R/M for radial)
    nodes : cell-center coordinates, shape (M,)
    weights : per-cell quadrature measures, all positive, shape (M,)
    face_areas : cross-section measure at the M+1 cell interfaces
    """

    kind: str
    dimension: int
    extent: float
    cells: int
    spacing: float
    nodes: np.ndarray
    weights: np.ndarray
    face_areas: np.ndarray

    def to_record(self) -> dict:
        """Flat key-value description, sufficient to rebuild the grid."""
        return {"kind": self.kind, "n": self.dimension, "R": self.extent, "M": self.cells}

    @staticmethod
    def from_record(record: dict) -> "GridSpec":
        return build_grid(str(record["kind"]), int(record["n"]),
                          float(record["R"]), int(record["M"]))


def same_grid(a: GridSpec, b: GridSpec) -> bool:
    return (a.kind == b.kind and a.dimension == b.dimension
            and a.extent == b.extent and a.cells == b.cells)


def build_grid(kind: str, dimension: int, extent: float, cells: int) -> GridSpec:
    """Construct a GridSpec.

    Raises ValueError for non-positive extent, cells < 8, a radial dimension
    below 3, or a line dimension other than 1.
    """
    if extent <= 0:
        raise ValueError(f"extent must be positive, got {extent}")
    if cells < 8:
        raise ValueError(f"need at least 8 cells, got {cells}")
    if kind == LINE:
        if dimension != 1:
            raise ValueError("line grids are one-dimensional")
        h = 2.0 * extent / cells
        nodes = (np.arange(cells) + 0.5) * h - extent
        weights = np.full(cells, h)
        face_areas = np.ones(cells + 1)
    elif kind == RADIAL:
        if dimension < 3:
            raise ValueError(f"radial grids require dimension >= 3, got {dimension}")
        h = extent / cells
        nodes = (np.arange(cells) + 0.5) * h
        sigma = sphere_area(dimension)
        weights = sigma * nodes ** (dimension - 1) * h
        face_areas = sigma * (np.arange(cells + 1) * h) ** (dimension - 1)
    else:
        raise ValueError(f"unknown grid kind {kind!r}")
    return GridSpec(kind=kind, dimension=dimension, extent=float(extent), cells=cells,
                    spacing=h, nodes=nodes, weights=weights, face_areas=face_areas)


def _check_length(grid: GridSpec, samples: np.ndarray) -> np.ndarray:
    samples = np.asarray(samples)
    if samples.shape != (grid.cells,):
        raise ValueError(f"expected {grid.cells} samples, got shape {samples.shape}")
    return samples


def quadrature(grid: GridSpec, samples: np.ndarray):
    """Midpoint-rule integral sum_i f_i * weight_i."""
    samples = _check_length(grid, samples)
    return np.dot(grid.weights, samples)


def _face_differences(grid: GridSpec, samples: np.ndarray) -> np.ndarray:
    """Differences u_k - u_{k-1} across the M+1 faces, zero-extended outside.

    For radial grids the inner face uses even reflection across r = 0, so its
    difference vanishes (the face area there is zero anyway for n >= 3).
    """
    left = samples[0] if grid.kind == RADIAL else 0.0
    padded = np.concatenate(([left], samples, [0.0]))
    return np.diff(padded)


def apply_laplacian(grid: GridSpec, samples: np.ndarray) -> np.ndarray:
    """Second-order conservative Laplacian at cell centers.

    Line grids: the standard centered second difference.  Radial grids:
    flux form of u'' + ((n-1)/r) u', with face areas sigma * r_face^(n-1).
    Dirichlet (zero extension) at the outer boundary.
    """
    samples = _check_length(grid, samples)
    d = _face_differences(grid, samples)
    flux = grid.face_areas * d / grid.spacing
    return np.diff(flux) / grid.weights


def dirichlet_energy(grid: GridSpec, samples: np.ndarray) -> float:
    """Gradient energy sum over faces of |u_k - u_{k-1}|^2 / h^2 * face measure.

    Exactly compatible with apply_laplacian by summation by parts:
    <-Lap(u), u>_quadrature == dirichlet_energy(u) for every field.
    The field must be supported inside the grid; a boundary-cell value above
    an h-scaled fraction of the field's amplitude raises ValueError.
    """
    samples = _check_length(grid, samples)
    amp = float(np.max(np.abs(samples))) if samples.size else 0.0
    tol = 10.0 * grid.spacing / grid.extent * amp
    boundary = [samples[-1]] if grid.kind == RADIAL else [samples[0], samples[-1]]
    for value in boundary:
        if abs(value) > tol:
            raise ValueError("support violation: field does not vanish at the outer boundary")
    d = _face_differences(grid, samples)
    return float(np.dot(grid.face_areas, np.abs(d) ** 2) / grid.spacing)


def gradient_pairing(grid: GridSpec, f: np.ndarray, g: np.ndarray):
    """Bilinear form sum over faces of (df)(conj dg) / h; gradient_pairing(f, f)
    reproduces dirichlet_energy without the support check."""
    df = _face_differences(grid, _check_length(grid, f))
    dg = _face_differences(grid, _check_length(grid, g))
    return np.dot(grid.face_areas, df * np.conj(dg)) / grid.spacing


def laplacian_bands(grid: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tridiagonal bands (sub, diag, sup) of -Laplacian with Dirichlet closure.

    sub[i] multiplies u_{i-1} (sub[0] is unused), sup[i] multiplies u_{i+1}
    (sup[-1] is unused).
    """
    h = grid.spacing
    s_lo = grid.face_areas[:-1].copy()
    s_hi = grid.face_areas[1:].copy()
    if grid.kind == LINE:
        s_lo[0] = 1.0  # zero extension past the left boundary face
    denom = h * grid.weights
    diag = (s_lo + s_hi) / denom
    sub = np.zeros(grid.cells)
    sup = np.zeros(grid.cells)
    sub[1:] = -s_lo[1:] / denom[1:]
    sup[:-1] = -s_hi[:-1] / denom[:-1]
    return sub, diag, sup
