"""Periodic structured-grid storage and cell-centred differential operators.

Index convention: ``values[i, j]`` with ``i`` along x and ``j`` along y.
Cell ``(i, j)`` is centred at ``((i + 1/2) h, (j + 1/2) h)``; the x-face with
index ``k`` sits at ``x = k h`` (left face of cell ``k``), likewise for y.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lattice import D2Q9, LatticeD2Q9

MIN_CELLS = 5
NORMAL_EPS = 1e-12


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    h: float = 1.0
    periodic: bool = True

    def __post_init__(self):
        if self.nx < MIN_CELLS or self.ny < MIN_CELLS:
            raise ValueError(
                f"grid {self.nx}x{self.ny} is smaller than the {MIN_CELLS}-cell stencil"
            )
        if self.h <= 0:
            raise ValueError("cell size must be positive")
        if not self.periodic:
            raise ValueError("only periodic grids are supported")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def lx(self) -> float:
        return self.nx * self.h

    @property
    def ly(self) -> float:
        return self.ny * self.h

    def cell_centers(self):
        x = (np.arange(self.nx) + 0.5) * self.h
        y = (np.arange(self.ny) + 0.5) * self.h
        return np.meshgrid(x, y, indexing="ij")

    def xface_centers(self):
        x = np.arange(self.nx) * self.h
        y = (np.arange(self.ny) + 0.5) * self.h
        return np.meshgrid(x, y, indexing="ij")

    def yface_centers(self):
        x = (np.arange(self.nx) + 0.5) * self.h
        y = np.arange(self.ny) * self.h
        return np.meshgrid(x, y, indexing="ij")


def _check(values, expected_shape, name):
    values = np.asarray(values, dtype=np.float64)
    if values.shape != expected_shape:
        raise ValueError(f"{name}: expected shape {expected_shape}, got {values.shape}")
    return values


@dataclass
class ScalarField:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = _check(self.values, self.grid.shape, "ScalarField")

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


@dataclass
class VectorField:
    """Components stored along the last axis: ``values[i, j] = (vx, vy)``."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = _check(self.values, self.grid.shape + (2,), "VectorField")

    @property
    def x(self) -> np.ndarray:
        return self.values[..., 0]

    @property
    def y(self) -> np.ndarray:
        return self.values[..., 1]

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


@dataclass
class DistField:
    """Nine populations per cell, stored velocity-major as ``values[a, i, j]``.

    Velocity-major keeps each population contiguous along y so the face
    stencils vectorise; ``per_cell()`` gives the ``(nx, ny, 9)`` view.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = _check(self.values, (9,) + self.grid.shape, "DistField")

    def per_cell(self) -> np.ndarray:
        return np.moveaxis(self.values, 0, -1)

    def moment0(self) -> ScalarField:
        return ScalarField(self.grid, self.values.sum(axis=0))

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.values).all())


def periodic_index(i: int, n: int) -> int:
    return i % n


def isotropic_gradient(phi: ScalarField, lattice: LatticeD2Q9 = D2Q9) -> VectorField:
    """Second-order isotropic gradient weighted by the D2Q9 set.

    grad(phi)(x) = 1/(cs2 h) * sum_a w_a e_a phi(x + e_a h)
    """
    v = phi.values
    g = np.zeros(v.shape + (2,))
    for a in range(1, 9):
        ex, ey = lattice.e[a]
        # np.roll by -e brings phi(x + e h) onto x
        shifted = np.roll(v, shift=(-ex, -ey), axis=(0, 1))
        g[..., 0] += lattice.weights[a] * ex * shifted
        g[..., 1] += lattice.weights[a] * ey * shifted
    # the stencil uses unit lattice vectors, so cs2 is taken for c = 1
    g /= phi.grid.h / 3.0
    return VectorField(phi.grid, g)


def central_gradient(phi: ScalarField) -> VectorField:
    """Plain second-order central differences, kept for sensitivity checks."""
    v = phi.values
    h = phi.grid.h
    gx = (np.roll(v, -1, 0) - np.roll(v, 1, 0)) / (2 * h)
    gy = (np.roll(v, -1, 1) - np.roll(v, 1, 1)) / (2 * h)
    return VectorField(phi.grid, np.stack([gx, gy], axis=-1))


def interface_normal(grad: VectorField, eps: float = NORMAL_EPS) -> VectorField:
    """n = grad / (|grad| + eps); vanishes smoothly where the gradient does."""
    den = np.sqrt(np.sum(grad.values**2, axis=-1, keepdims=True)) + eps
    # with eps = 0 a zero gradient would give 0/0; keep it at zero
    out = np.divide(grad.values, den, out=np.zeros_like(grad.values), where=den > 0)
    return VectorField(grad.grid, out)


def write_snapshot(field: ScalarField, time: float, path, binary: bool = False) -> Path:
    """Write ``nx ny h time`` followed by ``i,j,value`` rows.

    With ``binary=True`` the values go to ``<path>.bin`` (little-endian
    float64, x-major) and the header alone to ``<path>.hdr``.
    """
    path = Path(path)
    g = field.grid
    header = f"{g.nx} {g.ny} {g.h!r} {float(time)!r}"
    if binary:
        field.values.astype("<f8").tofile(path.with_suffix(".bin"))
        hdr = path.with_suffix(".hdr")
        hdr.write_text(header + "\n")
        return hdr
    i, j = np.meshgrid(np.arange(g.nx), np.arange(g.ny), indexing="ij")
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for ii, jj, v in zip(i.ravel(), j.ravel(), field.values.ravel()):
            fh.write(f"{ii},{jj},{float(v)!r}\n")
    return path


def read_snapshot(path) -> tuple[ScalarField, float]:
    path = Path(path)
    if path.suffix == ".hdr":
        nx, ny, h, t = path.read_text().split()
        grid = Grid2D(int(nx), int(ny), float(h))
        data = np.fromfile(path.with_suffix(".bin"), dtype="<f8").reshape(grid.shape)
        return ScalarField(grid, data), float(t)
    with open(path) as fh:
        nx, ny, h, t = fh.readline().split()
        grid = Grid2D(int(nx), int(ny), float(h))
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    values = np.empty(grid.shape)
    values[rows[:, 0].astype(int), rows[:, 1].astype(int)] = rows[:, 2]
    return ScalarField(grid, values), float(t)
