"""Densities on uniform grids, cube partitions and radial profiles.

All quadrature is the midpoint rule: a grid with origin ``a`` and spacing
``h`` has cells ``[a + i h, a + (i+1) h)`` whose centres carry the samples,
so step functions on cubes aligned with the grid are integrated exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatchError, ToleranceNotMetError, ValidationError

_ALIGN_EPS = 1e-9


def unit_sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


# ---------------------------------------------------------------------------
# uniform grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Grid:
    origin: tuple
    spacing: float
    extents: tuple

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "extents", tuple(int(n) for n in self.extents))
        if len(self.origin) != len(self.extents):
            raise DimensionMismatchError("origin and extents differ in length")
        if not self.spacing > 0:
            raise ValidationError("grid spacing must be positive")
        if any(n < 1 for n in self.extents):
            raise ValidationError("grid extents must be positive")

    @property
    def dimension(self) -> int:
        return len(self.extents)

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dimension

    @property
    def upper(self) -> tuple:
        return tuple(o + n * self.spacing for o, n in zip(self.origin, self.extents))

    def axes(self) -> list[np.ndarray]:
        """Cell-centre coordinates along each axis."""
        return [o + (np.arange(n) + 0.5) * self.spacing for o, n in zip(self.origin, self.extents)]

    def nodes(self) -> np.ndarray:
        """Cell centres as an array of shape ``extents + (d,)``."""
        return np.stack(np.meshgrid(*self.axes(), indexing="ij"), axis=-1)

    def refine(self, factor: int) -> "Grid":
        return Grid(self.origin, self.spacing / factor, tuple(n * factor for n in self.extents))

    @classmethod
    def covering(cls, lower: Sequence[float], upper: Sequence[float], spacing: float) -> "Grid":
        """Smallest grid with the given spacing whose box starts at ``lower`` and reaches ``upper``."""
        lower = tuple(float(x) for x in lower)
        ext = tuple(max(1, int(math.ceil((u - l) / spacing - _ALIGN_EPS))) for l, u in zip(lower, upper))
        return cls(lower, spacing, ext)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Nonnegative samples on a uniform grid (cell centres)."""

    origin: tuple
    spacing: float
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        object.__setattr__(self, "origin", tuple(float(o) for o in np.atleast_1d(self.origin)))
        if values.ndim != len(self.origin):
            raise DimensionMismatchError(
                f"values have rank {values.ndim} but origin has {len(self.origin)} entries"
            )
        if not self.spacing > 0:
            raise ValidationError("grid spacing must be positive")
        if not np.all(np.isfinite(values)):
            raise ValidationError("density values must be finite")
        if np.any(values < 0):
            raise ValidationError("density values must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dimension(self) -> int:
        return self.values.ndim

    @property
    def extents(self) -> tuple:
        return self.values.shape

    @property
    def grid(self) -> Grid:
        return Grid(self.origin, self.spacing, self.extents)

    def mass(self) -> float:
        return float(self.values.sum() * self.spacing**self.dimension)

    def scaled(self, factor: float) -> "GridDensity":
        return GridDensity(self.origin, self.spacing, self.values * factor)

    @classmethod
    def from_function(cls, func: Callable, lower, upper, n) -> "GridDensity":
        """Sample ``func`` at cell centres of a grid on the box [lower, upper].

        ``func`` receives the coordinate arrays (one per axis, broadcast
        against each other) and the box must be a cube.
        """
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        d = lower.size
        n = np.broadcast_to(np.atleast_1d(n), (d,)).astype(int)
        spacing = (upper[0] - lower[0]) / n[0]
        if not np.allclose((upper - lower) / n, spacing, rtol=1e-12):
            raise ValidationError("sampling box must give equal spacing on every axis")
        grid = Grid(tuple(lower), spacing, tuple(n))
        return cls(grid.origin, spacing, np.asarray(func(*np.meshgrid(*grid.axes(), indexing="ij")), dtype=float))

    def resample(self, grid: Grid) -> "GridDensity":
        """Piecewise-constant evaluation at the cell centres of another grid."""
        _check_dim(self.dimension, grid.dimension)
        idx = []
        for ax, o in zip(grid.axes(), self.origin):
            i = np.floor((ax - o) / self.spacing).astype(np.int64)
            idx.append(i)
        out = np.zeros(grid.extents)
        masks = [(i >= 0) & (i < n) for i, n in zip(idx, self.extents)]
        sub = tuple(np.ix_(*[i[m] for i, m in zip(idx, masks)]))
        target = tuple(np.ix_(*[np.nonzero(m)[0] for m in masks]))
        if all(m.any() for m in masks):
            out[target] = self.values[sub]
        return GridDensity(grid.origin, grid.spacing, out)

    def evaluate(self, points) -> np.ndarray:
        """Piecewise-constant value at arbitrary points of shape (..., d)."""
        pts = np.asarray(points, dtype=float)
        if self.dimension == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        idx = np.floor((pts - np.asarray(self.origin)) / self.spacing).astype(np.int64)
        inside = np.all((idx >= 0) & (idx < np.asarray(self.extents)), axis=-1)
        out = np.zeros(pts.shape[:-1])
        sel = idx[inside]
        out[inside] = self.values[tuple(sel.T)]
        return out

    # -- serialization -----------------------------------------------------

    def to_csv(self, path) -> None:
        d = self.dimension
        nodes = self.grid.nodes().reshape(-1, d)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([f"x{i + 1}" for i in range(d)] + ["value"])
            for x, v in zip(nodes, self.values.ravel()):
                writer.writerow([repr(float(c)) for c in x] + [repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "GridDensity":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = np.array([[float(c) for c in row] for row in reader])
        d = len(header) - 1
        coords = rows[:, :d]
        axes = [np.unique(coords[:, i]) for i in range(d)]
        spacing = float(axes[0][-1] - axes[0][0]) / (axes[0].size - 1) if axes[0].size > 1 else 1.0
        origin = tuple(a[0] - spacing / 2 for a in axes)
        values = rows[:, d].reshape(tuple(a.size for a in axes))
        return cls(origin, spacing, values)


# ---------------------------------------------------------------------------
# cubes and step densities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cube:
    corner: tuple
    side: float

    def __post_init__(self):
        object.__setattr__(self, "corner", tuple(float(c) for c in np.atleast_1d(self.corner)))
        if not self.side > 0:
            raise ValidationError("cube side must be positive")

    @property
    def dimension(self) -> int:
        return len(self.corner)

    @property
    def volume(self) -> float:
        return self.side**self.dimension

    @property
    def upper(self) -> tuple:
        return tuple(c + self.side for c in self.corner)

    def cell_slices(self, grid: Grid) -> tuple:
        """Index slices of the grid cells whose centres lie in this cube."""
        out = []
        for c, o, n in zip(self.corner, grid.origin, grid.extents):
            lo = math.ceil((c - o) / grid.spacing - 0.5 - _ALIGN_EPS)
            hi = math.ceil((c + self.side - o) / grid.spacing - 0.5 - _ALIGN_EPS)
            out.append(slice(min(max(lo, 0), n), min(max(hi, 0), n)))
        return tuple(out)


@dataclass(frozen=True)
class CubePartition:
    dimension: int
    cubes: tuple

    def __post_init__(self):
        cubes = tuple(c if isinstance(c, Cube) else Cube(*c) for c in self.cubes)
        object.__setattr__(self, "cubes", cubes)
        if any(c.dimension != self.dimension for c in cubes):
            raise DimensionMismatchError("cube dimension differs from partition dimension")
        if len(cubes) > 1:
            lo = np.array([c.corner for c in cubes])
            hi = lo + np.array([c.side for c in cubes])[:, None]
            tol = _ALIGN_EPS * np.max(hi - lo)
            for start in range(0, len(cubes), 256):
                a_lo, a_hi = lo[start:start + 256, None, :], hi[start:start + 256, None, :]
                overlap = np.all((a_lo < hi[None] - tol) & (lo[None] < a_hi - tol), axis=-1)
                rows = np.arange(overlap.shape[0])
                overlap[rows, rows + start] = False
                if overlap.any():
                    i, j = np.argwhere(overlap)[0]
                    raise ValidationError(f"cubes {i + start} and {j} overlap")

    def __len__(self):
        return len(self.cubes)

    def bounding_box(self) -> tuple:
        lo = np.min([c.corner for c in self.cubes], axis=0)
        hi = np.max([c.upper for c in self.cubes], axis=0)
        return tuple(lo), tuple(hi)


@dataclass(frozen=True, eq=False)
class StepDensity:
    """sum_Q level_Q 1_Q on a partition.

    ``error`` is filled in by :func:`step_approximate` (combined L^1 + L^p
    distance to the approximated density) and is ``None`` otherwise.
    """

    partition: CubePartition
    levels: np.ndarray
    error: float | None = field(default=None, compare=False)

    def __post_init__(self):
        levels = np.array(self.levels, dtype=np.float64).reshape(-1)
        if levels.size != len(self.partition):
            raise ValidationError("one level per cube is required")
        if np.any(levels < 0) or not np.all(np.isfinite(levels)):
            raise ValidationError("step levels must be finite and nonnegative")
        levels.setflags(write=False)
        object.__setattr__(self, "levels", levels)

    @property
    def dimension(self) -> int:
        return self.partition.dimension

    @property
    def cubes(self) -> tuple:
        return self.partition.cubes

    def mass(self) -> float:
        vols = np.array([c.volume for c in self.cubes])
        return float(np.dot(self.levels, vols))

    def on_grid(self, grid: Grid) -> GridDensity:
        _check_dim(self.dimension, grid.dimension)
        out = np.zeros(grid.extents)
        for cube, level in zip(self.cubes, self.levels):
            out[cube.cell_slices(grid)] = level
        return GridDensity(grid.origin, grid.spacing, out)

    def evaluate(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if self.dimension == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        out = np.zeros(pts.shape[:-1])
        for cube, level in zip(self.cubes, self.levels):
            lo = np.asarray(cube.corner)
            inside = np.all((pts >= lo) & (pts < lo + cube.side), axis=-1)
            out[inside] = level
        return out

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "cubes": [
                {"corner": list(c.corner), "side": c.side, "level": float(v)}
                for c, v in zip(self.cubes, self.levels)
            ],
        }

    @classmethod
    def from_json(cls, doc) -> "StepDensity":
        if isinstance(doc, str):
            doc = json.loads(doc)
        cubes = [Cube(c["corner"], c["side"]) for c in doc["cubes"]]
        levels = [c["level"] for c in doc["cubes"]]
        return cls(CubePartition(int(doc["dimension"]), tuple(cubes)), levels)


# ---------------------------------------------------------------------------
# radial profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """Radially symmetric density in R^d sampled at quadrature nodes in r.

    ``weights`` integrate functions of r on [0, R] (no shell factor), so
    ``mass = sum w_i |S^{d-1}| r_i^{d-1} f_i``.
    """

    dimension: int
    radii: np.ndarray
    weights: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for name in ("radii", "weights", "values"):
            arr = np.array(getattr(self, name), dtype=np.float64).reshape(-1)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (self.radii.size == self.weights.size == self.values.size):
            raise ValidationError("radii, weights and values must have equal length")
        if np.any(self.values < 0):
            raise ValidationError("density values must be nonnegative")

    @property
    def shell_weights(self) -> np.ndarray:
        """Volume weights: w_i |S^{d-1}| r_i^{d-1}."""
        return self.weights * unit_sphere_area(self.dimension) * self.radii ** (self.dimension - 1)

    @property
    def radius(self) -> float:
        return float(self.radii[-1] + 0.5 * (self.radii[-1] - self.radii[-2]))

    def mass(self) -> float:
        return float(np.dot(self.shell_weights, self.values))

    def with_values(self, values) -> "RadialDensity":
        return RadialDensity(self.dimension, self.radii, self.weights, values)

    def scaled(self, factor: float) -> "RadialDensity":
        return self.with_values(self.values * factor)

    @staticmethod
    def nodes(R: float, n: int, mapping: str = "sqrt") -> tuple[np.ndarray, np.ndarray]:
        """Midpoint nodes and weights on [0, R].

        ``sqrt`` uses r = R s^2 with s uniform, which clusters nodes at the
        origin where atomic densities blow up.
        """
        s = (np.arange(n) + 0.5) / n
        if mapping == "uniform":
            return R * s, np.full(n, R / n)
        if mapping == "sqrt":
            return R * s**2, 2.0 * R * s / n
        raise ValidationError(f"unknown radial mapping {mapping!r}")

    @classmethod
    def from_function(cls, func: Callable, R: float, n: int, dimension: int = 3, mapping: str = "sqrt"):
        r, w = cls.nodes(R, n, mapping)
        return cls(dimension, r, w, np.asarray(func(r), dtype=float))


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _check_dim(a: int, b: int) -> None:
    if a != b:
        raise DimensionMismatchError(f"dimension {a} does not match dimension {b}")


def mass(f) -> float:
    """Integral of a grid (midpoint rule), step (exact) or radial density."""
    return f.mass()


def _box_of(f):
    if isinstance(f, GridDensity):
        return np.asarray(f.origin), np.asarray(f.grid.upper)
    lo, hi = f.partition.bounding_box()
    return np.asarray(lo), np.asarray(hi)


def common_grid(f, g) -> Grid:
    """A grid covering both supports, aligned with the finest input grid."""
    _check_dim(f.dimension, g.dimension)
    grids = [x for x in (f, g) if isinstance(x, GridDensity)]
    lo = np.minimum(_box_of(f)[0], _box_of(g)[0])
    hi = np.maximum(_box_of(f)[1], _box_of(g)[1])
    if grids:
        ref = min(grids, key=lambda x: x.spacing)
        h = ref.spacing
        o = np.asarray(ref.origin)
        lo = o + np.floor((lo - o) / h + _ALIGN_EPS) * h
    else:
        h = min(c.side for x in (f, g) for c in x.cubes) / 8.0
    return Grid.covering(lo, hi, h)


def _as_grid_values(f, grid: Grid) -> np.ndarray:
    if isinstance(f, GridDensity):
        if f.grid == grid:
            return f.values
        return f.resample(grid).values
    if isinstance(f, StepDensity):
        return f.on_grid(grid).values
    raise ValidationError(f"cannot place {type(f).__name__} on a grid")


def lp_distance(f, g, p: float = 1.0) -> float:
    """Midpoint-rule (int |f - g|^p)^(1/p) on a common grid."""
    if p < 1:
        raise ValidationError("p must be at least 1")
    if isinstance(f, RadialDensity) or isinstance(g, RadialDensity):
        if not (isinstance(f, RadialDensity) and isinstance(g, RadialDensity)):
            raise ValidationError("radial densities compare only with radial densities")
        _check_dim(f.dimension, g.dimension)
        if not np.array_equal(f.radii, g.radii):
            raise ValidationError("radial densities must share nodes")
        return float(np.dot(f.shell_weights, np.abs(f.values - g.values) ** p) ** (1.0 / p))
    _check_dim(f.dimension, g.dimension)
    grid = common_grid(f, g)
    diff = np.abs(_as_grid_values(f, grid) - _as_grid_values(g, grid))
    return float((np.sum(diff**p) * grid.cell_volume) ** (1.0 / p))


def _block_view(arr: np.ndarray, b: int) -> np.ndarray:
    d = arr.ndim
    n = arr.shape[0]
    shape = []
    for _ in range(d):
        shape += [n // b, b]
    # (B, b, B, b, ...) -> (B, B, ..., b, b, ...)
    order = list(range(0, 2 * d, 2)) + list(range(1, 2 * d, 2))
    return arr.reshape(shape).transpose(order)


def step_approximate(f: GridDensity, k: int, max_depth: int | None = None) -> StepDensity:
    """Cube-average step function within combined L^1 + L^{1+2/d} error 1/k.

    The bounding cube of the grid is bisected dyadically (grids whose cell
    count is not a power of two are first averaged onto 2^m cells of it).
    Each sweep splits every leaf whose share of the current total error is
    at least half the largest share; sweeps
    stop once the total is within 1/k.  The refinement path does not depend
    on k, so the reported error is nonincreasing in k.  Cubes with zero
    average are dropped.
    """
    if k < 1:
        raise ValidationError("k must be a positive integer")
    return _dyadic_step(f, 1.0 / k, max_depth)


def coarsest_step(f: GridDensity) -> StepDensity:
    """The single bounding cube (no refinement)."""
    return _dyadic_step(f, math.inf, 0)


def _block_stats(arr: np.ndarray, b: int, p: float, cell: float):
    d = arr.ndim
    view = _block_view(arr, b)
    block_axes = tuple(range(d, 2 * d))
    means = view.mean(axis=block_axes)
    dev = np.abs(view - means[(...,) + (None,) * d])
    return means, dev.sum(axis=block_axes) * cell, (dev**p).sum(axis=block_axes) * cell


def _overlap_matrix(n_coarse: int, n_fine: int, side: int):
    """Sparse (n_fine, n_coarse) matrix of cell overlaps over fine-cell length.

    Both grids split [0, side] (in coarse cells) into equal cells, so fine
    cell i takes the exact average of a piecewise-constant coarse function.
    """
    from scipy import sparse

    edges = np.arange(n_fine + 1) * (side / n_fine)
    lo, hi = edges[:-1], edges[1:]
    rows, cols, vals = [], [], []
    first = np.floor(lo + 1e-12).astype(np.int64)
    last = np.minimum(np.ceil(hi - 1e-12).astype(np.int64) - 1, side - 1)
    width = side / n_fine
    for shift in range(int(np.max(last - first)) + 1 if n_fine else 0):
        j = first + shift
        ok = (j <= last) & (j < n_coarse)
        overlap = np.minimum(hi, j + 1.0) - np.maximum(lo, j.astype(float))
        ok &= overlap > 0
        rows.append(np.nonzero(ok)[0])
        cols.append(j[ok])
        vals.append(overlap[ok] / width)
    return sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(n_fine, n_coarse))


def _remap_to_cube(values: np.ndarray, side: int, n: int) -> np.ndarray:
    """Cell averages of ``values`` on n^d equal cells of the cube [0, side]^d (in cells)."""
    if n == side:
        arr = np.zeros((n,) * values.ndim)
        arr[tuple(slice(0, e) for e in values.shape)] = values
        return arr
    arr = values
    for ax in range(values.ndim):
        A = _overlap_matrix(arr.shape[ax], n, side)
        moved = np.moveaxis(arr, ax, 0)
        out = A @ moved.reshape(moved.shape[0], -1)
        arr = np.moveaxis(np.asarray(out).reshape((n,) + moved.shape[1:]), 0, ax)
    return np.ascontiguousarray(arr)


def _dyadic_step(f: GridDensity, tol: float, max_depth: int | None) -> StepDensity:
    d = f.dimension
    p = 1.0 + 2.0 / d
    n_max = max(f.extents)
    m = int(math.ceil(math.log2(n_max))) if n_max > 1 else 0
    n = 2**m
    depth_cap = m if max_depth is None else min(m, int(max_depth))
    # the root is the bounding cube of the grid; cell counts that are not a
    # power of two are remapped onto 2^m cells of that cube
    h = f.spacing * n_max / n
    cell = h**d
    arr = _remap_to_cube(f.values, n_max, n)
    stats = [_block_stats(arr, n >> level, p, cell) for level in range(depth_cap + 1)]
    children = np.array(np.meshgrid(*[[0, 1]] * d, indexing="ij")).reshape(d, -1).T

    leaves = [(0, (0,) * d)]
    while True:
        e1 = np.array([stats[lv][1][ix] for lv, ix in leaves])
        epp = np.array([stats[lv][2][ix] for lv, ix in leaves])
        lp = epp.sum() ** (1.0 / p)
        err = float(e1.sum() + lp)
        if err <= tol:
            break
        share = e1 + (epp / lp ** (p - 1) if lp > 0 else 0.0)
        splittable = np.array([lv < depth_cap for lv, _ in leaves])
        if not np.any(splittable & (share > 0)):
            break
        cut = 0.5 * np.max(np.where(splittable, share, 0.0))
        new_leaves = []
        for (lv, ix), s, ok in zip(leaves, share, splittable):
            if ok and s >= cut and s > 0:
                base = np.asarray(ix) * 2
                new_leaves.extend((lv + 1, tuple(base + c)) for c in children)
            else:
                new_leaves.append((lv, ix))
        leaves = new_leaves

    cubes = []
    levels = []
    origin = np.asarray(f.origin)
    for lv, ix in sorted(leaves):
        v = stats[lv][0][ix]
        if v > 0:
            b = n >> lv
            cubes.append(Cube(tuple(origin + np.asarray(ix) * b * h), b * h))
            levels.append(v)
    step = StepDensity(CubePartition(d, tuple(cubes)), np.array(levels))
    if math.isfinite(tol) and err > tol * (1 + 1e-9):
        raise ToleranceNotMetError(
            f"dyadic refinement capped at depth {depth_cap} with error {err:.3e} > {tol:.3e}", achieved=err
        )
    return StepDensity(step.partition, step.levels, error=err)
