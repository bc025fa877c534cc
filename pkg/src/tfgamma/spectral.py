"""Negative eigenvalue sums of -h^2 Laplace - U and the semiclassical Weyl term.

The operator is discretized by second-order finite differences on a
Dirichlet box.  In d = 1 the matrix is tridiagonal and every negative
eigenvalue is located by Sturm-count bisection; d = 2 uses a dense
eigensolve and is meant for small grids.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, linalg

from .densities import GridDensity, RadialDensity, StepDensity
from .errors import SizeError, UnsupportedDimensionError, ValidationError
from .kernels import sturm_count
from .potentials import ball_volume

log = logging.getLogger(__name__)


class DomainTruncationWarning(UserWarning):
    """Bound states reach the Dirichlet walls of the box."""


def weyl_coefficient(d: int, q: int = 1) -> float:
    """q |B_d| / ((2 pi)^d (1 + d/2))."""
    return q * ball_volume(d) / ((2 * math.pi) ** d * (1 + d / 2))


@dataclass(frozen=True, eq=False)
class SchrodingerGrid:
    """Interior nodes of a Dirichlet box with samples of U >= 0.

    Nodes sit at lower + i * dx for i = 1..n on each axis, with the walls at
    i = 0 and i = n + 1.
    """

    lower: tuple
    upper: tuple
    n: int
    U: np.ndarray

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        d = len(lower)
        if d not in (1, 2) or len(upper) != d:
            raise UnsupportedDimensionError("SchrodingerGrid supports d = 1 and d = 2")
        if self.n < 16:
            raise ValidationError("need at least 16 nodes per axis")
        spans = [u - l for l, u in zip(lower, upper)]
        if min(spans) <= 0 or not np.allclose(spans, spans[0], rtol=1e-12):
            raise ValidationError("the box must be a nondegenerate cube")
        U = np.asarray(self.U, dtype=np.float64)
        if U.shape != (self.n,) * d:
            raise ValidationError(f"U must have shape {(self.n,) * d}, got {U.shape}")
        if not np.all(np.isfinite(U)) or np.any(U < 0):
            raise ValidationError("U must be finite and nonnegative")
        U = U.copy()
        U.setflags(write=False)
        object.__setattr__(self, "U", U)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    @property
    def dx(self) -> float:
        return (self.upper[0] - self.lower[0]) / (self.n + 1)

    def axes(self) -> list[np.ndarray]:
        return [l + self.dx * np.arange(1, self.n + 1) for l in self.lower]

    @classmethod
    def sample(cls, U, lower, upper, n: int) -> "SchrodingerGrid":
        """Sample U (callable of coordinate arrays, or a number) on the box."""
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        d = lower.size
        dx = (upper[0] - lower[0]) / (n + 1)
        axes = [l + dx * np.arange(1, n + 1) for l in lower]
        if callable(U):
            mesh = np.meshgrid(*axes, indexing="ij")
            vals = np.broadcast_to(np.asarray(U(*mesh), dtype=float), (n,) * d)
        else:
            vals = np.full((n,) * d, float(U))
        return cls(tuple(lower), tuple(upper), n, vals)

    @classmethod
    def for_potential(cls, U, support, h: float, points_per_length: float = 10.0, pad: float = 4.0):
        """Grid for U supported in ``support`` (a (lower, upper) pair of boxes).

        The spacing resolves the shortest semiclassical wavelength
        h / sqrt(max U) with ``points_per_length`` nodes, and the box extends
        the support by ``pad`` such lengths on each side.
        """
        lo, hi = (np.atleast_1d(np.asarray(b, dtype=float)) for b in support)
        side = float(np.max(hi - lo))
        probe = cls.sample(U, lo, lo + side, 64)
        umax = max(float(np.max(probe.U)), 1e-300)
        length = h / math.sqrt(umax)
        margin = pad * length
        lower = lo - margin
        span = side + 2 * margin
        n = max(16, int(math.ceil(span / length * points_per_length)))
        return cls.sample(U, lower, lower + span, n)


def _tridiagonal(grid: SchrodingerGrid, h: float):
    c = h * h / (grid.dx * grid.dx)
    diag = 2.0 * c - grid.U
    off = np.full(grid.n - 1, -c)
    return diag, off


def negative_eigenvalues(grid: SchrodingerGrid, h: float, rtol: float = 1e-13) -> np.ndarray:
    """All negative eigenvalues of the discretized -h^2 Laplace - U, ascending."""
    if not h > 0:
        raise ValidationError("h must be positive")
    if grid.dimension == 2:
        return _negative_eigenvalues_dense(grid, h)
    diag, off = _tridiagonal(grid, h)
    off_sq = off * off
    m = int(sturm_count(diag, off_sq, [0.0])[0])
    if m == 0:
        return np.zeros(0)
    umax = float(np.max(grid.U))
    lo = np.full(m, -umax - 1e-12 * max(1.0, umax))
    hi = np.zeros(m)
    index = np.arange(m)
    scale = max(umax, 1e-300)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        below = sturm_count(diag, off_sq, mid)
        # eigenvalue k lies below mid iff more than k eigenvalues are below mid
        right = below > index
        hi = np.where(right, mid, hi)
        lo = np.where(right, lo, mid)
        if np.max(hi - lo) <= rtol * scale:
            break
    return 0.5 * (lo + hi)


def lowest_eigenvalues(V, lower: float, upper: float, n: int, h: float, count: int,
                       rtol: float = 1e-13) -> np.ndarray:
    """The ``count`` lowest eigenvalues of -h^2 d^2/dx^2 + V on a Dirichlet interval.

    V is a callable or an array of samples at the n interior nodes; it may
    have either sign.
    """
    if count < 1:
        raise ValidationError("count must be positive")
    if count > n:
        raise SizeError(f"asked for {count} eigenvalues of a {n}-node grid")
    dx = (upper - lower) / (n + 1)
    x = lower + dx * np.arange(1, n + 1)
    v = np.asarray(V(x) if callable(V) else V, dtype=float)
    if v.shape != (n,):
        raise ValidationError(f"V must have {n} samples")
    c = h * h / (dx * dx)
    diag = 2.0 * c + v
    off_sq = np.full(n - 1, c * c)
    lo = np.full(count, float(np.min(v)) - 1e-12)
    hi = np.full(count, float(np.max(v)) + 4.0 * c + 1e-12)
    index = np.arange(count)
    scale = max(float(np.max(np.abs(hi))), float(np.max(np.abs(lo))), 1e-300)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        right = sturm_count(diag, off_sq, mid) > index
        hi = np.where(right, mid, hi)
        lo = np.where(right, lo, mid)
        if np.max(hi - lo) <= rtol * scale:
            break
    return 0.5 * (lo + hi)


def _laplacian_2d(grid: SchrodingerGrid, h: float) -> np.ndarray:
    n = grid.n
    c = h * h / (grid.dx * grid.dx)
    t = 2.0 * c * np.eye(n) - c * (np.eye(n, k=1) + np.eye(n, k=-1))
    eye = np.eye(n)
    return np.kron(t, eye) + np.kron(eye, t)


def _negative_eigenvalues_dense(grid: SchrodingerGrid, h: float) -> np.ndarray:
    if grid.n > 80:
        raise ValidationError("dense d = 2 eigensolves are limited to n <= 80 per axis")
    H = _laplacian_2d(grid, h) - np.diag(grid.U.ravel())
    vals = linalg.eigh(H, eigvals_only=True, subset_by_value=(-np.inf, 0.0))
    return np.sort(vals[vals < 0])


def _eigenvector_1d(grid: SchrodingerGrid, h: float, index: int) -> np.ndarray:
    diag, off = _tridiagonal(grid, h)
    _, vec = linalg.eigh_tridiagonal(diag, off, select="i", select_range=(index, index))
    return vec[:, 0]


def _wall_leakage(grid: SchrodingerGrid, h: float, eigenvalues: np.ndarray) -> float:
    """Estimated error of the eigenvalue sum from the Dirichlet walls.

    The weight of the lowest and the least-bound state within the outer
    tenth of the box, times their binding energies.
    """
    if grid.dimension != 1 or eigenvalues.size == 0:
        return 0.0
    edge = max(1, grid.n // 20)
    leak = 0.0
    for idx in {0, eigenvalues.size - 1}:
        v = _eigenvector_1d(grid, h, idx)
        leak += abs(eigenvalues[idx]) * float(np.sum(v[:edge] ** 2) + np.sum(v[-edge:] ** 2))
    return leak


def negative_sum(grid: SchrodingerGrid, h: float, warn_tol: float = 1e-5) -> float:
    """Sum of the negative eigenvalues on a fixed grid.

    Emits :class:`DomainTruncationWarning` when bound states carry weight
    near the walls (relative error estimate above ``warn_tol``).
    """
    ev = negative_eigenvalues(grid, h)
    total = float(np.sum(ev))
    if total < 0 and _wall_leakage(grid, h, ev) > warn_tol * abs(total):
        warnings.warn("bound states reach the Dirichlet walls; enlarge the box", DomainTruncationWarning, stacklevel=2)
    return total


def negative_sum_for(U, support, h: float, d: int = 1, points_per_length: float = 10.0,
                     pad: float = 4.0, max_doublings: int = 6, warn_tol: float = 1e-5) -> float:
    """negative_sum on an automatically sized box, doubling the padding as needed."""
    if d not in (1, 2):
        raise UnsupportedDimensionError("eigensolves are available for d = 1 and d = 2")
    lo, hi = (np.broadcast_to(np.atleast_1d(np.asarray(b, dtype=float)), (d,)) for b in support)
    for attempt in range(max_doublings + 1):
        grid = SchrodingerGrid.for_potential(U, (lo, hi), h, points_per_length, pad)
        ev = negative_eigenvalues(grid, h)
        total = float(np.sum(ev))
        if total == 0.0 or _wall_leakage(grid, h, ev) <= warn_tol * abs(total):
            return total
        log.debug("padding %.3g too small, doubling", pad)
        pad *= 2
    warnings.warn("bound states still reach the walls after padding", DomainTruncationWarning, stacklevel=2)
    return total


# ---------------------------------------------------------------------------
# Weyl term and duality
# ---------------------------------------------------------------------------


def _integrate_power(U, p: float, d: int, support=None, n: int | None = None) -> float:
    """int U^p for a density-like object or a callable on a support box."""
    if isinstance(U, (GridDensity, RadialDensity)):
        vals = U.values
        if np.any(vals < 0):
            raise ValidationError("U must be nonnegative")
        if isinstance(U, GridDensity):
            return float(np.sum(vals**p) * U.grid.cell_volume)
        return float(np.dot(U.shell_weights, vals**p))
    if isinstance(U, StepDensity):
        vols = np.array([c.volume for c in U.partition.cubes])
        return float(np.dot(vols, np.asarray(U.levels) ** p))
    if isinstance(U, (int, float)):
        if U == 0:
            return 0.0
        raise ValidationError("a constant nonzero U is not integrable")
    if not callable(U):
        raise ValidationError(f"unsupported potential {type(U).__name__}")
    if support is None:
        raise ValidationError("a callable U needs a support box")
    lo, hi = (np.broadcast_to(np.atleast_1d(np.asarray(b, dtype=float)), (d,)) for b in support)
    if d == 1:
        val, _ = integrate.quad(lambda x: max(float(U(x)), 0.0) ** p, lo[0], hi[0], limit=400, epsabs=1e-13, epsrel=1e-12)
        return float(val)
    n = n or {2: 1024, 3: 128}.get(d, 32)
    g = GridDensity.from_function(lambda *x: np.maximum(U(*x), 0.0), lo, hi, n)
    return float(np.sum(g.values**p) * g.grid.cell_volume)


def weyl_term(U, d: int, q: int = 1, support=None, n: int | None = None) -> float:
    """-q |B_d| / ((2 pi)^d (1 + d/2)) int U^{1+d/2}, per unit h^{-d}."""
    return -weyl_coefficient(d, q) * _integrate_power(U, 1 + d / 2, d, support, n)


def optimal_potential(f, q: int = 1):
    """U* = (1 + 2/d) K_cl f^{2/d}, the maximizer of the dual bound for f."""
    from .tf import kcl

    d = f.dimension
    factor = (1 + 2 / d) * kcl(d, q)
    if isinstance(f, StepDensity):
        return StepDensity(f.partition, factor * np.asarray(f.levels) ** (2 / d))
    return f.with_values(factor * f.values ** (2 / d)) if isinstance(f, RadialDensity) else GridDensity(
        f.origin, f.spacing, factor * f.values ** (2 / d))


def dual_lower_bound(f, U, d: int | None = None, q: int = 1) -> float:
    """weyl_term(U) + int U f.

    ``U`` is either an object of the same kind as ``f`` on the same cells,
    a bare array of its values, or a nonnegative number (for a grid or step
    density with bounded support).
    """
    d = f.dimension if d is None else d
    if d != f.dimension:
        raise ValidationError("dimension does not match the density")
    if isinstance(f, StepDensity):
        levels = np.asarray(f.levels)
        vols = np.array([c.volume for c in f.partition.cubes])
        u = _values_like(U, levels.shape, StepDensity)
        return float(-weyl_coefficient(d, q) * np.dot(vols, u ** (1 + d / 2)) + np.dot(vols, u * levels))
    if isinstance(f, GridDensity):
        u = _values_like(U, f.values.shape, GridDensity)
        cell = f.grid.cell_volume
        return float(-weyl_coefficient(d, q) * np.sum(u ** (1 + d / 2)) * cell + np.sum(u * f.values) * cell)
    if isinstance(f, RadialDensity):
        u = _values_like(U, f.values.shape, RadialDensity)
        w = f.shell_weights
        return float(-weyl_coefficient(d, q) * np.dot(w, u ** (1 + d / 2)) + np.dot(w, u * f.values))
    raise ValidationError(f"unsupported density {type(f).__name__}")


def _values_like(U, shape, kind) -> np.ndarray:
    if isinstance(U, StepDensity):
        vals = np.asarray(U.levels, dtype=float)
    elif isinstance(U, (GridDensity, RadialDensity)):
        vals = np.asarray(U.values, dtype=float)
    else:
        vals = np.asarray(U, dtype=float)
    vals = np.broadcast_to(vals, shape)
    if np.any(vals < 0):
        raise ValidationError("U must be nonnegative")
    return vals


# ---------------------------------------------------------------------------
# convergence table
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeylRow:
    h: float
    negative_sum: float
    weyl: float
    ratio: float


@dataclass(frozen=True, eq=False)
class WeylTable:
    rows: tuple

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["h", "negative_sum", "weyl", "ratio"])
        for r in self.rows:
            writer.writerow([repr(r.h), repr(r.negative_sum), repr(r.weyl), repr(r.ratio)])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @property
    def ratios(self) -> list:
        return [r.ratio for r in self.rows]


def weyl_convergence_table(U: Callable, hList: Sequence[float], support, d: int = 1, q: int = 1,
                           points_per_length: float = 10.0, workers: int = 1) -> WeylTable:
    """negative_sum against h^{-d} weyl_term(U) for each h.

    ``U`` is a callable of the coordinate arrays supported in ``support``.
    The spin degeneracy multiplies the eigenvalue sum.
    """
    hList = [float(h) for h in hList]
    if any(h <= 0 for h in hList):
        raise ValidationError("h values must be positive")
    if any(b > a for a, b in zip(hList, hList[1:])):
        raise ValidationError("hList must be decreasing")
    w = weyl_term(U, d, q, support)

    def one(h):
        s = q * negative_sum_for(U, support, h, d, points_per_length)
        scaled = w * h ** (-d)
        ratio = 1.0 if scaled == 0.0 and s == 0.0 else s / scaled
        return WeylRow(h, s, scaled, ratio)

    if workers > 1 and len(hList) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(one, hList))
    else:
        rows = [one(h) for h in hList]
    return WeylTable(tuple(rows))


def box_sea_energy(side: float, M: int, U: Callable, h: float, lower: float = 0.0, n: int = 4096) -> float:
    """sum_{k <= M} (h^2 (pi k / L)^2 - <u_k, U u_k>) for d = 1 box modes on [lower, lower + L]."""
    x = lower + (np.arange(n) + 0.5) * side / n
    u = np.asarray(U(x), dtype=float)
    k = np.arange(1, M + 1, dtype=float)
    modes = (2.0 / side) * np.sin(np.outer(k, np.pi * (x - lower) / side)) ** 2
    potential = modes @ u * (side / n)
    return float(np.sum(h * h * (np.pi * k / side) ** 2 - potential))


__all__ = [
    "DomainTruncationWarning",
    "SchrodingerGrid",
    "WeylRow",
    "WeylTable",
    "box_sea_energy",
    "dual_lower_bound",
    "negative_eigenvalues",
    "negative_sum",
    "lowest_eigenvalues",
    "negative_sum_for",
    "optimal_potential",
    "weyl_coefficient",
    "weyl_convergence_table",
    "weyl_term",
]
