"""Dirichlet-box Fermi seas and the recovery Slater determinants built from them.

A :class:`FermiSea` fills, in every cube of a partition, the lowest
Dirichlet modes u_k(x) = prod_i sqrt(2/L) sin(pi k_i (x_i - c_i) / L).
Orbitals from different cubes have disjoint supports, so the whole family
is orthonormal and defines a Slater determinant.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .densities import (
    Cube,
    CubePartition,
    Grid,
    GridDensity,
    StepDensity,
    coarsest_step,
    step_approximate,
)
from .errors import AllocationError, SizeError, ValidationError
from .potentials import grid_pair_energy

EXCHANGE_CAP = 16


@dataclass(frozen=True)
class BoxMode:
    multi_index: tuple
    cube: Cube

    def __post_init__(self):
        object.__setattr__(self, "multi_index", tuple(int(k) for k in self.multi_index))
        if any(k < 1 for k in self.multi_index):
            raise ValidationError("box mode indices start at 1")
        if len(self.multi_index) != self.cube.dimension:
            raise ValidationError("mode index and cube dimension differ")

    @property
    def eigenvalue(self) -> float:
        return math.pi**2 * sum(k * k for k in self.multi_index) / self.cube.side**2


@dataclass(frozen=True)
class ScalingRegime:
    N: int
    h: float
    lam: float

    def __post_init__(self):
        if self.h <= 0:
            raise ValidationError("h must be positive")
        if self.lam < 0:
            raise ValidationError("lambda must be nonnegative")

    @classmethod
    def canonical(cls, N: int, d: int) -> "ScalingRegime":
        """h = N^{-1/d}, lambda = 1/N."""
        return cls(N, N ** (-1.0 / d), 1.0 / N)


def lowest_modes(d: int, M: int) -> np.ndarray:
    """The M lowest Dirichlet multi-indices, shape (M, d).

    Order is by |k|^2, ties broken lexicographically on k.
    """
    if M < 0:
        raise ValidationError("M must be nonnegative")
    if M == 0:
        return np.zeros((0, d), dtype=np.int64)
    if d == 1:
        return np.arange(1, M + 1, dtype=np.int64)[:, None]
    ball = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    K = int(math.ceil((M * 2**d / ball) ** (1.0 / d))) + d
    while True:
        grids = np.meshgrid(*[np.arange(1, K + 1)] * d, indexing="ij")
        cand = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)
        norm = (cand**2).sum(axis=1)
        if cand.shape[0] >= M:
            keys = [cand[:, i] for i in range(d - 1, -1, -1)] + [norm]
            order = np.lexsort(keys)[:M]
            # anything outside the candidate box has |k|^2 >= (K+1)^2 + d - 1
            if norm[order[-1]] < (K + 1) ** 2 + d - 1:
                return cand[order]
        K *= 2


def box_spectrum(cube: Cube, M: int) -> list[BoxMode]:
    """The M lowest modes of the Dirichlet Laplacian on ``cube``."""
    if M < 1:
        raise ValidationError("M must be at least 1")
    return [BoxMode(tuple(k), cube) for k in lowest_modes(cube.dimension, M)]


@dataclass(frozen=True, eq=False)
class FermiSea:
    """Occupied box modes per cube; ``modes[i]`` is an int array (M_i, d)."""

    partition: CubePartition
    modes: tuple
    step: StepDensity | None = field(default=None, compare=False)

    def __post_init__(self):
        modes = tuple(np.asarray(m, dtype=np.int64).reshape(-1, self.partition.dimension) for m in self.modes)
        if len(modes) != len(self.partition):
            raise ValidationError("one mode list per cube is required")
        for m in modes:
            if m.size and m.min() < 1:
                raise ValidationError("box mode indices start at 1")
            if len({tuple(r) for r in m}) != m.shape[0]:
                raise ValidationError("modes within a cube must be distinct")
            m.setflags(write=False)
        object.__setattr__(self, "modes", modes)
        if self.total_particles < 1:
            raise ValidationError("a Fermi sea needs at least one particle")

    @property
    def dimension(self) -> int:
        return self.partition.dimension

    @property
    def cubes(self) -> tuple:
        return self.partition.cubes

    @property
    def occupations(self) -> list[int]:
        return [m.shape[0] for m in self.modes]

    @property
    def total_particles(self) -> int:
        return int(sum(m.shape[0] for m in self.modes))

    def box_modes(self) -> list[BoxMode]:
        return [BoxMode(tuple(k), c) for c, m in zip(self.cubes, self.modes) for k in m]

    @classmethod
    def filled(cls, partition: CubePartition, counts, step: StepDensity | None = None) -> "FermiSea":
        """Fill the lowest ``counts[i]`` modes of every cube."""
        return cls(partition, tuple(lowest_modes(partition.dimension, int(c)) for c in counts), step)

    def to_json(self) -> dict:
        return {
            "cubes": [
                {"corner": list(c.corner), "side": c.side, "modes": m.tolist()}
                for c, m in zip(self.cubes, self.modes)
            ]
        }

    @classmethod
    def from_json(cls, doc) -> "FermiSea":
        if isinstance(doc, str):
            doc = json.loads(doc)
        cubes = [Cube(c["corner"], c["side"]) for c in doc["cubes"]]
        d = cubes[0].dimension
        modes = tuple(np.asarray(c["modes"], dtype=np.int64).reshape(-1, d) for c in doc["cubes"])
        return cls(CubePartition(d, tuple(cubes)), modes)


def sea_kinetic(sea: FermiSea) -> float:
    """sum over occupied modes of |pi k / L|^2 (unscaled)."""
    total = 0.0
    for cube, m in zip(sea.cubes, sea.modes):
        # integer sum first so the d = 1 closed form is reproduced exactly
        total += math.pi**2 * int((m.astype(object) ** 2).sum()) / cube.side**2
    return total


def default_grid(sea: FermiSea, cells_per_mode: int = 8) -> Grid:
    """Grid aligned with the smallest cube, fine enough for the highest mode."""
    side_min = min(c.side for c in sea.cubes)
    kmax = max((int(m.max()) for m in sea.modes if m.size), default=1)
    per_cube = 2 ** int(math.ceil(math.log2(max(2, cells_per_mode * kmax))))
    lo, hi = sea.partition.bounding_box()
    return Grid.covering(lo, hi, side_min / per_cube)


def _axis_factors(cube: Cube, grid: Grid, kvals: np.ndarray):
    """Per axis: (cell slice, array (len(kvals), cells) of sqrt(2/L) sin(...))."""
    out = []
    slices = cube.cell_slices(grid)
    for ax, (c, sl) in enumerate(zip(cube.corner, slices)):
        x = grid.origin[ax] + (np.arange(sl.start, sl.stop) + 0.5) * grid.spacing - c
        out.append(np.sqrt(2.0 / cube.side) * np.sin(np.pi * np.outer(kvals, x) / cube.side))
    return slices, out


def sea_orbitals(sea: FermiSea, grid: Grid) -> np.ndarray:
    """All occupied orbitals on ``grid``, shape (N,) + grid.extents."""
    out = np.zeros((sea.total_particles,) + grid.extents)
    row = 0
    for cube, m in zip(sea.cubes, sea.modes):
        if not m.size:
            continue
        kmax = int(m.max())
        slices, factors = _axis_factors(cube, grid, np.arange(1, kmax + 1))
        for k in m:
            vals = factors[0][k[0] - 1]
            for ax in range(1, sea.dimension):
                vals = np.multiply.outer(vals, factors[ax][k[ax] - 1])
            out[(row,) + slices] = vals
            row += 1
    return out


def sea_density(sea: FermiSea, grid: Grid | None = None) -> GridDensity:
    """rho(x) = sum over occupied modes of |u_k(x)|^2, zero outside the cubes."""
    grid = default_grid(sea) if grid is None else grid
    if grid.dimension != sea.dimension:
        raise ValidationError("grid and sea dimensions differ")
    rho = np.zeros(grid.extents)
    for cube, m in zip(sea.cubes, sea.modes):
        if not m.size:
            continue
        slices = cube.cell_slices(grid)
        if any(s.stop <= s.start for s in slices):
            continue
        if sea.dimension == 1:
            x = grid.origin[0] + (np.arange(slices[0].start, slices[0].stop) + 0.5) * grid.spacing - cube.corner[0]
            rho[slices] += kernels.sine_density_1d(m[:, 0], x, cube.side)
            continue
        kmax = int(m.max())
        _, factors = _axis_factors(cube, grid, np.arange(1, kmax + 1))
        sq = [f**2 for f in factors]
        # sum_m prod_i S_i[k_mi, x_i] as one einsum over the mode axis
        subs = "".join(chr(ord("a") + i) for i in range(sea.dimension))
        spec = ",".join(f"m{s}" for s in subs) + "->" + subs
        rho[slices] += np.einsum(spec, *[sq[i][m[:, i] - 1] for i in range(sea.dimension)], optimize=True)
    return GridDensity(grid.origin, grid.spacing, rho)


def gram_matrix(sea: FermiSea, grid: Grid | None = None) -> np.ndarray:
    """Overlaps <u_i, u_j> of all occupied orbitals by midpoint quadrature."""
    grid = default_grid(sea) if grid is None else grid
    orb = sea_orbitals(sea, grid).reshape(sea.total_particles, -1)
    return orb @ orb.T * grid.cell_volume


def allocate_particles(step: StepDensity, N: int, mass_tol: float = 1e-9) -> np.ndarray:
    """Integers M_Q in (N|Q|f_Q - 1, N|Q|f_Q + 1] with sum exactly N.

    Largest-remainder rounding; equal remainders go to the lower cube index.
    """
    if N < 1:
        raise ValidationError("N must be at least 1")
    m = step.mass()
    if abs(m - 1.0) > mass_tol:
        raise AllocationError(f"step density has mass {m!r}, expected 1")
    vols = np.array([c.volume for c in step.cubes])
    target = N * vols * step.levels
    base = np.floor(target + 1e-12)
    base = np.minimum(base, np.floor(target) + 1)
    remainder = target - base
    missing = N - int(base.sum())
    if missing < 0 or missing > len(target):
        raise AllocationError(f"cannot distribute {N} particles: {missing} left after flooring")
    order = sorted(range(len(target)), key=lambda i: (-remainder[i], i))
    counts = base.astype(np.int64)
    counts[order[:missing]] += 1
    slack = 1e-9 * max(1.0, N)
    if np.any(counts <= target - 1 - slack) or np.any(counts > target + 1 + slack):
        raise AllocationError("rounding left a count outside its window")
    return counts


def build_recovery(f: GridDensity, N: int, k: int, mass_tol: float = 1e-6) -> FermiSea:
    """Recovery Slater determinant for density f with N particles at accuracy 1/k.

    k = 0 means the coarsest partition (the single bounding cube).
    """
    m = f.mass()
    if abs(m - 1.0) > mass_tol:
        raise ValidationError(f"density has mass {m!r}, expected 1")
    step = coarsest_step(f) if k == 0 else step_approximate(f, k)
    # the step carries mass(f) exactly; absorb the tolerated deviation from 1
    unit = StepDensity(step.partition, step.levels / step.mass(), error=step.error)
    counts = allocate_particles(unit, N)
    return FermiSea.filled(step.partition, counts, step=unit)


@dataclass(frozen=True)
class Ladder:
    """Particle thresholds M_k = M0 * growth^k of the diagonal argument."""

    M0: float = 10.0
    growth: float = 1.25

    def __post_init__(self):
        if self.M0 <= 0 or self.growth <= 1:
            raise ValidationError("ladder needs M0 > 0 and growth > 1")

    def threshold(self, k: int) -> float:
        return self.M0 * self.growth**k

    def level(self, N: int) -> int:
        """Largest k with M_k <= N, and 0 below M_1."""
        if N < self.threshold(1):
            return 0
        k = int(math.floor(math.log(N / self.M0) / math.log(self.growth)))
        while self.threshold(k + 1) <= N:
            k += 1
        while k > 0 and self.threshold(k) > N:
            k -= 1
        return k


def diagonal_sequence(f: GridDensity, NList, ladder: Ladder | None = None):
    """[(N, k_N, recovery sea)] along an increasing list of particle numbers."""
    ladder = Ladder() if ladder is None else ladder
    NList = [int(n) for n in NList]
    if any(b <= a for a, b in zip(NList, NList[1:])):
        raise ValidationError("NList must be strictly increasing")
    return [(N, ladder.level(N), build_recovery(f, N, ladder.level(N))) for N in NList]


def slater_direct_interaction(rho: GridDensity, w, lam: float = 1.0) -> float:
    """(lambda/2) double integral of rho(x) rho(y) w(x - y) by direct summation."""
    if w is None:
        return 0.0
    return 0.5 * lam * grid_pair_energy(rho.values, rho.values, w, rho.spacing)


def slater_exchange_interaction(sea: FermiSea, w, lam: float = 1.0, grid: Grid | None = None, cap: int = EXCHANGE_CAP) -> float:
    """-(lambda/2) sum_{i,j} <u_i u_j, w * (u_i u_j)> for the real orbitals of ``sea``."""
    N = sea.total_particles
    if N > cap:
        raise SizeError(f"exchange term is capped at N = {cap}, got {N}")
    if w is None:
        return 0.0
    grid = default_grid(sea) if grid is None else grid
    orb = sea_orbitals(sea, grid)
    total = 0.0
    for i in range(N):
        for j in range(i, N):
            pij = orb[i] * orb[j]
            if not np.any(pij):
                continue
            e = grid_pair_energy(pij, pij, w, grid.spacing)
            total += e if i == j else 2.0 * e
    return -0.5 * lam * total


def sea_sqrt_gradient(sea: FermiSea, grid: Grid | None = None) -> float:
    """int |grad sqrt(rho)|^2 = int |grad rho|^2 / (4 rho), cube by cube.

    grad rho is formed from the exact derivatives of the box modes, so the
    square-root kink of rho at the cube walls never enters a difference
    quotient; the cube integrals use the midpoint rule on ``grid``.
    """
    grid = default_grid(sea, cells_per_mode=16) if grid is None else grid
    d = sea.dimension
    subs = "".join(chr(ord("a") + i) for i in range(d))
    total = 0.0
    for cube, m in zip(sea.cubes, sea.modes):
        if not m.size:
            continue
        kvals = np.arange(1, int(m.max()) + 1)
        slices, sines = _axis_factors(cube, grid, kvals)
        if any(sl.stop <= sl.start for sl in slices):
            continue
        coses = []
        for ax, sl in enumerate(slices):
            x = grid.origin[ax] + (np.arange(sl.start, sl.stop) + 0.5) * grid.spacing - cube.corner[ax]
            arg = np.pi * np.outer(kvals, x) / cube.side
            coses.append(np.sqrt(2.0 / cube.side) * (np.pi * kvals[:, None] / cube.side) * np.cos(arg))
        sq = [sines[i][m[:, i] - 1] ** 2 for i in range(d)]
        spec = ",".join(f"m{c}" for c in subs) + "->" + subs
        rho = np.einsum(spec, *sq, optimize=True)
        grad_sq = np.zeros_like(rho)
        for j in range(d):
            ops = [sq[i] if i != j else 2.0 * sines[j][m[:, j] - 1] * coses[j][m[:, j] - 1] for i in range(d)]
            grad_sq += np.einsum(spec, *ops, optimize=True) ** 2
        pos = rho > 0
        total += float(np.sum(grad_sq[pos] / (4.0 * rho[pos])) * grid.cell_volume)
    return total


def hoffmann_ostenhof_gap(sea: FermiSea, grid: Grid | None = None) -> float:
    """Kinetic energy minus int |grad sqrt(rho)|^2; nonnegative up to quadrature error."""
    return sea_kinetic(sea) - sea_sqrt_gradient(sea, grid)
