"""Radial potentials, interaction kernels and ball-indicator chi families.

A chi family realizes w(x) = int_0^inf (chi_r * chi_r)(x) dr with radial
chi_r >= 0.  Only indicator families chi_r = a(r) 1_{B_r} ship here; for
those chi_r * chi_r is a(r)^2 times the overlap volume of two balls.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import kernels
from .densities import GridDensity, Grid
from .errors import ToleranceNotMetError, UnsupportedDimensionError, ValidationError


@dataclass(frozen=True)
class RadialKernel:
    """A function of |x|.

    ``support`` is the radius outside which the kernel vanishes (``None``
    when unbounded).  ``singular`` kernels are evaluated at half a grid
    spacing on nodes closer than that to the origin.
    """

    func: Callable
    integrability: tuple = (math.inf, math.inf)
    support: float | None = None
    singular: bool = False
    name: str = "custom"

    def __call__(self, r):
        return self.func(np.asarray(r, dtype=float))

    def on_grid(self, r, spacing: float):
        r = np.asarray(r, dtype=float)
        if self.singular:
            r = np.where(r <= 0.5 * spacing, 0.5 * spacing, r)
        return self.func(r)

    def scaled(self, factor: float) -> "RadialKernel":
        f = self.func
        return RadialKernel(lambda r: factor * f(r), self.integrability, self.support, self.singular, self.name)


def zero_kernel() -> RadialKernel:
    return RadialKernel(lambda r: np.zeros_like(r), support=0.0, name="zero")


def constant_kernel(value: float, support: float) -> RadialKernel:
    """value * 1_{|x| <= support}."""
    return RadialKernel(lambda r: np.where(r <= support, value, 0.0), support=support, name="constant")


def coulomb_kernel(charge: float = 1.0) -> RadialKernel:
    """charge / |x| in three dimensions."""

    def func(r):
        with np.errstate(divide="ignore"):
            return charge / r

    return RadialKernel(func, (2.5, 4.0), None, True, "coulomb3d")


def harmonic_potential(strength: float = 1.0) -> RadialKernel:
    """strength * |x|^2."""
    return RadialKernel(lambda r: strength * r**2, name="harmonic")


def piecewise_constant_radial(shells) -> RadialKernel:
    """sum of value * 1_{rMin <= |x| < rMax} over the given shells."""
    shells = [(float(s["rMin"]), float(s["rMax"]), float(s["value"])) for s in shells]
    for lo, hi, _ in shells:
        if not 0 <= lo < hi:
            raise ValidationError("each shell needs 0 <= rMin < rMax")

    def func(r):
        out = np.zeros_like(r, dtype=float)
        for lo, hi, v in shells:
            out = out + np.where((r >= lo) & (r < hi), v, 0.0)
        return out

    return RadialKernel(func, support=max(hi for _, hi, _ in shells), name="piecewise_constant_radial")


def load_kernel(spec) -> RadialKernel:
    """Kernel from its JSON description."""
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("type")
    if kind == "piecewise_constant_radial":
        return piecewise_constant_radial(spec["shells"])
    if kind == "builtin":
        name = spec.get("name")
        if name == "coulomb3d":
            return coulomb_kernel(spec.get("charge", 1.0))
        if name == "zero":
            return zero_kernel()
        if name == "harmonic":
            return harmonic_potential(spec.get("strength", 1.0))
        raise ValidationError(f"unknown builtin kernel {name!r}")
    if kind in ("zero", None):
        return zero_kernel()
    if kind == "constant":
        return constant_kernel(spec["value"], spec["support"])
    if kind == "harmonic":
        return harmonic_potential(spec.get("strength", 1.0))
    if kind == "coulomb":
        # attractive nucleus of charge Z: -Z/|x|
        return coulomb_kernel(-float(spec.get("Z", 1.0)))
    raise ValidationError(f"unknown kernel type {kind!r}")


def sample_potential(V, grid: Grid) -> np.ndarray:
    """Values of V at the cell centres of ``grid``.

    V may be a :class:`RadialKernel`, a callable of the coordinate arrays,
    a number, or ``None`` (zero).
    """
    if V is None:
        return np.zeros(grid.extents)
    if isinstance(V, (int, float)):
        return np.full(grid.extents, float(V))
    axes = np.meshgrid(*grid.axes(), indexing="ij")
    if isinstance(V, RadialKernel):
        r = np.sqrt(sum(a**2 for a in axes))
        return np.broadcast_to(V.on_grid(r, grid.spacing), grid.extents).astype(float)
    return np.broadcast_to(np.asarray(V(*axes), dtype=float), grid.extents).copy()


def ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def ball_self_convolution(r, s, d: int):
    """(1_{B_r} * 1_{B_r})(x) at |x| = s: the overlap volume of two r-balls."""
    r = np.asarray(r, dtype=float)
    s = np.abs(np.asarray(s, dtype=float))
    inside = s < 2 * r
    if d == 1:
        return np.maximum(2 * r - s, 0.0)
    if d == 2:
        ratio = np.clip(s / np.where(r > 0, 2 * r, 1.0), 0.0, 1.0)
        val = 2 * r**2 * np.arccos(ratio) - 0.5 * s * np.sqrt(np.maximum(4 * r**2 - s**2, 0.0))
        return np.where(inside, val, 0.0)
    if d == 3:
        return np.where(inside, math.pi / 12 * (4 * r + s) * (2 * r - s) ** 2, 0.0)
    raise UnsupportedDimensionError("ball overlap is implemented for d = 1, 2, 3")


class ChiFamily:
    """Family of radial functions chi_r >= 0 indexed by r > 0."""

    dimension: int

    def chi(self, r: float, s):
        raise NotImplementedError

    def r_range(self, s: float) -> tuple:
        """Interval of r outside which (chi_r * chi_r)(s) vanishes."""
        raise NotImplementedError

    def self_convolution(self, r, s):
        raise NotImplementedError

    def at(self, r: float) -> RadialKernel:
        raise NotImplementedError

    def squared_at(self, r: float) -> RadialKernel:
        k = self.at(r)
        return RadialKernel(lambda s: k(s) ** 2, support=k.support, name=k.name + "^2")

    def is_zero(self) -> bool:
        return False


class ZeroChiFamily(ChiFamily):
    def __init__(self, dimension: int = 3):
        self.dimension = dimension

    def chi(self, r, s):
        return np.zeros_like(np.asarray(s, dtype=float))

    def r_range(self, s):
        return (0.0, 0.0)

    def self_convolution(self, r, s):
        return np.zeros_like(np.asarray(s, dtype=float))

    def at(self, r):
        return zero_kernel()

    def is_zero(self):
        return True


class BallChiFamily(ChiFamily):
    """chi_r = amplitude(r) 1_{B_r} for r in [r_min, r_max]."""

    def __init__(self, dimension: int, amplitude: Callable, r_min: float = 0.0, r_max: float = math.inf, name="ball"):
        if dimension not in (1, 2, 3):
            raise UnsupportedDimensionError("ball families are implemented for d = 1, 2, 3")
        self.dimension = dimension
        self.amplitude = amplitude
        self.r_min = float(r_min)
        self.r_max = float(r_max)
        self.name = name

    def _active(self, r):
        r = np.asarray(r, dtype=float)
        return (r >= self.r_min) & (r <= self.r_max) & (r > 0)

    def chi(self, r, s):
        s = np.asarray(s, dtype=float)
        if not self._active(r):
            return np.zeros_like(s)
        return np.where(s <= r, self.amplitude(r), 0.0)

    def r_range(self, s):
        return (max(self.r_min, 0.5 * abs(s)), self.r_max)

    def self_convolution(self, r, s):
        r = np.asarray(r, dtype=float)
        a = np.where(self._active(r), self.amplitude(np.where(r > 0, r, 1.0)), 0.0)
        return a**2 * ball_self_convolution(r, s, self.dimension)

    def at(self, r):
        a = float(self.amplitude(r)) if self._active(r) else 0.0
        return RadialKernel(lambda s: np.where(s <= r, a, 0.0), support=float(r), name=f"{self.name}@{r:g}")


def coulomb_chi(d: int = 3) -> BallChiFamily:
    """chi_r = pi^{-1/2} r^{-5/2} 1_{B_r}, which reconstructs 1/|x| in R^3."""
    if d != 3:
        raise UnsupportedDimensionError("the Coulomb chi family exists only for d = 3")
    return BallChiFamily(3, lambda r: r ** -2.5 / math.sqrt(math.pi), name="coulomb3d")


def fdll_reconstruct(chi: ChiFamily, x, tol: float = 1e-10) -> float:
    """int_0^inf (chi_r * chi_r)(x) dr by adaptive Gauss-Kronrod quadrature.

    Unbounded r-ranges are mapped to a finite interval with u = 1/r; for the
    Coulomb family the mapped integrand is a cubic polynomial in u.
    """
    if not tol >= 50 * np.finfo(float).eps:
        raise ValidationError(f"tolerance {tol!r} is below what double precision quadrature can reach")
    if chi.is_zero():
        return 0.0
    s = float(np.linalg.norm(np.atleast_1d(x)))
    lo, hi = chi.r_range(s)
    if hi <= lo:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            if math.isinf(hi):
                if lo <= 0:
                    raise ValidationError("an unbounded family needs |x| > 0")
                val, err = integrate.quad(
                    lambda u: float(chi.self_convolution(1.0 / u, s)) / (u * u), 0.0, 1.0 / lo,
                    epsabs=0.0, epsrel=tol, limit=200,
                )
            else:
                val, err = integrate.quad(
                    lambda r: float(chi.self_convolution(r, s)), lo, hi, epsabs=0.0, epsrel=tol, limit=200
                )
        except integrate.IntegrationWarning as exc:
            raise ToleranceNotMetError(f"r-quadrature did not converge: {exc}") from exc
    if err > max(tol * abs(val), 1e-300):
        raise ToleranceNotMetError(f"r-quadrature error {err:.2e} above tolerance", achieved=err)
    return float(val)


def kernel_offsets(kern: RadialKernel, spacing: float, d: int, max_half: int | None = None):
    """Kernel samples on grid offsets within its support: (array, half width).

    Unbounded kernels need ``max_half`` (the grid size minus one suffices
    for potentials evaluated on the same grid).
    """
    if kern.support is None:
        if max_half is None:
            raise ValidationError("grid convolution needs a kernel with finite support")
        half = int(max_half)
    else:
        half = int(math.floor(kern.support / spacing + 1e-9))
        if max_half is not None:
            half = min(half, int(max_half))
    axis = np.arange(-half, half + 1) * spacing
    mesh = np.meshgrid(*[axis] * d, indexing="ij")
    r = np.sqrt(sum(m**2 for m in mesh))
    return np.asarray(kern.on_grid(r, spacing), dtype=float), half


def grid_potential(values: np.ndarray, w: RadialKernel, spacing: float) -> np.ndarray:
    """(w * g) at the cell centres of g's own grid, by direct summation."""
    kern, half = kernel_offsets(w, spacing, values.ndim, max(values.shape) - 1)
    conv = kernels.convolve_full(values, kern)
    sl = tuple(slice(half, half + n) for n in values.shape)
    return conv[sl] * spacing**values.ndim


def grid_pair_energy(a: np.ndarray, b: np.ndarray, w: RadialKernel, spacing: float) -> float:
    """sum_{x,y} a(x) w(x - y) b(y) h^{2d} on a shared grid."""
    return float(np.sum(a * grid_potential(b, w, spacing)) * spacing**a.ndim)


def convolve_with_chi(f: GridDensity, chi_r: RadialKernel) -> GridDensity:
    """(f * chi_r) by direct summation, on f's grid grown by the kernel radius."""
    kern, half = kernel_offsets(chi_r, f.spacing, f.dimension)
    vals = kernels.convolve_full(f.values, kern) * f.spacing**f.dimension
    origin = tuple(o - half * f.spacing for o in f.origin)
    return GridDensity(origin, f.spacing, np.maximum(vals, 0.0) if np.all(kern >= 0) else vals)
