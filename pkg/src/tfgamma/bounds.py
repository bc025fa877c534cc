"""Inequality diagnostics: the interaction channel, Hartree, Lieb-Oxford, March-Young.

The interaction channel is

    lam N^{-1} int_0^inf dr int dz [N^2/2 (f*chi_r)^2(z) - N (f*chi_r^2)(z)]_+

which tends to the Hartree energy 1/2 iint f f w as N grows with lam = 1/N.
For radial densities in d = 3 and ball families chi_r = a(r) 1_{B_r} both
convolutions reduce to a(r)^p (f * 1_{B_r}) and are evaluated in radial
coordinates; otherwise they are summed on the density's grid.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .densities import GridDensity, RadialDensity
from .errors import UnsupportedDimensionError, ValidationError
from .kernels import radial_ball_overlap
from .potentials import (
    BallChiFamily,
    ChiFamily,
    RadialKernel,
    convolve_with_chi,
    coulomb_kernel,
    grid_pair_energy,
)

LIEB_OXFORD_CONSTANT = 1.68


@dataclass(frozen=True, eq=False)
class ChannelResult:
    """Channel value with the samples it was assembled from.

    ``value == sum_i r_weights[i] * dot(z_weights[i], samples[i])``.
    """

    value: float
    r: np.ndarray
    r_weights: np.ndarray
    z_weights: tuple
    samples: tuple

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["r", "z_index", "integrand"])
        for r, s in zip(self.r, self.samples):
            for j, v in enumerate(s):
                writer.writerow([repr(float(r)), j, repr(float(v))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def _gauss_panels(edges, order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    a, b = np.asarray(edges[:-1]), np.asarray(edges[1:])
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _r_rule(r_lo: float, r_hi: float, scale: float, panels: int, order: int):
    """Nodes and weights on [r_lo, r_hi] (r_hi may be inf).

    Geometric panels between scale/64 and 4 scale, one panel down to r_lo,
    and a 1/r substitution on the unbounded tail.
    """
    split = min(r_hi, 4.0 * scale)
    start = max(r_lo, scale / 64.0)
    nodes, weights = [], []
    if r_lo < start:
        x, w = _gauss_panels(np.linspace(r_lo, start, max(1, panels // 8) + 1), order)
        nodes.append(x)
        weights.append(w)
    if start < split:
        x, w = _gauss_panels(np.geomspace(start, split, panels + 1), order)
        nodes.append(x)
        weights.append(w)
    if r_hi > split:
        u_hi = 1.0 / split
        u_lo = 0.0 if math.isinf(r_hi) else 1.0 / r_hi
        u, wu = _gauss_panels(np.linspace(u_lo, u_hi, max(1, panels // 4) + 1), order)
        nodes.append(1.0 / u)
        weights.append(wu / u**2)
    return np.concatenate(nodes), np.concatenate(weights)


def _rho_rule(r: float, R: float, order: int, sub: int = 4):
    """Radial z-nodes on [0, r + R] with breakpoints where f * 1_{B_r} kinks."""
    top = r + R
    cuts = sorted({0.0, top, *(b for b in (abs(r - R), r, R) if 0 < b < top)})
    edges = np.concatenate([np.linspace(a, b, sub + 1)[:-1] for a, b in zip(cuts[:-1], cuts[1:])] + [[top]])
    return _gauss_panels(edges, order)


def _radial_channel(f: RadialDensity, chi: BallChiFamily, N: float, lam: float, panels: int, order: int):
    R = f.radius
    wf = f.weights * f.values
    mass = f.mass()
    r_lo = max(chi.r_min, 0.0)
    r_nodes, r_w = _r_rule(r_lo, chi.r_max, R, panels, order)
    z_weights, samples = [], []
    total = 0.0
    for r, wr in zip(r_nodes, r_w):
        rho, wrho = _rho_rule(r, R, order)
        A = radial_ball_overlap(f.radii, wf, rho, r)
        # nodes swallowed by the ball see the whole mass
        A = np.where(rho + R <= r, mass, A)
        a2 = float(chi.amplitude(r)) ** 2
        bracket = 0.5 * A * A - A / N if math.isfinite(N) else 0.5 * A * A
        s = lam * N * a2 * np.maximum(bracket, 0.0) if math.isfinite(N) else a2 * bracket
        wz = 4.0 * math.pi * rho**2 * wrho
        z_weights.append(wz)
        samples.append(s)
        total += wr * float(np.dot(wz, s))
    return ChannelResult(float(total), r_nodes, r_w, tuple(z_weights), tuple(samples))


def _grid_channel(f: GridDensity, chi: ChiFamily, N: float, lam: float, panels: int, order: int, r_cap):
    lo, hi = np.array(f.origin), np.array(f.grid.upper)
    diameter = float(np.linalg.norm(hi - lo))
    r_min = max(getattr(chi, "r_min", 0.0), 0.0)
    r_max = min(getattr(chi, "r_max", math.inf), r_cap if r_cap is not None else 4.0 * diameter)
    r_nodes, r_w = _r_rule(r_min, r_max, 0.5 * diameter, panels, order)
    cell = f.grid.cell_volume
    z_weights, samples = [], []
    total = 0.0
    for r, wr in zip(r_nodes, r_w):
        k = chi.at(r)
        B = convolve_with_chi(f, k).values
        if math.isfinite(N):
            C = convolve_with_chi(f, chi.squared_at(r)).values
            s = lam / N * np.maximum(0.5 * N * N * B * B - N * C, 0.0)
        else:
            s = 0.5 * B * B
        s = s.ravel()
        wz = np.full(s.shape, cell)
        z_weights.append(wz)
        samples.append(s)
        total += wr * float(np.sum(s) * cell)
    return ChannelResult(float(total), r_nodes, r_w, tuple(z_weights), tuple(samples))


def interaction_channel(f, chi: ChiFamily, N: float, lam: float | None = None,
                        panels: int = 24, order: int = 16, r_cap: float | None = None) -> ChannelResult:
    """The positive-part interaction channel; ``lam`` defaults to 1/N.

    ``N = inf`` drops the subtraction and returns 1/2 int dr int (f*chi_r)^2.
    Radial densities need a ball family in d = 3; grid densities truncate
    the r integral at ``r_cap`` (default four times the grid diameter).
    """
    if not N >= 1:
        raise ValidationError("N must be at least 1")
    lam = (1.0 / N if math.isfinite(N) else 0.0) if lam is None else float(lam)
    if lam < 0:
        raise ValidationError("lambda must be nonnegative")
    if chi.is_zero():
        return ChannelResult(0.0, np.zeros(0), np.zeros(0), (), ())
    if chi.dimension != f.dimension:
        raise ValidationError("chi family and density dimensions differ")
    if isinstance(f, RadialDensity):
        if f.dimension != 3 or not isinstance(chi, BallChiFamily):
            raise UnsupportedDimensionError("the radial channel needs d = 3 and a ball family")
        return _radial_channel(f, chi, float(N), lam, panels, order)
    if isinstance(f, GridDensity):
        return _grid_channel(f, chi, float(N), lam, panels, order, r_cap)
    raise ValidationError(f"unsupported density {type(f).__name__}")


def newton_hartree(f: RadialDensity) -> float:
    from .tf import newton_potential

    return 0.5 * float(np.dot(f.shell_weights, f.values * newton_potential(f)))


def hartree_direct(f, w: RadialKernel | None) -> float:
    """1/2 iint f(x) f(y) w(x - y) dx dy."""
    if w is None or w.name == "zero":
        return 0.0
    if isinstance(f, RadialDensity):
        if w.name != "coulomb3d" or f.dimension != 3:
            raise UnsupportedDimensionError("radial Hartree energies need d = 3 and a Coulomb kernel")
        return float(w(1.0)) * newton_hartree(f)
    if isinstance(f, GridDensity):
        return 0.5 * grid_pair_energy(f.values, f.values, w, f.spacing)
    raise ValidationError(f"unsupported density {type(f).__name__}")


def _integral_power(f, p: float) -> float:
    if isinstance(f, RadialDensity):
        return float(np.dot(f.shell_weights, f.values**p))
    return float(np.sum(f.values**p) * f.grid.cell_volume)


def lieb_oxford_rhs(f, N: float) -> float:
    """1/2 iint f f / |x - y| - 1.68 N^{-2/3} int f^{4/3} (d = 3)."""
    if f.dimension != 3:
        raise UnsupportedDimensionError("the Lieb-Oxford bound is stated in three dimensions")
    return hartree_direct(f, coulomb_kernel()) - LIEB_OXFORD_CONSTANT * N ** (-2 / 3) * _integral_power(f, 4 / 3)


def sqrt_gradient_integral(f: GridDensity, floor: float = 1e-12) -> float:
    """int |d sqrt f / dx|^2 in d = 1, skipping cells at jumps of the support.

    Cells next to the edge of {f > floor} are left out (for indicator
    densities they carry a spurious spike); the first and last grid cells
    use one-sided differences.
    """
    if f.dimension != 1:
        raise UnsupportedDimensionError("the gradient diagnostic is one-dimensional")
    v = f.values
    if v.size < 3:
        raise ValidationError("need at least three cells")
    root = np.sqrt(np.maximum(v, floor))
    grad = np.gradient(root, f.spacing)
    inside = v > floor
    edge = np.zeros_like(inside)
    edge[1:] |= inside[1:] != inside[:-1]
    edge[:-1] |= inside[1:] != inside[:-1]
    keep = inside & ~edge
    return float(np.sum(grad[keep] ** 2) * f.spacing)


def march_young_upper(f: GridDensity, N: float, q: int = 1, floor: float = 1e-12) -> float:
    """K_cl int f^3 + N^{-2} int |d sqrt f|^2 for a d = 1 grid density."""
    from .tf import kcl

    if f.dimension != 1:
        raise UnsupportedDimensionError("the March-Young diagnostic is one-dimensional")
    return kcl(1, q) * _integral_power(f, 3.0) + N ** -2.0 * sqrt_gradient_integral(f, floor)


__all__ = [
    "ChannelResult",
    "LIEB_OXFORD_CONSTANT",
    "hartree_direct",
    "interaction_channel",
    "lieb_oxford_rhs",
    "march_young_upper",
    "newton_hartree",
    "sqrt_gradient_integral",
]
