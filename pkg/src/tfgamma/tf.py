"""Thomas-Fermi functional: evaluation, minimization and the atomic oracle.

    E(f) = K_cl int f^{1+2/d} + int V f + 1/2 iint f(x) f(y) w(x - y)

Densities are either :class:`~tfgamma.densities.GridDensity` (any d, direct
grid convolution for w) or :class:`~tfgamma.densities.RadialDensity` (d = 3
with a Coulomb or absent interaction, via Newton's shell theorem).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .densities import Grid, GridDensity, RadialDensity
from .errors import (
    ConvergenceError,
    InfeasibleConstraintError,
    ShootingError,
    UnsupportedDimensionError,
    ValidationError,
)
from .potentials import ChiFamily, RadialKernel, ball_volume, grid_potential, sample_potential

log = logging.getLogger(__name__)

# -Z/r atom: E = -(3/7) B / b Z^{7/3} in Hartree units with b = (3 pi)^{2/3} / 2^{7/3}
TF_LENGTH_B = (3 * math.pi) ** (2 / 3) / 2 ** (7 / 3)
TF_SLOPE_REFERENCE = 1.588071022611375


def kcl(d: int, q: int = 1) -> float:
    """Semiclassical constant d/(d+2) (2 pi)^2 / (q |B_d|)^{2/d}."""
    if d < 1 or q < 1:
        raise ValidationError("need d >= 1 and q >= 1")
    return d / (d + 2) * (2 * math.pi) ** 2 / (q * ball_volume(d)) ** (2 / d)


@dataclass(frozen=True)
class TFProblem:
    """Data of a Thomas-Fermi problem.

    ``constraint`` is ``"equal"`` or ``"atMost"``; ``mass`` is the
    constrained total (1 for the normalized densities of the Gamma limit).
    """

    dimension: int
    q: int = 1
    external: object = None
    interaction: RadialKernel | None = None
    chi: ChiFamily | None = None
    constraint: str = "equal"
    mass: float = 1.0

    def __post_init__(self):
        if self.dimension < 1:
            raise ValidationError("dimension must be at least 1")
        if int(self.q) != self.q or self.q < 1:
            raise ValidationError("spin degeneracy q must be a positive integer")
        if self.constraint not in ("equal", "atMost"):
            raise ValidationError("constraint must be 'equal' or 'atMost'")
        if not self.mass > 0:
            raise ValidationError("mass must be positive")

    @property
    def K(self) -> float:
        return kcl(self.dimension, self.q)


@dataclass(frozen=True)
class TFEnergy:
    kinetic: float
    external: float
    interaction: float
    total: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "total", self.kinetic + self.external + self.interaction)

    def as_dict(self) -> dict:
        return {"kinetic": self.kinetic, "external": self.external, "interaction": self.interaction, "total": self.total}


@dataclass(frozen=True, eq=False)
class TFSolution:
    density: object
    energy: TFEnergy
    mu: float
    iterations: int
    residual: float
    unsaturated: bool = False

    def to_json(self, density_ref: str | None = None) -> dict:
        return {
            "energy": self.energy.as_dict(),
            "mu": self.mu,
            "iterations": self.iterations,
            "residual": self.residual,
            "unsaturated": self.unsaturated,
            "density_ref": density_ref,
        }


# ---------------------------------------------------------------------------
# discretized pieces
# ---------------------------------------------------------------------------


def _is_coulomb(w) -> bool:
    return isinstance(w, RadialKernel) and w.name == "coulomb3d"


def newton_potential(f: RadialDensity, charge: float = 1.0) -> np.ndarray:
    """charge * (f * 1/|x|) at the radial nodes, by the shell theorem.

    Each node's own shell is split half inside, half outside.
    """
    if f.dimension != 3:
        raise UnsupportedDimensionError("the shell theorem is used in d = 3 only")
    q = f.shell_weights * f.values
    inner = np.cumsum(q) - 0.5 * q
    outer_terms = q / f.radii
    outer = np.cumsum(outer_terms[::-1])[::-1] - 0.5 * outer_terms
    return charge * (inner / f.radii + outer)


class _Discretization:
    """Quadrature weights, external potential and interaction on one mesh."""

    def __init__(self, problem: TFProblem, mesh):
        self.problem = problem
        self.mesh = mesh
        if isinstance(mesh, RadialDensity):
            if problem.dimension != mesh.dimension:
                raise ValidationError("radial mesh dimension differs from the problem")
            self.weights = mesh.shell_weights
            V = problem.external
            if V is None:
                self.V = np.zeros_like(mesh.radii)
            elif isinstance(V, (int, float)):
                self.V = np.full_like(mesh.radii, float(V))
            else:
                self.V = np.asarray(V(mesh.radii), dtype=float)
            w = problem.interaction
            if w is not None and w.name != "zero" and not _is_coulomb(w):
                raise UnsupportedDimensionError("radial problems support Coulomb or no interaction")
            self._coulomb_charge = float(w(1.0)) if _is_coulomb(w) else None
        else:
            grid = mesh if isinstance(mesh, Grid) else mesh.grid
            if grid.dimension != problem.dimension:
                raise ValidationError("grid dimension differs from the problem")
            self.grid = grid
            self.weights = np.full(grid.extents, grid.cell_volume)
            self.V = sample_potential(problem.external, grid)
            w = problem.interaction
            self._w = None if (w is None or w.name == "zero") else w

    @property
    def has_interaction(self) -> bool:
        if isinstance(self.mesh, RadialDensity):
            return self._coulomb_charge is not None
        return self._w is not None

    def potential(self, values: np.ndarray) -> np.ndarray:
        """w * f on the mesh."""
        if not self.has_interaction:
            return np.zeros_like(values)
        if isinstance(self.mesh, RadialDensity):
            return newton_potential(self.mesh.with_values(values), self._coulomb_charge)
        return grid_potential(values, self._w, self.grid.spacing)

    def density(self, values):
        if isinstance(self.mesh, RadialDensity):
            return self.mesh.with_values(values)
        return GridDensity(self.grid.origin, self.grid.spacing, values)

    def mass(self, values) -> float:
        return float(np.sum(self.weights * values))

    def energy(self, values, pot=None) -> TFEnergy:
        d = self.problem.dimension
        kin = self.problem.K * float(np.sum(self.weights * values ** (1 + 2 / d)))
        ext = float(np.sum(self.weights * self.V * values))
        if self.has_interaction:
            pot = self.potential(values) if pot is None else pot
            inter = 0.5 * float(np.sum(self.weights * values * pot))
        else:
            inter = 0.0
        return TFEnergy(kin, ext, inter)


def _discretization_for(f, problem: TFProblem) -> _Discretization:
    if isinstance(f, GridDensity):
        return _Discretization(problem, f.grid)
    if isinstance(f, RadialDensity):
        return _Discretization(problem, f)
    raise ValidationError(f"cannot evaluate the functional on {type(f).__name__}")


def tf_energy(f, problem: TFProblem) -> TFEnergy:
    """Kinetic, external and interaction parts of E^TF(f) and their sum."""
    if f.dimension != problem.dimension:
        raise ValidationError("density and problem dimensions differ")
    return _discretization_for(f, problem).energy(f.values)


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------


def tf_profile(mu: float, U: np.ndarray, d: int, K: float) -> np.ndarray:
    """Pointwise minimizer [(mu - U)_+ / ((1 + 2/d) K)]^{d/2}."""
    return (np.maximum(mu - U, 0.0) / ((1 + 2 / d) * K)) ** (d / 2)


def _solve_mu(disc: _Discretization, U: np.ndarray, mu_crit: float):
    """Chemical potential meeting the constraint for a frozen potential U.

    Returns (mu, unsaturated).  Bisection on mu, using that the mass of
    the profile is nondecreasing in mu.
    """
    p = disc.problem
    d, K, M = p.dimension, p.K, p.mass

    def mass_at(mu):
        return disc.mass(tf_profile(mu, U, d, K))

    if p.constraint == "atMost" and mass_at(mu_crit) <= M:
        return mu_crit, mass_at(mu_crit) < M * (1 - 1e-12)
    lo = float(np.min(U))
    span = max(1.0, float(np.ptp(U)))
    hi = lo + span
    for _ in range(200):
        if mass_at(hi) >= M:
            break
        lo, hi = hi, hi + 2 * (hi - lo)
    else:
        raise InfeasibleConstraintError("could not bracket the chemical potential")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if mass_at(mid) < M:
            lo = mid
        else:
            hi = mid
    return hi, False


def _segment_minimizer(disc: _Discretization, f, g, pot_f, pot_g) -> float:
    """argmin over t in [0, 1] of E(f + t (g - f)); the functional is convex."""
    d = disc.problem.dimension
    K = disc.problem.K
    w = disc.weights
    delta = g - f
    lin_ext = float(np.sum(w * disc.V * delta))
    # interaction is quadratic along the segment
    cross = float(np.sum(w * delta * pot_f))
    quad = 0.5 * float(np.sum(w * delta * (pot_g - pot_f)))

    # E is convex along the segment, so its derivative is monotone; a root of
    # the derivative is far better conditioned than a minimum of E itself
    def slope(t):
        vals = np.maximum(f + t * delta, 0.0)
        kin = (1 + 2 / d) * K * vals ** (2 / d)
        return float(np.sum(w * delta * kin)) + lin_ext + cross + 2 * t * quad

    s0, s1 = slope(0.0), slope(1.0)
    if s1 <= 0:
        return 1.0
    if s0 >= 0:
        return 0.0
    return float(optimize.brentq(slope, 0.0, 1.0, xtol=1e-14))


def tf_minimize(
    problem: TFProblem,
    mesh,
    tol: float = 1e-9,
    damping="optimal",
    max_iter: int = 2000,
    mu_crit: float = 0.0,
) -> TFSolution:
    """Minimize E^TF by damped fixed-point iteration on the TF equation.

    Each step freezes w * f, solves f_new = [(mu - V - w*f)_+/((1+2/d)K)]^{d/2}
    with mu from bisection on the mass, and mixes f <- (1-t) f + t f_new.
    ``damping`` is a fixed t, or ``"optimal"`` to pick t by a line search on
    the (convex) energy.  Stops when |f_new - f|_inf / max(1, |f|_inf) < tol
    and the mass of |f_new - f| is below tol times the constrained mass.

    For ``atMost`` constraints, ``mu_crit`` is the level at infinity; if the
    profile at that level already fits the mass bound, mu = mu_crit and the
    solution is flagged ``unsaturated``.
    """
    if isinstance(mesh, GridDensity):
        mesh = mesh.grid
    disc = _Discretization(problem, mesh)
    d, K = problem.dimension, problem.K
    if problem.interaction is not None and problem.interaction.name != "zero":
        probe = problem.interaction(np.array([0.5, 1.0, 2.0]))
        if np.any(probe < 0):
            raise ValidationError("tf_minimize needs a nonnegative interaction kernel")

    pot = np.zeros_like(disc.V)
    mu, unsat = _solve_mu(disc, disc.V, mu_crit)
    f = tf_profile(mu, disc.V, d, K)
    pot = disc.potential(f)
    residual = math.inf
    for it in range(1, max_iter + 1):
        U = disc.V + pot
        mu, unsat = _solve_mu(disc, U, mu_crit)
        g = tf_profile(mu, U, d, K)
        residual = float(np.max(np.abs(g - f)) / max(1.0, float(np.max(np.abs(f)))))
        # singular densities make the sup norm blind to the far field
        l1_change = disc.mass(np.abs(g - f)) / problem.mass
        if (residual < tol and l1_change < tol) or not disc.has_interaction:
            if not disc.has_interaction:
                f, residual = g, 0.0
            log.debug("tf_minimize converged after %d iterations, residual %.3e", it, residual)
            return TFSolution(disc.density(f), disc.energy(f, pot), mu, it, residual, unsat)
        pot_g = disc.potential(g)
        t = _segment_minimizer(disc, f, g, pot, pot_g) if damping == "optimal" else float(damping)
        t = max(t, 1e-3)
        f = (1 - t) * f + t * g
        pot = (1 - t) * pot + t * pot_g
    raise ConvergenceError(f"tf_minimize did not converge in {max_iter} iterations", residual=residual)


def euler_lagrange_residual(solution: TFSolution, problem: TFProblem) -> float:
    """|f - [(mu - V - w*f)_+/((1+2/d)K)]^{d/2}|_inf / max(1, |f|_inf)."""
    f = solution.density
    disc = _discretization_for(f, problem)
    U = disc.V + disc.potential(f.values)
    g = tf_profile(solution.mu, U, problem.dimension, problem.K)
    return float(np.max(np.abs(g - f.values)) / max(1.0, float(np.max(f.values))))


# ---------------------------------------------------------------------------
# atomic oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ScreeningSolution:
    slope: float
    x: np.ndarray
    phi: np.ndarray


def _shoot(B: float, x_max: float):
    """Integrate phi'' = phi^{3/2}/sqrt(x) from the origin with phi'(0) = -B.

    Returns +1 if phi turns upward (B too small), -1 if it crosses zero
    (B too large), 0 if neither happens before x_max, plus the solution.
    """
    x0 = 1e-6
    # series: phi = 1 - B x + (4/3) x^{3/2} + ...
    y0 = [1 - B * x0 + 4.0 / 3.0 * x0**1.5, -B + 2.0 * x0**0.5]

    def rhs(x, y):
        return [y[1], max(y[0], 0.0) ** 1.5 / math.sqrt(x)]

    def hits_zero(x, y):
        return y[0]

    def turns_up(x, y):
        return y[1]

    hits_zero.terminal = True
    turns_up.terminal = True
    sol = integrate.solve_ivp(
        rhs, (x0, x_max), y0, method="DOP853", rtol=1e-12, atol=1e-14,
        events=(hits_zero, turns_up), dense_output=True,
    )
    if sol.t_events[0].size:
        return -1, sol
    if sol.t_events[1].size:
        return 1, sol
    return 0, sol


def tf_atom_shoot(tol: float = 1e-8, bracket=(1.5, 1.7), x_max: float = 200.0) -> ScreeningSolution:
    """Initial slope B = -phi'(0) of the neutral-atom screening function.

    Bisection on B until the bracket is narrower than ``tol``.  The samples
    cover the range on which the final trajectory stays positive and
    decreasing.
    """
    lo, hi = bracket
    s_lo, _ = _shoot(lo, x_max)
    s_hi, _ = _shoot(hi, x_max)
    if s_lo != 1 or s_hi != -1:
        raise ShootingError(f"bracket {bracket} does not enclose the screening slope")
    sol = None
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        sign, sol = _shoot(mid, x_max)
        if sign == 1:
            lo = mid
        elif sign == -1:
            hi = mid
        else:
            lo = hi = mid
    B = 0.5 * (lo + hi)
    _, sol = _shoot(B, x_max)
    x = sol.t
    phi = sol.y[0]
    keep = (phi > 0) & (sol.y[1] < 0)
    return ScreeningSolution(B, x[keep], phi[keep])


def atomic_energy_oracle(Z: float, q: int = 2, slope: float = TF_SLOPE_REFERENCE) -> float:
    """Neutral TF atom energy for -Z/|x| with kinetic constant kcl(3, q).

    The Hartree-unit value -(3/7)(B/b) Z^{7/3} (kinetic constant
    (3/10)(3 pi^2)^{2/3}) rescales by c/K under the change of constant.
    """
    c_hartree = 0.3 * (3 * math.pi**2) ** (2 / 3) * (2 / q) ** (2 / 3)
    return -(c_hartree / kcl(3, q)) * (3 / 7) * slope / TF_LENGTH_B * Z ** (7 / 3)


def atomic_problem(Z: float, q: int = 2, constraint: str = "atMost", mass: float | None = None) -> TFProblem:
    """Nucleus -Z/|x|, Coulomb repulsion, neutral mass Z unless given."""
    from .potentials import coulomb_kernel

    return TFProblem(3, q, coulomb_kernel(-Z), coulomb_kernel(1.0), None, constraint, Z if mass is None else mass)


# ---------------------------------------------------------------------------
# constraint relaxation and convexity checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RelaxedGap:
    gap: float
    table: list  # (index, ell, R, gap)


def _bump_profile(d: int):
    """Normalized (1 - |x|^2)_+^2 on the unit ball."""
    norm = unit_bump_mass(d)
    return lambda r: np.where(r < 1, (1 - r**2) ** 2, 0.0) / norm


def unit_bump_mass(d: int) -> float:
    from .densities import unit_sphere_area

    val, _ = integrate.quad(lambda r: (1 - r**2) ** 2 * r ** (d - 1), 0, 1)
    return unit_sphere_area(d) * val


def _bump_energy_increment(g: GridDensity, problem: TFProblem, missing: float, ell: float, R: float, n: int | None = None):
    """E(g + bump) - E(g) for a bump of mass ``missing`` and width 1/ell at distance R.

    The supports are taken disjoint, so the kinetic terms separate; the
    cross interaction is summed directly between the two grids.
    """
    d = problem.dimension
    n = n or {1: 512, 2: 96}.get(d, 32)
    width = 1.0 / ell
    centre = np.zeros(d)
    centre[0] = R
    h = 2 * width / n
    bump_grid = Grid(tuple(centre - width), h, (n,) * d)
    nodes = bump_grid.nodes()
    r = np.linalg.norm(nodes - centre, axis=-1)
    phi = missing * ell**d * _bump_profile(d)(ell * r)
    cell = h**d
    K = problem.K
    kin = K * float(np.sum(phi ** (1 + 2 / d)) * cell)
    ext = float(np.sum(sample_potential(problem.external, bump_grid) * phi) * cell)
    inter = 0.0
    w = problem.interaction
    if w is not None and w.name != "zero":
        inter += 0.5 * float(np.sum(phi * grid_potential(phi, w, h)) * cell)
        gn = g.grid.nodes().reshape(-1, d)
        gv = g.values.ravel()
        sel = gv > 0
        gn, gv = gn[sel], gv[sel] * g.grid.cell_volume
        bn = nodes.reshape(-1, d)
        bv = phi.ravel() * cell
        for start in range(0, bn.shape[0], 4096):
            dist = np.linalg.norm(bn[start:start + 4096, None, :] - gn[None, :, :], axis=-1)
            inter += float(bv[start:start + 4096] @ (w.on_grid(dist, min(h, g.spacing)) @ gv))
    return kin + ext + inter


def relaxed_constraint_gap(problem: TFProblem, gList, ells=(1e-1, 1e-2), Rs=(1e2, 1e3)) -> RelaxedGap:
    """Energy cost of restoring unit mass with a far, spread-out bump.

    For each g (mass <= problem.mass) and each (ell, R), reports
    E(g + ell^d phi(ell (. - R))) - E(g).  ``gap`` is the minimum over g at
    the smallest ell and largest R.
    """
    table = []
    final = []
    for i, g in enumerate(gList):
        missing = problem.mass - g.mass()
        if missing < -1e-9 * problem.mass:
            raise ValidationError(f"density {i} has mass above the constraint")
        for ell in ells:
            for R in Rs:
                gap = 0.0 if missing <= 1e-12 else _bump_energy_increment(g, problem, missing, ell, R)
                table.append((i, float(ell), float(R), gap))
        final.append(table[-1][3] if table else 0.0)
    return RelaxedGap(min(final) if final else 0.0, table)


def convexity_margin(g1, g2, problem: TFProblem) -> float:
    """1/2 E(g1) + 1/2 E(g2) - E((g1 + g2)/2)."""
    if isinstance(g1, GridDensity) and isinstance(g2, GridDensity):
        from .densities import common_grid

        grid = common_grid(g1, g2)
        g1, g2 = g1.resample(grid), g2.resample(grid)
        mid = GridDensity(grid.origin, grid.spacing, 0.5 * (g1.values + g2.values))
    elif isinstance(g1, RadialDensity) and isinstance(g2, RadialDensity):
        if not np.array_equal(g1.radii, g2.radii):
            raise ValidationError("radial densities must share nodes")
        mid = g1.with_values(0.5 * (g1.values + g2.values))
    else:
        raise ValidationError("convexity_margin needs two densities of the same kind")
    e1 = tf_energy(g1, problem).total
    e2 = tf_energy(g2, problem).total
    em = tf_energy(mid, problem).total
    return 0.5 * e1 + 0.5 * e2 - em
