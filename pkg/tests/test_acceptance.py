"""The ten acceptance criteria, each with its tolerance and runtime budget."""

import math
import time

import numpy as np
import pytest

from tfgamma.bounds import hartree_direct, interaction_channel, lieb_oxford_rhs
from tfgamma.densities import Cube, CubePartition, Grid, GridDensity, RadialDensity, StepDensity, lp_distance
from tfgamma.experiments import ExperimentConfig, load_config, quantum_energy, run_gamma_experiment
from tfgamma.fermi_box import (
    FermiSea,
    build_recovery,
    gram_matrix,
    hoffmann_ostenhof_gap,
    sea_density,
    sea_kinetic,
    slater_direct_interaction,
    slater_exchange_interaction,
)
from tfgamma.potentials import coulomb_chi, coulomb_kernel, fdll_reconstruct, harmonic_potential
from tfgamma.spectral import dual_lower_bound, optimal_potential, weyl_convergence_table
from tfgamma.tf import TFProblem, atomic_energy_oracle, atomic_problem, kcl, tf_atom_shoot, tf_minimize

from pathlib import Path

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


class Clock:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start


def test_criterion_01_box_kinetic_limit(acceptance):
    acceptance["label"] = "criterion 1 (box kinetic limit)"
    M = 1000
    with Clock() as clock:
        sea = FermiSea.filled(CubePartition(1, (Cube((0.0,), 1.0),)), [M])
        value = sea_kinetic(sea) / M**3
    exact = math.pi**2 * M * (M + 1) * (2 * M + 1) / (6 * M**3)
    acceptance["detail"] = f"value={value:.9f} closed form={exact:.9f} t={clock.elapsed:.3f}s"
    assert value == exact
    assert abs(value / kcl(1) - 1) <= 5e-3
    assert clock.elapsed < 1.0


def test_criterion_02_recovery_density(acceptance):
    acceptance["label"] = "criterion 2 (recovery density convergence)"
    with Clock() as clock:
        f = GridDensity.from_function(lambda x: ((x >= 0) & (x < 1)).astype(float), [0], [1], 10_000)
        sea = build_recovery(f, 200, 1)
        rho = sea_density(sea, Grid((0.0,), 1e-4, (10_000,)))
        dist = lp_distance(rho.scaled(1 / 200), f, 1)
    acceptance["detail"] = f"L1={dist:.5f} t={clock.elapsed:.2f}s"
    assert dist <= 0.02
    assert clock.elapsed < 10.0


def test_criterion_03_harmonic_gse(acceptance):
    acceptance["label"] = "criterion 3 (harmonic ground state energy)"
    with Clock() as clock:
        cfg = ExperimentConfig("gse", external={"type": "harmonic", "strength": 1.0},
                               grid={"lower": [-8], "upper": [8], "n": 2048}, NList=[1])
        quantum = [quantum_energy(cfg, N)[0] for N in (1, 2, 10, 100, 1000, 10_000)]
        mesh = GridDensity.from_function(lambda x: 0 * x, [-8], [8], 2048)
        sol = tf_minimize(TFProblem(1, external=harmonic_potential()), mesh, tol=1e-10)
        exact = GridDensity.from_function(lambda x: np.sqrt(np.maximum(2 - x**2, 0)) / np.pi, [-8], [8], 2048)
        l1 = lp_distance(sol.density, exact, 1)
    acceptance["detail"] = (f"max|E_QM/N-1|={max(abs(q - 1) for q in quantum):.1e} "
                            f"E_TF={sol.energy.total:.8f} L1={l1:.2e} t={clock.elapsed:.2f}s")
    assert all(q == pytest.approx(1.0, rel=1e-14) for q in quantum)
    assert abs(sol.energy.total - 1.0) <= 1e-4
    assert l1 <= 1e-3
    assert clock.elapsed < 30.0


def test_criterion_04_fdll(acceptance):
    acceptance["label"] = "criterion 4 (Coulomb kernel reconstruction)"
    chi = coulomb_chi(3)
    with Clock() as clock:
        errs = [abs(fdll_reconstruct(chi, [s, 0.0, 0.0]) * s - 1.0) for s in (0.1, 0.5, 1.0, 4.0, 10.0)]
    acceptance["detail"] = f"max rel err={max(errs):.1e} t={clock.elapsed:.3f}s"
    assert max(errs) <= 1e-6
    assert clock.elapsed < 1.0


def test_criterion_05_weyl(acceptance):
    acceptance["label"] = "criterion 5 (Weyl law)"
    with Clock() as clock:
        table = weyl_convergence_table(lambda x: np.maximum(1 - x**2, 0.0), [1e-1, 1e-2, 1e-3], (-1, 1))
    ratios = table.ratios
    acceptance["detail"] = "ratios=" + ",".join(f"{r:.5f}" for r in ratios) + f" t={clock.elapsed:.1f}s"
    assert table.rows[-1].weyl == pytest.approx(-0.25 / 1e-3, rel=1e-10)
    assert abs(ratios[-1] - 1) <= 0.02
    devs = [abs(r - 1) for r in ratios]
    assert devs[0] > devs[1] > devs[2]
    assert clock.elapsed < 60.0


def _random_step(rng, d):
    cells = int(rng.integers(1, min(9, 6**d + 1)))
    corners = rng.choice(6**d, size=cells, replace=False)
    cubes = []
    for c in corners:
        idx = np.unravel_index(c, (6,) * d)
        side = float(rng.choice([0.5, 1.0]))
        # sides of 0.5 or 1 on a unit lattice never overlap
        cubes.append(Cube(tuple(float(i) for i in idx), side))
    levels = rng.random(cells) + 1e-3
    step = StepDensity(CubePartition(d, tuple(cubes)), levels)
    return StepDensity(step.partition, levels / step.mass())


def test_criterion_06_legendre_duality(acceptance):
    acceptance["label"] = "criterion 6 (Legendre duality)"
    rng = np.random.default_rng(6)
    worst_eq = 0.0
    worst_gap = math.inf
    with Clock() as clock:
        for d in (1, 3):
            for _ in range(20):
                f = _random_step(rng, d)
                vols = np.array([c.volume for c in f.partition.cubes])
                kin = kcl(d) * float(np.dot(vols, np.asarray(f.levels) ** (1 + 2 / d)))
                at_opt = dual_lower_bound(f, optimal_potential(f))
                worst_eq = max(worst_eq, abs(at_opt - kin) / kin)
                Ustar = np.asarray(optimal_potential(f).levels)
                for _ in range(100):
                    U = Ustar * rng.uniform(0, 3, Ustar.shape) * (rng.random() < 0.5) + rng.exponential(2.0, Ustar.shape) * rng.random()
                    worst_gap = min(worst_gap, kin - dual_lower_bound(f, U))
    acceptance["detail"] = f"max rel |dual(U*)-K int f^(1+2/d)|={worst_eq:.1e} min slack={worst_gap:.2e} t={clock.elapsed:.2f}s"
    assert worst_eq <= 1e-8
    assert worst_gap >= -1e-12
    assert clock.elapsed < 10.0


def test_criterion_07_channel_fatou(acceptance):
    acceptance["label"] = "criterion 7 (interaction channel Fatou limit)"
    with Clock() as clock:
        f = RadialDensity.from_function(lambda r: np.exp(-r**2 / 2) / (2 * np.pi) ** 1.5, 10.0, 1500, 3)
        H = hartree_direct(f, coulomb_kernel())
        vals = [interaction_channel(f, coulomb_chi(), N).value for N in (1e2, 1e3, 1e4)]
    ratios = [v / H for v in vals]
    acceptance["detail"] = "channel/Hartree=" + ",".join(f"{r:.5f}" for r in ratios) + f" t={clock.elapsed:.1f}s"
    assert abs(ratios[-1] - 1) <= 1e-2
    assert all(b >= a * (1 - 1e-3) for a, b in zip(vals, vals[1:]))
    assert clock.elapsed < 60.0


def _sea_matrix():
    def grid_gauss(d, n, L=4.0):
        f = GridDensity.from_function(lambda *x: np.exp(-sum(xi**2 for xi in x)), [-L] * d, [L] * d, n)
        return f.scaled(1 / f.mass())

    def grid_indicator(d, n):
        return GridDensity.from_function(lambda *x: np.ones(np.broadcast(*x).shape), [0] * d, [1] * d, n)

    seas = []
    for N, k in ((1, 1), (7, 2), (50, 4), (300, 8)):
        seas.append(("1d gauss", build_recovery(grid_gauss(1, 512), N, k)))
    seas.append(("1d indicator", build_recovery(grid_indicator(1, 64), 40, 1)))
    for N, k in ((3, 1), (20, 3), (60, 5)):
        seas.append(("2d gauss", build_recovery(grid_gauss(2, 64), N, k)))
    for N in (1, 2, 4, 8):
        seas.append(("3d gauss", build_recovery(grid_gauss(3, 16), N, 1)))
    return seas


def test_criterion_08_inequalities(acceptance):
    acceptance["label"] = "criterion 8 (inequality properties)"
    w = coulomb_kernel()
    gram_err, ho_worst, lo_worst = 0.0, math.inf, math.inf
    with Clock() as clock:
        seas = _sea_matrix()
        for name, sea in seas:
            N = sea.total_particles
            gram_err = max(gram_err, float(np.max(np.abs(gram_matrix(sea) - np.eye(N)))))
            T = sea_kinetic(sea)
            ho_worst = min(ho_worst, hoffmann_ostenhof_gap(sea) / T)
            if sea.dimension == 3:
                rho = sea_density(sea)
                total = slater_direct_interaction(rho, w) + slater_exchange_interaction(sea, w)
                lo_worst = min(lo_worst, total / N**2 - lieb_oxford_rhs(rho.scaled(1 / N), N))
    acceptance["detail"] = (f"{len(seas)} seas: max|G-I|={gram_err:.1e} min HO/T={ho_worst:.2e} "
                            f"min LO slack={lo_worst:.3f} t={clock.elapsed:.1f}s")
    assert gram_err <= 1e-8
    assert ho_worst >= -1e-6
    assert lo_worst >= 0
    assert clock.elapsed < 120.0


def test_criterion_09_tf_atom(acceptance):
    acceptance["label"] = "criterion 9 (TF atom oracle)"
    with Clock() as clock:
        shoot = tf_atom_shoot(1e-8)
        energies = {}
        for Z in (1.0, 2.0, 4.0):
            mesh = RadialDensity.from_function(lambda t: 0 * t, 60.0, 4000, 3, "sqrt")
            energies[Z] = tf_minimize(atomic_problem(Z, 2), mesh).energy.total
    oracle = atomic_energy_oracle(1.0, 2, shoot.slope)
    scaled = {Z: E / Z ** (7 / 3) for Z, E in energies.items()}
    spread = max(abs(s / scaled[1.0] - 1) for s in scaled.values())
    acceptance["detail"] = (f"B={shoot.slope:.7f} E(Z=1)={energies[1.0]:.6f} oracle={oracle:.6f} "
                            f"Z^(7/3) spread={spread:.1e} t={clock.elapsed:.1f}s")
    assert abs(shoot.slope - 1.588071) <= 1e-3
    assert abs(energies[1.0] / oracle - 1) <= 1e-2
    assert spread <= 5e-3
    assert clock.elapsed < 120.0


def test_criterion_10_gamma_pipeline(acceptance):
    acceptance["label"] = "criterion 10 (Gamma upper-bound pipeline)"
    with Clock() as clock:
        cfg = load_config(CONFIGS / "gamma_gaussian.cfg")
        report = run_gamma_experiment(cfg)
    assert [r.N for r in report.rows] == [200, 2000]
    last = report.rows[-1]
    rel = [abs(r.gap) / abs(r.tf_total) for r in report.rows]
    acceptance["detail"] = (f"k_N={[r.k for r in report.rows]} E_N/N={last.total:.6f} E_TF={last.tf_total:.6f} "
                            f"rel gaps={rel[0]:.4f},{rel[1]:.4f} t={clock.elapsed:.1f}s")
    assert rel[-1] <= 0.05
    assert rel[1] < rel[0]
    assert clock.elapsed < 300.0
