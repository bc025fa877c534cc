import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfgamma.bounds import (
    LIEB_OXFORD_CONSTANT,
    hartree_direct,
    interaction_channel,
    lieb_oxford_rhs,
    march_young_upper,
    sqrt_gradient_integral,
)
from tfgamma.densities import GridDensity, RadialDensity
from tfgamma.errors import UnsupportedDimensionError, ValidationError
from tfgamma.fermi_box import (
    build_recovery,
    sea_density,
    slater_direct_interaction,
    slater_exchange_interaction,
)
from tfgamma.potentials import BallChiFamily, ZeroChiFamily, coulomb_chi, coulomb_kernel, zero_kernel
from tfgamma.tf import kcl


def radial_gaussian(n=1500, R=10.0):
    return RadialDensity.from_function(lambda r: np.exp(-r**2 / 2) / (2 * np.pi) ** 1.5, R, n, 3)


def uniform_ball(n=800):
    return RadialDensity.from_function(lambda r: np.full_like(r, 3 / (4 * np.pi)), 1.0, n, 3, "uniform")


def test_hartree_examples():
    f = radial_gaussian()
    assert hartree_direct(f, zero_kernel()) == 0.0
    # 1/2 iint for a unit Gaussian: 1/(2 sqrt(pi))
    assert hartree_direct(f, coulomb_kernel()) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-6)
    assert hartree_direct(uniform_ball(), coulomb_kernel()) == pytest.approx(0.6, rel=1e-6)
    assert hartree_direct(f.scaled(2.0), coulomb_kernel()) == pytest.approx(4 * hartree_direct(f, coulomb_kernel()), rel=1e-12)


def test_hartree_grid_bilinear(rng):
    f = GridDensity((0.0, 0.0), 0.1, rng.random((12, 12)))
    from tfgamma.potentials import constant_kernel

    w = constant_kernel(1.0, 0.35)
    assert hartree_direct(f.scaled(2.0), w) == pytest.approx(4 * hartree_direct(f, w), rel=1e-12)
    assert hartree_direct(f, w) > 0


def test_lieb_oxford_examples():
    assert LIEB_OXFORD_CONSTANT == 1.68
    ball = uniform_ball()
    int43 = (3 / (4 * np.pi)) ** (1 / 3)  # int over the unit ball of (3/(4 pi))^{4/3}
    assert lieb_oxford_rhs(ball, 10) == pytest.approx(0.6 - 1.68 * 10 ** (-2 / 3) * int43, rel=1e-6)
    f = radial_gaussian()
    assert lieb_oxford_rhs(f, 1e12) == pytest.approx(hartree_direct(f, coulomb_kernel()), rel=1e-6)
    with pytest.raises(UnsupportedDimensionError):
        lieb_oxford_rhs(GridDensity((0.0,), 0.1, np.ones(10)), 10)


def gaussian3d(n=16, L=4.0):
    f = GridDensity.from_function(lambda x, y, z: np.exp(-(x**2 + y**2 + z**2)), [-L] * 3, [L] * 3, n)
    return f.scaled(1 / f.mass())


@pytest.mark.parametrize("N", [1, 2, 3, 5, 8])
def test_lieb_oxford_on_recovery_seas(N):
    sea = build_recovery(gaussian3d(), N, 1)
    rho = sea_density(sea)
    w = coulomb_kernel()
    total = slater_direct_interaction(rho, w) + slater_exchange_interaction(sea, w)
    assert total / N**2 >= lieb_oxford_rhs(rho.scaled(1 / N), N)


def test_channel_zero_family():
    res = interaction_channel(radial_gaussian(), ZeroChiFamily(3), 100)
    assert res.value == 0.0


def test_channel_samples_reproduce_value():
    res = interaction_channel(radial_gaussian(400), coulomb_chi(), 100, panels=8, order=8)
    total = sum(wr * float(np.dot(wz, s)) for wr, wz, s in zip(res.r_weights, res.z_weights, res.samples))
    assert res.value == pytest.approx(total, rel=1e-13)
    assert all(np.all(s >= 0) for s in res.samples)
    lines = res.to_csv().splitlines()
    assert lines[0] == "r,z_index,integrand"
    assert len(lines) == 1 + sum(len(s) for s in res.samples)


def test_channel_matches_hartree_through_chi():
    f = radial_gaussian()
    full = interaction_channel(f, coulomb_chi(), math.inf)
    assert full.value == pytest.approx(hartree_direct(f, coulomb_kernel()), rel=1e-4)


def test_channel_fatou_trend():
    f = radial_gaussian()
    hartree = hartree_direct(f, coulomb_kernel())
    vals = [interaction_channel(f, coulomb_chi(), N).value for N in (1e2, 1e3, 1e4)]
    assert vals[0] <= vals[1] <= vals[2] <= hartree * (1 + 1e-9)
    assert vals[2] == pytest.approx(hartree, rel=1e-2)


@settings(max_examples=12)
@given(st.floats(1, 1e5), st.floats(0, 3))
def test_channel_dominated_by_hartree(N, lam):
    f = radial_gaussian(300, 8.0)
    res = interaction_channel(f, coulomb_chi(), N, lam=lam, panels=8, order=8)
    full = interaction_channel(f, coulomb_chi(), math.inf, panels=8, order=8)
    assert res.value <= lam * N * full.value * (1 + 1e-12) + 1e-15


def test_grid_channel_one_dimensional():
    f = GridDensity.from_function(lambda x: np.exp(-x**2 / 2), [-6], [6], 240)
    f = f.scaled(1 / f.mass())
    chi = BallChiFamily(1, lambda r: 1.0, r_min=0.1, r_max=1.0)
    small = interaction_channel(f, chi, 10).value
    big = interaction_channel(f, chi, 1e4).value
    full = interaction_channel(f, chi, math.inf).value
    assert 0 <= small <= big <= full * (1 + 1e-12)
    assert big == pytest.approx(full, rel=5e-3)


def test_channel_validation():
    f = radial_gaussian(200)
    with pytest.raises(ValidationError):
        interaction_channel(f, coulomb_chi(), 0.5)
    with pytest.raises(ValidationError):
        interaction_channel(f, coulomb_chi(), 10, lam=-1)
    with pytest.raises(ValidationError):
        interaction_channel(GridDensity((0.0,), 0.1, np.ones(20)), coulomb_chi(), 10)


def test_march_young_indicator():
    f = GridDensity.from_function(lambda x: ((x >= 0) & (x < 1)).astype(float), [-1], [2], 300)
    assert sqrt_gradient_integral(f) == 0.0
    assert march_young_upper(f, 10) == pytest.approx(math.pi**2 / 3, rel=1e-12)


def test_march_young_gaussian():
    f = GridDensity.from_function(lambda x: np.exp(-x**2 / 2) / math.sqrt(2 * math.pi), [-10], [10], 4000)
    assert sqrt_gradient_integral(f) == pytest.approx(0.25, rel=1e-4)
    kin = kcl(1) * float(np.sum(f.values**3) * f.spacing)
    assert march_young_upper(f, 1e8) == pytest.approx(kin, rel=1e-12)
    assert march_young_upper(f, 10) == pytest.approx(kin + 0.25 / 100, rel=1e-4)
