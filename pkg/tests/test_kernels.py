import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfgamma import kernels
from tfgamma.kernels import numba_impl, numpy_impl


@settings(max_examples=20)
@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_convolve_parity(rank, seed):
    rng = np.random.default_rng(seed)
    a = rng.random(tuple(rng.integers(1, 12, rank)))
    k = rng.random(tuple(rng.integers(1, 6, rank)))
    np.testing.assert_allclose(numba_impl.convolve_full(a, k), numpy_impl.convolve_full(a, k), rtol=1e-10, atol=1e-12)


def test_convolve_against_numpy_1d(rng):
    a, k = rng.random(300), rng.random(17)
    np.testing.assert_allclose(kernels.convolve_full(a, k), np.convolve(a, k), rtol=1e-12)


def test_convolve_large_uses_fft(rng):
    a = rng.random((24, 24, 24))
    k = rng.random((49, 49, 49))
    assert a.size * k.size > kernels.DIRECT_CONVOLVE_LIMIT
    small = numba_impl.convolve_full(a[:4, :4, :4], k[:5, :5, :5])
    np.testing.assert_allclose(kernels.convolve_full(a[:4, :4, :4], k[:5, :5, :5]), small, rtol=1e-12)
    out = kernels.convolve_full(a, k)
    assert out.shape == (72, 72, 72)
    assert out.sum() == pytest.approx(a.sum() * k.sum(), rel=1e-10)


def test_sturm_parity(rng):
    diag = 2 - rng.random(500)
    off_sq = rng.random(499)
    shifts = np.linspace(-2, 3, 50)
    a = numba_impl.sturm_count(diag, off_sq, shifts, 1e-300)
    b = numpy_impl.sturm_count(diag, off_sq, shifts, 1e-300)
    np.testing.assert_array_equal(a, b)
    from scipy.linalg import eigh_tridiagonal

    ev = eigh_tridiagonal(diag, -np.sqrt(off_sq), eigvals_only=True)
    np.testing.assert_array_equal(a, [np.sum(ev < s) for s in shifts])


def test_sine_density_parity():
    modes = np.arange(1, 2001, dtype=float)
    x = np.linspace(0, 2, 5000)
    a = numba_impl.sine_density_1d(modes, x, 2.0)
    b = numpy_impl.sine_density_1d(modes, x, 2.0)
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-8)
    direct = (2 / 2.0) * np.sum(np.sin(np.pi * np.outer(modes[:50], x) / 2.0) ** 2, axis=0)
    np.testing.assert_allclose(numba_impl.sine_density_1d(modes[:50], x, 2.0), direct, rtol=1e-10, atol=1e-10)


def test_radial_overlap_parity():
    t = np.linspace(0.005, 6, 1200)
    wf = np.exp(-t**2 / 2) * (t[1] - t[0])
    rho = np.linspace(0.0, 8, 200)
    for r in (0.3, 1.0, 4.0):
        np.testing.assert_allclose(numba_impl.radial_ball_overlap(t, wf, rho, r),
                                   numpy_impl.radial_ball_overlap(t, wf, rho, r), rtol=1e-10, atol=1e-14)


def _run(env_value, code="import tfgamma._backend as b; print(b.BACKEND)"):
    env = dict(os.environ)
    env["TFGAMMA_BACKEND"] = env_value
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True)


@pytest.mark.parametrize("value", ["numpy", "numba", "NumPy"])
def test_backend_flag(value):
    proc = _run(value)
    assert proc.returncode == 0
    assert proc.stdout.strip() == value.lower()


def test_backend_flag_invalid():
    proc = _run("fortran")
    assert proc.returncode != 0
    assert "TFGAMMA_BACKEND" in proc.stderr


def test_numpy_backend_end_to_end():
    code = (
        "from tfgamma.fermi_box import FermiSea, sea_density;"
        "from tfgamma.densities import Cube, CubePartition;"
        "s = FermiSea.filled(CubePartition(1, (Cube((0.0,), 1.0),)), [50]);"
        "print(repr(sea_density(s).mass()))"
    )
    a = _run("numpy", code)
    b = _run("numba", code)
    assert a.returncode == b.returncode == 0
    assert float(a.stdout) == pytest.approx(float(b.stdout), rel=1e-12)
