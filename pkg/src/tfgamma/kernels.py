"""Hot numeric kernels, each with a numba and a pure-numpy implementation.

The public names at module level are bound to the backend chosen by
``TFGAMMA_BACKEND`` (see :mod:`tfgamma._backend`).  Both implementations stay
importable as ``numba_impl`` / ``numpy_impl`` so tests and the benchmark can
compare them directly.
"""

from types import SimpleNamespace

import numpy as np

from ._backend import BACKEND, njit

# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------


@njit(cache=True, fastmath=False)
def _convolve_full_1d_nb(a, k):
    na = a.shape[0]
    nk = k.shape[0]
    out = np.zeros(na + nk - 1)
    for i in range(na):
        ai = a[i]
        if ai == 0.0:
            continue
        for j in range(nk):
            out[i + j] += ai * k[j]
    return out


@njit(cache=True, fastmath=False)
def _convolve_full_2d_nb(a, k):
    a0, a1 = a.shape
    k0, k1 = k.shape
    out = np.zeros((a0 + k0 - 1, a1 + k1 - 1))
    for i0 in range(a0):
        for i1 in range(a1):
            ai = a[i0, i1]
            if ai == 0.0:
                continue
            for j0 in range(k0):
                for j1 in range(k1):
                    out[i0 + j0, i1 + j1] += ai * k[j0, j1]
    return out


@njit(cache=True, fastmath=False)
def _convolve_full_3d_nb(a, k):
    a0, a1, a2 = a.shape
    k0, k1, k2 = k.shape
    out = np.zeros((a0 + k0 - 1, a1 + k1 - 1, a2 + k2 - 1))
    for i0 in range(a0):
        for i1 in range(a1):
            for i2 in range(a2):
                ai = a[i0, i1, i2]
                if ai == 0.0:
                    continue
                for j0 in range(k0):
                    for j1 in range(k1):
                        for j2 in range(k2):
                            out[i0 + j0, i1 + j1, i2 + j2] += ai * k[j0, j1, j2]
    return out


def _convolve_full_nb(a, k):
    a = np.ascontiguousarray(a, dtype=np.float64)
    k = np.ascontiguousarray(k, dtype=np.float64)
    if a.ndim != k.ndim:
        raise ValueError("array and kernel must have the same rank")
    if a.ndim == 1:
        return _convolve_full_1d_nb(a, k)
    if a.ndim == 2:
        return _convolve_full_2d_nb(a, k)
    if a.ndim == 3:
        return _convolve_full_3d_nb(a, k)
    raise ValueError("convolution supports rank 1 to 3")


@njit(cache=True)
def _sturm_count_nb(diag, off_sq, shifts, pivmin):
    n = diag.shape[0]
    out = np.empty(shifts.shape[0], dtype=np.int64)
    for s in range(shifts.shape[0]):
        x = shifts[s]
        count = 0
        q = diag[0] - x
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
        for i in range(1, n):
            q = diag[i] - x - off_sq[i - 1] / q
            if abs(q) < pivmin:
                q = -pivmin
            if q < 0.0:
                count += 1
        out[s] = count
    return out


@njit(cache=True, fastmath=False)
def _sine_density_1d_nb(modes, x, side):
    n = x.shape[0]
    out = np.zeros(n)
    scale = 2.0 / side
    kmax = 0
    for m in range(modes.shape[0]):
        kmax = max(kmax, int(modes[m]))
    weight = np.zeros(kmax + 1)
    for m in range(modes.shape[0]):
        weight[int(modes[m])] += 1.0
    for i in range(n):
        xi = x[i]
        if xi < 0.0 or xi > side:
            continue
        theta = np.pi * xi / side
        # sin((k+1) t) = 2 cos t sin(k t) - sin((k-1) t)
        two_c = 2.0 * np.cos(theta)
        s_prev = 0.0
        s_cur = np.sin(theta)
        acc = 0.0
        for k in range(1, kmax + 1):
            acc += weight[k] * s_cur * s_cur
            s_prev, s_cur = s_cur, two_c * s_cur - s_prev
        out[i] = scale * acc
    return out


@njit(cache=True, fastmath=False)
def _radial_ball_overlap_nb(t, weighted_f, rho, r):
    # sum_i weighted_f[i] * |S_{t_i} ∩ B(rho e, r)|, S_t the sphere of radius t
    out = np.zeros(rho.shape[0])
    four_pi = 4.0 * np.pi
    for j in range(rho.shape[0]):
        p = rho[j]
        acc = 0.0
        for i in range(t.shape[0]):
            ti = t[i]
            if ti + p <= r:
                acc += weighted_f[i] * four_pi * ti * ti
            elif abs(ti - p) < r:
                acc += weighted_f[i] * np.pi * ti * (r * r - (ti - p) ** 2) / p
        out[j] = acc
    return out


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _convolve_full_np(a, k):
    a = np.asarray(a, dtype=np.float64)
    k = np.asarray(k, dtype=np.float64)
    if a.ndim != k.ndim:
        raise ValueError("array and kernel must have the same rank")
    if a.ndim == 1:
        return np.convolve(a, k, mode="full")
    if a.ndim > 3:
        raise ValueError("convolution supports rank 1 to 3")
    shape = tuple(sa + sk - 1 for sa, sk in zip(a.shape, k.shape))
    fshape = tuple(_next_fast_len(s) for s in shape)
    axes = tuple(range(a.ndim))
    spec = np.fft.rfftn(a, fshape, axes) * np.fft.rfftn(k, fshape, axes)
    out = np.fft.irfftn(spec, fshape, axes)
    return np.ascontiguousarray(out[tuple(slice(0, s) for s in shape)])


def _next_fast_len(n):
    m = 1
    while m < n:
        m *= 2
    # a 3-smooth length is often much shorter than the next power of two
    best = m
    p3 = 1
    while p3 < 2 * n:
        p2 = p3
        while p2 < n:
            p2 *= 2
        best = min(best, p2)
        p3 *= 3
    return best


def _sturm_count_np(diag, off_sq, shifts, pivmin):
    shifts = np.asarray(shifts, dtype=np.float64)
    q = diag[0] - shifts
    q = np.where(np.abs(q) < pivmin, -pivmin, q)
    count = (q < 0.0).astype(np.int64)
    for i in range(1, diag.shape[0]):
        q = diag[i] - shifts - off_sq[i - 1] / q
        q = np.where(np.abs(q) < pivmin, -pivmin, q)
        count += q < 0.0
    return count


def _sine_density_1d_np(modes, x, side, chunk=256):
    x = np.asarray(x, dtype=np.float64)
    modes = np.asarray(modes, dtype=np.float64)
    inside = (x >= 0.0) & (x <= side)
    theta = np.pi * x[inside] / side
    acc = np.zeros(theta.shape[0])
    for start in range(0, modes.shape[0], chunk):
        block = np.sin(np.outer(modes[start:start + chunk], theta))
        acc += np.einsum("ij,ij->j", block, block)
    out = np.zeros(x.shape[0])
    out[inside] = (2.0 / side) * acc
    return out


def _radial_ball_overlap_np(t, weighted_f, rho, r, chunk=512):
    t = np.asarray(t, dtype=np.float64)
    out = np.empty(len(rho))
    for start in range(0, len(rho), chunk):
        p = np.asarray(rho[start:start + chunk], dtype=np.float64)[:, None]
        inner = t[None, :] + p <= r
        lens = (~inner) & (np.abs(t[None, :] - p) < r)
        with np.errstate(divide="ignore", invalid="ignore"):
            cap = np.pi * t[None, :] * (r * r - (t[None, :] - p) ** 2) / p
        kern = np.where(inner, 4.0 * np.pi * t[None, :] ** 2, 0.0)
        kern = np.where(lens, cap, kern)
        out[start:start + chunk] = kern @ weighted_f
    return out


numba_impl = SimpleNamespace(
    convolve_full=_convolve_full_nb,
    sturm_count=_sturm_count_nb,
    sine_density_1d=_sine_density_1d_nb,
    radial_ball_overlap=_radial_ball_overlap_nb,
)

numpy_impl = SimpleNamespace(
    convolve_full=_convolve_full_np,
    sturm_count=_sturm_count_np,
    sine_density_1d=_sine_density_1d_np,
    radial_ball_overlap=_radial_ball_overlap_np,
)

_active = numba_impl if BACKEND == "numba" else numpy_impl


# above this many multiply-adds a direct sum loses to FFT on either backend
DIRECT_CONVOLVE_LIMIT = 2**26


def convolve_full(a, k):
    """Full linear convolution of two arrays of equal rank (1 to 3)."""
    a = np.asarray(a)
    k = np.asarray(k)
    if a.size * k.size > DIRECT_CONVOLVE_LIMIT:
        return _convolve_full_np(a, k)
    return _active.convolve_full(a, k)


def sturm_count(diag, off_sq, shifts, pivmin=1e-300):
    """Number of eigenvalues below each shift for a symmetric tridiagonal matrix.

    ``off_sq`` holds the squared off-diagonal entries.
    """
    diag = np.ascontiguousarray(diag, dtype=np.float64)
    off_sq = np.ascontiguousarray(off_sq, dtype=np.float64)
    shifts = np.ascontiguousarray(np.atleast_1d(shifts), dtype=np.float64)
    return _active.sturm_count(diag, off_sq, shifts, float(pivmin))


def sine_density_1d(modes, x, side):
    """sum_k (2/L) sin^2(pi k x / L) on [0, L], zero outside."""
    return _active.sine_density_1d(
        np.ascontiguousarray(modes, dtype=np.float64),
        np.ascontiguousarray(x, dtype=np.float64),
        float(side),
    )


def radial_ball_overlap(t, weighted_f, rho, r):
    """(f * 1_{B_r})(rho) for a radial f in three dimensions.

    ``weighted_f`` is f(t_i) times the radial quadrature weight (without the
    4 pi t^2 shell factor, which the kernel supplies).
    """
    return _active.radial_ball_overlap(
        np.ascontiguousarray(t, dtype=np.float64),
        np.ascontiguousarray(weighted_f, dtype=np.float64),
        np.ascontiguousarray(rho, dtype=np.float64),
        float(r),
    )
