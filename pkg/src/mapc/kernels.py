"""Inner-loop kernels with numba and numpy implementations.

Each public kernel dispatches to the ``*_nb`` version when numba is active
(see :mod:`mapc._accel`) and to the ``*_np`` version otherwise.  Both paths
are kept importable so the benchmark and the tests can compare them.
"""
import numpy as np

from . import _accel
from ._accel import njit

TWO_PI = 2.0 * np.pi


# --------------------------------------------------------------------------
# scene accumulation


def accumulate_scene_np(out, alpha, fb, fd, spatial, code):
    """Add point-scatterer returns into ``out[q, m, n]`` in place.

    alpha   : (Z,) complex amplitudes
    fb      : (Z,) normalized beat frequency (cycles / fast-time sample)
    fd      : (Z,) normalized doppler (cycles / chirp)
    spatial : (Z, N_T, N_R) spatial phase in cycles, (i*d_T + n*d_R) * u / lambda
    code    : (M, N_T) complex code phasor exp(j*phi_m(i))
    """
    n_fast, n_chirp, _ = out.shape
    q = np.arange(n_fast)
    m = np.arange(n_chirp)
    for z in range(alpha.shape[0]):
        tone = np.exp(1j * TWO_PI * fb[z] * q)
        slow = np.exp(1j * TWO_PI * fd[z] * m)
        steer = np.exp(1j * TWO_PI * spatial[z])  # (N_T, N_R)
        # sum over transmitters with the per-chirp code
        g = (code @ steer) * slow[:, None]  # (M, N_R)
        out += alpha[z] * tone[:, None, None] * g[None, :, :]
    return out


@njit(cache=True)
def accumulate_scene_nb(out, alpha, fb, fd, spatial, code):
    n_fast, n_chirp, n_rx = out.shape
    n_tx = code.shape[1]
    tone = np.empty(n_fast, dtype=np.complex128)
    steer = np.empty((n_tx, n_rx), dtype=np.complex128)
    for z in range(alpha.shape[0]):
        # exponentials hoisted out of the triple loop
        for q in range(n_fast):
            tone[q] = np.exp(1j * TWO_PI * fb[z] * q)
        for i in range(n_tx):
            for n in range(n_rx):
                steer[i, n] = np.exp(1j * TWO_PI * spatial[z, i, n])
        for m in range(n_chirp):
            slow = alpha[z] * np.exp(1j * TWO_PI * fd[z] * m)
            for n in range(n_rx):
                g = 0j
                for i in range(n_tx):
                    g += code[m, i] * steer[i, n]
                g *= slow
                for q in range(n_fast):
                    out[q, m, n] += g * tone[q]
    return out


def accumulate_scene(out, alpha, fb, fd, spatial, code):
    if _accel.USE_NUMBA:
        return accumulate_scene_nb(out, alpha, fb, fd, spatial, code)
    return accumulate_scene_np(out, alpha, fb, fd, spatial, code)


# --------------------------------------------------------------------------
# 1D cell-averaging threshold


def ca_cfar_np(x, guard, train, scale, circular):
    """Cell-averaging detector on a nonnegative 1D power series.

    Returns a boolean mask of cells whose value exceeds ``scale`` times the
    mean of the training cells (``train`` on each side, after ``guard``).
    Non-circular edges use whichever side has cells available.
    """
    n = x.shape[0]
    offsets = np.concatenate(
        [np.arange(-guard - train, -guard), np.arange(guard + 1, guard + train + 1)]
    )
    idx = np.arange(n)[:, None] + offsets[None, :]
    if circular:
        vals = x[idx % n]
        counts = np.full(n, offsets.size, dtype=np.float64)
        sums = vals.sum(axis=1)
    else:
        valid = (idx >= 0) & (idx < n)
        vals = np.where(valid, x[np.clip(idx, 0, n - 1)], 0.0)
        counts = valid.sum(axis=1).astype(np.float64)
        sums = vals.sum(axis=1)
    noise = np.divide(sums, counts, out=np.zeros(n), where=counts > 0)
    return (counts > 0) & (x > scale * noise)


@njit(cache=True)
def ca_cfar_nb(x, guard, train, scale, circular):
    n = x.shape[0]
    mask = np.zeros(n, dtype=np.bool_)
    for c in range(n):
        acc = 0.0
        cnt = 0
        for k in range(guard + 1, guard + train + 1):
            for j in (c - k, c + k):
                if circular:
                    acc += x[j % n]
                    cnt += 1
                elif 0 <= j < n:
                    acc += x[j]
                    cnt += 1
        if cnt > 0 and x[c] > scale * (acc / cnt):
            mask[c] = True
    return mask


def ca_cfar(x, guard, train, scale, circular=False):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if _accel.USE_NUMBA:
        return ca_cfar_nb(x, int(guard), int(train), float(scale), bool(circular))
    return ca_cfar_np(x, int(guard), int(train), float(scale), bool(circular))


# --------------------------------------------------------------------------
# trailing-window moving statistics


def moving_stats_np(x, k):
    """Trailing-window mean and population std with partial leading windows."""
    padded = np.concatenate([np.full(k - 1, np.nan), x])
    win = np.lib.stride_tricks.sliding_window_view(padded, k)
    mean = np.nanmean(win, axis=1)
    std = np.sqrt(np.nanmean((win - mean[:, None]) ** 2, axis=1))
    return mean, std


@njit(cache=True)
def moving_stats_nb(x, k):
    n = x.shape[0]
    mean = np.empty(n)
    std = np.empty(n)
    for j in range(n):
        lo = max(0, j - k + 1)
        cnt = j - lo + 1
        s = 0.0
        for i in range(lo, j + 1):
            s += x[i]
        mu = s / cnt
        v = 0.0
        for i in range(lo, j + 1):
            v += (x[i] - mu) ** 2
        mean[j] = mu
        std[j] = np.sqrt(v / cnt)
    return mean, std


def moving_stats(x, k):
    x = np.ascontiguousarray(x, dtype=np.float64)
    if _accel.USE_NUMBA:
        return moving_stats_nb(x, int(k))
    return moving_stats_np(x, int(k))
