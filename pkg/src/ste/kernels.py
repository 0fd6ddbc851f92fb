"""Hot numeric kernels: plume evaluation and particle-weight math.

Every kernel exists twice: a loop form compiled with numba's ``@njit`` and a
vectorized numpy form. The active backend is chosen once at import time: set
``STE_NUMBA=0`` in the environment to force the pure-numpy path (numba is the
default whenever it is importable). ``benchmarks/bench_kernels.py`` times the
two paths against each other.

Theta rows are ``(n, 7)`` float64 arrays with columns
``[x, y, rate, wind_speed, wind_angle, diffusivity, lifetime]``.
"""

from __future__ import annotations

import math
import os

import numpy as np

# column layout of a theta row
COL_X = 0
COL_Y = 1
COL_RATE = 2
COL_WIND_SPEED = 3
COL_WIND_ANGLE = 4
COL_DIFFUSIVITY = 5
COL_LIFETIME = 6

# distance floor guarding the 1/r singularity at the source
LOC_EPS = 1e-9

LOG_2PI = math.log(2.0 * math.pi)


def _env_disabled() -> bool:
    return os.environ.get("STE_NUMBA", "1").strip().lower() in ("0", "false", "off")


# --------------------------------------------------------------------------
# loop forms (numba-friendly)
# --------------------------------------------------------------------------

def _plume_mean_loop(px, py, thetas):
    n = thetas.shape[0]
    out = np.empty(n)
    for i in range(n):
        dx = px - thetas[i, COL_X]
        dy = py - thetas[i, COL_Y]
        r = math.sqrt(dx * dx + dy * dy)
        if r < LOC_EPS:
            r = LOC_EPS
        u = thetas[i, COL_WIND_SPEED]
        d = thetas[i, COL_DIFFUSIVITY]
        tau = thetas[i, COL_LIFETIME]
        lam = math.sqrt(d * tau / (1.0 + u * u * tau / (4.0 * d)))
        drift = -(dx * u * math.cos(thetas[i, COL_WIND_ANGLE])
                  + dy * u * math.sin(thetas[i, COL_WIND_ANGLE])) / (2.0 * d)
        out[i] = thetas[i, COL_RATE] / (4.0 * math.pi * d * r) * math.exp(-r / lam + drift)
    return out


def _obs_log_likelihood_loop(ox, oy, oc, thetas, noise_scale, noise_floor):
    n = thetas.shape[0]
    out = np.empty(n)
    for i in range(n):
        dx = ox - thetas[i, COL_X]
        dy = oy - thetas[i, COL_Y]
        r = math.sqrt(dx * dx + dy * dy)
        if r < LOC_EPS:
            r = LOC_EPS
        u = thetas[i, COL_WIND_SPEED]
        d = thetas[i, COL_DIFFUSIVITY]
        tau = thetas[i, COL_LIFETIME]
        lam = math.sqrt(d * tau / (1.0 + u * u * tau / (4.0 * d)))
        drift = -(dx * u * math.cos(thetas[i, COL_WIND_ANGLE])
                  + dy * u * math.sin(thetas[i, COL_WIND_ANGLE])) / (2.0 * d)
        m = thetas[i, COL_RATE] / (4.0 * math.pi * d * r) * math.exp(-r / lam + drift)
        sigma = noise_scale * m + noise_floor
        z = (oc - m) / sigma
        out[i] = -0.5 * z * z - math.log(sigma) - 0.5 * LOG_2PI
    return out


def _history_log_likelihood_loop(hx, hy, hc, thetas, noise_scale, noise_floor):
    n = thetas.shape[0]
    h = hx.shape[0]
    out = np.zeros(n)
    for i in range(n):
        sx = thetas[i, COL_X]
        sy = thetas[i, COL_Y]
        rate = thetas[i, COL_RATE]
        u = thetas[i, COL_WIND_SPEED]
        cw = math.cos(thetas[i, COL_WIND_ANGLE])
        sw = math.sin(thetas[i, COL_WIND_ANGLE])
        d = thetas[i, COL_DIFFUSIVITY]
        tau = thetas[i, COL_LIFETIME]
        lam = math.sqrt(d * tau / (1.0 + u * u * tau / (4.0 * d)))
        acc = 0.0
        for j in range(h):
            dx = hx[j] - sx
            dy = hy[j] - sy
            r = math.sqrt(dx * dx + dy * dy)
            if r < LOC_EPS:
                r = LOC_EPS
            drift = -(dx * u * cw + dy * u * sw) / (2.0 * d)
            m = rate / (4.0 * math.pi * d * r) * math.exp(-r / lam + drift)
            sigma = noise_scale * m + noise_floor
            z = (hc[j] - m) / sigma
            acc += -0.5 * z * z - math.log(sigma) - 0.5 * LOG_2PI
        out[i] = acc
    return out


def _hypothetical_position_variance_loop(m, sigma, weights, xs, ys, cs):
    n = m.shape[0]
    nc = cs.shape[0]
    logw = np.empty(n)
    w = np.empty(n)
    acc = 0.0
    for j in range(nc):
        c = cs[j]
        mx = -np.inf
        for i in range(n):
            if weights[i] > 0.0:
                z = (c - m[i]) / sigma[i]
                lw = math.log(weights[i]) - 0.5 * z * z - math.log(sigma[i])
            else:
                lw = -np.inf
            logw[i] = lw
            if lw > mx:
                mx = lw
        total = 0.0
        mean_x = 0.0
        mean_y = 0.0
        for i in range(n):
            wi = math.exp(logw[i] - mx)
            w[i] = wi
            total += wi
            mean_x += wi * xs[i]
            mean_y += wi * ys[i]
        mean_x /= total
        mean_y /= total
        var_x = 0.0
        var_y = 0.0
        for i in range(n):
            ex = xs[i] - mean_x
            ey = ys[i] - mean_y
            var_x += w[i] * ex * ex
            var_y += w[i] * ey * ey
        acc += (var_x + var_y) / total
    return acc / nc


# --------------------------------------------------------------------------
# numpy forms
# --------------------------------------------------------------------------

def _plume_mean_numpy(px, py, thetas):
    dx = px - thetas[:, COL_X]
    dy = py - thetas[:, COL_Y]
    r = np.maximum(np.sqrt(dx * dx + dy * dy), LOC_EPS)
    u = thetas[:, COL_WIND_SPEED]
    d = thetas[:, COL_DIFFUSIVITY]
    tau = thetas[:, COL_LIFETIME]
    lam = np.sqrt(d * tau / (1.0 + u * u * tau / (4.0 * d)))
    drift = -(dx * u * np.cos(thetas[:, COL_WIND_ANGLE])
              + dy * u * np.sin(thetas[:, COL_WIND_ANGLE])) / (2.0 * d)
    return thetas[:, COL_RATE] / (4.0 * np.pi * d * r) * np.exp(-r / lam + drift)


def _obs_log_likelihood_numpy(ox, oy, oc, thetas, noise_scale, noise_floor):
    m = _plume_mean_numpy(ox, oy, thetas)
    sigma = noise_scale * m + noise_floor
    z = (oc - m) / sigma
    return -0.5 * z * z - np.log(sigma) - 0.5 * LOG_2PI


def _history_log_likelihood_numpy(hx, hy, hc, thetas, noise_scale, noise_floor):
    dx = hx[:, None] - thetas[None, :, COL_X]
    dy = hy[:, None] - thetas[None, :, COL_Y]
    r = np.maximum(np.sqrt(dx * dx + dy * dy), LOC_EPS)
    u = thetas[:, COL_WIND_SPEED]
    d = thetas[:, COL_DIFFUSIVITY]
    tau = thetas[:, COL_LIFETIME]
    lam = np.sqrt(d * tau / (1.0 + u * u * tau / (4.0 * d)))
    drift = -(dx * u * np.cos(thetas[:, COL_WIND_ANGLE])
              + dy * u * np.sin(thetas[:, COL_WIND_ANGLE])) / (2.0 * d)
    m = thetas[:, COL_RATE] / (4.0 * np.pi * d * r) * np.exp(-r / lam + drift)
    sigma = noise_scale * m + noise_floor
    z = (hc[:, None] - m) / sigma
    ll = -0.5 * z * z - np.log(sigma) - 0.5 * LOG_2PI
    return ll.sum(axis=0)


def _hypothetical_position_variance_numpy(m, sigma, weights, xs, ys, cs):
    z = (cs[:, None] - m[None, :]) / sigma[None, :]
    with np.errstate(divide="ignore"):
        logw = np.log(weights)[None, :] - 0.5 * z * z - np.log(sigma)[None, :]
    w = np.exp(logw - logw.max(axis=1, keepdims=True))
    total = w.sum(axis=1)
    mean_x = (w @ xs) / total
    mean_y = (w @ ys) / total
    var_x = (w * (xs[None, :] - mean_x[:, None]) ** 2).sum(axis=1) / total
    var_y = (w * (ys[None, :] - mean_y[:, None]) ** 2).sum(axis=1) / total
    return float(np.mean(var_x + var_y))


# --------------------------------------------------------------------------
# backend selection
# --------------------------------------------------------------------------

if not _env_disabled():
    try:
        from numba import njit
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is an install-time dep
        njit = None
        BACKEND = "numpy"
else:
    njit = None
    BACKEND = "numpy"

if BACKEND == "numba":
    plume_mean = njit(cache=True)(_plume_mean_loop)
    obs_log_likelihood = njit(cache=True)(_obs_log_likelihood_loop)
    history_log_likelihood = njit(cache=True)(_history_log_likelihood_loop)
    hypothetical_position_variance = njit(cache=True)(_hypothetical_position_variance_loop)
else:
    plume_mean = _plume_mean_numpy
    obs_log_likelihood = _obs_log_likelihood_numpy
    history_log_likelihood = _history_log_likelihood_numpy
    hypothetical_position_variance = _hypothetical_position_variance_numpy
