"""Independent oracles the tests freeze expected values against.

Nothing here may import package internals beyond plain config/data types:
every function re-derives its answer from the model formulas directly so the
tests compare two genuinely separate implementations.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm


def plume_mean_reference(px: float, py: float, x: float, y: float, rate: float,
                         wind_speed: float, wind_angle: float,
                         diffusivity: float, lifetime: float) -> float:
    """Single-expression advection-diffusion plume mean."""
    return (rate / (4.0 * math.pi * diffusivity * math.hypot(px - x, py - y))
            * math.exp(
                -math.hypot(px - x, py - y)
                / math.sqrt(diffusivity * lifetime
                            / (1.0 + wind_speed ** 2 * lifetime / (4.0 * diffusivity)))
                - ((px - x) * wind_speed * math.cos(wind_angle)
                   + (py - y) * wind_speed * math.sin(wind_angle))
                / (2.0 * diffusivity)))


def plume_mean_theta(px: float, py: float, theta) -> float:
    return plume_mean_reference(px, py, theta.x, theta.y, theta.rate,
                                theta.wind_speed, theta.wind_angle,
                                theta.diffusivity, theta.lifetime)


def enumeration_posterior(hypotheses, observations, noise_scale: float,
                          noise_floor: float,
                          prior: np.ndarray | None = None) -> np.ndarray:
    """Exact Bayes over a finite hypothesis set via scipy log densities.

    ``hypotheses`` is a sequence of source terms, ``observations`` a sequence
    of ((px, py), concentration) pairs.
    """
    n = len(hypotheses)
    logp = np.log(np.full(n, 1.0 / n) if prior is None else prior)
    for (px, py), c in observations:
        for i, theta in enumerate(hypotheses):
            m = plume_mean_theta(px, py, theta)
            logp[i] += norm.logpdf(c, loc=m, scale=noise_scale * m + noise_floor)
    return np.exp(logp - logsumexp(logp))


def measurement_density(c: float, m: float, noise_scale: float,
                        noise_floor: float) -> float:
    return norm.pdf(c, loc=m, scale=noise_scale * m + noise_floor)


def systematic_resample_reference(weights: np.ndarray, u0: float) -> np.ndarray:
    """Textbook while-loop systematic resampler (offset u0 in [0, 1))."""
    n = len(weights)
    positions = (np.arange(n) + u0) / n
    indexes = np.zeros(n, dtype=int)
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    i = j = 0
    while i < n:
        if positions[i] < cumulative[j]:
            indexes[i] = j
            i += 1
        else:
            j += 1
    return indexes


def lawnmower_actions(n_steps: int, row_length: int = 28,
                      row_gap: int = 3) -> list[int]:
    """Boustrophedon action sequence for the 4-move set (N=0, E=1, S=2, W=3)."""
    actions: list[int] = []
    heading_east = True
    while len(actions) < n_steps:
        actions.extend([1 if heading_east else 3] * row_length)
        actions.extend([0] * row_gap)
        heading_east = not heading_east
    return actions[:n_steps]


def weighted_std(values: np.ndarray, weights: np.ndarray) -> float:
    mean = float(weights @ values)
    return math.sqrt(float(weights @ (values - mean) ** 2))
