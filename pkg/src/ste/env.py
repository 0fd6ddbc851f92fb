"""Plume environment: ground-truth source, noisy sensor, and agent motion.

The search domain is a 2D box. The mean concentration at a sensor position is
an advection-diffusion plume determined by the source term; a reading adds
zero-mean Gaussian noise whose std grows with the signal
(``sigma = noise_scale * m + noise_floor``) and is clamped at zero, since a
real sensor cannot report negative concentration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import kernels


class ConfigError(ValueError):
    """Invalid configuration or input file."""


class SingularityError(ValueError):
    """Concentration requested at (or within 1e-9 m of) the source itself."""


class Position(NamedTuple):
    x: float
    y: float


class Observation(NamedTuple):
    position: Position
    concentration: float


THETA_FIELDS = ("x", "y", "rate", "wind_speed", "wind_angle", "diffusivity", "lifetime")


@dataclass(frozen=True)
class SourceTerm:
    """Ground-truth release parameters driving the plume.

    Units: position m, rate g/s, wind_speed m/s, wind_angle rad,
    diffusivity m^2/s, lifetime s.
    """

    x: float
    y: float
    rate: float
    wind_speed: float
    wind_angle: float
    diffusivity: float
    lifetime: float

    def __post_init__(self):
        if not (self.rate > 0 and self.wind_speed >= 0 and self.diffusivity > 0
                and self.lifetime > 0):
            raise ConfigError(f"invalid source term: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, f) for f in THETA_FIELDS], dtype=float)

    @classmethod
    def from_array(cls, row) -> "SourceTerm":
        return cls(*(float(v) for v in row))

    @property
    def position(self) -> Position:
        return Position(self.x, self.y)


# unit move offsets; indices are the action ids and the tie-break order
MOVES_4 = ((0.0, 1.0), (1.0, 0.0), (0.0, -1.0), (-1.0, 0.0))  # N E S W
MOVES_8 = MOVES_4 + ((1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0))  # + NE SE SW NW
MOVE_NAMES = ("N", "E", "S", "W", "NE", "SE", "SW", "NW")


@dataclass(frozen=True)
class EnvConfig:
    domain_min: tuple[float, float] = (0.0, 0.0)
    domain_max: tuple[float, float] = (30.0, 30.0)
    step_length: float = 1.0
    connectivity: int = 4  # 4 or 8 unit moves
    noise_scale: float = 0.3  # multiplicative part of the sensor noise std
    noise_floor: float = 0.2  # additive part, > 0
    noise_mean: float = 0.0
    max_steps: int = 300
    start_region: tuple[tuple[float, float], tuple[float, float]] = ((0.0, 5.0), (0.0, 5.0))

    def __post_init__(self):
        if not (self.domain_min[0] < self.domain_max[0]
                and self.domain_min[1] < self.domain_max[1]):
            raise ConfigError("domain_min must be < domain_max on both axes")
        if self.step_length <= 0:
            raise ConfigError("step_length must be > 0")
        if self.connectivity not in (4, 8):
            raise ConfigError("connectivity must be 4 or 8")
        if self.noise_scale < 0 or self.noise_floor <= 0:
            raise ConfigError("need noise_scale >= 0 and noise_floor > 0")
        if self.max_steps <= 0:
            raise ConfigError("max_steps must be > 0")
        (xlo, xhi), (ylo, yhi) = self.start_region
        if not (self.domain_min[0] <= xlo < xhi <= self.domain_max[0]
                and self.domain_min[1] <= ylo < yhi <= self.domain_max[1]):
            raise ConfigError("start_region must be a box inside the domain")

    @property
    def moves(self) -> tuple[tuple[float, float], ...]:
        return MOVES_4 if self.connectivity == 4 else MOVES_8

    @property
    def side_lengths(self) -> tuple[float, float]:
        return (self.domain_max[0] - self.domain_min[0],
                self.domain_max[1] - self.domain_min[1])

    def clamp(self, x: float, y: float) -> Position:
        return Position(min(max(x, self.domain_min[0]), self.domain_max[0]),
                        min(max(y, self.domain_min[1]), self.domain_max[1]))

    def contains(self, p: Position) -> bool:
        return (self.domain_min[0] <= p.x <= self.domain_max[0]
                and self.domain_min[1] <= p.y <= self.domain_max[1])


def decay_length(wind_speed: float, diffusivity: float, lifetime: float) -> float:
    """e-folding length of the plume's radial decay."""
    return math.sqrt(diffusivity * lifetime
                     / (1.0 + wind_speed * wind_speed * lifetime / (4.0 * diffusivity)))


def mean_concentration(p: Position, theta: SourceTerm) -> float:
    """Mean concentration at ``p`` for a plume with parameters ``theta``.

    Raises :class:`SingularityError` within 1e-9 m of the source, where the
    model's 1/r factor blows up.
    """
    if math.hypot(p.x - theta.x, p.y - theta.y) < kernels.LOC_EPS:
        raise SingularityError(f"sensor position {p} coincides with the source")
    m = kernels.plume_mean(p.x, p.y, theta.as_array().reshape(1, -1))
    return float(m[0])


def sample_measurement(p: Position, theta: SourceTerm, cfg: EnvConfig,
                       rng: np.random.Generator) -> float:
    """One noisy, non-negative sensor reading at ``p``. Draws exactly once from rng."""
    m = mean_concentration(p, theta)
    sigma = cfg.noise_scale * m + cfg.noise_floor
    return max(0.0, m + rng.normal(cfg.noise_mean, sigma))


def step(pos: Position, action: int, cfg: EnvConfig, theta: SourceTerm,
         rng: np.random.Generator) -> tuple[Position, Observation]:
    """Move one step along ``action`` (clamped to the domain) and observe there."""
    dx, dy = cfg.moves[action]
    new = cfg.clamp(pos.x + cfg.step_length * dx, pos.y + cfg.step_length * dy)
    obs = Observation(new, sample_measurement(new, theta, cfg, rng))
    return new, obs


def sample_start(cfg: EnvConfig, rng: np.random.Generator) -> Position:
    """Draw the searcher's initial position uniformly from the start region."""
    (x_lo, x_hi), (y_lo, y_hi) = cfg.start_region
    return Position(rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi))
