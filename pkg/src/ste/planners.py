"""Baseline one-step search planners over a particle belief.

All three statistical planners share the same Monte-Carlo machinery: for each
candidate position (the clamped landing point of each move) draw hypothetical
measurements from the belief's posterior predictive, score the candidate, and
pick the best. Ties go to the lowest action index; a wall-clamped move
competes as "stay".
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .belief import ParticleBelief
from .env import ConfigError, EnvConfig, Position
from .kernels import COL_X, COL_Y


class PlannerKind(enum.Enum):
    INFOTAXIS = "infotaxis"
    ENTROTAXIS = "entrotaxis"
    DCEE = "dcee"
    RANDOM = "random"


@dataclass(frozen=True)
class LookaheadConfig:
    n_hypothetical: int = 25   # measurement samples per candidate
    entropy_bins: int = 16     # histogram bins for predictive entropy
    entropy_cell: float = 1.0  # cell size for belief-histogram entropy

    def __post_init__(self):
        if self.n_hypothetical < 1:
            raise ConfigError("n_hypothetical must be >= 1")
        if self.entropy_bins < 2:
            raise ConfigError("entropy_bins must be >= 2")
        if self.entropy_cell <= 0:
            raise ConfigError("entropy_cell must be > 0")


def _candidate_stats(belief: ParticleBelief, candidate: Position,
                     env: EnvConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-particle predicted mean and noise std at the candidate position."""
    m = kernels.plume_mean(candidate.x, candidate.y, belief.thetas)
    return m, env.noise_scale * m + env.noise_floor


def predictive_samples(belief: ParticleBelief, candidate: Position,
                       cfg: LookaheadConfig, env: EnvConfig,
                       rng: np.random.Generator) -> np.ndarray:
    """Draw M hypothetical concentrations from the posterior predictive.

    Each sample picks a particle by weight, then simulates one measurement at
    the candidate under that particle's hypothesis.
    """
    m, sigma = _candidate_stats(belief, candidate, env)
    idx = rng.choice(belief.n, size=cfg.n_hypothetical, p=belief.weights)
    noise = rng.normal(env.noise_mean, sigma[idx])
    return np.maximum(0.0, m[idx] + noise)


def expected_posterior_variance(belief: ParticleBelief, candidate: Position,
                                cfg: LookaheadConfig, env: EnvConfig,
                                rng: np.random.Generator) -> float:
    """Mean (over hypothetical measurements) posterior position-variance trace.

    Hypothetical updates reweight a copy of the belief; nothing is resampled
    or mutated.
    """
    cs = predictive_samples(belief, candidate, cfg, env, rng)
    m, sigma = _candidate_stats(belief, candidate, env)
    return float(kernels.hypothetical_position_variance(
        m, sigma, belief.weights,
        belief.thetas[:, COL_X], belief.thetas[:, COL_Y], cs))


def predictive_entropy(samples: np.ndarray, cfg: LookaheadConfig) -> float:
    """Shannon entropy (nats) of the B-bin histogram of the samples."""
    samples = np.asarray(samples, dtype=float)
    lo, hi = samples.min(), samples.max()
    if hi <= lo:
        return 0.0
    counts, _ = np.histogram(samples, bins=cfg.entropy_bins, range=(lo, hi))
    p = counts[counts > 0] / samples.size
    return float(-np.sum(p * np.log(p)))


def dcee_cost(belief: ParticleBelief, candidate: Position, cfg: LookaheadConfig,
              env: EnvConfig, rng: np.random.Generator) -> float:
    """Squared distance to the current estimate plus expected posterior variance."""
    est = belief.point_estimate()
    dist2 = (candidate.x - est.x) ** 2 + (candidate.y - est.y) ** 2
    return dist2 + expected_posterior_variance(belief, candidate, cfg, env, rng)


def select_action(kind: PlannerKind, belief: ParticleBelief, pos: Position,
                  cfg: LookaheadConfig, env: EnvConfig,
                  rng: np.random.Generator) -> int:
    """Pick a move index; ties break to the lowest index."""
    if kind is PlannerKind.RANDOM:
        return int(rng.integers(len(env.moves)))

    candidates = [env.clamp(pos.x + dx * env.step_length, pos.y + dy * env.step_length)
                  for dx, dy in env.moves]
    scores = np.empty(len(candidates))
    for i, cand in enumerate(candidates):
        if kind is PlannerKind.INFOTAXIS:
            scores[i] = expected_posterior_variance(belief, cand, cfg, env, rng)
        elif kind is PlannerKind.ENTROTAXIS:
            scores[i] = -predictive_entropy(
                predictive_samples(belief, cand, cfg, env, rng), cfg)
        elif kind is PlannerKind.DCEE:
            scores[i] = dcee_cost(belief, cand, cfg, env, rng)
        else:
            raise ConfigError(f"unknown planner kind {kind!r}")
    return int(np.argmin(scores))
