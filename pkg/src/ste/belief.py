"""Particle-filter belief over the unknown source term, with STD cessation.

The belief is a weighted particle set over the source parameters. Each
observation multiplies weights by the measurement likelihood (in log space)
and renormalizes; when the effective sample size drops below
``resample_fraction * N`` the filter systematically resamples and applies one
Metropolis-Hastings move per particle against the full observation history.
The search self-terminates once every estimated dimension's weighted
posterior std falls below the cessation threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from . import kernels
from .env import ConfigError, EnvConfig, Observation, SourceTerm, THETA_FIELDS

# unnormalized posterior mass below this is treated as filter degeneracy
LOG_MASS_FLOOR = np.log(1e-300)


@dataclass(frozen=True)
class BeliefConfig:
    n_particles: int
    resample_fraction: float = 0.5
    cessation_threshold: float = 0.4
    estimated_dims: tuple[str, ...] = ("x", "y")
    prior_box: dict[str, tuple[float, float]] = field(default_factory=dict)
    mcmc_move: bool = True
    mcmc_scale: float = 0.5  # proposal std as a fraction of the posterior std

    def __post_init__(self):
        if self.n_particles < 2:
            raise ConfigError("n_particles must be >= 2")
        if not 0 < self.resample_fraction <= 1:
            raise ConfigError("resample_fraction must be in (0, 1]")
        if self.cessation_threshold <= 0:
            raise ConfigError("cessation_threshold must be > 0")
        for name in self.estimated_dims:
            if name not in THETA_FIELDS:
                raise ConfigError(f"unknown estimated dim {name!r}")
            lo, hi = self.prior_box.get(name, (0.0, 0.0))
            if not hi > lo:
                raise ConfigError(f"prior box for {name!r} is empty or missing")


def log_normalize(log_weights: np.ndarray) -> tuple[np.ndarray, float]:
    """Normalize log weights to linear weights summing to 1.

    Returns ``(weights, log_total)`` where ``log_total`` is the log of the
    total unnormalized mass.
    """
    total = float(logsumexp(log_weights))
    if not np.isfinite(total):
        return np.full(log_weights.shape, np.nan), total
    w = np.exp(log_weights - log_weights.max())
    return w / w.sum(), total


def log_likelihood(obs: Observation, theta: SourceTerm, env_cfg: EnvConfig) -> float:
    """Log density of the observed concentration under hypothesis ``theta``."""
    ll = kernels.obs_log_likelihood(obs.position.x, obs.position.y, obs.concentration,
                                    theta.as_array().reshape(1, -1),
                                    env_cfg.noise_scale, env_cfg.noise_floor)
    return float(ll[0])


def likelihood(obs: Observation, theta: SourceTerm, env_cfg: EnvConfig) -> float:
    return float(np.exp(log_likelihood(obs, theta, env_cfg)))


class ParticleBelief:
    """Weighted particle approximation of the source-term posterior.

    Confined to a single episode; methods mutate in place. Only the dims in
    ``cfg.estimated_dims`` vary across particles, the rest are copied from the
    scenario's directly-measured values.
    """

    def __init__(self, cfg: BeliefConfig, env_cfg: EnvConfig, thetas: np.ndarray,
                 weights: np.ndarray):
        self.cfg = cfg
        self.env_cfg = env_cfg
        self.thetas = thetas
        self.weights = weights
        self.history: list[Observation] = []
        self.degeneracy_events = 0
        self.dim_idx = np.array([THETA_FIELDS.index(n) for n in cfg.estimated_dims])

    @classmethod
    def from_prior(cls, cfg: BeliefConfig, env_cfg: EnvConfig, known: SourceTerm,
                   rng: np.random.Generator) -> "ParticleBelief":
        """Draw ``n_particles`` uniformly from the prior box on the estimated dims."""
        n = cfg.n_particles
        thetas = np.tile(known.as_array(), (n, 1))
        for name in cfg.estimated_dims:
            lo, hi = cfg.prior_box[name]
            thetas[:, THETA_FIELDS.index(name)] = rng.uniform(lo, hi, n)
        return cls(cfg, env_cfg, thetas, np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return len(self.weights)

    def update(self, obs: Observation, rng: np.random.Generator) -> None:
        """Reweight by the observation likelihood; resample on weight degeneracy."""
        ll = kernels.obs_log_likelihood(obs.position.x, obs.position.y,
                                        obs.concentration, self.thetas,
                                        self.env_cfg.noise_scale, self.env_cfg.noise_floor)
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights) + ll
        w, log_total = log_normalize(logw)
        if not np.isfinite(log_total) or log_total < LOG_MASS_FLOOR:
            self.weights = np.full(self.n, 1.0 / self.n)
            self.degeneracy_events += 1
        else:
            self.weights = w
        self.history.append(obs)
        if self.effective_sample_size() < self.cfg.resample_fraction * self.n:
            self.resample(rng)

    def effective_sample_size(self) -> float:
        return float(1.0 / np.sum(self.weights ** 2))

    def resample(self, rng: np.random.Generator) -> None:
        """Systematic resample to uniform weights, then one MH move per particle."""
        positions = (np.arange(self.n) + rng.random()) / self.n
        cdf = np.cumsum(self.weights)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, positions, side="right")
        self.thetas = self.thetas[idx].copy()
        self.weights = np.full(self.n, 1.0 / self.n)
        if self.cfg.mcmc_move and self.history:
            self._move(rng)

    def _move(self, rng: np.random.Generator) -> None:
        # random-walk MH against the full history; observations are independent
        # given theta, so the posterior ratio is the likelihood-product ratio
        prop_std = self.cfg.mcmc_scale * self.posterior_std()
        steps = rng.standard_normal((self.n, len(self.dim_idx))) * prop_std
        proposed = self.thetas.copy()
        proposed[:, self.dim_idx] += steps

        in_box = np.ones(self.n, dtype=bool)
        for k, name in enumerate(self.cfg.estimated_dims):
            lo, hi = self.cfg.prior_box[name]
            col = proposed[:, self.dim_idx[k]]
            in_box &= (col >= lo) & (col <= hi)

        hx, hy, hc = self._history_arrays()
        cur = kernels.history_log_likelihood(hx, hy, hc, self.thetas,
                                             self.env_cfg.noise_scale,
                                             self.env_cfg.noise_floor)
        prop = kernels.history_log_likelihood(hx, hy, hc, proposed,
                                              self.env_cfg.noise_scale,
                                              self.env_cfg.noise_floor)
        accept = in_box & (np.log(rng.random(self.n)) < prop - cur)
        self.thetas[accept] = proposed[accept]

    def _history_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        hx = np.array([o.position.x for o in self.history])
        hy = np.array([o.position.y for o in self.history])
        hc = np.array([o.concentration for o in self.history])
        return hx, hy, hc

    def point_estimate(self) -> SourceTerm:
        """Weighted mean of the particle set (known dims pass through unchanged)."""
        return SourceTerm.from_array(self.weights @ self.thetas)

    def posterior_std(self) -> np.ndarray:
        """Weighted population std per estimated dim (weights as probability masses)."""
        vals = self.thetas[:, self.dim_idx]
        mean = self.weights @ vals
        var = self.weights @ (vals - mean) ** 2
        return np.sqrt(var)

    def cessation_check(self) -> bool:
        """True when every estimated dim's posterior std is below the threshold."""
        return bool(np.max(self.posterior_std()) < self.cfg.cessation_threshold)

    def entropy(self, cell_size: float) -> float:
        """Shannon entropy (nats) of the weighted particle histogram.

        The histogram grid covers the prior box with ``cell_size`` cells per
        estimated dim (cells are in each dim's own units).
        """
        if cell_size <= 0:
            raise ConfigError("cell_size must be > 0")
        edges = []
        for name in self.cfg.estimated_dims:
            lo, hi = self.cfg.prior_box[name]
            n_cells = max(1, int(np.ceil((hi - lo) / cell_size)))
            edges.append(lo + cell_size * np.arange(n_cells + 1))
        hist, _ = np.histogramdd(self.thetas[:, self.dim_idx], bins=edges,
                                 weights=self.weights)
        p = hist[hist > 0]
        p = p / p.sum()
        return float(-np.sum(p * np.log(p)))

    def snapshot(self) -> dict:
        """JSON-serializable summary used by the harness trajectory logs."""
        return {
            "dims": list(self.cfg.estimated_dims),
            "particles": self.thetas[:, self.dim_idx].tolist(),
            "weights": self.weights.tolist(),
            "std": self.posterior_std().tolist(),
            "ess": self.effective_sample_size(),
        }
