"""DQN learner driven by the cessation self-reward.

The agent never sees the true source. Its state is a 7-feature summary of
what it can know: its own position, the belief's point estimate and posterior
std (all normalized by the domain side lengths), and the latest concentration
compressed through log1p. Reward is zero everywhere except the step on which
the belief passes the cessation check, which pays ``terminal_reward`` and
ends the episode; running out of steps truncates without reward and stores
``done=False`` so the target still bootstraps.

The Q-network is a plain-numpy MLP (7 -> 128 -> 128 -> 128 -> actions, ReLU
hidden layers) trained by SGD on the mean squared Bellman error against a
periodically synced target copy.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import env as env_mod
from .belief import BeliefConfig, ParticleBelief
from .env import ConfigError, EnvConfig, Observation, Position, SourceTerm
from .kernels import COL_X, COL_Y

FEATURE_DIM = 7
HIDDEN_SIZES = (128, 128, 128)
CHECKPOINT_VERSION = 1


class TrainingDivergenceError(RuntimeError):
    """Bellman loss became non-finite; the run is unrecoverable."""


class CheckpointError(ConfigError):
    """Checkpoint file is missing, malformed, or structurally inconsistent."""


class Transition(NamedTuple):
    features: np.ndarray
    action: int
    reward: float
    next_features: np.ndarray
    done: bool


@dataclass(frozen=True)
class LearnerConfig:
    lr: float = 1e-4
    gamma: float = 0.99
    minibatch: int = 64
    replay_capacity: int = 1000
    target_update_interval: int = 100  # environment steps between target syncs
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_fraction: float = 0.8      # share of episodes spent decaying
    terminal_reward: float = 100.0
    episodes: int = 2000

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError("lr must be > 0")
        if not 0 < self.gamma < 1:
            raise ConfigError("gamma must be in (0, 1)")
        if self.minibatch < 1 or self.replay_capacity < self.minibatch:
            raise ConfigError("need replay_capacity >= minibatch >= 1")
        if self.target_update_interval < 1:
            raise ConfigError("target_update_interval must be >= 1")
        if not 0 <= self.epsilon_end <= self.epsilon_start <= 1:
            raise ConfigError("need 0 <= epsilon_end <= epsilon_start <= 1")
        if not 0 <= self.epsilon_fraction <= 1:
            raise ConfigError("epsilon_fraction must be in [0, 1]")
        if self.terminal_reward <= 0:
            raise ConfigError("terminal_reward must be > 0")
        if self.episodes < 1:
            raise ConfigError("episodes must be >= 1")


class QNetwork:
    """Fully connected ReLU network; ``weights[k]`` has shape (out, in)."""

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        self.weights = weights
        self.biases = biases

    @classmethod
    def init(cls, sizes: tuple[int, ...], rng: np.random.Generator) -> "QNetwork":
        """Glorot-uniform weights, zero biases."""
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            weights.append(rng.uniform(-bound, bound, (fan_out, fan_in)))
            biases.append(np.zeros(fan_out))
        return cls(weights, biases)

    @classmethod
    def zeros(cls, sizes: tuple[int, ...]) -> "QNetwork":
        return cls([np.zeros((o, i)) for i, o in zip(sizes[:-1], sizes[1:])],
                   [np.zeros(o) for o in sizes[1:]])

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[1],) + tuple(w.shape[0] for w in self.weights)

    def copy(self) -> "QNetwork":
        return QNetwork([w.copy() for w in self.weights],
                        [b.copy() for b in self.biases])

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Batched forward pass, (B, in) -> (B, out); hidden layers ReLU."""
        h = x
        last = len(self.weights) - 1
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w.T + b
            if k < last:
                h = np.maximum(h, 0.0)
        return h


def default_sizes(n_actions: int) -> tuple[int, ...]:
    return (FEATURE_DIM,) + HIDDEN_SIZES + (n_actions,)


def featurize(pos: Position, obs: Observation, belief: ParticleBelief,
              env: EnvConfig) -> np.ndarray:
    """Normalized agent-visible state summary (length 7)."""
    lx, ly = env.side_lengths
    vals = belief.thetas[:, (COL_X, COL_Y)]
    mean = belief.weights @ vals
    std = np.sqrt(belief.weights @ (vals - mean) ** 2)
    return np.array([pos.x / lx, pos.y / ly, mean[0] / lx, mean[1] / ly,
                     std[0] / lx, std[1] / ly, math.log1p(obs.concentration)])


def q_values(net: QNetwork, features: np.ndarray) -> np.ndarray:
    return net.forward(features.reshape(1, -1))[0]


def epsilon_greedy(qvals: np.ndarray, epsilon: float,
                   rng: np.random.Generator) -> int:
    """Explore uniformly with probability epsilon, else greedy (lowest-index ties)."""
    if rng.random() < epsilon:
        return int(rng.integers(len(qvals)))
    return int(np.argmax(qvals))


def epsilon_for_episode(episode: int, cfg: LearnerConfig) -> float:
    span = int(cfg.epsilon_fraction * cfg.episodes)
    if span <= 0 or episode >= span:
        return cfg.epsilon_end
    return cfg.epsilon_start + (cfg.epsilon_end - cfg.epsilon_start) * episode / span


class ReplayBuffer:
    """FIFO ring buffer of transitions with uniform sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ConfigError("replay capacity must be >= 1")
        self.capacity = capacity
        self._data: list[Transition] = []
        self._pos = 0

    def push(self, t: Transition) -> None:
        if len(self._data) < self.capacity:
            self._data.append(t)
        else:
            self._data[self._pos] = t
        self._pos = (self._pos + 1) % self.capacity

    def sample(self, k: int, rng: np.random.Generator) -> list[Transition]:
        if len(self._data) < k:
            raise ValueError("not enough transitions buffered to sample")
        idx = rng.integers(len(self._data), size=k)
        return [self._data[i] for i in idx]

    def __len__(self) -> int:
        return len(self._data)


def _batch_arrays(batch: list[Transition]):
    f = np.stack([t.features for t in batch])
    a = np.array([t.action for t in batch])
    r = np.array([t.reward for t in batch])
    f2 = np.stack([t.next_features for t in batch])
    done = np.array([t.done for t in batch])
    return f, a, r, f2, done


def bellman_loss(net: QNetwork, target: QNetwork, batch: list[Transition],
                 cfg: LearnerConfig) -> float:
    loss, _, _ = bellman_loss_and_grads(net, target, batch, cfg)
    return loss


def bellman_loss_and_grads(net: QNetwork, target: QNetwork,
                           batch: list[Transition], cfg: LearnerConfig):
    """Mean squared Bellman error and its analytic gradients w.r.t. ``net``.

    Targets are ``r`` on terminal transitions and
    ``r + gamma * max_a' Q_target(s', a')`` otherwise; the target network is
    treated as a constant.
    """
    f, actions, rewards, f2, done = _batch_arrays(batch)
    n = len(batch)
    y = rewards + cfg.gamma * target.forward(f2).max(axis=1) * ~done

    # forward with caches for backprop
    acts = [f]
    pre = []
    h = f
    last = len(net.weights) - 1
    for k, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w.T + b
        pre.append(z)
        h = np.maximum(z, 0.0) if k < last else z
        acts.append(h)

    rows = np.arange(n)
    err = acts[-1][rows, actions] - y
    loss = float(np.mean(err ** 2))

    delta = np.zeros_like(acts[-1])
    delta[rows, actions] = 2.0 * err / n
    grads_w = [np.empty(0)] * len(net.weights)
    grads_b = [np.empty(0)] * len(net.biases)
    for k in range(last, -1, -1):
        grads_w[k] = delta.T @ acts[k]
        grads_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ net.weights[k]) * (pre[k - 1] > 0)
    return loss, grads_w, grads_b


def td_update(net: QNetwork, target: QNetwork, batch: list[Transition],
              cfg: LearnerConfig) -> float:
    """One SGD step on the Bellman error; returns the pre-step loss."""
    loss, grads_w, grads_b = bellman_loss_and_grads(net, target, batch, cfg)
    if not math.isfinite(loss):
        raise TrainingDivergenceError(f"non-finite Bellman loss: {loss}")
    for w, gw in zip(net.weights, grads_w):
        w -= cfg.lr * gw
    for b, gb in zip(net.biases, grads_b):
        b -= cfg.lr * gb
    return loss


def sync_target(net: QNetwork, target: QNetwork) -> QNetwork:
    """Copy the online parameters into the target network, bit for bit."""
    if net.sizes != target.sizes:
        raise ConfigError(f"architecture mismatch: {net.sizes} vs {target.sizes}")
    for tw, w in zip(target.weights, net.weights):
        np.copyto(tw, w)
    for tb, b in zip(target.biases, net.biases):
        np.copyto(tb, b)
    return target


def train(env_cfg: EnvConfig, belief_cfg: BeliefConfig, cfg: LearnerConfig,
          sample_scenario: Callable[[np.random.Generator], SourceTerm],
          rng: np.random.Generator,
          on_episode: Callable[[dict], None] | None = None,
          buffer: ReplayBuffer | None = None) -> tuple[QNetwork, list[dict]]:
    """Run the full training loop; returns the network and a per-episode log.

    Pass ``buffer`` to observe the stored transitions afterwards.
    """
    n_actions = len(env_cfg.moves)
    net = QNetwork.init(default_sizes(n_actions), rng)
    target = net.copy()
    if buffer is None:
        buffer = ReplayBuffer(cfg.replay_capacity)
    log: list[dict] = []
    global_step = 0

    for episode in range(cfg.episodes):
        epsilon = epsilon_for_episode(episode, cfg)
        scenario = sample_scenario(rng)
        belief = ParticleBelief.from_prior(belief_cfg, env_cfg, scenario, rng)
        pos = env_mod.sample_start(env_cfg, rng)
        obs = Observation(pos, env_mod.sample_measurement(pos, scenario, env_cfg, rng))
        belief.update(obs, rng)
        features = featurize(pos, obs, belief, env_cfg)
        ceased = False
        steps = 0

        while steps < env_cfg.max_steps:
            action = epsilon_greedy(q_values(net, features), epsilon, rng)
            pos, obs = env_mod.step(pos, action, env_cfg, scenario, rng)
            belief.update(obs, rng)
            next_features = featurize(pos, obs, belief, env_cfg)
            steps += 1
            ceased = belief.cessation_check()
            reward = cfg.terminal_reward if ceased else 0.0
            buffer.push(Transition(features, action, reward, next_features, ceased))
            if len(buffer) >= cfg.minibatch:
                td_update(net, target, buffer.sample(cfg.minibatch, rng), cfg)
            global_step += 1
            if global_step % cfg.target_update_interval == 0:
                sync_target(net, target)
            features = next_features
            if ceased:
                break

        est = belief.point_estimate()
        entry = {
            "episode": episode,
            "epsilon": epsilon,
            "steps": steps,
            "ceased": ceased,
            "final_estimate_error": math.hypot(est.x - scenario.x, est.y - scenario.y),
        }
        log.append(entry)
        if on_episode is not None:
            on_episode(entry)
    return net, log


def save_checkpoint(net: QNetwork, path) -> None:
    doc = {
        "version": CHECKPOINT_VERSION,
        "architecture": list(net.sizes),
        "activation": "relu",
        "layers": [{"weights": w.tolist(), "biases": b.tolist()}
                   for w, b in zip(net.weights, net.biases)],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_checkpoint(path) -> QNetwork:
    """Load and structurally validate a checkpoint written by save_checkpoint."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    for key in ("version", "architecture", "activation", "layers"):
        if key not in doc:
            raise CheckpointError(f"checkpoint missing {key!r}")
    if doc["version"] != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {doc['version']!r}")
    if doc["activation"] != "relu":
        raise CheckpointError(f"unsupported activation {doc['activation']!r}")
    sizes = doc["architecture"]
    layers = doc["layers"]
    if (not isinstance(sizes, list) or len(sizes) < 2
            or len(layers) != len(sizes) - 1):
        raise CheckpointError("architecture and layers are inconsistent")
    weights, biases = [], []
    for k, layer in enumerate(layers):
        try:
            w = np.asarray(layer["weights"], dtype=float)
            b = np.asarray(layer["biases"], dtype=float)
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"layer {k} is malformed: {exc}") from exc
        if w.shape != (sizes[k + 1], sizes[k]) or b.shape != (sizes[k + 1],):
            raise CheckpointError(f"layer {k} shape mismatch")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise CheckpointError(f"layer {k} has non-finite parameters")
        weights.append(w)
        biases.append(b)
    return QNetwork(weights, biases)
