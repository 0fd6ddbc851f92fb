"""JSON config files -> typed run/sweep/train configurations.

All three CLI commands accept the same optional sections ("env", "scenarios",
"lookahead", "belief", "success_radius"); sweep and train add their own
required top-level keys. Unknown keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
import json

from .belief import BeliefConfig
from .dqn import LearnerConfig
from .env import ConfigError, EnvConfig
from .harness import RunConfig, ScenarioDistributions, prior_box
from .planners import LookaheadConfig

COMMON_KEYS = {"env", "scenarios", "lookahead", "belief", "success_radius"}
BELIEF_KEYS = {"estimated_dims", "resample_fraction", "mcmc_move", "mcmc_scale"}


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    return doc


def _tuplify(value):
    if isinstance(value, list):
        return tuple(_tuplify(v) for v in value)
    return value


def build(cls, data, label: str):
    """Instantiate a config dataclass from a JSON object, strictly."""
    if not isinstance(data, dict):
        raise ConfigError(f"{label!r} section must be a JSON object")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown {label} option(s): {', '.join(unknown)}")
    try:
        return cls(**{k: _tuplify(v) for k, v in data.items()})
    except TypeError as exc:
        raise ConfigError(f"bad {label} config: {exc}") from exc


def _check_keys(doc: dict, allowed: set[str], label: str) -> None:
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ConfigError(f"unknown {label} config key(s): {', '.join(unknown)}")


def _belief_options(doc: dict) -> dict:
    data = doc.get("belief", {})
    if not isinstance(data, dict):
        raise ConfigError("'belief' section must be a JSON object")
    _check_keys(data, BELIEF_KEYS, "belief")
    return {k: _tuplify(v) for k, v in data.items()}


def _common_sections(doc: dict):
    env = build(EnvConfig, doc.get("env", {}), "env")
    scenarios = build(ScenarioDistributions, doc.get("scenarios", {}), "scenarios")
    lookahead = build(LookaheadConfig, doc.get("lookahead", {}), "lookahead")
    return env, scenarios, lookahead


def run_config(doc: dict, *, policy: str, particles: int, zeta: float,
               episodes: int, seed: int) -> RunConfig:
    """Resolve one cell from CLI arguments plus an optional config document."""
    _check_keys(doc, COMMON_KEYS, "run")
    env, scenarios, lookahead = _common_sections(doc)
    return RunConfig(
        policy=policy, n_particles=particles, cessation_threshold=zeta,
        n_episodes=episodes, base_seed=seed,
        success_radius=doc.get("success_radius", 2.0),
        env=env, scenarios=scenarios, lookahead=lookahead,
        **_belief_options(doc),
    )


def sweep_cells(doc: dict) -> list[RunConfig]:
    """Cross product of policies x particle counts x thresholds."""
    _check_keys(doc, COMMON_KEYS | {"policies", "particles", "zetas",
                                    "episodes", "seed"}, "sweep")
    for key in ("policies", "particles", "zetas", "episodes", "seed"):
        if key not in doc:
            raise ConfigError(f"sweep config is missing {key!r}")
    for key in ("policies", "particles", "zetas"):
        if not isinstance(doc[key], list) or not doc[key]:
            raise ConfigError(f"sweep {key!r} must be a non-empty list")
    env, scenarios, lookahead = _common_sections(doc)
    belief = _belief_options(doc)
    return [
        RunConfig(policy=p, n_particles=n, cessation_threshold=z,
                  n_episodes=doc["episodes"], base_seed=doc["seed"],
                  success_radius=doc.get("success_radius", 2.0),
                  env=env, scenarios=scenarios, lookahead=lookahead, **belief)
        for p in doc["policies"] for n in doc["particles"] for z in doc["zetas"]
    ]


def train_setup(doc: dict):
    """Resolve a training run: env, scenario ranges, belief and learner configs."""
    _check_keys(doc, COMMON_KEYS | {"episodes", "particles", "zeta", "seed",
                                    "learner"}, "train")
    for key in ("episodes", "particles", "zeta", "seed"):
        if key not in doc:
            raise ConfigError(f"train config is missing {key!r}")
    env, scenarios, _ = _common_sections(doc)
    learner_data = doc.get("learner", {})
    if isinstance(learner_data, dict) and "episodes" in learner_data:
        raise ConfigError("set training 'episodes' at the top level, not under 'learner'")
    learner = build(LearnerConfig, {**learner_data, "episodes": doc["episodes"]},
                    "learner")
    belief_opts = _belief_options(doc)
    dims = belief_opts.pop("estimated_dims", ("x", "y"))
    belief = BeliefConfig(
        n_particles=doc["particles"], cessation_threshold=doc["zeta"],
        estimated_dims=dims, prior_box=prior_box(env, scenarios, dims),
        **belief_opts,
    )
    return env, scenarios, belief, learner, doc["seed"]
