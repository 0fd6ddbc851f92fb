"""Experiment orchestration: scenario sampling, episode runs, metrics, file I/O.

A "cell" is one (policy, particle count, cessation threshold) combination run
for a fixed number of episodes. Episode seeds derive from
``(base_seed, cell_key, episode_index)`` so no stream is shared across
episodes and duplicate cells reproduce identical metrics.

Output schema (all under the chosen output directory):
  metrics.csv                 one row per cell:
                              policy,n_particles,zeta,episodes,sr,sr_ci,mtd,st,mean_steps
  episodes.jsonl              one JSON object per episode
  trajectories/<episode>.csv  step,x,y,concentration,est_x,est_y,std_x,std_y,
                              ess,dist_to_goal,dist_to_estimate
  run_config.json             full resolved configuration, schema-versioned
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from . import dqn, env as env_mod, planners
from .belief import BeliefConfig, ParticleBelief
from .env import ConfigError, EnvConfig, Observation, Position, SourceTerm
from .planners import LookaheadConfig, PlannerKind

SCHEMA_VERSION = 1
METRICS_COLUMNS = ("policy", "n_particles", "zeta", "episodes", "sr", "sr_ci",
                   "mtd", "st", "mean_steps")
TRACE_COLUMNS = ("step", "x", "y", "concentration", "est_x", "est_y",
                 "std_x", "std_y", "ess", "dist_to_goal", "dist_to_estimate")
# 95% two-sided normal quantile for all confidence half-widths
Z_95 = 1.959963984540054


@dataclass(frozen=True)
class ScenarioDistributions:
    """Uniform ranges the test/training scenarios are drawn from."""

    x: tuple[float, float] = (10.0, 25.0)
    y: tuple[float, float] = (10.0, 25.0)
    rate: tuple[float, float] = (100.0, 500.0)
    wind_speed: tuple[float, float] = (1.0, 4.0)
    wind_angle_deg: tuple[float, float] = (0.0, 360.0)
    diffusivity: tuple[float, float] = (1.0, 8.0)
    lifetime: float = 10.0  # fixed: the release persists on the search timescale

    def __post_init__(self):
        for name in ("x", "y", "rate", "wind_speed", "wind_angle_deg", "diffusivity"):
            lo, hi = getattr(self, name)
            if not hi > lo:
                raise ConfigError(f"scenario range for {name!r} is empty")
        if self.rate[0] <= 0 or self.diffusivity[0] <= 0 or self.wind_speed[0] < 0:
            raise ConfigError("scenario ranges allow non-physical source terms")
        if self.lifetime <= 0:
            raise ConfigError("lifetime must be > 0")


def draw_source_term(dist: ScenarioDistributions,
                     rng: np.random.Generator) -> SourceTerm:
    return SourceTerm(
        x=rng.uniform(*dist.x),
        y=rng.uniform(*dist.y),
        rate=rng.uniform(*dist.rate),
        wind_speed=rng.uniform(*dist.wind_speed),
        wind_angle=math.radians(rng.uniform(*dist.wind_angle_deg)),
        diffusivity=rng.uniform(*dist.diffusivity),
        lifetime=dist.lifetime,
    )


def sample_scenario(dist: ScenarioDistributions, env: EnvConfig,
                    rng: np.random.Generator) -> tuple[SourceTerm, Position]:
    """One full scenario draw: source term plus searcher start position."""
    theta = draw_source_term(dist, rng)
    return theta, env_mod.sample_start(env, rng)


@dataclass(frozen=True)
class RunConfig:
    """Everything one cell needs; defaults follow the reference scenario table."""

    policy: str                 # planner name or "dqn:<checkpoint path>"
    n_particles: int
    cessation_threshold: float
    n_episodes: int
    base_seed: int
    success_radius: float = 2.0
    env: EnvConfig = field(default_factory=EnvConfig)
    lookahead: LookaheadConfig = field(default_factory=LookaheadConfig)
    scenarios: ScenarioDistributions = field(default_factory=ScenarioDistributions)
    estimated_dims: tuple[str, ...] = ("x", "y")
    resample_fraction: float = 0.5
    mcmc_move: bool = True
    mcmc_scale: float = 0.5

    def __post_init__(self):
        if self.n_episodes < 1:
            raise ConfigError("n_episodes must be >= 1")
        if self.success_radius <= 0:
            raise ConfigError("success_radius must be > 0")
        (dx_lo, dy_lo), (dx_hi, dy_hi) = self.env.domain_min, self.env.domain_max
        if not (dx_lo <= self.scenarios.x[0] and self.scenarios.x[1] <= dx_hi
                and dy_lo <= self.scenarios.y[0] and self.scenarios.y[1] <= dy_hi):
            raise ConfigError("scenario source ranges extend outside the domain")

    def belief_config(self) -> BeliefConfig:
        return BeliefConfig(
            n_particles=self.n_particles,
            resample_fraction=self.resample_fraction,
            cessation_threshold=self.cessation_threshold,
            estimated_dims=self.estimated_dims,
            prior_box=prior_box(self.env, self.scenarios, self.estimated_dims),
            mcmc_move=self.mcmc_move,
            mcmc_scale=self.mcmc_scale,
        )


def prior_box(env: EnvConfig, dist: ScenarioDistributions,
              dims: tuple[str, ...]) -> dict[str, tuple[float, float]]:
    """Prior support per estimated dim: the full domain for position, the
    scenario range for anything else (the searcher knows the arena, not where
    sources tend to be placed)."""
    box: dict[str, tuple[float, float]] = {}
    for name in dims:
        if name == "x":
            box[name] = (env.domain_min[0], env.domain_max[0])
        elif name == "y":
            box[name] = (env.domain_min[1], env.domain_max[1])
        elif name == "wind_angle":
            box[name] = tuple(math.radians(v) for v in dist.wind_angle_deg)
        else:
            box[name] = getattr(dist, name)
    return box


class TraceRow(NamedTuple):
    step: int
    x: float
    y: float
    concentration: float
    est_x: float
    est_y: float
    std_x: float
    std_y: float
    ess: float
    dist_to_goal: float
    dist_to_estimate: float


@dataclass
class EpisodeRecord:
    episode: int
    seed: int
    scenario: SourceTerm
    start: Position
    trace: list[TraceRow]
    ceased: bool
    steps_used: int
    traveled_distance: float
    wall_time: float
    final_estimate_error: float
    success: bool
    degeneracy_events: int


@dataclass(frozen=True)
class MetricsSummary:
    n_episodes: int
    n_successes: int
    sr: float
    sr_ci: float
    mtd: float | None      # mean traveled distance over successful episodes
    mtd_ci: float | None
    st: float | None       # mean wall seconds over successful episodes
    mean_steps: float


class PlannerPolicy:
    def __init__(self, kind: PlannerKind, lookahead: LookaheadConfig):
        self.kind = kind
        self.lookahead = lookahead

    def select(self, belief: ParticleBelief, pos: Position, obs: Observation,
               env: EnvConfig, rng: np.random.Generator) -> int:
        return planners.select_action(self.kind, belief, pos, self.lookahead,
                                      env, rng)


class NetworkPolicy:
    """Greedy evaluation of a trained Q-network (no exploration)."""

    def __init__(self, net: dqn.QNetwork):
        self.net = net

    def select(self, belief: ParticleBelief, pos: Position, obs: Observation,
               env: EnvConfig, rng: np.random.Generator) -> int:
        features = dqn.featurize(pos, obs, belief, env)
        return int(np.argmax(dqn.q_values(self.net, features)))


def make_policy(spec: str, lookahead: LookaheadConfig):
    """Build a policy from its CLI spelling: a planner name or dqn:<checkpoint>."""
    if spec.startswith("dqn:"):
        path = spec[len("dqn:"):]
        if not path:
            raise ConfigError("dqn policy needs a checkpoint path: dqn:<path>")
        return NetworkPolicy(dqn.load_checkpoint(path))
    try:
        kind = PlannerKind(spec)
    except ValueError:
        valid = ", ".join(k.value for k in PlannerKind)
        raise ConfigError(f"unknown policy {spec!r} (expected {valid} or dqn:<path>)")
    return PlannerPolicy(kind, lookahead)


def _trace_row(step: int, pos: Position, obs: Observation,
               belief: ParticleBelief, scenario: SourceTerm) -> TraceRow:
    est = belief.point_estimate()
    std = belief.posterior_std()
    std_x = std[list(belief.cfg.estimated_dims).index("x")] if "x" in belief.cfg.estimated_dims else 0.0
    std_y = std[list(belief.cfg.estimated_dims).index("y")] if "y" in belief.cfg.estimated_dims else 0.0
    return TraceRow(
        step=step, x=pos.x, y=pos.y, concentration=obs.concentration,
        est_x=est.x, est_y=est.y, std_x=float(std_x), std_y=float(std_y),
        ess=belief.effective_sample_size(),
        dist_to_goal=math.hypot(pos.x - scenario.x, pos.y - scenario.y),
        dist_to_estimate=math.hypot(pos.x - est.x, pos.y - est.y),
    )


def run_episode(policy, scenario: SourceTerm, start: Position, cfg: RunConfig,
                rng: np.random.Generator, episode: int = 0,
                seed: int = 0) -> EpisodeRecord:
    """One evaluation episode: sense, update, check cessation, move; repeat."""
    t0 = time.perf_counter()
    belief = ParticleBelief.from_prior(cfg.belief_config(), cfg.env, scenario, rng)
    pos = start
    obs = Observation(pos, env_mod.sample_measurement(pos, scenario, cfg.env, rng))
    belief.update(obs, rng)
    trace = [_trace_row(0, pos, obs, belief, scenario)]
    traveled = 0.0
    ceased = False
    steps = 0
    while steps < cfg.env.max_steps:
        action = policy.select(belief, pos, obs, cfg.env, rng)
        new_pos, obs = env_mod.step(pos, action, cfg.env, scenario, rng)
        traveled += math.hypot(new_pos.x - pos.x, new_pos.y - pos.y)
        pos = new_pos
        belief.update(obs, rng)
        steps += 1
        trace.append(_trace_row(steps, pos, obs, belief, scenario))
        if belief.cessation_check():
            ceased = True
            break
    est = belief.point_estimate()
    error = math.hypot(est.x - scenario.x, est.y - scenario.y)
    return EpisodeRecord(
        episode=episode, seed=seed, scenario=scenario, start=start, trace=trace,
        ceased=ceased, steps_used=steps, traveled_distance=traveled,
        wall_time=time.perf_counter() - t0, final_estimate_error=error,
        success=ceased and error <= cfg.success_radius,
        degeneracy_events=belief.degeneracy_events,
    )


def cell_key(cfg: RunConfig) -> int:
    """Stable integer id of a sweep cell, fed into the episode seed derivation."""
    tag = f"{cfg.policy}|{cfg.n_particles}|{cfg.cessation_threshold!r}"
    return zlib.crc32(tag.encode())


def episode_seed(cfg: RunConfig, index: int) -> int:
    seq = np.random.SeedSequence((cfg.base_seed, cell_key(cfg), index))
    return int(seq.generate_state(1)[0])


def run_cell(cfg: RunConfig, policy=None,
             on_episode=None) -> tuple[list[EpisodeRecord], MetricsSummary]:
    """Run every episode of one cell with per-episode derived seeds."""
    if policy is None:
        policy = make_policy(cfg.policy, cfg.lookahead)
    records = []
    for i in range(cfg.n_episodes):
        seed = episode_seed(cfg, i)
        rng = np.random.default_rng(seed)
        scenario, start = sample_scenario(cfg.scenarios, cfg.env, rng)
        record = run_episode(policy, scenario, start, cfg, rng, episode=i, seed=seed)
        records.append(record)
        if on_episode is not None:
            on_episode(record)
    return records, aggregate_metrics(records)


def aggregate_metrics(records: list[EpisodeRecord]) -> MetricsSummary:
    """SR over all episodes; MTD and ST over successful episodes only."""
    if not records:
        raise ConfigError("aggregate_metrics needs at least one record")
    n = len(records)
    wins = [r for r in records if r.success]
    k = len(wins)
    sr = k / n
    sr_ci = Z_95 * math.sqrt(sr * (1.0 - sr) / n)
    if k > 0:
        distances = np.array([r.traveled_distance for r in wins])
        mtd = float(distances.mean())
        mtd_ci = float(Z_95 * distances.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
        st = float(np.mean([r.wall_time for r in wins]))
    else:
        mtd = mtd_ci = st = None
    return MetricsSummary(
        n_episodes=n, n_successes=k, sr=sr, sr_ci=sr_ci,
        mtd=mtd, mtd_ci=mtd_ci, st=st,
        mean_steps=float(np.mean([r.steps_used for r in records])),
    )


def run_sweep(cells: list[RunConfig], on_episode=None):
    """Run every cell; a failing cell is recorded and the sweep continues."""
    if not cells:
        raise ConfigError("sweep grid is empty")
    rows = []
    failures = []
    for cfg in cells:
        try:
            records, summary = run_cell(cfg, on_episode=on_episode)
            rows.append((cfg, records, summary))
        except ConfigError:
            raise  # a bad grid is the caller's mistake, not a cell failure
        except Exception as exc:
            failures.append({
                "policy": cfg.policy,
                "n_particles": cfg.n_particles,
                "zeta": cfg.cessation_threshold,
                "error": f"{type(exc).__name__}: {exc}",
            })
    return rows, failures


# ---------------------------------------------------------------------------
# file output
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    return repr(value) if isinstance(value, float) else str(value)


def write_metrics_csv(path: Path, rows: list[tuple[RunConfig, MetricsSummary]]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(METRICS_COLUMNS)
        for cfg, summary in rows:
            writer.writerow([
                cfg.policy, cfg.n_particles, _fmt(cfg.cessation_threshold),
                summary.n_episodes, _fmt(summary.sr), _fmt(summary.sr_ci),
                _fmt(summary.mtd), _fmt(summary.st), _fmt(summary.mean_steps),
            ])


def episode_json(record: EpisodeRecord) -> dict:
    scenario = dataclasses.asdict(record.scenario)
    scenario["start_x"] = record.start.x
    scenario["start_y"] = record.start.y
    return {
        "episode": record.episode,
        "seed": record.seed,
        "scenario": scenario,
        "ceased": record.ceased,
        "success": record.success,
        "steps": record.steps_used,
        "traveled_distance": record.traveled_distance,
        "wall_time": record.wall_time,
        "final_estimate_error": record.final_estimate_error,
        "degeneracy_events": record.degeneracy_events,
    }


def write_episodes_jsonl(path: Path, records: list[EpisodeRecord]) -> None:
    with open(path, "w") as fh:
        for record in sorted(records, key=lambda r: r.episode):
            fh.write(json.dumps(episode_json(record)) + "\n")


def write_trajectories(directory: Path, records: list[EpisodeRecord]) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for record in records:
        with open(directory / f"{record.episode}.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(TRACE_COLUMNS)
            for row in record.trace:
                writer.writerow([_fmt(v) for v in row])


def config_json(cfg: RunConfig) -> dict:
    doc = dataclasses.asdict(cfg)
    doc["schema_version"] = SCHEMA_VERSION
    return doc


def export(records: list[EpisodeRecord], summary: MetricsSummary,
           out_dir: Path, cfg: RunConfig) -> None:
    """Write one cell's full output tree under ``out_dir``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(out_dir / "metrics.csv", [(cfg, summary)])
        write_episodes_jsonl(out_dir / "episodes.jsonl", records)
        write_trajectories(out_dir / "trajectories", records)
        with open(out_dir / "run_config.json", "w") as fh:
            json.dump(config_json(cfg), fh, indent=2)
    except OSError as exc:
        raise OSError(f"cannot write run output under {out_dir}: {exc}") from exc


def _cell_dirname(cfg: RunConfig) -> str:
    safe = "".join(c if c.isalnum() or c in "._-" else "-" for c in cfg.policy)
    return f"{safe}_N{cfg.n_particles}_Z{cfg.cessation_threshold}"


def export_sweep(rows, failures, out_dir: Path, sweep_doc: dict) -> None:
    """Top-level metrics.csv plus one subdirectory of episode detail per cell."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_metrics_csv(out_dir / "metrics.csv",
                          [(cfg, summary) for cfg, _, summary in rows])
        for cfg, records, summary in rows:
            cell_dir = out_dir / "cells" / _cell_dirname(cfg)
            export(records, summary, cell_dir, cfg)
        doc = dict(sweep_doc)
        doc["schema_version"] = SCHEMA_VERSION
        with open(out_dir / "run_config.json", "w") as fh:
            json.dump(doc, fh, indent=2)
        if failures:
            with open(out_dir / "failures.json", "w") as fh:
                json.dump(failures, fh, indent=2)
    except OSError as exc:
        raise OSError(f"cannot write sweep output under {out_dir}: {exc}") from exc
