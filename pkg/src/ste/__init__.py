"""Gas-source search: plume simulation, particle-filter estimation with
std-based search cessation, baseline planners, a DQN learner, and a batch
experiment harness."""

from .belief import BeliefConfig, ParticleBelief
from .dqn import LearnerConfig, QNetwork
from .env import (ConfigError, EnvConfig, Observation, Position,
                  SingularityError, SourceTerm)
from .harness import (EpisodeRecord, MetricsSummary, RunConfig,
                      ScenarioDistributions, aggregate_metrics, run_cell,
                      run_episode, run_sweep, sample_scenario)
from .kernels import BACKEND
from .planners import LookaheadConfig, PlannerKind, select_action

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BeliefConfig", "ConfigError", "EnvConfig", "EpisodeRecord",
    "LearnerConfig", "LookaheadConfig", "MetricsSummary", "Observation",
    "ParticleBelief", "PlannerKind", "Position", "QNetwork", "RunConfig",
    "ScenarioDistributions", "SingularityError", "SourceTerm",
    "aggregate_metrics", "run_cell", "run_episode", "run_sweep",
    "sample_scenario", "select_action", "__version__",
]
