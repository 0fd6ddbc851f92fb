"""Command-line entry point.

Exit codes: 0 success, 1 configuration error (bad flags, bad config file,
bad checkpoint), 2 runtime failure (training divergence, I/O trouble,
failed sweep cells).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import zlib
from pathlib import Path

import numpy as np

from . import __version__, config, dqn, harness
from .env import ConfigError

# keeps training streams disjoint from every evaluation cell's
TRAIN_STREAM = zlib.crc32(b"ste-train")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # bad usage is a config error, not exit code 2
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ste", description="Gas-source search experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="run one policy/particles/threshold cell")
    run.add_argument("--policy", required=True,
                     help="infotaxis | entrotaxis | dcee | random | dqn:<checkpoint>")
    run.add_argument("--particles", type=int, required=True)
    run.add_argument("--zeta", type=float, required=True,
                     help="cessation threshold on the posterior std (m)")
    run.add_argument("--episodes", type=int, required=True)
    run.add_argument("--seed", type=int, required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--config", help="optional JSON with env/scenario overrides")

    sweep = sub.add_parser("sweep", help="run a grid of cells from a config file")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)

    train = sub.add_parser("train", help="train a DQN policy from a config file")
    train.add_argument("--config", required=True)
    train.add_argument("--out", required=True)

    sub.add_parser("version", help="print the package version")
    return parser


def _summary_line(cfg: harness.RunConfig, summary: harness.MetricsSummary) -> str:
    mtd = "n/a" if summary.mtd is None else f"{summary.mtd:.2f}"
    st = "n/a" if summary.st is None else f"{summary.st:.3f}s"
    return (f"{cfg.policy} N={cfg.n_particles} zeta={cfg.cessation_threshold}: "
            f"sr={summary.sr:.3f}+/-{summary.sr_ci:.3f} mtd={mtd} st={st} "
            f"mean_steps={summary.mean_steps:.1f}")


def _cmd_run(args) -> int:
    doc = config.load_json(args.config) if args.config else {}
    cfg = config.run_config(doc, policy=args.policy, particles=args.particles,
                            zeta=args.zeta, episodes=args.episodes, seed=args.seed)
    records, summary = harness.run_cell(cfg)
    harness.export(records, summary, Path(args.out), cfg)
    print(_summary_line(cfg, summary))
    return 0


def _cmd_sweep(args) -> int:
    doc = config.load_json(args.config)
    cells = config.sweep_cells(doc)
    rows, failures = harness.run_sweep(cells)
    harness.export_sweep(rows, failures, Path(args.out), doc)
    for cfg, _, summary in rows:
        print(_summary_line(cfg, summary))
    if failures:
        for failure in failures:
            print(f"cell failed: {failure}", file=sys.stderr)
        raise RuntimeError(f"{len(failures)} sweep cell(s) failed")
    return 0


def _cmd_train(args) -> int:
    doc = config.load_json(args.config)
    env_cfg, scenarios, belief_cfg, learner_cfg, seed = config.train_setup(doc)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(np.random.SeedSequence((seed, TRAIN_STREAM)))

    def on_episode(entry: dict) -> None:
        if (entry["episode"] + 1) % 50 == 0 or entry["episode"] == 0:
            print(f"[train] episode {entry['episode'] + 1}/{learner_cfg.episodes} "
                  f"eps={entry['epsilon']:.3f} steps={entry['steps']} "
                  f"ceased={entry['ceased']}", file=sys.stderr)

    net, log = dqn.train(env_cfg, belief_cfg, learner_cfg,
                         lambda r: harness.draw_source_term(scenarios, r),
                         rng, on_episode=on_episode)
    dqn.save_checkpoint(net, out_dir / "checkpoint.json")
    with open(out_dir / "training_log.jsonl", "w") as fh:
        for entry in log:
            fh.write(json.dumps(entry) + "\n")
    resolved = {
        "schema_version": harness.SCHEMA_VERSION,
        "seed": seed,
        "env": dataclasses.asdict(env_cfg),
        "scenarios": dataclasses.asdict(scenarios),
        "belief": dataclasses.asdict(belief_cfg),
        "learner": dataclasses.asdict(learner_cfg),
    }
    with open(out_dir / "run_config.json", "w") as fh:
        json.dump(resolved, fh, indent=2)
    ceased = sum(1 for e in log if e["ceased"])
    print(f"trained {learner_cfg.episodes} episodes ({ceased} ceased); "
          f"checkpoint at {out_dir / 'checkpoint.json'}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "version":
            print(__version__)
            return 0
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        return _cmd_train(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
