"""Command-line pipeline: gen, collect, train, eval, ablate.

Exit codes: 0 success, 2 configuration/usage error, 3 numeric failure
(non-finite training loss).
"""
from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .errors import ConfigError, TrainingDiverged
from .evaluate import evaluate_policy, write_eval_csv
from .neural.network import QNetwork
from .offline.collect import BEHAVIORS, CollectConfig, collect
from .offline.dataset import OfflineDataset
from .offline.trainer import TrainerConfig, train, write_loss_log
from .policies import make_policy
from .scenarios import DEMAND_PATTERNS, make_scenario
from .sim.scenario import load_scenario, save_scenario
from .sim.world import write_trajectory_csv

#: Desk-scale trainer override used by `ablate` (TrainerConfig keeps the
#: full-scale default of 20000 gradient steps).
ABLATE_STEPS = 4000


def _add_gen(sub):
    p = sub.add_parser("gen", help="generate a scenario file")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    p.add_argument("--demand", choices=DEMAND_PATTERNS, default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default=None)
    p.add_argument("--lane-length", type=float, default=300.0)
    p.add_argument("--v-free", type=float, default=10.0)
    p.add_argument("--sat-rate", type=float, default=0.5)
    p.add_argument("--horizon", type=float, default=3600.0)
    p.add_argument("--out", required=True)


def _add_collect(sub):
    p = sub.add_parser("collect", help="collect an offline dataset")
    p.add_argument("--scenario", action="append", required=True)
    p.add_argument("--policy", choices=BEHAVIORS, default="cycle")
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episode-seconds", type=float, default=3600.0)
    p.add_argument("--out", required=True)


def _add_train(sub):
    p = sub.add_parser("train", help="train a Q-network on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.add_argument("--loss-log", default=None)
    p.add_argument("--alpha", type=float, default=TrainerConfig.alpha)
    p.add_argument("--gamma", type=float, default=TrainerConfig.gamma)
    p.add_argument("--steps", type=int, default=TrainerConfig.gradient_steps)
    p.add_argument("--batch-size", type=int, default=TrainerConfig.batch_size)
    p.add_argument("--lr", type=float, default=TrainerConfig.lr)
    p.add_argument("--sync", type=int, default=TrainerConfig.target_sync)
    p.add_argument("--fraction", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def _add_eval(sub):
    p = sub.add_parser("eval", help="evaluate a policy on a scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument(
        "--policy",
        required=True,
        help="fixed_time | max_queue | greedy, optionally with +cyclic",
    )
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--episodes", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episode-seconds", type=float, default=3600.0)
    p.add_argument("--out", default=None, help="tidy CSV report")
    p.add_argument("--trajectory", default=None, help="trajectory CSV path")


def _add_ablate(sub):
    p = sub.add_parser("ablate", help="dataset-source or data-fraction study")
    p.add_argument("--mode", choices=("datasets", "fractions"), required=True)
    p.add_argument("--scenario", action="append", required=True)
    p.add_argument("--seeds", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--episodes", type=int, default=10, help="collection episodes")
    p.add_argument("--eval-episodes", type=int, default=5)
    p.add_argument("--steps", type=int, default=ABLATE_STEPS)
    p.add_argument("--alpha", type=float, default=TrainerConfig.alpha)
    p.add_argument("--gamma", type=float, default=TrainerConfig.gamma)
    p.add_argument("--out", required=True)


def cmd_gen(args) -> int:
    scenario = make_scenario(
        args.rows,
        args.cols,
        args.demand,
        seed=args.seed,
        name=args.name,
        lane_length=args.lane_length,
        v_free=args.v_free,
        sat_rate=args.sat_rate,
        horizon_s=args.horizon,
    )
    save_scenario(args.out, scenario)
    print(
        f"wrote {args.out}: {scenario.name} "
        f"({scenario.rows}x{scenario.cols}, {len(scenario.flows)} flows)"
    )
    return 0


def cmd_collect(args) -> int:
    scenarios = [load_scenario(p) for p in args.scenario]
    config = CollectConfig(episodes=args.episodes, episode_s=args.episode_seconds)
    dataset = collect(scenarios, args.policy, args.seed, config)
    dataset.save(args.out)
    per = {}
    for t in dataset:
        key = (t.scenario_id, t.intersection_id)
        per[key] = per.get(key, 0) + 1
    print(f"collected {len(dataset)} transitions ({args.policy}) -> {args.out}")
    for (scen, x), n in sorted(per.items()):
        print(f"  {scen}/{x}: {n}")
    return 0


def cmd_train(args) -> int:
    dataset = OfflineDataset.load(args.dataset)
    if args.fraction != 1.0:
        dataset = dataset.subsample(args.fraction, args.seed)
    config = TrainerConfig(
        alpha=args.alpha,
        gamma=args.gamma,
        batch_size=args.batch_size,
        gradient_steps=args.steps,
        target_sync=args.sync,
        lr=args.lr,
        seed=args.seed,
    )
    print(
        f"training on {len(dataset)} transitions "
        f"(alpha={config.alpha}, gamma={config.gamma}, steps={config.gradient_steps}, "
        f"batch={config.batch_size}, lr={config.lr}, seed={config.seed})"
    )
    net, log = train(dataset, config)
    net.save(args.out)
    if args.loss_log:
        write_loss_log(args.loss_log, log)
    if log:
        print(f"final loss {log[-1].loss:.6f} -> {args.out}")
    else:
        print(f"no gradient steps requested; wrote initial parameters -> {args.out}")
    return 0


def cmd_eval(args) -> int:
    scenario = load_scenario(args.scenario)
    net = QNetwork.load(args.checkpoint) if args.checkpoint else None
    policy = make_policy(args.policy, net)
    report = evaluate_policy(
        scenario,
        policy,
        policy_spec=args.policy,
        episodes=args.episodes,
        seed=args.seed,
        episode_s=args.episode_seconds,
    )
    for ep, att in enumerate(report.per_episode):
        print(f"episode {ep}: avg travel time {att:.2f} s")
    print(f"mean over last {min(5, args.episodes)} episodes: "
          f"{report.mean_travel_time:.2f} s")
    if args.out:
        write_eval_csv(args.out, report)
    if args.trajectory:
        network = scenario.build_network()
        from .evaluate import run_episode
        from .sim.scenario import build_schedule

        result = run_episode(
            network,
            build_schedule(scenario, network),
            make_policy(args.policy, net),
            episode_s=args.episode_seconds,
            record_trajectory=True,
        )
        write_trajectory_csv(args.trajectory, result.trajectory)
    return 0


def _ablate_variants(mode: str):
    if mode == "datasets":
        return [("cycle", 1.0), ("random", 1.0), ("expert", 1.0)]
    return [("cycle", f) for f in (1.0, 0.5, 0.1, 0.01)]


def cmd_ablate(args) -> int:
    scenarios = [load_scenario(p) for p in args.scenario]
    seeds = [args.seed + i for i in range(args.seeds)]
    config = CollectConfig(episodes=args.episodes)
    base_datasets = {}
    for behavior in {b for b, _ in _ablate_variants(args.mode)}:
        base_datasets[behavior] = collect(scenarios, behavior, args.seed, config)
        print(f"collected {behavior}: {len(base_datasets[behavior])} transitions")

    rows = []
    for behavior, fraction in _ablate_variants(args.mode):
        variant = behavior if fraction == 1.0 else f"{behavior}@{fraction}"
        if args.mode == "fractions":
            variant = f"fraction={fraction}"
        for seed in seeds:
            dataset = base_datasets[behavior]
            if fraction != 1.0:
                dataset = dataset.subsample(fraction, seed)
            tcfg = TrainerConfig(
                alpha=args.alpha,
                gamma=args.gamma,
                gradient_steps=args.steps,
                seed=seed,
            )
            net, _ = train(dataset, tcfg)
            for scenario in scenarios:
                report = evaluate_policy(
                    scenario,
                    make_policy("greedy", net),
                    policy_spec=variant,
                    episodes=args.eval_episodes,
                    seed=seed,
                )
                rows.append((variant, scenario.name, seed, report.mean_travel_time))
                print(
                    f"{variant} / {scenario.name} / seed {seed}: "
                    f"{report.mean_travel_time:.2f} s"
                )

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "scenario", "seed", "avg_travel_time"])
        for row in rows:
            writer.writerow([row[0], row[1], row[2], repr(row[3])])
        for variant in dict.fromkeys(r[0] for r in rows):
            for scen in dict.fromkeys(r[1] for r in rows):
                vals = [r[3] for r in rows if r[0] == variant and r[1] == scen]
                writer.writerow([variant, scen, "mean", repr(float(np.mean(vals)))])
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="greenloop",
        description="Desk-scale offline RL for cyclical traffic-signal control.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_gen(sub)
    _add_collect(sub)
    _add_train(sub)
    _add_eval(sub)
    _add_ablate(sub)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": cmd_gen,
        "collect": cmd_collect,
        "train": cmd_train,
        "eval": cmd_eval,
        "ablate": cmd_ablate,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except TrainingDiverged as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
