"""Ablation tables: behavior-policy robustness and low-data robustness.

The first table trains the Q-network on logs collected by three behavior
policies (cycle / random / expert) and compares suite-wide mean travel
time; the second trains on nested random fractions of the cycle dataset.
Both tables average over training seeds and are written as tidy CSVs.

Usage:
    python3 scripts/run_ablations.py [--episodes 43] [--seeds 3]
                                     [--steps 20000] [--out results]
"""
from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from greenloop.evaluate import evaluate_policy
from greenloop.offline.collect import CollectConfig, collect
from greenloop.offline.trainer import TrainerConfig, train
from greenloop.policies import make_policy
from greenloop.scenarios import desk_suite

BEHAVIORS = ("cycle", "random", "expert")
FRACTIONS = (1.0, 0.5, 0.1, 0.01)


def suite_mean(suite, names, net) -> list[float]:
    policy = make_policy("greedy", net=net)
    return [
        evaluate_policy(suite[n], policy, episodes=1).mean_travel_time
        for n in names
    ]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--episodes", type=int, default=43)
    parser.add_argument("--seeds", type=int, default=3)
    parser.add_argument("--steps", type=int, default=20000)
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args(argv)

    suite = desk_suite()
    names = sorted(suite)
    scens = [suite[n] for n in names]
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()

    behavior_rows = []  # behavior, seed, scenario, mean_travel_time
    cycle_dataset = None
    for behavior in BEHAVIORS:
        t1 = time.time()
        dataset = collect(scens, behavior, seed=0,
                          config=CollectConfig(episodes=args.episodes))
        if behavior == "cycle":
            cycle_dataset = dataset
        print(f"collected {behavior}: {len(dataset)} transitions "
              f"({time.time() - t1:.0f}s)")
        for seed in range(args.seeds):
            net, _ = train(dataset,
                           TrainerConfig(gradient_steps=args.steps, seed=seed))
            for name, att in zip(names, suite_mean(suite, names, net)):
                behavior_rows.append((behavior, seed, name, att))
            print(f"  {behavior} seed {seed} done ({time.time() - t1:.0f}s)")

    with open(args.out / "ablation_behaviors.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["behavior", "seed", "scenario", "mean_travel_time"])
        writer.writerows(behavior_rows)

    fraction_rows = []  # fraction, seed, scenario, mean_travel_time
    for fraction in FRACTIONS:
        for seed in range(args.seeds):
            subset = (cycle_dataset if fraction == 1.0
                      else cycle_dataset.subsample(fraction, seed=seed))
            net, _ = train(subset,
                           TrainerConfig(gradient_steps=args.steps, seed=seed))
            for name, att in zip(names, suite_mean(suite, names, net)):
                fraction_rows.append((fraction, seed, name, att))
        print(f"fraction {fraction} done ({time.time() - t0:.0f}s)")

    with open(args.out / "ablation_fractions.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fraction", "seed", "scenario", "mean_travel_time"])
        writer.writerows(fraction_rows)

    print("\nsuite mean travel time (s) by collection behavior")
    for behavior in BEHAVIORS:
        vals = [r[3] for r in behavior_rows if r[0] == behavior]
        print(f"  {behavior:<8} {np.mean(vals):8.1f}")
    print("suite mean travel time (s) by dataset fraction")
    for fraction in FRACTIONS:
        vals = [r[3] for r in fraction_rows if r[0] == fraction]
        print(f"  {fraction:<8} {np.mean(vals):8.1f}")
    print(f"\ntotal {time.time() - t0:.0f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
