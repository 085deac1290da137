"""Main results table: offline-trained control vs classical baselines.

Collects cyclical logs on the desk-scale scenario suite, trains the
conservative Q-network on them once per seed, and tabulates mean travel
time for FixedTime, Max-QueueLength, the greedy learned policy, and the
cyclical-wrapped deployment.  Writes one tidy CSV and prints the table.

Usage:
    python3 scripts/run_main_results.py [--episodes 43] [--seeds 3]
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


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--episodes", type=int, default=43,
                        help="collection episodes per scenario")
    parser.add_argument("--seeds", type=int, default=3,
                        help="number of training seeds")
    parser.add_argument("--steps", type=int, default=20000,
                        help="gradient steps per training run")
    parser.add_argument("--out", type=Path, default=Path("results"),
                        help="output directory")
    args = parser.parse_args(argv)

    suite = desk_suite()
    names = sorted(suite)
    args.out.mkdir(parents=True, exist_ok=True)
    t0 = time.time()

    print(f"collecting cycle logs ({args.episodes} episodes/scenario) ...")
    dataset = collect(
        [suite[n] for n in names], "cycle", seed=0,
        config=CollectConfig(episodes=args.episodes),
    )
    print(f"  {len(dataset)} transitions ({time.time() - t0:.0f}s)")

    nets = []
    for seed in range(args.seeds):
        t1 = time.time()
        net, _ = train(dataset, TrainerConfig(gradient_steps=args.steps, seed=seed))
        nets.append(net)
        print(f"  trained seed {seed} ({time.time() - t1:.0f}s)")

    rows = []  # scenario, policy, seed, mean_travel_time
    for name in names:
        for spec in ("fixed_time", "max_queue"):
            rep = evaluate_policy(suite[name], make_policy(spec), episodes=1)
            rows.append((name, spec, "-", rep.mean_travel_time))
        for spec in ("greedy", "greedy+cyclic"):
            for seed, net in enumerate(nets):
                rep = evaluate_policy(
                    suite[name], make_policy(spec, net=net), episodes=1
                )
                rows.append((name, spec, seed, rep.mean_travel_time))

    out_csv = args.out / "main_results.csv"
    with open(out_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "policy", "seed", "mean_travel_time"])
        writer.writerows(rows)

    print(f"\nmean travel time (s), seeds averaged — {out_csv}")
    specs = ("fixed_time", "max_queue", "greedy", "greedy+cyclic")
    print(f"{'scenario':<14}" + "".join(f"{s:>16}" for s in specs))
    for name in names:
        cells = []
        for spec in specs:
            vals = [r[3] for r in rows if r[0] == name and r[1] == spec]
            cells.append(f"{np.mean(vals):>16.1f}")
        print(f"{name:<14}" + "".join(cells))
    print(f"\ntotal {time.time() - t0:.0f}s")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
