"""Run every shipped server strategy and tabulate failure rates and verdicts.

    python scripts/adversary_suite.py --rounds 10000 --runs 20 --noise ideal
"""
import argparse
import json

import numpy as np

from qline_vbqc import Algorithm, NoiseParams, Thresholds, decide, parse_behavior, run_protocol

STRATEGIES = [
    "honest",
    "fixed-outcome:q2=0",
    "fixed-outcome:q2=1",
    "fixed-outcome:q1=0,q2=0",
    "outcome-flip:q2=1",
    "outcome-flip:q2=0.5",
    "angle-tamper:q2=4",
    "angle-tamper:q2=2",
    "angle-tamper:q1=4",
    "state-replace:product00",
    "state-replace:plus-plus",
    "state-replace:mixed",
]


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--rounds", type=int, default=10_000)
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--noise", choices=["ideal", "lab-default"], default="ideal")
    ap.add_argument("--omega", type=float, default=0.18)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", action="store_true", help="print one JSON object per strategy")
    args = ap.parse_args()

    noise = NoiseParams.ideal() if args.noise == "ideal" else NoiseParams.lab_default()
    th = Thresholds(omega=args.omega)
    alg = Algorithm((2, 2), (0, 0))
    if not args.json:
        print(f"{'strategy':28s} {'mean eps':>9s} {'accepts':>8s} {'P(m2=1)':>8s}")
    for desc in STRATEGIES:
        behavior = parse_behavior(desc)
        eps, accepts, ones = [], 0, []
        for r in range(args.runs):
            t = run_protocol(alg, args.rounds, 0.5, noise, behavior, seed=args.seed + r)
            v = decide(t, th)
            eps.append(v.stats.epsilon)
            accepts += v.accept
            ones.append(t.m2_true[~t.is_test].mean())
        row = {"strategy": desc, "mean_epsilon": float(np.mean(eps)), "accepts": accepts, "runs": args.runs,
               "p_m2_one": float(np.mean(ones))}
        if args.json:
            print(json.dumps(row))
        else:
            print(f"{desc:28s} {row['mean_epsilon']:9.4f} {accepts:>4d}/{args.runs:<3d} {row['p_m2_one']:8.4f}")


if __name__ == "__main__":
    main()
