#!/usr/bin/env python3
"""Measure the preferential bias of a pruned tree learner toward a
single-attribute concept over a three-attribute conjunction.

Training sets are drawn from the mixture that labels by f1 with weight (1-p)
and by f2 with weight p; the preference curve and flip threshold show how
much evidence the pruning bias withstands.
"""
import argparse
import csv

import stabilimeter as sm
from stabilimeter.agreement import And, Var


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--min-gain-ratio", type=float, default=0.2)
    ap.add_argument("--train-size", type=int, default=100)
    ap.add_argument("--trials", type=int, default=30)
    ap.add_argument("--n-agree", type=int, default=2000)
    ap.add_argument("--p-step", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="bias_curve.csv")
    args = ap.parse_args()

    f1 = sm.FormulaConcept(Var(0), num_vars=6)
    f2 = sm.FormulaConcept(And(Var(0), And(Var(1), Var(2))), num_vars=6)
    learner = sm.TreeLearner(sm.TreeParams(min_gain_ratio=args.min_gain_ratio))

    result = sm.measure_bias_strength(
        learner, f1, f2, grid_step=args.p_step, train_size=args.train_size,
        trials=args.trials, n_agree=args.n_agree, seed=args.seed,
    )

    print(f"pruned tree (min_gain_ratio={args.min_gain_ratio}) vs "
          f"f1=x1, f2=x1&x2&x3")
    print(f"{'p':>5}  {'agree(f1,fL)':>12}  {'agree(f2,fL)':>12}  decided")
    for point in result.results:
        print(f"{point.p:>5.2f}  {point.mean_agree_f1:>12.4f}  "
              f"{point.mean_agree_f2:>12.4f}  "
              f"{'yes' if point.decided else 'no':>7}")
    print(f"\nbiased toward f1 at p=0.5: {result.biased_toward_f1_at_half}")
    print(f"flip threshold: {result.flip_threshold}")
    print(f"bias strength toward f1: {result.strength_toward_f1}")

    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p", "preference_for_f1"])
        writer.writerows(result.to_csv_rows())
    print(f"curve written to {args.out}")


if __name__ == "__main__":
    main()
