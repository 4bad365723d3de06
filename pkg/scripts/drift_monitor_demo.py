#!/usr/bin/env python3
"""Stream batches past a tree learner and watch consecutive-concept agreement.

The generating target flips to its negation midway; a stable learner turns
that extension change into an intension change big enough to alarm on.
"""
import argparse

import stabilimeter as sm
from stabilimeter.agreement import Not, Var
from stabilimeter.scenarios import DriftSequence, make_drift_sequence


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--batches", type=int, default=10)
    ap.add_argument("--drift-at", type=int, default=5)
    ap.add_argument("--batch-size", type=int, default=500)
    ap.add_argument("--flip-rate", type=float, default=0.05,
                    help="label noise inside each batch")
    ap.add_argument("--threshold", type=float, default=0.5)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    target = sm.FormulaConcept(Var(0), num_vars=4)
    anti = sm.FormulaConcept(Not(Var(0)), num_vars=4)
    uni = sm.UniformDistribution(target.schema)
    seq = DriftSequence(
        pre_drift=sm.ConceptNoiseDistribution(target, uni, args.flip_rate),
        post_drift=sm.ConceptNoiseDistribution(anti, uni, args.flip_rate),
        drift_at=args.drift_at,
        batch_count=args.batches,
        batch_size=args.batch_size,
    )
    batches = make_drift_sequence(seq, args.seed)
    alarms = sm.monitor_drift(sm.TreeLearner(), batches, n=args.n,
                              threshold=args.threshold, seed=args.seed)

    print(f"target negates at batch {args.drift_at}; threshold {args.threshold}")
    for alarm in alarms:
        marker = "  <-- ALARM" if alarm.fired else ""
        print(f"batches {alarm.pair[0]:>2} -> {alarm.pair[1]:>2}: "
              f"agreement {alarm.agreement:.4f}{marker}")


if __name__ == "__main__":
    main()
