"""Command-line interface.

Subcommands: `agreement` (compare two serialized concepts), `stability`
(repeated half-split estimation on a dataset), `bias-strength` (mixture
weight sweep), `drift` (batch-stream monitoring), and `demo` (generate
scenario datasets). Reports are written as JSON (default) or CSV; identical
configuration and seed always produce byte-identical output files.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bias import measure_bias_strength
from .core import (
    Dataset,
    EmpiricalDistribution,
    LabeledDistribution,
    SeedSpec,
    UniformDistribution,
    load_dataset_csv,
    sample_dataset,
    save_dataset_csv,
    save_schema_file,
)
from .errors import (
    CapacityError,
    DataError,
    LearnerError,
    ParameterError,
    ParseError,
    StabilimeterError,
)
from .agreement import estimate_agreement, exact_agreement
from .learners import (
    FixedClassLearner,
    KnnLearner,
    MajorityLearner,
    MemorizingLearner,
    TreeLearner,
    TreeParams,
)
from .scenarios import (
    DEFAULT_LABEL_NOISE,
    CorrelatedScenario,
    DriftSequence,
    make_drift_sequence,
)
from .serialize import load_concept
from .stability import estimate_stability_accuracy, monitor_drift

SEED_ENV_VAR = "STABILIMETER_SEED"

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE = 2
EXIT_PARAMETER = 3
EXIT_CAPACITY = 4
EXIT_LEARNER = 5


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ParameterError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return 0


def _write_text(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w") as fh:
            fh.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _build_learner(args) -> "Learner":
    name = args.learner
    base_name, _, wrapped = name.partition(":")
    if base_name == "memorizing":
        if not wrapped:
            raise ParameterError("memorizing learner needs a base, e.g. memorizing:tree")
        inner = argparse.Namespace(**vars(args))
        inner.learner = wrapped
        return MemorizingLearner(_build_learner(inner), epsilon=args.epsilon)
    if base_name == "tree":
        return TreeLearner(TreeParams(
            min_gain_ratio=args.min_gain_ratio,
            max_depth=args.max_depth,
            min_leaf=args.min_leaf,
        ))
    if base_name == "knn":
        return KnnLearner(args.k)
    if base_name == "majority":
        return MajorityLearner()
    if base_name == "constant":
        return FixedClassLearner(0)
    raise ParameterError(f"unknown learner {name!r}")


def _load_data(args) -> Dataset:
    if args.data is None:
        raise ParameterError("--data is required for this subcommand")
    return load_dataset_csv(args.data, schema_path=args.schema)


def _attr_dist(args, data: Dataset | None):
    if args.dist == "uniform":
        if data is None:
            raise ParameterError("--dist uniform needs a schema source")
        return UniformDistribution(data.schema)
    if data is None:
        raise ParameterError("--dist empirical requires --data")
    return EmpiricalDistribution(data)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None,
                        help=f"master seed (fallback: ${SEED_ENV_VAR}, then 0)")
    parser.add_argument("--out", default=None,
                        help="output path (default: stdout)")
    parser.add_argument("--format", choices=["json", "csv"], default="json",
                        help="report format")
    parser.add_argument("--jobs", type=int, default=1,
                        help="worker processes for parallelizable stages (1 = sequential)")


def _add_learner_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--learner", default="tree",
                        help="tree | knn | majority | constant | memorizing:<base>")
    parser.add_argument("--min-gain-ratio", type=float, default=0.0,
                        help="tree: reject splits below this gain ratio")
    parser.add_argument("--max-depth", type=int, default=None,
                        help="tree: maximum depth (default unbounded)")
    parser.add_argument("--min-leaf", type=int, default=1,
                        help="tree: do not split nodes smaller than this")
    parser.add_argument("--k", type=int, default=3, help="knn: neighbour count")
    parser.add_argument("--epsilon", type=float, default=0.0,
                        help="memorizing: accuracy margin for keeping the old concept")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stabilimeter",
        description="Stability and preferential-bias measurement for "
                    "classification learners.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("agreement", help="estimate agreement of two serialized concepts")
    p.add_argument("concept_a", help="concept file (JSON or formula s-expression)")
    p.add_argument("concept_b", help="concept file (JSON or formula s-expression)")
    p.add_argument("--n", type=int, default=10_000, help="agreement sample count")
    p.add_argument("--vars", type=int, default=None,
                   help="variable count for bare formula files (default: inferred)")
    p.add_argument("--exact", action="store_true",
                   help="enumerate the space exactly instead of sampling "
                        "(fails on spaces beyond the enumeration bound)")
    p.add_argument("--dist", choices=["uniform", "empirical"], default="uniform",
                   help="attribute distribution for sampling")
    p.add_argument("--data", default=None, help="dataset CSV (for --dist empirical)")
    p.add_argument("--schema", default=None, help="sidecar schema file for --data")
    _add_common(p)

    p = sub.add_parser("stability", help="estimate accuracy and stability of a learner")
    p.add_argument("--data", required=True, help="training dataset CSV")
    p.add_argument("--schema", default=None, help="sidecar schema file")
    _add_learner_flags(p)
    p.add_argument("--m", type=int, default=20, help="number of half-split repetitions")
    p.add_argument("--n", type=int, default=10_000, help="agreement samples per repetition")
    p.add_argument("--dist", choices=["uniform", "empirical"], default="uniform",
                   help="agreement attribute distribution")
    _add_common(p)

    p = sub.add_parser("bias-strength", help="sweep mixture weight to locate the flip threshold")
    p.add_argument("concept_a", help="anchor concept file (f1)")
    p.add_argument("concept_b", help="anchor concept file (f2)")
    _add_learner_flags(p)
    p.add_argument("--p-step", type=float, default=0.05, help="mixture weight grid step")
    p.add_argument("--trials", type=int, default=30, help="training sets per grid point")
    p.add_argument("--train-size", type=int, default=100, help="examples per training set")
    p.add_argument("--n", type=int, default=2000, help="agreement samples per trial")
    p.add_argument("--vars", type=int, default=None,
                   help="variable count for bare formula files (default: inferred)")
    p.add_argument("--swap-mixture-roles", action="store_true",
                   help="label with f2 at weight (1-p) and f1 at weight p instead")
    _add_common(p)

    p = sub.add_parser("drift", help="monitor concept drift over a directory of batches")
    p.add_argument("batch_dir", help="directory of batch CSV files (sorted by name)")
    p.add_argument("--schema", default=None,
                   help="sidecar schema file (default: <batch_dir>/schema.txt if present)")
    _add_learner_flags(p)
    p.add_argument("--n", type=int, default=10_000, help="agreement samples per pair")
    p.add_argument("--threshold", type=float, default=0.5,
                   help="alarm fires when agreement falls below this")
    p.add_argument("--dist", choices=["uniform", "empirical"], default="uniform",
                   help="agreement attribute distribution")
    _add_common(p)

    p = sub.add_parser("demo", help="generate scenario datasets")
    p.add_argument("scenario", choices=["correlated", "drift"])
    p.add_argument("--config", default=None,
                   help="flat key=value file overriding the flags below")
    p.add_argument("--attrs", type=int, default=6, help="number of boolean attributes")
    p.add_argument("--noise-rate", type=float, default=0.02,
                   help="probability the second attribute disagrees with the first")
    p.add_argument("--label-noise", type=float, default=DEFAULT_LABEL_NOISE,
                   help="fraction of labels flipped per draw")
    p.add_argument("--size", type=int, default=200, help="correlated: dataset size")
    p.add_argument("--batches", type=int, default=10, help="drift: number of batches")
    p.add_argument("--drift-at", type=int, default=5, help="drift: first post-drift batch")
    p.add_argument("--batch-size", type=int, default=500, help="drift: examples per batch")
    _add_common(p)

    return parser


def _load_concept_pair(args):
    a = load_concept(args.concept_a, num_vars=args.vars)
    b = load_concept(args.concept_b, num_vars=args.vars)
    # bare formula files may infer different widths; align to the wider one
    if (a.kind == b.kind == "formula" and args.vars is None
            and a.schema != b.schema):
        width = max(len(a.schema), len(b.schema))
        a = load_concept(args.concept_a, num_vars=width)
        b = load_concept(args.concept_b, num_vars=width)
    return a, b


def _cmd_agreement(args) -> None:
    f1, f2 = _load_concept_pair(args)
    data = _load_data(args) if args.dist == "empirical" else None
    dist = (EmpiricalDistribution(data) if data is not None
            else UniformDistribution(f1.schema))
    if args.exact:
        value = exact_agreement(f1, f2, dist)
        if args.format == "json":
            text = _json_text({
                "agreement": float(value),
                "agreement_exact": f"{value.numerator}/{value.denominator}",
                "support_size": dist.support_size(),
            })
        else:
            text = _csv_text(["agreement", "numerator", "denominator"],
                             [[float(value), value.numerator, value.denominator]])
        _write_text(text, args.out)
        return
    est = estimate_agreement(f1, f2, dist, args.n, _resolve_seed(args.seed),
                             n_jobs=args.jobs)
    if args.format == "json":
        text = _json_text({
            "agreement": est.value,
            "agree_count": est.agree_count,
            "n": est.sample_count,
            "worst_case_std": est.worst_case_std,
            "master_seed": _resolve_seed(args.seed),
        })
    else:
        text = _csv_text(["n", "agree_count", "agreement", "worst_case_std"],
                         [[est.sample_count, est.agree_count, est.value,
                           est.worst_case_std]])
    _write_text(text, args.out)


def _cmd_stability(args) -> None:
    data = _load_data(args)
    learner = _build_learner(args)
    dist = _attr_dist(args, data)
    report = estimate_stability_accuracy(
        learner, data, m=args.m, n=args.n, dist=dist,
        seed=_resolve_seed(args.seed), n_jobs=args.jobs,
    )
    if args.format == "json":
        text = _json_text(report.to_json_dict())
    else:
        rows = [[rec.index, rec.acc1, rec.acc2, rec.stab]
                for rec in report.iterations]
        text = _csv_text(["iteration", "acc1", "acc2", "stab"], rows)
    _write_text(text, args.out)


def _cmd_bias_strength(args) -> None:
    f1, f2 = _load_concept_pair(args)
    learner = _build_learner(args)
    result = measure_bias_strength(
        learner, f1, f2,
        grid_step=args.p_step, train_size=args.train_size, trials=args.trials,
        n_agree=args.n, seed=_resolve_seed(args.seed), n_jobs=args.jobs,
        swap_mixture_roles=args.swap_mixture_roles,
    )
    if args.format == "json":
        text = _json_text(result.to_json_dict())
    else:
        text = _csv_text(["p", "preference_for_f1"], result.to_csv_rows())
    _write_text(text, args.out)


def _cmd_drift(args) -> None:
    batch_dir = Path(args.batch_dir)
    if not batch_dir.is_dir():
        raise ParseError(f"{batch_dir} is not a directory")
    files = sorted(batch_dir.glob("*.csv"))
    if len(files) < 2:
        raise DataError(f"{batch_dir} holds {len(files)} batch CSVs; need at least 2")
    schema_path = args.schema
    if schema_path is None and (batch_dir / "schema.txt").exists():
        schema_path = batch_dir / "schema.txt"
    batches = [load_dataset_csv(f, schema_path=schema_path) for f in files]
    learner = _build_learner(args)
    if args.dist == "empirical":
        merged = Dataset(
            batches[0].schema, batches[0].classes,
            np.concatenate([b.vectors for b in batches]),
            np.concatenate([b.labels for b in batches]),
        )
        dist = EmpiricalDistribution(merged)
    else:
        dist = UniformDistribution(batches[0].schema)
    alarms = monitor_drift(learner, batches, dist=dist, n=args.n,
                           threshold=args.threshold, seed=_resolve_seed(args.seed))
    if args.format == "json":
        text = _json_text({
            "batches": [str(f.name) for f in files],
            "threshold": args.threshold,
            "pairs": [
                {"pair": list(a.pair), "agreement": a.agreement, "fired": a.fired}
                for a in alarms
            ],
            "fired_count": sum(a.fired for a in alarms),
            "master_seed": _resolve_seed(args.seed),
        })
    else:
        rows = [[a.batch_pair_index, a.batch_pair_index + 1, a.agreement,
                 a.threshold, int(a.fired)] for a in alarms]
        text = _csv_text(["batch", "next_batch", "agreement", "threshold", "fired"],
                         rows)
    _write_text(text, args.out)


def _apply_config_file(args) -> None:
    """Flat key=value overrides for demo flags (keys use flag spelling)."""
    if args.config is None:
        return
    mapping = {
        "attrs": int, "noise-rate": float, "label-noise": float, "size": int,
        "batches": int, "drift-at": int, "batch-size": int, "seed": int,
    }
    with open(args.config) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{args.config}:{lineno}: expected key=value")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in mapping:
                raise ParseError(f"{args.config}:{lineno}: unknown key {key!r}")
            try:
                parsed = mapping[key](value.strip())
            except ValueError as exc:
                raise ParseError(f"{args.config}:{lineno}: {exc}") from exc
            setattr(args, key.replace("-", "_"), parsed)


def _cmd_demo(args) -> None:
    _apply_config_file(args)
    seed = _resolve_seed(args.seed)
    out_dir = Path(args.out) if args.out else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    scenario = CorrelatedScenario(args.attrs, args.noise_rate, args.label_noise)

    if args.scenario == "correlated":
        data = sample_dataset(scenario, args.size, SeedSpec(seed).spawn("demo-correlated"))
        save_dataset_csv(data, out_dir / "train.csv")
        save_schema_file(data, out_dir / "schema.txt")
        sys.stdout.write(f"wrote {out_dir / 'train.csv'} ({len(data)} rows) "
                         f"and {out_dir / 'schema.txt'}\n")
        return

    seq = DriftSequence(scenario, _NegatedLabels(scenario), drift_at=args.drift_at,
                        batch_count=args.batches, batch_size=args.batch_size)
    batches = make_drift_sequence(seq, SeedSpec(seed).spawn("demo-drift"))
    for k, batch in enumerate(batches):
        save_dataset_csv(batch, out_dir / f"batch_{k:03d}.csv")
    save_schema_file(batches[0], out_dir / "schema.txt")
    sys.stdout.write(f"wrote {len(batches)} batches to {out_dir} "
                     f"(drift at batch {args.drift_at})\n")


class _NegatedLabels(LabeledDistribution):
    """Labeled distribution with every label complemented (binary classes)."""

    def __init__(self, inner: LabeledDistribution):
        super().__init__(inner.schema, inner.classes)
        self.inner = inner

    def sample(self, size, rng):
        vectors, labels = self.inner.sample(size, rng)
        return vectors, 1 - labels


_COMMANDS = {
    "agreement": _cmd_agreement,
    "stability": _cmd_stability,
    "bias-strength": _cmd_bias_strength,
    "drift": _cmd_drift,
    "demo": _cmd_demo,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ParameterError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAMETER
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except LearnerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LEARNER
    except StabilimeterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
