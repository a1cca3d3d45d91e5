"""Command-line surface: fit, predict, count, ablate, oracle.

Exit codes: 0 success/certified, 3 uncertified result emitted, 1 usage or
data-format error, 2 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace as dc_replace
from fractions import Fraction
from typing import Optional

from .bounds import BoundToggles, count_trees
from .dataset import DataFormatError, Dataset, load_csv
from .oracle import OracleLimits, OracleResourceError, exhaustive_optimum
from .scheduler import Policy
from .search import SearchConfig, SearchResult, fit

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INTERNAL = 2
EXIT_UNCERTIFIED = 3

ABLATION_FLAGS = {
    "no-lookahead": "lookahead",
    "no-support-bound": "node_support",
    "no-incremental-accuracy": "incremental_accuracy",
    "no-accuracy-bound": "leaf_accuracy",
    "no-equiv-points": "equivalent_points",
    "no-permutation-cache": "permutation_cache",
}


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_lambda(text: str) -> Fraction:
    try:
        lam = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise DataFormatError(f"invalid --lambda value {text!r}: {exc}")
    if lam <= 0:
        raise DataFormatError(
            "--lambda must be > 0: the leaf penalty is what bounds the "
            "search space")
    return lam


def _load(path: str, label: str) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        return load_csv(fh, label)


def _toggles_from_args(args) -> BoundToggles:
    t = BoundToggles()
    for flag, field in ABLATION_FLAGS.items():
        if getattr(args, flag.replace("-", "_")):
            t = t.replace(**{field: False})
    if getattr(args, "similar_support", False):
        t = t.replace(similar_support=True)
    return t


def _config_from_args(args) -> SearchConfig:
    return SearchConfig(
        lam=_parse_lambda(args.lam),
        policy=Policy(args.policy),
        toggles=_toggles_from_args(args),
        warm_start=args.warm_start,
        time_limit=args.time_limit,
        max_trees=args.max_trees,
        max_cache_entries=args.max_cache_entries,
        trace_interval=args.trace_interval,
    )


def _model_dict(result: SearchResult, ds: Dataset, lam_text: str) -> dict:
    tree = result.best_tree
    n_correct = sum(l.n_correct for l in tree.leaves)
    return {
        "lambda": lam_text,
        "objective": str(result.objective),
        "training_accuracy": n_correct / ds.n_samples,
        "certified": result.certified,
        "leaves": [
            {
                "clauses": [{"feature": ds.feature_names[c.feature],
                             "value": 1 if c.polarity else 0}
                            for c in leaf.clauses],
                "prediction": leaf.prediction,
                "n_captured": leaf.n_captured,
                "n_correct": leaf.n_correct,
            }
            for leaf in tree.leaves
        ],
    }


def _write_trace(path: str, result: SearchResult) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["elapsed_s", "trees_evaluated", "best_objective",
                    "min_queue_lower_bound", "queue_size",
                    "log10_remaining_bound"])
        for rec in result.trace:
            w.writerow([
                f"{rec.elapsed_s:.6f}",
                rec.trees_evaluated,
                str(rec.best_objective),
                "" if rec.min_queue_lower_bound is None
                else str(rec.min_queue_lower_bound),
                rec.queue_size,
                "" if rec.log10_remaining_bound is None
                else rec.log10_remaining_bound,
            ])


def _print_summary(result: SearchResult, ds: Dataset) -> None:
    n_correct = sum(l.n_correct for l in result.best_tree.leaves)
    s = result.stats
    print(f"objective: {result.objective} ({float(result.objective):.6f})")
    print(f"training_accuracy: {n_correct / ds.n_samples:.6f}")
    print(f"leaves: {len(result.best_tree.leaves)}")
    print(f"certified: {str(result.certified).lower()}")
    print(f"gap: {result.gap} ({float(result.gap):.6f})")
    print(f"trees_evaluated: {s.trees_evaluated}")
    print(f"trees_to_optimum: {s.trees_to_optimum}")
    print(f"time_to_optimum_s: {s.time_to_optimum:.6f}")
    print(f"total_time_s: {s.total_time:.6f}")
    print(f"max_queue_size: {s.max_queue_size}")
    print(f"leaf_cache_size: {s.leaf_cache_size}")
    print(f"leaf_cache_hits: {s.leaf_cache_hits}")
    print(f"tree_cache_size: {s.tree_cache_size}")
    print(f"tree_cache_purged: {s.tree_cache_purged}")
    print(f"duplicates_skipped: {s.duplicates_skipped}")
    if s.limit_hit:
        print(f"limit: {s.limit_hit}")


def cmd_fit(args) -> int:
    ds = _load(args.data, args.label)
    config = _config_from_args(args)
    result = fit(ds, config)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(_model_dict(result, ds, args.lam), fh, indent=2)
        fh.write("\n")
    if args.trace:
        _write_trace(args.trace, result)
    _print_summary(result, ds)
    return EXIT_OK if result.certified else EXIT_UNCERTIFIED


def cmd_predict(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        model = json.load(fh)
    ds = _load(args.data, args.label)
    name_to_col = {name: i for i, name in enumerate(ds.feature_names)}
    for leaf in model["leaves"]:
        for clause in leaf["clauses"]:
            if clause["feature"] not in name_to_col:
                raise DataFormatError(
                    f"model feature {clause['feature']!r} missing from data")
    mistakes = 0
    for n in range(ds.n_samples):
        matches = [
            leaf for leaf in model["leaves"]
            if all(ds.columns[name_to_col[c["feature"]]].get(n)
                   == bool(c["value"]) for c in leaf["clauses"])
        ]
        if len(matches) != 1:
            print(f"internal error: sample {n} matched {len(matches)} "
                  "leaves; model leaves do not partition the data",
                  file=sys.stderr)
            return EXIT_INTERNAL
        if matches[0]["prediction"] != int(ds.labels.get(n)):
            mistakes += 1
    acc = (ds.n_samples - mistakes) / ds.n_samples
    print(f"samples: {ds.n_samples}")
    print(f"mistakes: {mistakes}")
    print(f"accuracy: {acc:.6f}")
    return EXIT_OK


def cmd_count(args) -> int:
    print(count_trees(args.features, args.depth))
    return EXIT_OK


def cmd_oracle(args) -> int:
    ds = _load(args.data, args.label)
    lam = _parse_lambda(args.lam)
    limits = OracleLimits(max_leaves=args.max_leaves,
                          max_features=args.max_features)
    try:
        res = exhaustive_optimum(ds, lam, limits)
    except OracleResourceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"objective: {res.objective} ({float(res.objective):.6f})")
    print(f"mistakes: {res.mistakes}")
    print(f"leaves: {res.n_leaves}")
    for key in res.leaf_keys:
        lits = " & ".join(
            f"{ds.feature_names[c.feature]}={1 if c.polarity else 0}"
            for c in key) or "(root)"
        print(f"  {lits}")
    return EXIT_OK


def _ablate_variants(base: SearchConfig):
    yield "all_bounds", base
    for flag, field in ABLATION_FLAGS.items():
        name = flag.replace("-", "_")
        yield name, dc_replace(base,
                               toggles=base.toggles.replace(**{field: False}))
    for pol in Policy:
        if pol is base.policy:
            continue
        yield f"policy_{pol.value}", dc_replace(base, policy=pol)


def cmd_ablate(args) -> int:
    ds = _load(args.data, args.label)
    base = _config_from_args(args)
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out \
        else sys.stdout
    w = csv.writer(out)
    w.writerow(["variant", "total_time_s", "time_to_optimum_s",
                "trees_evaluated", "trees_to_optimum", "max_queue_size"])
    objectives = {}
    try:
        for name, cfg in _ablate_variants(base):
            result = fit(ds, cfg)
            s = result.stats
            if result.certified:
                objectives[name] = result.objective
                w.writerow([name, f"{s.total_time:.6f}",
                            f"{s.time_to_optimum:.6f}", s.trees_evaluated,
                            s.trees_to_optimum, s.max_queue_size])
            else:
                limit = args.time_limit
                mark = f">{limit}" if limit is not None else "censored"
                w.writerow([name, mark, mark, s.trees_evaluated,
                            s.trees_to_optimum, s.max_queue_size])
    finally:
        if out is not sys.stdout:
            out.close()
    if len(set(objectives.values())) > 1:
        print("internal error: certified objectives diverge across "
              f"variants: {objectives}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def _add_fit_flags(p: _Parser) -> None:
    p.add_argument("--data", required=True)
    p.add_argument("--label", required=True)
    p.add_argument("--lambda", dest="lam", required=True,
                   help="leaf penalty, decimal or fraction, > 0")
    p.add_argument("--policy", default=Policy.CURIOSITY.value,
                   choices=[pol.value for pol in Policy])
    p.add_argument("--trace")
    p.add_argument("--time-limit", type=float)
    p.add_argument("--max-trees", type=int)
    p.add_argument("--max-cache-entries", type=int)
    p.add_argument("--trace-interval", type=int, default=1000)
    p.add_argument("--warm-start", dest="warm_start", action="store_true",
                   default=True)
    p.add_argument("--no-warm-start", dest="warm_start",
                   action="store_false")
    for flag in ABLATION_FLAGS:
        p.add_argument(f"--{flag}", action="store_true")
    p.add_argument("--similar-support", action="store_true")


def build_parser() -> _Parser:
    parser = _Parser(prog="opttree",
                     description="Certifiably optimal sparse decision trees "
                                 "over binary features")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p_fit = sub.add_parser("fit", help="learn a certified-optimal tree")
    _add_fit_flags(p_fit)
    p_fit.add_argument("--out", required=True)
    p_fit.set_defaults(func=cmd_fit)

    p_pred = sub.add_parser("predict", help="score a model on a CSV")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--label", required=True)
    p_pred.set_defaults(func=cmd_predict)

    p_count = sub.add_parser("count",
                             help="count distinct trees up to a depth")
    p_count.add_argument("--features", type=int, required=True)
    p_count.add_argument("--depth", type=int, required=True)
    p_count.set_defaults(func=cmd_count)

    p_abl = sub.add_parser("ablate",
                           help="compare bound ablations and policies")
    _add_fit_flags(p_abl)
    p_abl.add_argument("--out")
    p_abl.set_defaults(func=cmd_ablate)

    p_or = sub.add_parser("oracle",
                          help="exhaustive optimum for small instances")
    p_or.add_argument("--data", required=True)
    p_or.add_argument("--label", required=True)
    p_or.add_argument("--lambda", dest="lam", required=True)
    p_or.add_argument("--max-features", type=int, default=12)
    p_or.add_argument("--max-leaves", type=int, default=32)
    p_or.set_defaults(func=cmd_oracle)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (DataFormatError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
