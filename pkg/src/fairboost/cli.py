"""fairboost command line: train | predict | evaluate | synthgen.

Every subcommand accepts ``--config FILE`` holding ``key=value`` lines
(keys are flag names, dashes or underscores); explicit flags win.

Exit codes: 0 ok, 2 usage, 3 data, 4 numeric, 5 I/O.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import traceback
from pathlib import Path

import numpy as np

from . import booster, model_io, synthgen
from .constraints import ConstraintSpec
from .dataset import apply_bins, fit_bins, load_csv, load_feature_csv, write_csv
from .errors import FairBoostError, SchemaError, UsageError
from .metrics import evaluate_predictions
from .objective import ProxyKind, sigmoid
from .tree import TreeParams

log = logging.getLogger("fairboost")

PARITY_KINDS = {
    "fpr_parity": ProxyKind.FALSE_POSITIVE,
    "fnr_parity": ProxyKind.FALSE_NEGATIVE,
    "pp_parity": ProxyKind.PREDICTED_POSITIVE,
}

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4, 5


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairboost", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value defaults file")
        p.add_argument("--threads", type=int, default=1,
                       help="parallelism cap; results do not depend on it")

    t = sub.add_parser("train", help="train a (constrained) boosted model")
    common(t)
    t.add_argument("--data", required=True)
    t.add_argument("--label-col", required=True)
    t.add_argument("--group-col")
    t.add_argument("--max-bins", type=int, default=255)
    t.add_argument("--constraint", choices=sorted(PARITY_KINDS) + ["none"], default="none")
    t.add_argument("--epsilon", type=float, default=0.0)
    t.add_argument("--global-fpr", type=float, help="global false-positive-rate budget")
    t.add_argument("--multiplier-lr", type=float, default=0.05)
    t.add_argument("--num-rounds", type=int, default=100)
    t.add_argument("--learning-rate", type=float, default=0.1)
    t.add_argument("--max-depth", type=int, default=6)
    t.add_argument("--min-samples-leaf", type=int, default=20)
    t.add_argument("--l2-reg", type=float, default=1.0)
    t.add_argument("--min-gain", type=float, default=0.0)
    t.add_argument("--first-order", action="store_true", help="unit hessians (plain gradient fit)")
    t.add_argument("--constraint-start-round", type=int, default=0)
    t.add_argument("--compat-argmax-factor", action="store_true",
                   help="scale the argmax-group gradient coefficient by (m - 1)")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True, help="model file")
    t.add_argument("--trace", help="training trace CSV (default: <out>.trace.csv)")

    p = sub.add_parser("predict", help="score rows with a trained model")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=["last", "randomized"], default="last")
    p.add_argument("--seed", type=int, default=0)

    e = sub.add_parser("evaluate", help="group metrics for a scores file")
    common(e)
    e.add_argument("--scores", required=True)
    e.add_argument("--data", required=True)
    e.add_argument("--label-col")
    e.add_argument("--group-col")
    e.add_argument("--threshold", type=float, default=0.0)
    e.add_argument("--target-fpr", type=float)
    e.add_argument("--threshold-split-scores",
                   help="scores file on which to pick the target-FPR threshold (default: evaluated data)")
    e.add_argument("--threshold-split-data", help="labeled data matching --threshold-split-scores")
    e.add_argument("--out", required=True)

    s = sub.add_parser("synthgen", help="write a synthetic biased dataset as CSV")
    common(s)
    s.add_argument("--out", required=True)
    s.add_argument("--preset", choices=["biased-default", "neutral"], default="biased-default")
    s.add_argument("--rows", type=int)
    s.add_argument("--features", type=int)
    s.add_argument("--groups", type=int)
    s.add_argument("--prevalence", type=float)
    s.add_argument("--shifts", type=_floats, help="comma-separated, one per group")
    s.add_argument("--noise", type=_floats, help="comma-separated, one per group")
    s.add_argument("--seed", type=int, default=0)
    return parser


def read_config(path) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    subs = parser._subparsers._group_actions[0].choices
    # required flags may come from the config file, so check them after merging
    required = {}
    for name, sp in subs.items():
        required[name] = [a for a in sp._actions if a.required]
        for a in required[name]:
            a.required = False
    args = parser.parse_args(argv)
    sp = subs[args.command]
    if args.config:
        known = {a.dest: a for a in sp._actions}
        defaults = {}
        for key, raw in read_config(args.config).items():
            if key not in known or key == "config":
                raise UsageError(f"{args.config}: unknown key {key!r} for {args.command}")
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            else:
                defaults[key] = action.type(raw) if action.type else raw
        sp.set_defaults(**defaults)
        args = parser.parse_args(argv)
    missing = [a.option_strings[0] for a in required[args.command] if getattr(args, a.dest) is None]
    if missing:
        sp.error(f"the following arguments are required: {', '.join(missing)}")
    return args


def _run_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("config",)}


def run_train(args) -> int:
    parity = PARITY_KINDS.get(args.constraint)
    if parity is not None and not args.group_col:
        raise UsageError(f"--constraint {args.constraint} requires --group-col")
    budgets = ()
    if args.global_fpr is not None:
        budgets = ((ProxyKind.FALSE_POSITIVE, args.global_fpr),)
    try:
        spec = (ConstraintSpec(parity, args.epsilon, budgets)
                if parity is not None or budgets else None)
        cfg = booster.BoostConfig(
            num_rounds=args.num_rounds,
            learning_rate=args.learning_rate,
            multiplier_lr=args.multiplier_lr,
            tree=TreeParams(args.max_depth, args.min_samples_leaf, args.l2_reg, args.min_gain),
            second_order=not args.first_order,
            constraint_start_round=args.constraint_start_round,
            seed=args.seed,
            compat_argmax_factor=args.compat_argmax_factor,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    raw = load_csv(args.data, args.label_col, args.group_col)
    data = apply_bins(raw, fit_bins(raw, args.max_bins))
    log.info("training on %d rows, %d features, %d groups", raw.n_rows, raw.n_features, raw.n_groups)
    model = booster.train(data, spec, cfg)
    model_io.save_model(model, args.out, _run_config(args))
    trace_path = args.trace or f"{args.out}.trace.csv"
    write_trace(model, trace_path)
    return EXIT_OK


def write_trace(model: booster.BoostedModel, path) -> None:
    names = model.spec.labels(model.group_names) if model.spec else []
    header = ["round", "loss", "argmax_group"]
    for n in names:
        header += [f"proxy_violation:{n}", f"violation:{n}", f"multiplier:{n}"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for rec in model.trace:
            row = [rec.round, repr(rec.loss), "" if rec.argmax_group is None else rec.argmax_group]
            for k in range(len(names)):
                row += [repr(float(rec.proxy_violations[k])), repr(float(rec.violations[k])),
                        repr(float(rec.multipliers[k]))]
            w.writerow(row)


def run_predict(args) -> int:
    model = model_io.load_model(args.model)
    x = load_feature_csv(args.data, model.feature_names)
    if args.mode == "last":
        raw = booster.predict_raw(model, x)
    else:
        raw = booster.predict_randomized(model, x, args.seed)
    prob = sigmoid(raw)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["row_id", "raw", "probability"])
        for i, (r, p) in enumerate(zip(raw, prob)):
            w.writerow([i, repr(float(r)), repr(float(p))])
    return EXIT_OK


def read_scores(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "raw" not in reader.fieldnames:
            raise SchemaError(f"{path}: scores file needs a 'raw' column")
        return np.array([float(r["raw"]) for r in reader])


def run_evaluate(args) -> int:
    if not args.label_col:
        raise UsageError("evaluate requires --label-col")
    raw = load_csv(args.data, args.label_col, args.group_col)
    scores = read_scores(args.scores)
    if scores.size != raw.n_rows:
        raise SchemaError(f"{args.scores} has {scores.size} rows, {args.data} has {raw.n_rows}")
    calibration = None
    if bool(args.threshold_split_scores) != bool(args.threshold_split_data):
        raise UsageError("--threshold-split-scores and --threshold-split-data go together")
    if args.threshold_split_scores:
        cal = load_csv(args.threshold_split_data, args.label_col, args.group_col)
        cal_scores = read_scores(args.threshold_split_scores)
        if cal_scores.size != cal.n_rows:
            raise SchemaError("threshold split scores and data differ in length")
        calibration = (cal.labels, cal_scores)
    report = evaluate_predictions(raw.labels, scores, raw.groups, raw.group_names,
                                  threshold=args.threshold, target_fpr=args.target_fpr,
                                  calibration=calibration)
    report.to_csv(args.out)
    print(report.to_text())
    return EXIT_OK


def run_synthgen(args) -> int:
    base = synthgen.BIASED_DEFAULT
    if args.preset == "neutral":
        base = base.replace(shifts=(0.0, 0.0), noise_rates=(0.05, 0.05))
    changes = {"seed": args.seed}
    for flag, field in (("rows", "n_rows"), ("features", "n_features"), ("groups", "n_groups"),
                        ("prevalence", "prevalence"), ("shifts", "shifts"), ("noise", "noise_rates")):
        if getattr(args, flag) is not None:
            changes[field] = getattr(args, flag)
    k = changes.get("n_groups", base.n_groups)
    if k != base.n_groups:
        changes.setdefault("shifts", tuple(np.linspace(0.0, base.shifts[-1], k)))
        changes.setdefault("noise_rates", tuple(np.linspace(0.0, base.noise_rates[-1], k)))
    try:
        spec = base.replace(**changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_csv(synthgen.generate(spec), args.out)
    return EXIT_OK


COMMANDS = {"train": run_train, "predict": run_predict, "evaluate": run_evaluate,
            "synthgen": run_synthgen}


def _origin(exc: BaseException) -> str:
    # report the module where the root cause was raised, not where it was re-tagged
    while exc.__cause__ is not None:
        exc = exc.__cause__
    tb = traceback.extract_tb(exc.__traceback__)
    return Path(tb[-1].filename).stem if tb else "cli"


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"fairboost: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except FairBoostError as exc:
        print(f"fairboost {args.command}: [{_origin(exc)}] {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"fairboost {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
