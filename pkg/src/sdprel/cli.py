"""Command-line interface.

Exit codes: 0 success, 2 input/format error, 3 numeric failure during
training (non-finite loss).
"""

from __future__ import annotations

import argparse
import sys

from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import load_corpus
from .depgraph import load_dependencies
from .errors import InputError, NumericError
from .features import load_pos_table
from .pipeline import (
    TrainConfig,
    cross_validate,
    evaluate,
    instances_from_json,
    instances_to_json,
    predict,
    preprocess,
    train,
)

SWEEP_PARAMS = ("epochs", "mlp_hidden", "window")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sdprel",
        description="Protein-protein interaction extraction over shortest dependency paths",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="corpus + dependency edges -> instances file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--deps", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=10)
    p.add_argument("--no-pos", action="store_true")
    p.add_argument("--no-position", action="store_true")
    p.add_argument("--pos-table", default=None)
    p.add_argument("--require-deps", action="store_true",
                   help="error out when a sentence has no dependency edges")

    p = sub.add_parser("train", help="train a model on an instances file")
    p.add_argument("--instances", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--losses", default=None, help="optional CSV of per-epoch loss")
    p.add_argument("--tune-embeddings", action="store_true",
                   help="update word vectors during training (default: frozen)")

    p = sub.add_parser("evaluate", help="score an instances file with a checkpoint")
    p.add_argument("--ck", required=True)
    p.add_argument("--instances", required=True)
    p.add_argument("--report", choices=("csv", "json"), default="csv")

    p = sub.add_parser("cv", help="k-fold cross validation from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--deps", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--report", required=True)
    p.add_argument("--pos-table", default=None)

    p = sub.add_parser("predict", help="per-instance predictions from a checkpoint")
    p.add_argument("--ck", required=True)
    p.add_argument("--instances", required=True)

    p = sub.add_parser("sweep", help="re-run CV over one hyperparameter")
    p.add_argument("--param", choices=SWEEP_PARAMS, required=True)
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--corpus", required=True)
    p.add_argument("--deps", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--report", required=True)

    return parser


def _cmd_preprocess(args) -> int:
    config = TrainConfig(
        position_window=args.window,
        use_pos=not args.no_pos,
        use_position=not args.no_position,
    )
    pos_table = load_pos_table(args.pos_table) if args.pos_table else None
    sentences = load_corpus(args.corpus)
    deps = load_dependencies(args.deps)
    result = preprocess(
        sentences, deps, config, pos_table=pos_table, require_deps=args.require_deps
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(instances_to_json(result, config))
    for key, value in result.stats().items():
        print(f"{key}: {value}")
    return 0


def _cmd_train(args) -> int:
    config = TrainConfig.from_file(args.config)
    if args.tune_embeddings:
        config = config.replace(tune_embeddings=True)
    result = instances_from_json(_read(args.instances))
    tr = train(config, result.instances)
    save_checkpoint(tr.checkpoint, args.out)
    if args.losses:
        with open(args.losses, "w", encoding="utf-8") as fh:
            fh.write("epoch,loss\n")
            for epoch, loss in enumerate(tr.epoch_losses, start=1):
                fh.write(f"{epoch},{loss:.6f}\n")
    print(f"checkpoint: {args.out}")
    print(f"final epoch loss: {tr.epoch_losses[-1]:.6f}")
    return 0


def _cmd_evaluate(args) -> int:
    ck = load_checkpoint(args.ck)
    result = instances_from_json(_read(args.instances))
    metrics = evaluate(ck, result.instances, excluded=result.excluded)
    if args.report == "csv":
        print("fold,tp,fp,fn,tn,precision,recall,f1")
        print(
            f"all,{metrics.tp},{metrics.fp},{metrics.fn},{metrics.tn},"
            f"{metrics.precision:.2f},{metrics.recall:.2f},{metrics.f1:.2f}"
        )
    else:
        import json

        print(
            json.dumps(
                {
                    "tp": metrics.tp, "fp": metrics.fp,
                    "fn": metrics.fn, "tn": metrics.tn,
                    "precision": round(metrics.precision, 2),
                    "recall": round(metrics.recall, 2),
                    "f1": round(metrics.f1, 2),
                },
                sort_keys=True,
            )
        )
    return 0


def _cmd_cv(args) -> int:
    config = TrainConfig.from_file(args.config)
    if args.k is not None:
        config = config.replace(k_folds=args.k)
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    config.validate()
    pos_table = load_pos_table(args.pos_table) if args.pos_table else None
    sentences = load_corpus(args.corpus)
    deps = load_dependencies(args.deps)
    result = preprocess(sentences, deps, config, pos_table=pos_table)
    report = cross_validate(config, result, pos_table=pos_table)
    with open(args.report, "w", encoding="utf-8", newline="") as fh:
        fh.write(report.to_csv())
    for key, value in result.stats().items():
        print(f"{key}: {value}")
    print(f"report: {args.report}")
    return 0


def _cmd_predict(args) -> int:
    ck = load_checkpoint(args.ck)
    result = instances_from_json(_read(args.instances))
    vectorizer = ck.build_vectorizer()
    model = ck.build_model()
    print("instance_id,predicted_label,prob_positive")
    for inst in result.instances:
        label, prob = predict(ck, inst, vectorizer, model)
        print(f"{inst.instance_id},{label},{prob:.6f}")
    return 0


def _cmd_sweep(args) -> int:
    base = TrainConfig.from_file(args.config)
    try:
        values = [int(v) for v in args.values.split(",") if v]
    except ValueError:
        raise InputError(f"--values must be comma-separated integers: {args.values!r}")
    if not values:
        raise InputError("--values is empty")
    sentences = load_corpus(args.corpus)
    deps = load_dependencies(args.deps)
    rows = ["param,value,precision,recall,f1"]
    for value in values:
        if args.param == "epochs":
            config = base.replace(epochs=value)
        elif args.param == "mlp_hidden":
            config = base.replace(mlp_hidden=value)
        else:
            config = base.replace(position_window=value)
        config.validate()
        result = preprocess(sentences, deps, config)
        report = cross_validate(config, result)
        m = report.micro
        rows.append(
            f"{args.param},{value},{m.precision:.2f},{m.recall:.2f},{m.f1:.2f}"
        )
    with open(args.report, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(rows) + "\n")
    print(f"report: {args.report}")
    return 0


def _read(path) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


_COMMANDS = {
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "cv": _cmd_cv,
    "predict": _cmd_predict,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
