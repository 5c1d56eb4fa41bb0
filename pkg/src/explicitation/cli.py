"""Command-line interface. Exit codes: 0 ok, 1 config error, 2 data error,
3 backend error."""

from __future__ import annotations

import argparse
import json
import logging
import statistics
import sys
from pathlib import Path

import numpy as np

from . import evaluation as evalmod
from . import experiment as exp
from . import inference as inf
from .config import ExperimentConfig, parse_override
from .errors import BackendError, ConfigError, DataError
from .senses import default_labels, load_labels

log = logging.getLogger("explicitation")

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config (JSON)")
    parser.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config key (repeatable)")
    parser.add_argument("--output-dir", help="shortcut for --set output_dir=...")
    parser.add_argument("--jobs", type=int, help="shortcut for --set jobs=N")


def _load_config(args) -> ExperimentConfig:
    overrides = dict(parse_override(text) for text in args.overrides)
    if getattr(args, "output_dir", None):
        overrides["output_dir"] = args.output_dir
    if getattr(args, "jobs", None):
        overrides["jobs"] = args.jobs
    return ExperimentConfig.from_file(Path(args.config), overrides)


def _out_path(args, default_name: str, config: ExperimentConfig) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return out_dir / default_name


def cmd_corpus_stats(args) -> int:
    config = _load_config(args)
    doc = exp.corpus_stat_tables(config)
    if doc["corpus"].get("parsed", doc["corpus"].get("test", 0)) == 0:
        log.warning("corpus is empty; emitting zero tables")
    print(json.dumps(doc, indent=2, ensure_ascii=False))
    return EXIT_OK


def cmd_train_classifier(args) -> int:
    config = _load_config(args)
    bundle = exp.load_corpus(config)
    labels = exp.build_labels(config)
    model = exp.build_classifier(config, labels, bundle.train)
    if not hasattr(model, "save"):
        raise ConfigError("only the frequency classifier can be persisted")
    path = _out_path(args, "classifier.json", config)
    model.save(path)
    print(f"wrote {path} (fingerprint {model.fingerprint[:12]}, "
          f"{len(model.rows)} connectives)")
    return EXIT_OK


def _score_setup(config: ExperimentConfig):
    bundle = exp.load_corpus(config)
    inventory = exp.build_inventory(config)
    labels = exp.build_labels(config)
    _, eligible, _ = evalmod.gold_label_sets(bundle.test, config.level, labels)
    return bundle, inventory, labels, eligible


def cmd_score(args) -> int:
    config = _load_config(args)
    bundle, inventory, labels, eligible = _score_setup(config)
    backend = exp.build_backend(config, inventory, bundle.train)
    dists = exp.compute_distributions(backend, eligible, inventory, config.mode,
                                      jobs=config.jobs)
    path = _out_path(args, "scores.jsonl", config)
    with open(path, "w", encoding="utf-8") as fh:
        for rel, dist in zip(eligible, dists):
            fh.write(json.dumps({"relation_id": rel.rel_id,
                                 "probs": dist.tolist()}) + "\n")
    print(f"wrote {path} ({len(eligible)} relations, backend {backend.describe()})")
    return EXIT_OK


def _read_scores(path: Path, eligible) -> list[np.ndarray]:
    rows = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                doc = json.loads(line)
                rows[doc["relation_id"]] = np.asarray(doc["probs"], dtype=float)
    try:
        return [rows[rel.rel_id] for rel in eligible]
    except KeyError as exc:
        raise DataError(f"scores file {path} lacks relation {exc}")


def cmd_predict(args) -> int:
    config = _load_config(args)
    bundle, inventory, labels, eligible = _score_setup(config)
    clf = exp.build_classifier(config, labels, bundle.train)
    dists = _read_scores(Path(args.scores), eligible)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for method in dict.fromkeys(config.methods):
        predictor = inf.pipeline_predict if method == inf.PIPELINE else inf.marginal_predict
        preds = [predictor(dist, clf, rel.arg1, rel.arg2, inventory, rel.rel_id)
                 for rel, dist in zip(eligible, dists)]
        path = out_dir / f"predictions_{method}.jsonl"
        inf.write_predictions(preds, path, include_conn_probs=config.include_conn_probs)
        print(f"wrote {path}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = _load_config(args)
    _, _, labels, eligible = _score_setup(config)
    preds = inf.read_predictions(Path(args.predictions))
    report = evalmod.evaluate_predictions(preds, eligible, config.level, labels,
                                          {"predictions": Path(args.predictions).name})
    path = _out_path(args, "eval.json", config)
    exp.dump_json(report.to_dict(), path)
    print(report.to_text(), end="")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_agreement(args) -> int:
    config = _load_config(args)
    bundle, inventory, labels, eligible = _score_setup(config)
    clf = exp.build_classifier(config, labels, bundle.train)
    if args.scores:
        dists = _read_scores(Path(args.scores), eligible)
    else:
        backend = exp.build_backend(config, inventory, bundle.train)
        dists = exp.compute_distributions(backend, eligible, inventory, config.mode,
                                          jobs=config.jobs)
    report = evalmod.agreement(eligible, dists, clf, inventory)
    path = _out_path(args, "agreement.json", config)
    exp.dump_json(report.to_dict(), path)
    print(f"connective agreement {report.connective_pct:.2f}%  "
          f"sense agreement {report.sense_pct:.2f}%  "
          f"({report.eligible}/{report.total} one-word gold connectives)")
    return EXIT_OK


def cmd_confusion(args) -> int:
    config = _load_config(args)
    bundle, inventory, labels, eligible = _score_setup(config)
    if args.scores:
        dists = _read_scores(Path(args.scores), eligible)
    else:
        backend = exp.build_backend(config, inventory, bundle.train)
        dists = exp.compute_distributions(backend, eligible, inventory, config.mode,
                                          jobs=config.jobs)
    table = evalmod.connective_confusion(eligible, dists, inventory,
                                         top_k=config.confusion_top_k)
    path = _out_path(args, "confusion_connectives.csv", config)
    table.to_csv(path)
    print(f"wrote {path} ({len(table.predicted_connectives)} predicted x "
          f"{len(table.gold_connectives)} gold connectives)")
    return EXIT_OK


def cmd_shift_report(args) -> int:
    labels = load_labels(Path(args.labels)) if args.labels else default_labels(args.level)
    pipeline = inf.read_predictions(Path(args.pipeline))
    marginal = inf.read_predictions(Path(args.marginal))
    report = inf.label_shift_report(pipeline, marginal, labels)
    doc = report.to_dict()
    if args.out:
        exp.dump_json(doc, Path(args.out))
        print(f"wrote {args.out}")
    else:
        print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_run(args) -> int:
    config = _load_config(args)
    out = Path(config.output_dir)
    if config.runs == 1:
        result = exp.run_experiment(config, out)
        _print_run_summary(result)
        return EXIT_OK
    macro = {m: [] for m in config.methods}
    acc = {m: [] for m in config.methods}
    result = None
    for i in range(config.runs):
        result = exp.run_experiment(config, out / f"run{i}")
        for method, report in result.reports.items():
            macro[method].append(report.macro_f1)
            acc[method].append(report.accuracy)
    aggregate = {
        method: {
            "macro_f1_mean": statistics.fmean(vals),
            "macro_f1_stdev": statistics.pstdev(vals),
            "accuracy_mean": statistics.fmean(acc[method]),
            "accuracy_stdev": statistics.pstdev(acc[method]),
            "runs": config.runs,
        }
        for method, vals in macro.items() if vals
    }
    exp.dump_json(aggregate, out / "aggregate.json")
    _print_run_summary(result)
    print(f"wrote aggregate over {config.runs} runs to {out / 'aggregate.json'}")
    return EXIT_OK


def _print_run_summary(result) -> None:
    for method, report in result.reports.items():
        print(f"[{method}] macro-F1 {report.macro_f1:.2f}  "
              f"accuracy {report.accuracy:.2f}  (n={report.total})")
    agr = result.agreement
    print(f"[agreement] connective {agr.connective_pct:.2f}%  "
          f"sense {agr.sense_pct:.2f}%  ({agr.eligible} eligible)")
    if result.shift is not None:
        print(f"[shift] changed fraction {result.shift.changed_fraction:.4f}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="explicitation",
        description="Implicit discourse relation classification by scoring "
                    "connective-explicitated candidates under a language model.")
    sub = parser.add_subparsers(dest="command", required=True)

    commands = {
        "corpus-stats": (cmd_corpus_stats, "corpus statistics per split and sense level"),
        "train-classifier": (cmd_train_classifier, "train and persist the frequency classifier"),
        "score": (cmd_score, "write connective distributions for the test set"),
        "predict": (cmd_predict, "turn stored scores into sense predictions"),
        "evaluate": (cmd_evaluate, "score stored predictions against gold senses"),
        "agreement": (cmd_agreement, "connective/sense agreement with annotators"),
        "confusion": (cmd_confusion, "predicted-vs-gold connective confusion CSV"),
        "run": (cmd_run, "full experiment: score, predict, evaluate, report"),
    }
    for name, (func, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        _add_config_args(p)
        p.set_defaults(func=func)
        if name in ("train-classifier", "score", "evaluate", "agreement", "confusion"):
            p.add_argument("--out", help="output path (defaults into output_dir)")
        if name in ("predict", "agreement", "confusion"):
            p.add_argument("--scores", help="scores.jsonl from a previous 'score' run"
                           + ("" if name != "predict" else " (required)"),
                           required=(name == "predict"))
        if name == "evaluate":
            p.add_argument("--predictions", required=True,
                           help="predictions JSONL to evaluate")

    p = sub.add_parser("shift-report", help="pipeline-vs-marginal label shift matrix")
    p.add_argument("--pipeline", required=True, help="pipeline predictions JSONL")
    p.add_argument("--marginal", required=True, help="marginal predictions JSONL")
    p.add_argument("--level", type=int, default=1, choices=(1, 2))
    p.add_argument("--labels", help="label set file (defaults to the shipped set)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_shift_report)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, stream=sys.stderr,
                        format="%(name)s: %(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except DataError as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    except BackendError as exc:
        log.error("backend error: %s", exc)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
