"""Experiment assembly: turn a validated config into corpora, backends,
models, and persisted artifacts. All output files are deterministic
functions of the config and the input data."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import candidates as cand
from . import corpus as corp
from . import evaluation as evalmod
from . import inference as inf
from . import scoring
from .classifier import FrequencyModel, SidecarClassifier, train_frequency
from .config import ExperimentConfig
from .errors import ConfigError, DataError
from .ngram import train_ngram
from .senses import default_labels, load_labels
from .sidecar_client import SidecarClient

log = logging.getLogger("explicitation")


def dump_json(doc: dict, path: Path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n",
                          encoding="utf-8")


@dataclass
class CorpusBundle:
    train: list[corp.Relation]
    dev: list[corp.Relation]
    test: list[corp.Relation]
    info: dict


def load_corpus(config: ExperimentConfig) -> CorpusBundle:
    if config.corpus_format == "pdtb-pipes":
        return _load_pipes(config)
    return _load_jsonl(config)


def _column_map(config: ExperimentConfig) -> corp.ColumnMap:
    if config.column_map == "pdtb2":
        return corp.default_column_map()
    return corp.ColumnMap.from_json(Path(config.column_map))


def _apply_order_filter(relations, config, info, split_name):
    if not config.order_filter:
        return relations
    filtered = corp.filter_canonical_order(relations)
    info[f"{split_name}_order_excluded"] = filtered.excluded
    info[f"{split_name}_missing_spans"] = filtered.missing_spans
    return filtered.kept


def _load_pipes(config: ExperimentConfig) -> CorpusBundle:
    cmap = _column_map(config)
    parsed = corp.parse_pipe_dir(Path(config.corpus_dir), cmap,
                                 corpus=config.corpus_name, pattern=config.pipe_glob)
    for err in parsed.errors[:10]:
        log.warning("parse error at line %d: %s", err.line, err.message)
    spec = corp.SplitSpec(train=frozenset(config.train_sections),
                          dev=frozenset(config.dev_sections),
                          test=frozenset(config.test_sections))
    split = corp.split_pdtb(parsed.relations, spec)
    info = {
        "parsed": len(parsed.relations),
        "skipped_types": dict(sorted(parsed.skipped.items())),
        "record_errors": len(parsed.errors),
        "split_dropped": split.dropped,
    }
    train = _apply_order_filter(split.train, config, info, "train")
    dev = _apply_order_filter(split.dev, config, info, "dev")
    info.update(train=len(train), dev=len(dev), test=len(split.test))
    return CorpusBundle(train=train, dev=dev, test=split.test, info=info)


def _load_jsonl(config: ExperimentConfig) -> CorpusBundle:
    info: dict = {}
    train: list[corp.Relation] = []
    dev: list[corp.Relation] = []
    if config.train_path:
        train = corp.read_jsonl(Path(config.train_path), corpus=config.corpus_name)
        non_explicit = sum(1 for r in train if r.kind != corp.EXPLICIT)
        if non_explicit:
            raise DataError(f"train corpus contains {non_explicit} non-explicit relations")
        train = _apply_order_filter(train, config, info, "train")
    if config.dev_path:
        dev = corp.read_jsonl(Path(config.dev_path), corpus=config.corpus_name)
        dev = _apply_order_filter(dev, config, info, "dev")
    test_all = corp.read_jsonl(Path(config.test_path), corpus=config.corpus_name)
    test = [r for r in test_all if r.kind == corp.IMPLICIT]
    info["test_non_implicit_dropped"] = len(test_all) - len(test)
    info.update(train=len(train), dev=len(dev), test=len(test))
    return CorpusBundle(train=train, dev=dev, test=test, info=info)


def build_inventory(config: ExperimentConfig) -> cand.ConnectiveInventory:
    if config.inventory_path:
        return cand.load_inventory(Path(config.inventory_path))
    return cand.default_inventory()


def build_labels(config: ExperimentConfig) -> tuple[str, ...]:
    if config.labels_path:
        return load_labels(Path(config.labels_path))
    return default_labels(config.level)


def _ngram_training_text(config: ExperimentConfig, train: Sequence[corp.Relation]) -> str:
    if config.ngram_train_path:
        return Path(config.ngram_train_path).read_text(encoding="utf-8")
    if not train:
        raise ConfigError("ngram backend needs ngram_train_path or a training split")
    # Distant supervision: the explicit relations themselves, one joined
    # line per relation, are the backend's training text.
    return "\n".join(f"{r.arg1} {r.connective} {r.arg2}" for r in train)


def build_backend(config: ExperimentConfig, inventory: cand.ConnectiveInventory,
                  train: Sequence[corp.Relation]) -> scoring.Backend:
    if config.backend == "uniform":
        return scoring.UniformBackend()
    if config.backend == "constant":
        return scoring.ConstantBackend(config.constant_connective)
    if config.backend == "ngram":
        model = train_ngram(_ngram_training_text(config, train), config.ngram_order,
                            config.ngram_k, kernel=config.ngram_kernel)
        return scoring.NGramBackend(model, length_penalty=config.ngram_length_penalty)
    if config.backend == "table":
        return scoring.TableBackend.from_file(Path(config.table_path), expected=inventory)
    client = SidecarClient.from_endpoint(config.effective_sidecar_endpoint())
    return scoring.SidecarBackend(client)


def build_classifier(config: ExperimentConfig, labels: Sequence[str],
                     train: Sequence[corp.Relation]):
    if config.classifier == "sidecar":
        client = SidecarClient.from_endpoint(config.effective_sidecar_endpoint())
        return SidecarClassifier(client, config.level, labels)
    if config.classifier_path:
        model = FrequencyModel.load(Path(config.classifier_path))
        if model.level != config.level or tuple(model.labels) != tuple(labels):
            raise ConfigError("stored classifier was trained for a different "
                              "level or label set")
        return model
    return train_frequency(train, config.level, labels, k=config.classifier_k)


def _make_candidates(rel: corp.Relation, inventory: cand.ConnectiveInventory, mode: str):
    if mode == cand.CAUSAL:
        return cand.generate_causal(rel, inventory)
    return cand.generate_masked(rel, inventory)


def compute_distributions(backend: scoring.Backend, relations: Sequence[corp.Relation],
                          inventory: cand.ConnectiveInventory, mode: str,
                          jobs: int = 1) -> list[np.ndarray]:
    """Connective distribution per relation, inventory-aligned. Scoring is
    read-only on the backend, so relation-level parallelism is safe."""

    def one(rel: corp.Relation) -> np.ndarray:
        vector = scoring.score(backend, _make_candidates(rel, inventory, mode))
        return scoring.normalize(vector)

    if jobs <= 1 or len(relations) < 2:
        return [one(rel) for rel in relations]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, relations))


@dataclass
class ExperimentResult:
    eligible: list[corp.Relation]
    distributions: list[np.ndarray]
    predictions: dict[str, list[inf.Prediction]]
    reports: dict[str, evalmod.EvalReport]
    agreement: evalmod.AgreementReport
    shift: inf.ShiftReport | None
    meta: dict


def run_experiment(config: ExperimentConfig, out_dir: Path | None = None) -> ExperimentResult:
    """End-to-end run; writes every artifact under ``out_dir`` (defaults to
    the config's output_dir)."""
    out = Path(out_dir) if out_dir is not None else Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    fingerprint = config.fingerprint()

    bundle = load_corpus(config)
    inventory = build_inventory(config)
    labels = build_labels(config)
    backend = build_backend(config, inventory, bundle.train)
    clf = build_classifier(config, labels, bundle.train)

    golds, eligible, dropped = evalmod.gold_label_sets(bundle.test, config.level, labels)
    distributions = compute_distributions(backend, eligible, inventory,
                                          config.mode, jobs=config.jobs)

    meta = {
        "config_fingerprint": fingerprint,
        "level": config.level,
        "labels": list(labels),
        "inventory": list(inventory),
        "mode": config.mode,
        "backend": backend.describe(),
        "classifier": clf.describe(),
        "corpus": bundle.info,
        "eligible_test": len(eligible),
        "dropped_at_level": dropped,
    }
    dump_json(meta, out / "meta.json")

    with open(out / "scores.jsonl", "w", encoding="utf-8") as fh:
        for rel, dist in zip(eligible, distributions):
            fh.write(json.dumps({"relation_id": rel.rel_id,
                                 "probs": dist.tolist()}) + "\n")

    predictions: dict[str, list[inf.Prediction]] = {}
    reports: dict[str, evalmod.EvalReport] = {}
    for method in dict.fromkeys(config.methods):
        predictor = inf.pipeline_predict if method == inf.PIPELINE else inf.marginal_predict
        preds = [predictor(dist, clf, rel.arg1, rel.arg2, inventory, rel.rel_id)
                 for rel, dist in zip(eligible, distributions)]
        predictions[method] = preds
        inf.write_predictions(preds, out / f"predictions_{method}.jsonl",
                              include_conn_probs=config.include_conn_probs)
        report = evalmod.evaluate_predictions(
            preds, eligible, config.level, labels,
            {"method": method, "backend": backend.describe(),
             "classifier": clf.describe(), "config_fingerprint": fingerprint})
        reports[method] = report
        dump_json(report.to_dict(), out / f"eval_{method}.json")
        (out / f"eval_{method}.txt").write_text(report.to_text(), encoding="utf-8")

    baselines = {
        "most_common_sense": evalmod.baseline_most_common_sense(
            bundle.test, config.level, labels, config.most_common_sense_label),
        "most_common_connective": evalmod.baseline_most_common_connective(
            bundle.test, clf, config.level, labels),
        "gold_connective": evalmod.upper_bound_gold_connective(
            bundle.test, clf, config.level, labels),
    }
    dump_json({name: rep.to_dict() for name, rep in baselines.items()},
              out / "baselines.json")

    agreement = evalmod.agreement(eligible, distributions, clf, inventory)
    agreement_doc = agreement.to_dict()
    agreement_doc["config_fingerprint"] = fingerprint
    dump_json(agreement_doc, out / "agreement.json")

    confusion = evalmod.connective_confusion(eligible, distributions, inventory,
                                             top_k=config.confusion_top_k)
    confusion.to_csv(out / "confusion_connectives.csv")

    shift = None
    if inf.PIPELINE in predictions and inf.MARGINAL in predictions:
        shift = inf.label_shift_report(predictions[inf.PIPELINE],
                                       predictions[inf.MARGINAL], labels)
        shift_doc = shift.to_dict()
        shift_doc["config_fingerprint"] = fingerprint
        dump_json(shift_doc, out / "shift_report.json")

    return ExperimentResult(eligible=eligible, distributions=distributions,
                            predictions=predictions, reports=reports,
                            agreement=agreement, shift=shift, meta=meta)


def corpus_stat_tables(config: ExperimentConfig) -> dict:
    """Per-split label counts at both levels (the corpus statistics table)."""
    bundle = load_corpus(config)
    labels_by_level = {}
    for level in (1, 2):
        if config.labels_path and level == config.level:
            labels_by_level[level] = load_labels(Path(config.labels_path))
        else:
            labels_by_level[level] = default_labels(level)
    doc: dict = {"corpus": bundle.info, "splits": {}}
    for name, rels in (("train", bundle.train), ("dev", bundle.dev), ("test", bundle.test)):
        doc["splits"][name] = {}
        for level in (1, 2):
            table = corp.corpus_stats(rels, level, labels_by_level[level])
            doc["splits"][name][f"level{level}"] = {
                "relations": table.relations_with_label,
                "without_label": table.relations_without_label,
                "counts": table.counts,
            }
    return doc
