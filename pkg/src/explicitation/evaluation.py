"""Evaluation harness: per-class / macro F1 and accuracy (0-100 scale),
baselines and the gold-connective upper bound, connective/sense agreement,
and connective confusion matrices."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .candidates import ConnectiveInventory
from .classifier import normalize_connective
from .corpus import Relation
from .errors import DataError
from .inference import Prediction
from .scoring import top_connective


@dataclass
class EvalReport:
    level: int
    labels: tuple[str, ...]
    per_class_f1: dict[str, float]
    macro_f1: float
    accuracy: float
    support: dict[str, int]
    confusion: np.ndarray  # rows: credited gold, cols: predicted
    total: int
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "labels": list(self.labels),
            "per_class_f1": self.per_class_f1,
            "macro_f1": self.macro_f1,
            "accuracy": self.accuracy,
            "support": self.support,
            "confusion": self.confusion.astype(int).tolist(),
            "total": self.total,
            "metadata": self.metadata,
        }

    def to_text(self) -> str:
        width = max([len(l) for l in self.labels] + [8])
        lines = [f"{'class':<{width}}  {'F1':>7}  {'support':>7}"]
        for label in self.labels:
            lines.append(f"{label:<{width}}  {self.per_class_f1[label]:>7.2f}  "
                         f"{self.support[label]:>7}")
        lines.append(f"{'macro-F1':<{width}}  {self.macro_f1:>7.2f}")
        lines.append(f"{'accuracy':<{width}}  {self.accuracy:>7.2f}  {self.total:>7}")
        return "\n".join(lines) + "\n"


def gold_label_sets(test: Sequence[Relation], level: int,
                    labels: Sequence[str]) -> tuple[list[tuple[str, ...]], list[Relation], int]:
    """Per-relation gold labels at a level, restricted to the configured
    label set. Relations with no usable label are excluded and counted
    (this is what shrinks the 11-way test set)."""
    golds = []
    eligible = []
    dropped = 0
    for rel in test:
        gl = rel.labels(level, labels)
        if gl:
            golds.append(gl)
            eligible.append(rel)
        else:
            dropped += 1
    return golds, eligible, dropped


def score_predictions(pred_labels: Sequence[str],
                      golds: Sequence[tuple[str, ...]],
                      level: int, labels: Sequence[str],
                      metadata: dict | None = None) -> EvalReport:
    """Score predictions against (possibly two-sense) golds.

    A prediction matching any gold sense is correct and credited to the
    matched sense; otherwise the first gold sense takes the miss. All
    scores are on a 0-100 scale; F1 of a class nobody predicted or
    carried is 0.
    """
    if len(pred_labels) != len(golds):
        raise DataError(f"{len(pred_labels)} predictions for {len(golds)} golds")
    index = {label: i for i, label in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=int)
    for pred, gold_set in zip(pred_labels, golds):
        if pred not in index:
            raise DataError(f"predicted label outside the configured set: {pred!r}")
        if not gold_set:
            raise DataError("relation with empty gold label set")
        for gold in gold_set:
            if gold not in index:
                raise DataError(f"gold label outside the configured set: {gold!r}")
        credited = pred if pred in gold_set else gold_set[0]
        confusion[index[credited], index[pred]] += 1

    total = len(golds)
    correct = int(np.trace(confusion))
    per_class_f1 = {}
    support = {}
    for label, i in index.items():
        tp = int(confusion[i, i])
        fp = int(confusion[:, i].sum()) - tp
        fn = int(confusion[i, :].sum()) - tp
        denom = 2 * tp + fp + fn
        per_class_f1[label] = 0.0 if denom == 0 else 200.0 * tp / denom
        support[label] = int(confusion[i, :].sum())

    f1_values = list(per_class_f1.values())
    meta = {"convention": "match-either, matched sense credited"}
    if metadata:
        meta.update(metadata)
    return EvalReport(
        level=level, labels=tuple(labels), per_class_f1=per_class_f1,
        macro_f1=sum(f1_values) / len(f1_values),
        accuracy=0.0 if total == 0 else 100.0 * correct / total,
        support=support, confusion=confusion, total=total, metadata=meta)


def evaluate_predictions(preds: Sequence[Prediction], test: Sequence[Relation],
                         level: int, labels: Sequence[str],
                         metadata: dict | None = None) -> EvalReport:
    golds, eligible, dropped = gold_label_sets(test, level, labels)
    if len(preds) != len(eligible):
        raise DataError(f"{len(preds)} predictions for {len(eligible)} eligible relations")
    meta = dict(metadata or {})
    meta["relations_dropped_at_level"] = dropped
    if preds and eligible:
        for pred, rel in zip(preds, eligible):
            if pred.relation_id != rel.rel_id:
                raise DataError(f"prediction/relation mismatch: {pred.relation_id} "
                                f"vs {rel.rel_id}")
    return score_predictions([p.label for p in preds], golds, level, labels, meta)


# --- baselines and upper bound ------------------------------------------------

DEFAULT_MOST_COMMON = {1: "Expansion", 2: "Contingency.Cause"}


def baseline_most_common_sense(test: Sequence[Relation], level: int,
                               labels: Sequence[str],
                               label: str | None = None) -> EvalReport:
    """Predict the corpus-typical majority sense for every relation."""
    if label is None:
        label = DEFAULT_MOST_COMMON[level]
    if label not in labels:
        raise DataError(f"most-common-sense label {label!r} not in the label set")
    golds, _, _ = gold_label_sets(test, level, labels)
    return score_predictions([label] * len(golds), golds, level, labels,
                             {"method": "most-common-sense", "label": label})


def baseline_most_common_connective(test: Sequence[Relation], clf, level: int,
                                    labels: Sequence[str],
                                    connective: str = "but") -> EvalReport:
    """Classify every relation as if the most common explicit connective
    had been chosen for it."""
    golds, eligible, _ = gold_label_sets(test, level, labels)
    preds = [labels[int(np.argmax(clf.predict_proba(connective, rel.arg1, rel.arg2)))]
             for rel in eligible]
    return score_predictions(preds, golds, level, labels,
                             {"method": "most-common-connective", "connective": connective})


def upper_bound_gold_connective(test: Sequence[Relation], clf, level: int,
                                labels: Sequence[str]) -> EvalReport:
    """Classify every relation through its gold implicit connective; the
    ceiling of the explicitation pipeline."""
    golds, eligible, _ = gold_label_sets(test, level, labels)
    preds = [labels[int(np.argmax(clf.predict_proba(rel.connective, rel.arg1, rel.arg2)))]
             for rel in eligible]
    return score_predictions(preds, golds, level, labels,
                             {"method": "gold-connective"})


# --- agreement with annotator connectives -------------------------------------

@dataclass
class AgreementReport:
    connective_pct: float
    sense_pct: float
    eligible: int
    total: int

    def to_dict(self) -> dict:
        return {
            "connective_agreement": self.connective_pct,
            "sense_agreement": self.sense_pct,
            "eligible": self.eligible,
            "total": self.total,
        }


def agreement(test: Sequence[Relation], distributions: Sequence[np.ndarray],
              clf, inventory: ConnectiveInventory) -> AgreementReport:
    """Agreement between each relation's top-ranked connective and the gold
    implicit connective, plus agreement between the top connective's most
    frequent sense and the gold label. Restricted to relations whose gold
    connective is one word, matching the candidate-generation design."""
    if len(test) != len(distributions):
        raise DataError(f"{len(distributions)} distributions for {len(test)} relations")
    eligible = 0
    conn_hits = 0
    sense_hits = 0
    for rel, dist in zip(test, distributions):
        gold_conn = rel.connective.strip()
        if not gold_conn or any(ch.isspace() for ch in gold_conn):
            continue
        eligible += 1
        top = top_connective(dist, inventory)
        if normalize_connective(top) == normalize_connective(gold_conn):
            conn_hits += 1
        mfs = clf.most_frequent_sense(top)
        if mfs in rel.labels(clf.level, clf.labels):
            sense_hits += 1
    if eligible == 0:
        return AgreementReport(0.0, 0.0, 0, len(test))
    return AgreementReport(connective_pct=100.0 * conn_hits / eligible,
                           sense_pct=100.0 * sense_hits / eligible,
                           eligible=eligible, total=len(test))


# --- connective confusion ------------------------------------------------------

@dataclass
class ConnectiveConfusion:
    gold_connectives: tuple[str, ...]  # columns
    predicted_connectives: tuple[str, ...]  # rows
    counts: np.ndarray

    def to_csv(self, path: Path) -> None:
        """Gold connectives across the header, predictions down the rows."""
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["predicted\\gold", *self.gold_connectives])
            for i, pred in enumerate(self.predicted_connectives):
                writer.writerow([pred, *self.counts[i].tolist()])

    def column_sums(self) -> dict[str, int]:
        return {gold: int(self.counts[:, j].sum())
                for j, gold in enumerate(self.gold_connectives)}


def connective_confusion(test: Sequence[Relation], distributions: Sequence[np.ndarray],
                         inventory: ConnectiveInventory, top_k: int = 10) -> ConnectiveConfusion:
    """Counts of predicted top connective against gold implicit connective,
    confined to the ``top_k`` most frequent golds in the test set."""
    if top_k < 1:
        raise DataError(f"top_k must be >= 1, got {top_k}")
    if len(test) != len(distributions):
        raise DataError(f"{len(distributions)} distributions for {len(test)} relations")
    gold_counts = Counter(normalize_connective(rel.connective) for rel in test)
    keep = [conn for conn, _ in sorted(gold_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]]
    keep_set = set(keep)

    pairs = Counter()
    predicted_seen: list[str] = []
    for rel, dist in zip(test, distributions):
        gold = normalize_connective(rel.connective)
        if gold not in keep_set:
            continue
        pred = normalize_connective(top_connective(dist, inventory))
        if pred not in predicted_seen:
            predicted_seen.append(pred)
        pairs[(pred, gold)] += 1

    pred_totals = Counter()
    for (pred, _), n in pairs.items():
        pred_totals[pred] += n
    rows = sorted(predicted_seen, key=lambda c: (-pred_totals[c], c))
    counts = np.zeros((len(rows), len(keep)), dtype=int)
    for (pred, gold), n in pairs.items():
        counts[rows.index(pred), keep.index(gold)] = n
    return ConnectiveConfusion(gold_connectives=tuple(keep),
                               predicted_connectives=tuple(rows), counts=counts)
