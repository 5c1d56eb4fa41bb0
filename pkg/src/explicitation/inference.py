"""Final sense prediction: combine the connective distribution with the
explicit relation classifier, either through the single top-ranked
connective (pipeline) or by marginalizing over the whole inventory."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .candidates import ConnectiveInventory
from .errors import DataError
from .scoring import top_connective

PIPELINE = "pipeline"
MARGINAL = "marginal"
METHODS = (PIPELINE, MARGINAL)


@dataclass(frozen=True)
class Prediction:
    relation_id: str
    method: str
    label: str
    sense_probs: tuple[float, ...]
    top_connective: str
    conn_probs: tuple[float, ...]


def _argmax_label(probs: np.ndarray, labels: Sequence[str]) -> str:
    return labels[int(np.argmax(probs))]


def pipeline_predict(conn_dist: np.ndarray, clf, arg1: str, arg2: str,
                     inventory: ConnectiveInventory, relation_id: str = "") -> Prediction:
    """Feed only the single most likely connective to the classifier."""
    best = top_connective(conn_dist, inventory)
    probs = np.asarray(clf.predict_proba(best, arg1, arg2), dtype=float)
    return Prediction(relation_id=relation_id, method=PIPELINE,
                      label=_argmax_label(probs, clf.labels),
                      sense_probs=tuple(float(p) for p in probs),
                      top_connective=best,
                      conn_probs=tuple(float(p) for p in conn_dist))


def classifier_matrix(clf, arg1: str, arg2: str,
                      inventory: ConnectiveInventory) -> np.ndarray:
    """|labels| x |inventory| matrix whose column c is the classifier's
    distribution conditioned on connective c."""
    return np.column_stack([clf.predict_proba(conn, arg1, arg2) for conn in inventory])


def marginal_predict(conn_dist: np.ndarray, clf, arg1: str, arg2: str,
                     inventory: ConnectiveInventory, relation_id: str = "") -> Prediction:
    """Weight every connective's classifier distribution by its probability
    and sum: P(l | A1, A2) = sum_C P(l | C, A1, A2) * P(C | A1, A2)."""
    matrix = classifier_matrix(clf, arg1, arg2, inventory)
    probs = matrix @ np.asarray(conn_dist, dtype=float)
    return Prediction(relation_id=relation_id, method=MARGINAL,
                      label=_argmax_label(probs, clf.labels),
                      sense_probs=tuple(float(p) for p in probs),
                      top_connective=top_connective(conn_dist, inventory),
                      conn_probs=tuple(float(p) for p in conn_dist))


@dataclass
class ShiftReport:
    """Pipeline -> marginal label transitions. The diagonal holds unchanged
    predictions; changed fraction is 1 - trace/total."""

    labels: tuple[str, ...]
    matrix: np.ndarray  # rows: pipeline label, cols: marginal label
    total: int

    @property
    def changed_fraction(self) -> float:
        if self.total == 0:
            return 0.0
        return 1.0 - float(np.trace(self.matrix)) / self.total

    def to_dict(self) -> dict:
        return {
            "labels": list(self.labels),
            "matrix": self.matrix.astype(int).tolist(),
            "total": self.total,
            "changed_fraction": self.changed_fraction,
        }


def label_shift_report(pipeline_preds: Sequence[Prediction],
                       marginal_preds: Sequence[Prediction],
                       labels: Sequence[str]) -> ShiftReport:
    if len(pipeline_preds) != len(marginal_preds):
        raise DataError("pipeline and marginal prediction lists differ in length")
    index = {label: i for i, label in enumerate(labels)}
    matrix = np.zeros((len(labels), len(labels)), dtype=int)
    for pipe, marg in zip(pipeline_preds, marginal_preds):
        if pipe.relation_id != marg.relation_id:
            raise DataError(f"prediction lists are not aligned: "
                            f"{pipe.relation_id} vs {marg.relation_id}")
        matrix[index[pipe.label], index[marg.label]] += 1
    return ShiftReport(labels=tuple(labels), matrix=matrix, total=len(pipeline_preds))


# --- predictions as JSON Lines ----------------------------------------------

def prediction_to_dict(pred: Prediction, include_conn_probs: bool = False) -> dict:
    doc = {
        "relation_id": pred.relation_id,
        "method": pred.method,
        "label": pred.label,
        "top_connective": pred.top_connective,
        "probs": list(pred.sense_probs),
    }
    if include_conn_probs:
        doc["conn_probs"] = list(pred.conn_probs)
    return doc


def write_predictions(preds: Sequence[Prediction], path: Path,
                      include_conn_probs: bool = False) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pred in preds:
            fh.write(json.dumps(prediction_to_dict(pred, include_conn_probs)) + "\n")


def read_predictions(path: Path) -> list[Prediction]:
    preds = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
                preds.append(Prediction(
                    relation_id=doc["relation_id"], method=doc["method"],
                    label=doc["label"], top_connective=doc["top_connective"],
                    sense_probs=tuple(doc["probs"]),
                    conn_probs=tuple(doc.get("conn_probs", ()))))
            except (json.JSONDecodeError, KeyError) as exc:
                raise DataError(f"{path}:{lineno + 1}: bad prediction record: {exc}")
    return preds
