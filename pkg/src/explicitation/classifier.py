"""Explicit relation classifiers: the conditional sense distribution
P(label | connective, arg1, arg2).

The in-repo variant is a distantly-supervised frequency table over
connectives, trained on explicit relations only. It deliberately ignores
the arguments (explicit relations are nearly unambiguous given their
connective); the full sentence-pair classifier is reachable through the
sidecar behind the same interface.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import EXPLICIT, Relation
from .errors import BackendError, DataError

# Wire responses round-trip through JSON text, so they get a slightly
# looser sum tolerance than internally constructed distributions.
SUM_TOL_INTERNAL = 1e-9
SUM_TOL_WIRE = 1e-6


def validate_distribution(probs: Sequence[float], n_labels: int,
                          tol: float = SUM_TOL_WIRE) -> np.ndarray:
    """Check length, non-negativity, and unit sum. Never renormalizes."""
    vec = np.asarray(probs, dtype=float)
    if vec.shape != (n_labels,):
        raise BackendError(f"distribution has {vec.shape[0] if vec.ndim == 1 else vec.shape} "
                           f"entries, expected {n_labels}")
    if not np.all(np.isfinite(vec)) or np.any(vec < 0):
        raise BackendError("distribution entries must be finite and non-negative")
    total = float(vec.sum())
    if abs(total - 1.0) > tol:
        raise BackendError(f"distribution sums to {total!r}, not 1")
    return vec


def normalize_connective(connective: str) -> str:
    """Lowercased, trimmed table key (PDTB connective heads vary in casing)."""
    return connective.strip().lower()


@dataclass(frozen=True)
class SensePrediction:
    probs: np.ndarray
    used_prior: bool


class FrequencyModel:
    """Smoothed per-connective sense distributions plus a global prior for
    connectives never seen in training. Immutable once trained."""

    def __init__(self, level: int, labels: Sequence[str], k: float,
                 rows: dict[str, np.ndarray], prior: np.ndarray, fingerprint: str):
        self.level = level
        self.labels = tuple(labels)
        self.k = float(k)
        self.rows = rows
        self.prior = prior
        self.fingerprint = fingerprint
        for row in rows.values():
            row.setflags(write=False)
        prior.setflags(write=False)

    def predict(self, connective: str, arg1: str = "", arg2: str = "") -> SensePrediction:
        """Sense distribution for a connective; the arguments are accepted
        for interface parity and ignored. Falls back to the global prior
        (flagged) for unseen connectives."""
        del arg1, arg2
        row = self.rows.get(normalize_connective(connective))
        if row is None:
            return SensePrediction(probs=self.prior, used_prior=True)
        return SensePrediction(probs=row, used_prior=False)

    def predict_proba(self, connective: str, arg1: str = "", arg2: str = "") -> np.ndarray:
        return self.predict(connective, arg1, arg2).probs

    def most_frequent_sense(self, connective: str) -> str:
        """Argmax label for a connective; ties go to the earlier label."""
        probs = self.predict(connective).probs
        return self.labels[int(np.argmax(probs))]

    def describe(self) -> str:
        return f"frequency(level={self.level},k={self.k},fingerprint={self.fingerprint[:12]})"

    # --- persistence --------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "labels": list(self.labels),
            "k": self.k,
            "rows": {conn: row.tolist() for conn, row in sorted(self.rows.items())},
            "prior": self.prior.tolist(),
            "fingerprint": self.fingerprint,
        }

    def save(self, path: Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n",
                              encoding="utf-8")

    @classmethod
    def from_dict(cls, doc: dict) -> "FrequencyModel":
        try:
            labels = list(doc["labels"])
            rows = {conn: validate_distribution(row, len(labels), SUM_TOL_WIRE)
                    for conn, row in doc["rows"].items()}
            prior = validate_distribution(doc["prior"], len(labels), SUM_TOL_WIRE)
            return cls(level=int(doc["level"]), labels=labels, k=float(doc["k"]),
                       rows=rows, prior=prior, fingerprint=str(doc["fingerprint"]))
        except (KeyError, TypeError, BackendError) as exc:
            raise DataError(f"malformed frequency model document: {exc}")

    @classmethod
    def load(cls, path: Path) -> "FrequencyModel":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read frequency model {path}: {exc}")
        return cls.from_dict(doc)


def _training_pairs(train: Iterable[Relation], level: int,
                    labels: Sequence[str]) -> tuple[list[tuple[str, str]], int]:
    """(connective, label) pairs at the requested level; a relation with two
    senses contributes one pair per sense. Returns the pairs plus the count
    of senses dropped for lacking a usable label."""
    pairs = []
    dropped = 0
    label_set = set(labels)
    for rel in train:
        conn = normalize_connective(rel.connective)
        for sense in rel.senses:
            label = sense.label(level)
            if label is None or label not in label_set:
                dropped += 1
            else:
                pairs.append((conn, label))
    return pairs, dropped


def train_frequency(train: Sequence[Relation], level: int,
                    labels: Sequence[str], k: float = 1.0) -> FrequencyModel:
    """Count (connective, sense) pairs over explicit training relations and
    build add-k smoothed rows: row(C)[l] = (count(C,l) + k) / (count(C) +
    k * |labels|). The global prior is the smoothed marginal over all
    training senses."""
    if k < 0:
        raise DataError(f"smoothing constant must be >= 0, got {k}")
    non_explicit = sum(1 for rel in train if rel.kind != EXPLICIT)
    if non_explicit:
        raise DataError(f"frequency training expects explicit relations only "
                        f"({non_explicit} others found)")
    pairs, dropped = _training_pairs(train, level, labels)
    if not pairs:
        raise DataError("no usable training pairs at the requested level")

    index = {label: i for i, label in enumerate(labels)}
    counts: dict[str, np.ndarray] = {}
    for conn, label in pairs:
        counts.setdefault(conn, np.zeros(len(labels)))[index[label]] += 1

    rows = {conn: (vec + k) / (vec.sum() + k * len(labels))
            for conn, vec in counts.items()}
    marginal = np.sum(list(counts.values()), axis=0)
    prior = (marginal + k) / (marginal.sum() + k * len(labels))

    fingerprint = _fingerprint(level, labels, k, counts)
    model = FrequencyModel(level=level, labels=labels, k=k, rows=rows,
                           prior=prior, fingerprint=fingerprint)
    model.dropped_senses = dropped
    return model


def _fingerprint(level: int, labels: Sequence[str], k: float,
                 counts: dict[str, np.ndarray]) -> str:
    """Order-invariant digest of the effective training counts."""
    payload = {
        "level": level,
        "labels": list(labels),
        "k": k,
        "counts": {conn: vec.astype(int).tolist() for conn, vec in sorted(counts.items())},
    }
    blob = json.dumps(payload, sort_keys=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


class SidecarClassifier:
    """Sense distributions from an externally fine-tuned sentence-pair
    classifier, fetched over the sidecar protocol and validated before use."""

    def __init__(self, client, level: int, labels: Sequence[str]):
        self.client = client
        self.level = level
        self.labels = tuple(labels)

    def predict_proba(self, connective: str, arg1: str = "", arg2: str = "") -> np.ndarray:
        probs = self.client.classify(connective=connective, arg1=arg1, arg2=arg2,
                                     level=self.level)
        return validate_distribution(probs, len(self.labels), SUM_TOL_WIRE)

    def most_frequent_sense(self, connective: str) -> str:
        return self.labels[int(np.argmax(self.predict_proba(connective)))]

    def describe(self) -> str:
        return f"sidecar-classifier({self.client.endpoint},level={self.level})"


def external_predict(client, connective: str, arg1: str, arg2: str,
                     level: int, labels: Sequence[str]) -> np.ndarray:
    """One-shot remote classification with full response validation."""
    return SidecarClassifier(client, level, labels).predict_proba(connective, arg1, arg2)
