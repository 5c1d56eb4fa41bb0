"""Connective scoring: turn a candidate set into a log-score vector under a
pluggable language-model backend, then normalize over the inventory to get
a connective distribution."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .candidates import CAUSAL, MASKED, CandidateSet, ConnectiveInventory
from .errors import BackendError, ConfigError
from .ngram import NGramModel, tokenize


@dataclass(frozen=True)
class LogScoreVector:
    """Unnormalized natural-log scores, aligned to inventory order."""

    scores: np.ndarray
    mode: str


class Backend:
    """Interface scoring backends implement. ``modes`` declares which
    candidate modes the backend can serve."""

    name = "backend"
    modes: frozenset = frozenset((CAUSAL, MASKED))

    def log_scores(self, cands: CandidateSet) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> str:
        return self.name


class UniformBackend(Backend):
    """Every candidate equally likely; normalizes to the uniform distribution."""

    name = "uniform"

    def log_scores(self, cands: CandidateSet) -> np.ndarray:
        return np.zeros(len(cands.inventory))


class ConstantBackend(Backend):
    """Always puts (almost) all mass on one fixed connective. Used for the
    always-X agreement probes."""

    name = "constant"
    _OFF = -1e3  # finite, but exp() underflows to an exact one-hot

    def __init__(self, connective: str):
        self.connective = connective

    def log_scores(self, cands: CandidateSet) -> np.ndarray:
        idx = cands.inventory.index_of(self.connective)
        if idx is None:
            raise BackendError(f"constant backend connective {self.connective!r} "
                               "is not in the inventory")
        scores = np.full(len(cands.inventory), self._OFF)
        scores[idx] = 0.0
        return scores

    def describe(self) -> str:
        return f"constant({self.connective})"


class NGramBackend(Backend):
    """Scores causal candidates by full-string log-likelihood under an
    in-repo n-gram model. Masked mode is intrinsically a subword-model
    concern and is not supported here.

    ``length_penalty`` divides each log-likelihood by its token count
    (per-token normalization). Off by default: raw joint likelihoods are
    what gets normalized over connectives."""

    name = "ngram"
    modes = frozenset((CAUSAL,))

    def __init__(self, model: NGramModel, length_penalty: bool = False):
        self.model = model
        self.length_penalty = length_penalty

    def log_scores(self, cands: CandidateSet) -> np.ndarray:
        scores = []
        for text in cands.texts:
            tokens = tokenize(text)
            value = self.model.sequence_log_prob(tokens)
            if self.length_penalty:
                value /= len(tokens)
            scores.append(value)
        return np.array(scores)

    def describe(self) -> str:
        penalty = ",length-penalty" if self.length_penalty else ""
        return (f"ngram(order={self.model.order},k={self.model.k},"
                f"kernel={self.model.kernel_name}{penalty})")


class TableBackend(Backend):
    """Replays precomputed log-scores from a fixture file keyed by relation
    id. The file's inventory must match the experiment's."""

    name = "table"

    def __init__(self, inventory: list[str], scores: dict[str, list[float]],
                 source: str = "table"):
        self.inventory = list(inventory)
        self.scores = scores
        self.source = source

    @classmethod
    def from_file(cls, path: Path, expected: ConnectiveInventory | None = None) -> "TableBackend":
        import json

        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
            inventory = list(doc["inventory"])
            scores = {str(k): [float(x) for x in v] for k, v in doc["scores"].items()}
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot load score table {path}: {exc}")
        if expected is not None and inventory != list(expected):
            raise ConfigError(f"score table {path} was built for a different inventory")
        return cls(inventory, scores, source=str(path))

    def log_scores(self, cands: CandidateSet) -> np.ndarray:
        if list(cands.inventory) != self.inventory:
            raise BackendError("candidate inventory differs from the score table's")
        try:
            row = self.scores[cands.relation.rel_id]
        except KeyError:
            raise BackendError(f"score table has no entry for relation "
                               f"{cands.relation.rel_id}")
        if len(row) != len(self.inventory):
            raise BackendError(f"score table row for {cands.relation.rel_id} has "
                               f"{len(row)} entries, expected {len(self.inventory)}")
        return np.array(row, dtype=float)

    def describe(self) -> str:
        return f"table({self.source})"


class SidecarBackend(Backend):
    """Delegates scoring to an external language-model service over the
    JSON Lines protocol."""

    name = "sidecar"

    def __init__(self, client):
        self.client = client

    def log_scores(self, cands: CandidateSet) -> np.ndarray:
        rel = cands.relation
        scores = self.client.score(mode=cands.mode, parts=[rel.arg1, rel.arg2],
                                   connectives=list(cands.inventory))
        if len(scores) != len(cands.inventory):
            raise BackendError(f"sidecar returned {len(scores)} scores for "
                               f"{len(cands.inventory)} connectives")
        return np.array(scores, dtype=float)

    def describe(self) -> str:
        return f"sidecar({self.client.endpoint})"


def score(backend: Backend, cands: CandidateSet) -> LogScoreVector:
    """Score every candidate; validates mode support and that every score
    is finite (a non-finite score is a backend bug, reported by connective)."""
    if cands.mode not in backend.modes:
        raise BackendError(f"backend {backend.describe()} does not support "
                           f"{cands.mode} candidates")
    scores = np.asarray(backend.log_scores(cands), dtype=float)
    if scores.shape != (len(cands.inventory),):
        raise BackendError(f"backend {backend.describe()} returned "
                           f"{scores.shape} scores for inventory of "
                           f"{len(cands.inventory)}")
    bad = np.flatnonzero(~np.isfinite(scores))
    if bad.size:
        conn = cands.inventory[int(bad[0])]
        raise BackendError(f"non-finite score for connective {conn!r} "
                           f"from {backend.describe()}")
    return LogScoreVector(scores=scores, mode=cands.mode)


def normalize(scores: LogScoreVector | np.ndarray) -> np.ndarray:
    """Softmax over connectives with max-subtraction, so that adding any
    constant in log space leaves the distribution unchanged."""
    values = scores.scores if isinstance(scores, LogScoreVector) else np.asarray(scores, dtype=float)
    shifted = values - values.max()
    weights = np.exp(shifted)
    return weights / weights.sum()


def top_connective(dist: np.ndarray, inventory: ConnectiveInventory) -> str:
    """Argmax connective; exact ties go to the earlier inventory entry."""
    return inventory[int(np.argmax(dist))]
