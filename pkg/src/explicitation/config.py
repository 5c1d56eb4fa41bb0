"""Experiment configuration: one flat-key JSON file, overridable from the
command line (flags win). Validation is fail-fast and touches the file
system only for existence checks."""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

SIDECAR_ENV = "EXPLICITATION_SIDECAR"

BACKENDS = ("uniform", "constant", "ngram", "table", "sidecar")
CLASSIFIERS = ("frequency", "sidecar")
CORPUS_FORMATS = ("pdtb-pipes", "jsonl")

# Keys that only steer where/how results are written; they are excluded
# from the config fingerprint so reruns into a fresh directory stay
# byte-identical.
_NON_SEMANTIC_KEYS = ("output_dir", "jobs")


@dataclass
class ExperimentConfig:
    # corpus
    corpus_format: str = "pdtb-pipes"
    corpus_name: str = "pdtb"
    corpus_dir: str | None = None
    pipe_glob: str = "**/*.pipe"
    column_map: str = "pdtb2"
    train_path: str | None = None
    dev_path: str | None = None
    test_path: str | None = None
    train_sections: list[int] = field(default_factory=lambda: sorted(set(range(2, 21)) | {23, 24}))
    dev_sections: list[int] = field(default_factory=lambda: [0, 1])
    test_sections: list[int] = field(default_factory=lambda: [21, 22])
    order_filter: bool = True
    # labels / inventory
    level: int = 1
    labels_path: str | None = None
    inventory_path: str | None = None
    # scoring backend
    mode: str = "causal"
    backend: str = "uniform"
    constant_connective: str | None = None
    ngram_order: int = 2
    ngram_k: float = 1.0
    ngram_train_path: str | None = None
    ngram_kernel: str = "auto"
    ngram_length_penalty: bool = False
    table_path: str | None = None
    sidecar_endpoint: str | None = None
    # classifier
    classifier: str = "frequency"
    classifier_k: float = 1.0
    classifier_path: str | None = None
    # inference / reporting
    methods: list[str] = field(default_factory=lambda: ["pipeline", "marginal"])
    most_common_sense_label: str | None = None
    confusion_top_k: int = 10
    include_conn_probs: bool = False
    runs: int = 1
    seed: int = 0
    # output
    output_dir: str = "out"
    jobs: int = 1

    @classmethod
    def key_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_file(cls, path: Path, overrides: dict | None = None) -> "ExperimentConfig":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}")
        if not isinstance(doc, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        doc.update(overrides or {})
        return cls.from_dict(doc, base=Path(path).parent)

    @classmethod
    def from_dict(cls, doc: dict, base: Path | None = None) -> "ExperimentConfig":
        known = set(cls.key_names())
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        config = cls(**doc)
        if base is not None:
            config._resolve_paths(base)
        config.validate()
        return config

    _PATH_KEYS = ("corpus_dir", "train_path", "dev_path", "test_path", "labels_path",
                  "inventory_path", "ngram_train_path", "table_path", "classifier_path")

    def _resolve_paths(self, base: Path) -> None:
        for key in self._PATH_KEYS + ("output_dir",):
            value = getattr(self, key)
            if value is not None and not Path(value).is_absolute():
                setattr(self, key, str((base / value).resolve()))
        if self.column_map != "pdtb2" and not Path(self.column_map).is_absolute():
            self.column_map = str((base / self.column_map).resolve())

    def validate(self) -> None:
        if self.corpus_format not in CORPUS_FORMATS:
            raise ConfigError(f"corpus_format must be one of {CORPUS_FORMATS}")
        if self.backend not in BACKENDS:
            raise ConfigError(f"backend must be one of {BACKENDS}")
        if self.classifier not in CLASSIFIERS:
            raise ConfigError(f"classifier must be one of {CLASSIFIERS}")
        if self.level not in (1, 2):
            raise ConfigError("level must be 1 or 2")
        if self.mode not in ("causal", "masked"):
            raise ConfigError("mode must be causal or masked")
        if self.backend == "ngram" and self.mode == "masked":
            raise ConfigError("the ngram backend scores causal candidates only")
        if self.backend == "constant" and not self.constant_connective:
            raise ConfigError("backend 'constant' needs constant_connective")
        if self.backend == "table" and not self.table_path:
            raise ConfigError("backend 'table' needs table_path")
        if self.backend == "sidecar" and not self.effective_sidecar_endpoint():
            raise ConfigError(f"backend 'sidecar' needs sidecar_endpoint or ${SIDECAR_ENV}")
        if self.classifier == "sidecar" and not self.effective_sidecar_endpoint():
            raise ConfigError(f"classifier 'sidecar' needs sidecar_endpoint or ${SIDECAR_ENV}")
        if self.corpus_format == "pdtb-pipes":
            if not self.corpus_dir:
                raise ConfigError("corpus_format 'pdtb-pipes' needs corpus_dir")
        else:
            if not self.test_path:
                raise ConfigError("corpus_format 'jsonl' needs test_path")
            if self.classifier == "frequency" and not (self.train_path or self.classifier_path):
                raise ConfigError("frequency classifier needs train_path or classifier_path")
        overlap = (set(self.train_sections) & set(self.dev_sections)) \
            | (set(self.train_sections) & set(self.test_sections)) \
            | (set(self.dev_sections) & set(self.test_sections))
        if overlap:
            raise ConfigError(f"split sections overlap: {sorted(overlap)}")
        if not self.methods or any(m not in ("pipeline", "marginal") for m in self.methods):
            raise ConfigError("methods must be a non-empty subset of pipeline/marginal")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        for key in self._PATH_KEYS:
            value = getattr(self, key)
            if value is not None and not Path(value).exists():
                raise ConfigError(f"{key} does not exist: {value}")
        if self.column_map != "pdtb2" and not Path(self.column_map).exists():
            raise ConfigError(f"column_map does not exist: {self.column_map}")

    def effective_sidecar_endpoint(self) -> str | None:
        return os.environ.get(SIDECAR_ENV) or self.sidecar_endpoint

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.key_names()}

    def fingerprint(self) -> str:
        doc = {k: v for k, v in self.to_dict().items() if k not in _NON_SEMANTIC_KEYS}
        blob = json.dumps(doc, sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def parse_override(text: str) -> tuple[str, object]:
    """Parse one ``key=value`` command-line override; values are JSON when
    they parse, bare strings otherwise."""
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise ConfigError(f"override must look like key=value: {text!r}")
    if key not in ExperimentConfig.key_names():
        raise ConfigError(f"unknown config key in override: {key!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value
