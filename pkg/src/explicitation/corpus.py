"""Corpus handling: PDTB 2.0 pipe-file parsing, train/dev/test splitting,
argument-order filtering, BioDRB sense mapping, statistics, and the
canonical JSON Lines serialization."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ConfigError, DataError
from .senses import SensePath, parse_sense

EXPLICIT = "Explicit"
IMPLICIT = "Implicit"
KINDS = (EXPLICIT, IMPLICIT)

# Relation types present in PDTB 2.0 pipe files that this toolkit skips.
SKIPPED_TYPES = ("EntRel", "AltLex", "NoRel")

Span = tuple[int, int]


@dataclass(frozen=True)
class Provenance:
    corpus: str
    section: int | None
    file: str
    index: int

    @property
    def rel_id(self) -> str:
        return f"{self.file}#{self.index}"


@dataclass(frozen=True)
class Relation:
    """One discourse relation. For implicit relations ``connective`` holds
    the annotator-inserted gold connective (possibly multi-word)."""

    kind: str
    connective: str
    arg1: str
    arg2: str
    senses: tuple[SensePath, ...]
    source: Provenance
    spans: tuple[tuple[Span, ...], ...] | None = None  # (arg1, conn, arg2)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DataError(f"relation kind must be one of {KINDS}: {self.kind!r}")
        if not self.arg1.strip() or not self.arg2.strip():
            raise DataError("relation arguments must be non-empty")
        if not self.senses:
            raise DataError("relation carries no sense annotation")

    @property
    def rel_id(self) -> str:
        return self.source.rel_id

    def labels(self, level: int, label_set: Sequence[str] | None = None) -> tuple[str, ...]:
        """Distinct gold labels at ``level``, in annotation order, restricted
        to ``label_set`` when given."""
        seen: list[str] = []
        for sense in self.senses:
            label = sense.label(level)
            if label is None or label in seen:
                continue
            if label_set is not None and label not in label_set:
                continue
            seen.append(label)
        return tuple(seen)


@dataclass(frozen=True)
class ColumnMap:
    """0-based field indices into one pipe record. Span and connective
    columns beyond the core set are optional so that other PDTB-style
    releases (BioDRB) can reuse the parser."""

    field_count: int
    relation_type: int
    arg1_text: int
    arg2_text: int
    sense1: int
    sense2: int | None = None
    section: int | None = None
    file: int | None = None
    explicit_connective: int | None = None
    implicit_connective: int | None = None
    arg1_span: int | None = None
    conn_span: int | None = None
    arg2_span: int | None = None

    def __post_init__(self):
        indices = [v for v in self._index_values() if v is not None]
        if any(i < 0 or i >= self.field_count for i in indices):
            raise ConfigError("column index out of range for field count")
        if len(set(indices)) != len(indices):
            raise ConfigError("column indices must be pairwise distinct")

    def _index_values(self):
        return (
            self.relation_type,
            self.arg1_text,
            self.arg2_text,
            self.sense1,
            self.sense2,
            self.section,
            self.file,
            self.explicit_connective,
            self.implicit_connective,
            self.arg1_span,
            self.conn_span,
            self.arg2_span,
        )

    @classmethod
    def from_json(cls, path: Path) -> "ColumnMap":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read column map {path}: {exc}")
        raw.pop("comment", None)
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown column map keys: {sorted(unknown)}")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(f"incomplete column map {path}: {exc}")


def default_column_map() -> ColumnMap:
    from importlib import resources

    ref = resources.files("explicitation.data").joinpath("pdtb2_columnmap.json")
    with resources.as_file(ref) as path:
        return ColumnMap.from_json(path)


@dataclass(frozen=True)
class SplitSpec:
    """Disjoint section sets for the train/dev/test split."""

    train: frozenset[int]
    dev: frozenset[int]
    test: frozenset[int]

    def __post_init__(self):
        if self.train & self.dev or self.train & self.test or self.dev & self.test:
            raise ConfigError("split section sets must be pairwise disjoint")

    @classmethod
    def pdtb_default(cls) -> "SplitSpec":
        return cls(
            train=frozenset(range(2, 21)) | {23, 24},
            dev=frozenset({0, 1}),
            test=frozenset({21, 22}),
        )


@dataclass
class RecordError:
    line: int  # 1-based
    message: str


@dataclass
class ParseResult:
    relations: list[Relation] = field(default_factory=list)
    skipped: Counter = field(default_factory=Counter)
    errors: list[RecordError] = field(default_factory=list)

    @property
    def skipped_total(self) -> int:
        return sum(self.skipped.values())


def _parse_span_list(text: str) -> tuple[Span, ...]:
    """Parse a PDTB SpanList such as ``535..757;800..820``."""
    spans = []
    for part in text.split(";"):
        start, sep, end = part.partition("..")
        if not sep:
            raise ValueError(f"malformed span: {part!r}")
        spans.append((int(start), int(end)))
    return tuple(spans)


def _record_to_relation(fields: Sequence[str], cmap: ColumnMap, corpus: str,
                        file_id: str | None, index: int) -> Relation:
    kind = fields[cmap.relation_type].strip()

    section = None
    if cmap.section is not None and fields[cmap.section].strip():
        section = int(fields[cmap.section])
    name = file_id
    if cmap.file is not None and fields[cmap.file].strip():
        name = fields[cmap.file].strip()
    if name is None:
        raise DataError("record carries no file id and none was supplied")

    if kind == IMPLICIT:
        conn_col = cmap.implicit_connective
    else:
        conn_col = cmap.explicit_connective
    if conn_col is None:
        raise DataError(f"column map has no connective column for {kind} relations")
    connective = fields[conn_col].strip()
    if not connective:
        raise DataError(f"{kind} relation without a connective")

    senses = [parse_sense(fields[cmap.sense1])]
    if cmap.sense2 is not None and fields[cmap.sense2].strip():
        senses.append(parse_sense(fields[cmap.sense2]))

    spans = None
    span_cols = (cmap.arg1_span, cmap.conn_span, cmap.arg2_span)
    if all(c is not None for c in span_cols):
        try:
            spans = tuple(_parse_span_list(fields[c]) for c in span_cols)
        except ValueError:
            spans = None  # missing/odd spans classify as non-canonical later

    return Relation(
        kind=kind,
        connective=connective,
        arg1=fields[cmap.arg1_text].strip(),
        arg2=fields[cmap.arg2_text].strip(),
        senses=tuple(senses),
        source=Provenance(corpus=corpus, section=section, file=name, index=index),
        spans=spans,
    )


def parse_pipe_file(data: bytes | str, cmap: ColumnMap, *, corpus: str = "pdtb",
                    file_id: str | None = None, strict: bool = False) -> ParseResult:
    """Parse one pipe file (one ``|``-separated record per line).

    Explicit and Implicit records become Relations; EntRel/AltLex/NoRel are
    skipped and counted. Malformed records are collected as RecordErrors
    (or raised immediately when ``strict``). Record indices within the file
    are line numbers, so ids stay stable regardless of skipping.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DataError(f"{file_id or 'input'} is not valid UTF-8: {exc}")
    else:
        text = data

    result = ParseResult()
    for lineno, line in enumerate(text.splitlines(), start=1):
        fields = line.split("|")
        if len(fields) != cmap.field_count:
            err = RecordError(lineno, f"expected {cmap.field_count} fields, got {len(fields)}")
            if strict:
                raise DataError(f"line {err.line}: {err.message}")
            result.errors.append(err)
            continue
        kind = fields[cmap.relation_type].strip()
        if kind in SKIPPED_TYPES:
            result.skipped[kind] += 1
            continue
        try:
            rel = _record_to_relation(fields, cmap, corpus, file_id, lineno - 1)
        except (DataError, ValueError) as exc:
            err = RecordError(lineno, str(exc))
            if strict:
                raise DataError(f"line {err.line}: {err.message}")
            result.errors.append(err)
            continue
        result.relations.append(rel)
    return result


def parse_pipe_dir(root: Path, cmap: ColumnMap, *, corpus: str = "pdtb",
                   pattern: str = "**/*.pipe", strict: bool = False) -> ParseResult:
    """Parse every pipe file under ``root`` (sorted for reproducibility)."""
    root = Path(root)
    combined = ParseResult()
    for path in sorted(root.glob(pattern)):
        res = parse_pipe_file(path.read_bytes(), cmap, corpus=corpus,
                              file_id=path.stem, strict=strict)
        combined.relations.extend(res.relations)
        combined.skipped.update(res.skipped)
        combined.errors.extend(res.errors)
    return combined


@dataclass
class SplitResult:
    train: list[Relation]
    dev: list[Relation]
    test: list[Relation]
    dropped: int


def split_pdtb(relations: Iterable[Relation], spec: SplitSpec) -> SplitResult:
    """Partition a corpus: explicit relations go to train/dev by section,
    implicit relations in the test sections form the test set. Everything
    else (including relations without a section) is dropped and counted."""
    out = SplitResult([], [], [], 0)
    for rel in relations:
        section = rel.source.section
        if rel.kind == EXPLICIT and section in spec.train:
            out.train.append(rel)
        elif rel.kind == EXPLICIT and section in spec.dev:
            out.dev.append(rel)
        elif rel.kind == IMPLICIT and section in spec.test:
            out.test.append(rel)
        else:
            out.dropped += 1
    return out


def _canonical_order(spans: tuple[tuple[Span, ...], ...]) -> bool:
    (arg1, conn, arg2) = spans
    if not (arg1 and conn and arg2):
        return False
    return max(e for _, e in arg1) <= min(s for s, _ in conn) \
        and max(e for _, e in conn) <= min(s for s, _ in arg2)


@dataclass
class OrderFilterResult:
    kept: list[Relation]
    excluded: int
    missing_spans: int


def filter_canonical_order(relations: Iterable[Relation]) -> OrderFilterResult:
    """Keep explicit relations whose spans follow (arg1, conn, arg2) without
    interleaving; implicit relations pass through unchanged. Explicit
    relations without usable spans count as non-canonical."""
    out = OrderFilterResult([], 0, 0)
    for rel in relations:
        if rel.kind != EXPLICIT:
            out.kept.append(rel)
            continue
        if rel.spans is None:
            out.excluded += 1
            out.missing_spans += 1
            continue
        if _canonical_order(rel.spans):
            out.kept.append(rel)
        else:
            out.excluded += 1
    return out


@dataclass
class SenseMapReport:
    mapped: list[Relation]
    unmapped: Counter  # label -> occurrences


def map_biodrb_sense(raw: str, table: dict[str, SensePath]) -> SensePath | None:
    """Map one BioDRB sense label to a PDTB 2.0 sense path, or None when the
    table has no entry (callers report, never guess)."""
    return table.get(raw.strip())


def map_biodrb_corpus(relations: Iterable[Relation], table: dict[str, SensePath]) -> SenseMapReport:
    """Rewrite every relation's senses through the mapping table. Relations
    whose senses are all unmapped are left out of the result; every unmapped
    label is counted."""
    report = SenseMapReport([], Counter())
    for rel in relations:
        mapped = []
        for sense in rel.senses:
            target = map_biodrb_sense(sense.raw, table)
            if target is None:
                report.unmapped[sense.raw] += 1
            else:
                mapped.append(target)
        if mapped:
            report.mapped.append(
                Relation(kind=rel.kind, connective=rel.connective, arg1=rel.arg1,
                         arg2=rel.arg2, senses=tuple(mapped), source=rel.source,
                         spans=rel.spans))
    return report


@dataclass
class StatTable:
    level: int
    counts: dict[str, int]
    relations_with_label: int
    relations_without_label: int


def corpus_stats(relations: Sequence[Relation], level: int,
                 label_set: Sequence[str] | None = None) -> StatTable:
    """Label counts at one level. A relation with two senses counts once per
    distinct label; relations with no label at the level (or none inside
    ``label_set``) are tallied separately."""
    if level not in (1, 2):
        raise ConfigError(f"sense level must be 1 or 2, got {level}")
    counts: Counter = Counter()
    with_label = 0
    for rel in relations:
        labels = rel.labels(level, label_set)
        if labels:
            with_label += 1
            counts.update(labels)
    ordered = dict.fromkeys(label_set, 0) if label_set is not None else {}
    for label in sorted(counts):
        ordered.setdefault(label, 0)
    for label, n in counts.items():
        ordered[label] = n
    return StatTable(level=level, counts=ordered,
                     relations_with_label=with_label,
                     relations_without_label=len(relations) - with_label)


# --- canonical JSON Lines serialization ------------------------------------

def relation_to_dict(rel: Relation) -> dict:
    doc = {
        "kind": rel.kind,
        "connective": rel.connective,
        "arg1": rel.arg1,
        "arg2": rel.arg2,
        "senses": [s.raw for s in rel.senses],
        "section": rel.source.section,
        "file": rel.source.file,
    }
    if rel.spans is not None:
        doc["spans"] = [[list(span) for span in part] for part in rel.spans]
    return doc


def write_jsonl(relations: Iterable[Relation], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rel in relations:
            fh.write(json.dumps(relation_to_dict(rel), ensure_ascii=False) + "\n")


def relation_from_dict(doc: dict, *, corpus: str, index: int) -> Relation:
    try:
        spans = None
        if doc.get("spans") is not None:
            spans = tuple(tuple((int(s), int(e)) for s, e in part) for part in doc["spans"])
        return Relation(
            kind=doc["kind"],
            connective=doc["connective"],
            arg1=doc["arg1"],
            arg2=doc["arg2"],
            senses=tuple(parse_sense(s) for s in doc["senses"]),
            source=Provenance(corpus=corpus, section=doc.get("section"),
                              file=doc["file"], index=index),
            spans=spans,
        )
    except KeyError as exc:
        raise DataError(f"relation record missing field {exc}")


def read_jsonl(path: Path, *, corpus: str = "jsonl") -> list[Relation]:
    relations = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno + 1}: invalid JSON: {exc}")
            relations.append(relation_from_dict(doc, corpus=corpus, index=lineno))
    return relations


def filter_by_files(relations: Iterable[Relation], files: Sequence[str]) -> list[Relation]:
    wanted = set(files)
    return [rel for rel in relations if rel.source.file in wanted]
