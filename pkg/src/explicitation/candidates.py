"""Explicitation candidates: join the two arguments of an implicit relation
with every connective in the inventory (causal mode), or build the masked
cloze template for bidirectional scorers."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import IMPLICIT, Relation
from .errors import ConfigError, DataError

CAUSAL = "causal"
MASKED = "masked"

# Symbolic placeholders; the scoring backend decides the concrete tokens.
SEP = "[SEP]"
MASK = "[MASK]"

_TERMINAL = ".!?"


@dataclass(frozen=True)
class ConnectiveInventory:
    """Ordered, duplicate-free list of one-word connectives. The order is
    part of the contract: it breaks argmax ties."""

    connectives: tuple[str, ...]

    def __post_init__(self):
        seen = set()
        for conn in self.connectives:
            if not conn or any(ch.isspace() for ch in conn):
                raise ConfigError(f"connective must be one whitespace-free word: {conn!r}")
            if conn in seen:
                raise ConfigError(f"duplicate connective: {conn!r}")
            seen.add(conn)
        if not self.connectives:
            raise ConfigError("connective inventory is empty")

    def __len__(self) -> int:
        return len(self.connectives)

    def __iter__(self):
        return iter(self.connectives)

    def __getitem__(self, i: int) -> str:
        return self.connectives[i]

    def index_of(self, connective: str) -> int | None:
        try:
            return self.connectives.index(connective)
        except ValueError:
            return None


def load_inventory(path: Path) -> ConnectiveInventory:
    """Read a connective inventory config file (one word per line, #
    comments), preserving order."""
    entries = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return ConnectiveInventory(tuple(entries))


def default_inventory() -> ConnectiveInventory:
    ref = resources.files("explicitation.data").joinpath("connectives_65.txt")
    with resources.as_file(ref) as path:
        return load_inventory(path)


def strip_terminal(arg1: str) -> str:
    """Drop trailing terminal punctuation (and surrounding whitespace) from
    the first argument so the connective continues the sentence. Runs to a
    fixpoint, which makes it idempotent."""
    end = len(arg1)
    while end > 0 and (arg1[end - 1] in _TERMINAL or arg1[end - 1].isspace()):
        end -= 1
    return arg1[:end]


def lower_initial(arg2: str) -> str:
    """Lowercase the first alphabetic character of the second argument."""
    for i, ch in enumerate(arg2):
        if ch.isalpha():
            return arg2[:i] + ch.lower() + arg2[i + 1:]
    return arg2


@dataclass(frozen=True)
class CandidateSet:
    """All explicitation candidates for one relation.

    Causal mode carries one joined text per connective (inventory order);
    masked mode carries a single 5-part template (arg1, SEP, MASK, arg2,
    SEP) to be scored once per connective at the mask slot.
    """

    relation: Relation
    mode: str
    inventory: ConnectiveInventory
    texts: tuple[str, ...] = ()
    template: tuple[str, ...] = ()

    def __post_init__(self):
        if self.mode == CAUSAL:
            if len(self.texts) != len(self.inventory):
                raise DataError("causal candidate count must equal inventory size")
        elif self.mode == MASKED:
            if self.template.count(MASK) != 1:
                raise DataError("masked template must contain exactly one mask slot")
        else:
            raise DataError(f"unknown candidate mode: {self.mode!r}")


def _normalized_args(rel: Relation) -> tuple[str, str]:
    if rel.kind != IMPLICIT:
        raise DataError(f"candidates are generated for implicit relations, got {rel.kind}")
    arg1 = strip_terminal(rel.arg1.strip())
    arg2 = lower_initial(rel.arg2.strip())
    if not arg1 or not arg2:
        raise DataError(f"{rel.rel_id}: empty argument after normalization")
    return arg1, arg2


def generate_causal(rel: Relation, inv: ConnectiveInventory) -> CandidateSet:
    """Produce ``arg1 C arg2`` for every connective C, single spaces, with
    arg1's terminal punctuation stripped and arg2's initial lowercased."""
    arg1, arg2 = _normalized_args(rel)
    texts = tuple(f"{arg1} {conn} {arg2}" for conn in inv)
    return CandidateSet(relation=rel, mode=CAUSAL, inventory=inv, texts=texts)


def generate_masked(rel: Relation, inv: ConnectiveInventory) -> CandidateSet:
    """Produce the cloze template (arg1, SEP, MASK, arg2, SEP) with the same
    arg2 normalization as causal mode; arg1 is passed through unchanged."""
    _, arg2 = _normalized_args(rel)
    arg1 = rel.arg1.strip()
    template = (arg1, SEP, MASK, arg2, SEP)
    return CandidateSet(relation=rel, mode=MASKED, inventory=inv, template=template)
