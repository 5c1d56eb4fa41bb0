"""PDTB 2.0 sense hierarchy: parsing of annotation strings into sense paths
and label-set handling for 4-way / 11-way evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError, DataError

LEVEL1_CLASSES = ("Temporal", "Contingency", "Comparison", "Expansion")


@dataclass(frozen=True)
class SensePath:
    """One sense annotation, split into hierarchy levels.

    ``raw`` always reconstructs the original annotation string; ``level1``
    is one of the four top classes, ``level2`` the subtype name when the
    annotation goes that deep.
    """

    level1: str
    level2: str | None
    raw: str

    def label(self, level: int) -> str | None:
        """The evaluation label at ``level``, or None when the annotation
        does not reach that level."""
        if level == 1:
            return self.level1
        if level == 2:
            if self.level2 is None:
                return None
            return f"{self.level1}.{self.level2}"
        raise ValueError(f"unsupported sense level: {level}")


def parse_sense(raw: str) -> SensePath:
    """Parse a PDTB sense string such as ``Contingency.Cause.Reason``.

    Raises DataError when the first component is not one of the four
    first-level classes.
    """
    text = raw.strip()
    if not text:
        raise DataError("empty sense annotation")
    parts = text.split(".")
    if parts[0] not in LEVEL1_CLASSES:
        raise DataError(f"unknown first-level sense class: {parts[0]!r}")
    level2 = parts[1] if len(parts) > 1 and parts[1] else None
    return SensePath(level1=parts[0], level2=level2, raw=text)


def _read_config_lines(path: Path) -> list[str]:
    entries = []
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            entries.append(line)
    return entries


def load_labels(path: Path) -> tuple[str, ...]:
    """Read a label-set config file (one label per line, # comments)."""
    entries = _read_config_lines(Path(path))
    if not entries:
        raise ConfigError(f"label file {path} contains no labels")
    if len(set(entries)) != len(entries):
        raise ConfigError(f"label file {path} contains duplicates")
    return tuple(entries)


def default_labels(level: int) -> tuple[str, ...]:
    """The shipped label set for the given level (4-way or 11-way)."""
    if level not in (1, 2):
        raise ConfigError(f"sense level must be 1 or 2, got {level}")
    name = "labels_level1.txt" if level == 1 else "labels_level2.txt"
    ref = resources.files("explicitation.data").joinpath(name)
    with resources.as_file(ref) as path:
        return load_labels(path)


def load_sense_map(path: Path) -> dict[str, SensePath]:
    """Read a sense mapping table ("<source> => <pdtb sense>" lines).

    Every target must parse as a valid PDTB sense path; a broken target is a
    config error, not a data error.
    """
    mapping: dict[str, SensePath] = {}
    for line in _read_config_lines(Path(path)):
        if "=>" not in line:
            raise ConfigError(f"sense map line without '=>': {line!r}")
        source, _, target = line.partition("=>")
        source = source.strip()
        if source in mapping:
            raise ConfigError(f"duplicate sense map entry: {source!r}")
        try:
            mapping[source] = parse_sense(target)
        except DataError as exc:
            raise ConfigError(f"invalid sense map target for {source!r}: {exc}")
    return mapping


def default_sense_map() -> dict[str, SensePath]:
    ref = resources.files("explicitation.data").joinpath("biodrb_sense_map.txt")
    with resources.as_file(ref) as path:
        return load_sense_map(path)
