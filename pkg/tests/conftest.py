import json
import math
from pathlib import Path

import pytest

from explicitation.candidates import ConnectiveInventory
from explicitation.corpus import Provenance, Relation, default_column_map
from explicitation.senses import parse_sense

FIELD_COUNT = default_column_map().field_count


def make_pipe_line(kind, section=2, file_no="0200", conn_head="", implicit_conn="",
                   sense1="Expansion.Conjunction", sense2="", arg1="Argument one text.",
                   arg2="Argument two text.", arg1_span="0..20", conn_span="21..24",
                   arg2_span="25..45"):
    """One 48-field pipe record honoring the default PDTB 2.0 column map."""
    cmap = default_column_map()
    fields = [""] * cmap.field_count
    fields[cmap.relation_type] = kind
    fields[cmap.section] = str(section)
    fields[cmap.file] = file_no
    fields[cmap.conn_span] = conn_span
    fields[cmap.explicit_connective] = conn_head
    fields[cmap.implicit_connective] = implicit_conn
    fields[cmap.sense1] = sense1
    fields[cmap.sense2] = sense2
    fields[cmap.arg1_span] = arg1_span
    fields[cmap.arg1_text] = arg1
    fields[cmap.arg2_span] = arg2_span
    fields[cmap.arg2_text] = arg2
    return "|".join(fields)


def make_relation(kind="Implicit", connective="because", arg1="The market fell sharply",
                  arg2="Investors had expected higher rates", senses=("Contingency.Cause",),
                  section=21, file="wsj_2100", index=0, spans=None, corpus="test"):
    return Relation(
        kind=kind,
        connective=connective,
        arg1=arg1,
        arg2=arg2,
        senses=tuple(parse_sense(s) for s in senses),
        source=Provenance(corpus=corpus, section=section, file=file, index=index),
        spans=spans,
    )


@pytest.fixture
def inventory6():
    return ConnectiveInventory(("and", "as", "because", "since", "for", "but"))


LEVEL1 = ("Temporal", "Contingency", "Comparison", "Expansion")


def write_jsonl_docs(path, docs):
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(json.dumps(doc) + "\n")


def relation_doc(kind, connective, arg1, arg2, senses, section=21, file="synth_test",
                 spans=None):
    doc = {"kind": kind, "connective": connective, "arg1": arg1, "arg2": arg2,
           "senses": list(senses), "section": section, "file": file}
    if spans is not None:
        doc["spans"] = spans
    return doc


CANONICAL_SPANS = [[[0, 20]], [[21, 24]], [[25, 45]]]


def make_train_docs():
    """Explicit training relations whose frequency rows are easy to reason
    about: each connective of the 6-entry inventory occurs 8 times with one
    dominant sense."""
    dominant = {
        "and": "Expansion.Conjunction",
        "as": "Contingency.Cause",
        "because": "Contingency.Cause",
        "since": "Contingency.Cause",
        "for": "Contingency.Cause",
        "but": "Comparison.Contrast",
    }
    docs = []
    for conn, sense in dominant.items():
        for i in range(8):
            docs.append(relation_doc(
                "Explicit", conn, f"Left argument {i} about {conn}",
                f"Right argument {i} follows here", [sense],
                section=2, file="synth_train", spans=CANONICAL_SPANS))
    return docs


def make_shift_test_docs():
    """Four implicit test relations; relation 0 is the one engineered to
    flip from Expansion to Contingency under marginalization."""
    return [
        relation_doc("Implicit", "because",
                     "Experts are predicting a big influx of new shows.",
                     "This service identifies each caller's phone number.",
                     ["Contingency.Cause"]),
        relation_doc("Implicit", "and",
                     "The first argument of the second relation.",
                     "One more argument follows it.",
                     ["Expansion.Conjunction"]),
        relation_doc("Implicit", "but",
                     "Prices rose sharply last year.",
                     "Volume stayed flat in most markets.",
                     ["Comparison.Contrast"]),
        relation_doc("Implicit", "since",
                     "The company lost money again.",
                     "Its creditors forced a restructuring.",
                     ["Contingency.Cause"]),
    ]


def make_shift_table(inventory):
    """Log-score table producing exactly one Expansion -> Contingency flip.

    Relation 0 puts 0.30 on "and" (Expansion-dominant row) and 0.69 spread
    over four Contingency-dominant connectives, so the pipeline follows
    "and" while the marginal sum favors Contingency. Relations 1-3 are
    nearly one-hot and stay put.
    """
    probs = {
        "synth_test#0": [0.30, 0.20, 0.20, 0.14, 0.15, 0.01],
        "synth_test#1": [0.95, 0.01, 0.01, 0.01, 0.01, 0.01],
        "synth_test#2": [0.01, 0.01, 0.01, 0.01, 0.01, 0.95],
        "synth_test#3": [0.01, 0.01, 0.95, 0.01, 0.01, 0.01],
    }
    return {
        "inventory": list(inventory),
        "scores": {rid: [math.log(p) for p in row] for rid, row in probs.items()},
    }


def write_shift_fixture(tmp_path: Path, jobs: int = 1) -> Path:
    """Full cmd_run fixture: train/test corpora, score table, inventory,
    config. Returns the config path."""
    inventory = ("and", "as", "because", "since", "for", "but")
    write_jsonl_docs(tmp_path / "train.jsonl", make_train_docs())
    write_jsonl_docs(tmp_path / "test.jsonl", make_shift_test_docs())
    (tmp_path / "table.json").write_text(json.dumps(make_shift_table(inventory)))
    (tmp_path / "inventory.txt").write_text("\n".join(inventory) + "\n")
    config = {
        "corpus_format": "jsonl",
        "corpus_name": "synth",
        "train_path": "train.jsonl",
        "test_path": "test.jsonl",
        "inventory_path": "inventory.txt",
        "level": 1,
        "backend": "table",
        "table_path": "table.json",
        "classifier": "frequency",
        "classifier_k": 1.0,
        "methods": ["pipeline", "marginal"],
        "output_dir": "out",
        "jobs": jobs,
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config, indent=2))
    return path


def write_uniform_fixture(tmp_path: Path) -> Path:
    """cmd_run fixture with the uniform backend (used by the determinism
    acceptance criterion)."""
    inventory = ("and", "as", "because", "since", "for", "but")
    write_jsonl_docs(tmp_path / "train.jsonl", make_train_docs())
    write_jsonl_docs(tmp_path / "test.jsonl", make_shift_test_docs())
    (tmp_path / "inventory.txt").write_text("\n".join(inventory) + "\n")
    config = {
        "corpus_format": "jsonl",
        "corpus_name": "synth",
        "train_path": "train.jsonl",
        "test_path": "test.jsonl",
        "inventory_path": "inventory.txt",
        "level": 1,
        "backend": "uniform",
        "classifier": "frequency",
        "methods": ["pipeline", "marginal"],
        "output_dir": "out",
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config, indent=2))
    return path
