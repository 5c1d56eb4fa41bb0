"""Acceptance suite: one test per acceptance criterion, each printing a
PASS line with its measurements (run with ``pytest -v -s`` to see them
inline). The licensed-corpus checks run only when PDTB2_PIPE_DIR is set."""

import json
import math
import os
import random
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from explicitation.candidates import ConnectiveInventory
from explicitation.cli import main
from explicitation.inference import marginal_predict, pipeline_predict
from explicitation.evaluation import baseline_most_common_sense, score_predictions
from explicitation.ngram import train_ngram
from explicitation.ngram.model import UNK
from explicitation.scoring import normalize
from explicitation.senses import default_labels

from conftest import write_shift_fixture, write_uniform_fixture
from test_evaluation import ORACLE_GOLDS, ORACLE_PREDS
from test_inference import TableClassifier, brute_force_marginal


def _report(name, detail=""):
    suffix = f" ({detail})" if detail else ""
    print(f"\nACCEPTANCE PASS: {name}{suffix}")


# 1. Marginalization oracle ----------------------------------------------------------

def test_marginalization_oracle():
    rng = random.Random(1486)
    started = time.perf_counter()
    fixtures = 0
    for _ in range(1000):
        n_conns = rng.randint(1, 65)
        n_labels = rng.choice([4, 11])
        conns = tuple(f"c{i}" for i in range(n_conns))
        dist = np.array([rng.random() + 1e-9 for _ in range(n_conns)])
        dist /= dist.sum()
        rows = {}
        for conn in conns:
            row = np.array([rng.random() + 1e-9 for _ in range(n_labels)])
            rows[conn] = row / row.sum()
        labels = tuple(f"L{i}" for i in range(n_labels))
        inv = ConnectiveInventory(conns)
        clf = TableClassifier(rows, labels=labels)

        marg = marginal_predict(dist, clf, "a", "b", inv)
        oracle = brute_force_marginal(dist, [rows[c] for c in conns], n_labels)
        assert np.abs(np.array(marg.sense_probs) - np.array(oracle)).max() <= 1e-12

        if n_conns == 1:
            pipe = pipeline_predict(dist, clf, "a", "b", inv)
            assert marg.sense_probs == pipe.sense_probs
            assert marg.label == pipe.label
        fixtures += 1
    # deterministic single-connective coverage on top of the random draw
    for n_labels in (4, 11):
        inv = ConnectiveInventory(("only",))
        row = np.full(n_labels, 1.0 / n_labels)
        clf = TableClassifier({"only": row}, labels=tuple(f"L{i}" for i in range(n_labels)))
        dist = np.array([1.0])
        assert marginal_predict(dist, clf, "a", "b", inv).sense_probs \
            == pipeline_predict(dist, clf, "a", "b", inv).sense_probs
        fixtures += 1
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0
    _report("marginalization oracle", f"{fixtures} fixtures, {elapsed:.2f}s, tol 1e-12")


# 2. Distribution invariants -----------------------------------------------------------

def test_distribution_invariants():
    rng = np.random.RandomState(94061)
    started = time.perf_counter()
    for _ in range(10_000):
        size = rng.randint(1, 66)
        scores = rng.uniform(-300.0, 300.0, size=size)
        dist = normalize(scores)
        assert abs(dist.sum() - 1.0) <= 1e-9
        shift = float(rng.uniform(-100.0, 100.0))
        assert np.abs(dist - normalize(scores + shift)).max() <= 1e-12
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    _report("distribution invariants", f"10000 vectors, {elapsed:.2f}s")


# 3. N-gram oracle -----------------------------------------------------------------------

def test_ngram_oracle_three_corpora():
    # corpus A: "a a b", unigram, k=1 -> exact rational expectations
    a = train_ngram("a a b", order=1, k=1)
    assert a.cond_prob_fraction("a") == Fraction(1, 2)
    assert a.cond_prob_fraction("b") == Fraction(1, 3)
    assert a.cond_prob_fraction(UNK) == Fraction(1, 6)

    # corpus B: "a b a b", bigram, k=1
    b = train_ngram("a b a b", order=2, k=1)
    assert b.cond_prob_fraction("a", []) == Fraction(1, 2)
    assert b.cond_prob_fraction("b", ["a"]) == Fraction(3, 5)
    assert b.cond_prob_fraction("a", ["b"]) == Fraction(1, 2)
    assert b.sequence_log_prob(["a", "b"]) == pytest.approx(
        math.log(Fraction(3, 10)), abs=1e-12)

    # corpus C: "a b c a", unigram, k=1/2
    c = train_ngram("a b c a", order=1, k=0.5)
    assert c.cond_prob_fraction("a") == Fraction(5, 12)
    assert c.cond_prob_fraction("b") == Fraction(1, 4)
    assert c.cond_prob_fraction("oov") == Fraction(1, 12)
    assert c.sequence_log_prob(["a", "oov"]) == pytest.approx(
        math.log(Fraction(5, 144)), abs=1e-12)
    _report("n-gram oracle", "3 corpora, rational arithmetic")


# 4. Metric oracle -------------------------------------------------------------------------

def test_metric_oracle():
    labels = ("Temporal", "Contingency", "Comparison", "Expansion")
    report = score_predictions(ORACLE_PREDS, ORACLE_GOLDS, 1, labels)
    assert report.per_class_f1 == {"Temporal": 0.0, "Contingency": 50.0,
                                   "Comparison": 50.0, "Expansion": 80.0}
    assert report.macro_f1 == 45.0
    assert report.accuracy == 60.0
    assert report.support["Temporal"] == 0  # zero-support class, F1 = 0
    _report("metric oracle", "10-item fixture incl. two-sense gold")


# 5. Baseline analytics -----------------------------------------------------------------------

def test_baseline_matches_analytic_form():
    from conftest import make_relation

    counts = {"Expansion.Conjunction": 50, "Contingency.Cause": 30,
              "Comparison.Contrast": 15, "Temporal.Asynchronous": 5}
    rels = []
    i = 0
    for sense, n in counts.items():
        for _ in range(n):
            rels.append(make_relation(senses=(sense,), index=i))
            i += 1
    labels = default_labels(1)
    report = baseline_most_common_sense(rels, 1, labels)

    # analytic closed form, computed with the same integer arithmetic
    tp, total = 50, 100
    fp = total - tp
    expected_f1 = 200.0 * tp / (2 * tp + fp + 0)
    assert report.per_class_f1["Expansion"] == expected_f1
    assert report.per_class_f1["Temporal"] == 0.0
    assert report.macro_f1 == (0.0 + 0.0 + 0.0 + expected_f1) / 4
    assert report.accuracy == 100.0 * tp / total
    _report("baseline analytics", "analytic equality on 100-relation corpus")


# 6. End-to-end determinism ----------------------------------------------------------------------

def test_end_to_end_determinism(tmp_path):
    config = write_uniform_fixture(tmp_path)
    digests = []
    for i in range(3):
        out = tmp_path / f"run{i}"
        assert main(["run", "--config", str(config), "--output-dir", str(out)]) == 0
        digests.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert digests[0].keys() == digests[1].keys() == digests[2].keys()
    for name in digests[0]:
        assert digests[0][name] == digests[1][name] == digests[2][name], name
    _report("end-to-end determinism", f"3 runs, {len(digests[0])} artifacts byte-identical")


# 7. Shift-report fixture ---------------------------------------------------------------------------

def test_shift_report_single_flip(tmp_path):
    config = write_shift_fixture(tmp_path)
    assert main(["run", "--config", str(config)]) == 0
    shift = json.loads((tmp_path / "out" / "shift_report.json").read_text())
    labels = shift["labels"]
    matrix = np.array(shift["matrix"])
    exp, cont = labels.index("Expansion"), labels.index("Contingency")
    assert matrix[exp, cont] == 1
    assert matrix.sum() - np.trace(matrix) == 1  # exactly one change overall
    assert shift["total"] == 4
    assert shift["changed_fraction"] == 1 / 4
    _report("shift-report fixture", "one Expansion->Contingency flip, fraction 1/4")


# 8. Licensed-data checks (conditional) -----------------------------------------------------------------

PDTB_DIR = os.environ.get("PDTB2_PIPE_DIR")
needs_pdtb = pytest.mark.skipif(
    not PDTB_DIR, reason="licensed PDTB 2.0 pipes not present (set PDTB2_PIPE_DIR)")


@needs_pdtb
def test_pdtb_paper_figures():
    from explicitation.candidates import default_inventory
    from explicitation.classifier import train_frequency
    from explicitation.corpus import (
        SplitSpec, corpus_stats, default_column_map, filter_canonical_order,
        parse_pipe_dir, split_pdtb,
    )
    from explicitation.evaluation import agreement, gold_label_sets
    from explicitation.scoring import ConstantBackend
    from explicitation import experiment as exp

    started = time.perf_counter()
    parsed = parse_pipe_dir(Path(PDTB_DIR), default_column_map())
    split = split_pdtb(parsed.relations, SplitSpec.pdtb_default())

    labels1, labels2 = default_labels(1), default_labels(2)
    assert corpus_stats(split.test, 1, labels1).relations_with_label == 1046
    assert corpus_stats(split.test, 2, labels2).relations_with_label == 1040

    explicit = [r for r in parsed.relations if r.kind == "Explicit"]
    filtered = filter_canonical_order(explicit)
    assert filtered.excluded == 2558
    assert abs(100.0 * filtered.excluded / len(explicit) - 13.85) <= 0.01

    baseline = baseline_most_common_sense(split.test, 1, labels1)
    assert abs(baseline.macro_f1 - 17.35) <= 0.01
    assert abs(baseline.per_class_f1["Expansion"] - 69.41) <= 0.01

    train = filter_canonical_order(split.train).kept
    clf = train_frequency(train, 1, labels1, k=1.0)
    inventory = default_inventory()
    _, eligible, _ = gold_label_sets(split.test, 1, labels1)

    for conn, expect_conn, expect_sense in (("and", None, 53.15), ("but", 7.00, 13.96)):
        backend = ConstantBackend(conn)
        dists = exp.compute_distributions(backend, eligible, inventory, "causal")
        probe = agreement(eligible, dists, clf, inventory)
        if expect_conn is not None:
            assert abs(probe.connective_pct - expect_conn) <= 0.01
        assert abs(probe.sense_pct - expect_sense) <= 0.01

    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    _report("licensed PDTB figures", f"{elapsed:.1f}s")
