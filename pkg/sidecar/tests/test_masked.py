import math

import pytest
import torch
import torch.nn.functional as F

from explicitation_sidecar.models import BackendSpec, ScoringError, build_masked

ARG1 = "The figure above 50 indicates the economy is likely to expand."
ARG2 = "One below 50 indicates a contraction may be ahead."


def test_single_token_connective_equals_mask_slot_log_prob(masked_scorer):
    scores, multi = masked_scorer.score(ARG1, ARG2, ["and"])
    assert multi == []

    tok = masked_scorer.tokenizer
    arg1_ids = tok.convert_tokens_to_ids(tok.tokenize(ARG1))
    arg2_ids = tok.convert_tokens_to_ids(
        tok.tokenize("one below 50 indicates a contraction may be ahead."))
    input_ids = ([tok.cls_token_id] + arg1_ids + [tok.sep_token_id]
                 + [tok.mask_token_id] + arg2_ids + [tok.sep_token_id])
    slot = 2 + len(arg1_ids)
    with torch.no_grad():
        logits = masked_scorer.model(input_ids=torch.tensor([input_ids])).logits[0]
    expected = float(F.log_softmax(logits[slot], dim=-1)[
        tok.convert_tokens_to_ids("and")])
    assert scores[0] == pytest.approx(expected, abs=1e-6)


def test_multi_subword_connective_sums_slots_and_is_flagged(masked_scorer):
    tok = masked_scorer.tokenizer
    assert len(tok.tokenize("nevertheless")) == 2  # fixture sanity
    scores, multi = masked_scorer.score(ARG1, ARG2, ["but", "nevertheless"])
    assert multi == ["nevertheless"]
    assert all(math.isfinite(s) for s in scores)

    # two mask slots, summed by hand
    arg1_ids = tok.convert_tokens_to_ids(tok.tokenize(ARG1))
    arg2_ids = tok.convert_tokens_to_ids(
        tok.tokenize("one below 50 indicates a contraction may be ahead."))
    input_ids = ([tok.cls_token_id] + arg1_ids + [tok.sep_token_id]
                 + [tok.mask_token_id] * 2 + arg2_ids + [tok.sep_token_id])
    slot = 2 + len(arg1_ids)
    with torch.no_grad():
        logits = masked_scorer.model(input_ids=torch.tensor([input_ids])).logits[0]
    pieces = tok.convert_tokens_to_ids(tok.tokenize("nevertheless"))
    expected = sum(float(F.log_softmax(logits[slot + j], dim=-1)[pid])
                   for j, pid in enumerate(pieces))
    assert scores[1] == pytest.approx(expected, abs=1e-6)


def test_multi_subword_error_policy():
    scorer = build_masked(BackendSpec(family="masked", model="tiny",
                                      multi_subword="error"))
    with pytest.raises(ScoringError, match="nevertheless"):
        scorer.score(ARG1, ARG2, ["nevertheless"])


def test_scoring_is_deterministic(masked_scorer):
    first, _ = masked_scorer.score(ARG1, ARG2, ["and", "but", "because"])
    second, _ = masked_scorer.score(ARG1, ARG2, ["and", "but", "because"])
    assert first == second


def test_scores_respond_to_context(masked_scorer):
    base, _ = masked_scorer.score(ARG1, ARG2, ["and", "but", "because"])
    other, _ = masked_scorer.score(ARG1, "Demand was strong again.",
                                   ["and", "but", "because"])
    assert base != other


def test_long_arguments_are_truncated_from_outer_ends(masked_scorer):
    long_arg1 = "the economy " * 200 + "is likely to expand."
    long_arg2 = "one below 50 indicates " + "a contraction " * 200
    scores, _ = masked_scorer.score(long_arg1, long_arg2, ["and"])
    assert math.isfinite(scores[0])


def test_arguments_far_beyond_budget_stay_scorable(masked_scorer):
    # truncation can always shrink the arguments to fit the slot budget
    scores, _ = masked_scorer.score("word " * 2000, "word " * 2000, ["and"])
    assert math.isfinite(scores[0])
