import json
from pathlib import Path

import pytest

from explicitation_sidecar.joining import (
    join_causal, lowercase_first_letter, masked_arg2, strip_trailing_terminal,
)

GOLDEN = json.loads((Path(__file__).parent / "golden" / "joining_cases.json").read_text())


@pytest.mark.parametrize("case", GOLDEN, ids=[c["connective"] for c in GOLDEN])
def test_joining_matches_golden_fixture(case):
    assert join_causal(case["arg1"], case["connective"], case["arg2"]) == case["joined"]


def test_strip_is_idempotent_on_golden_args():
    for case in GOLDEN:
        once = strip_trailing_terminal(case["arg1"])
        assert strip_trailing_terminal(once) == once


def test_lowercase_skips_non_alphabetic_prefix():
    assert lowercase_first_letter("\"Quote\" text") == "\"quote\" text"
    assert lowercase_first_letter("123 numbers") == "123 numbers"


def test_masked_arg2_uses_same_casing_rule():
    for case in GOLDEN:
        assert masked_arg2(case["arg2"]) == lowercase_first_letter(case["arg2"].strip())
