"""Candidate joining rule, re-implemented on the service side. The wire
protocol carries raw argument texts, so both ends must build identical
candidate strings; a shared golden fixture keeps the two in lockstep."""

_TERMINAL = ".!?"


def strip_trailing_terminal(text: str) -> str:
    """Remove trailing sentence-final punctuation and whitespace so a
    connective can continue the sentence."""
    end = len(text)
    while end > 0 and (text[end - 1] in _TERMINAL or text[end - 1].isspace()):
        end -= 1
    return text[:end]


def lowercase_first_letter(text: str) -> str:
    for i, ch in enumerate(text):
        if ch.isalpha():
            return text[:i] + ch.lower() + text[i + 1:]
    return text


def join_causal(arg1: str, connective: str, arg2: str) -> str:
    """``arg1 C arg2`` with arg1's terminal punctuation stripped and arg2's
    first letter lowercased, single spaces between the parts."""
    left = strip_trailing_terminal(arg1.strip())
    right = lowercase_first_letter(arg2.strip())
    return f"{left} {connective} {right}"


def masked_arg2(arg2: str) -> str:
    """arg2 as it appears after the mask slot (same casing rule as causal)."""
    return lowercase_first_letter(arg2.strip())
