"""Deterministic add-k n-gram language model used as the in-repo stand-in
for large causal LMs when scoring explicitation candidates."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from ..errors import ConfigError, DataError

UNK = "<unk>"
_BOS_ID = 0


def tokenize(text: str) -> list[str]:
    """Whitespace tokenization; shared by training and candidate scoring."""
    return text.split()


def sequences_from_text(text: str) -> list[list[str]]:
    """One training sequence per non-empty line."""
    return [tokens for line in text.splitlines() if (tokens := tokenize(line))]


class NGramModel:
    """Add-k smoothed n-gram model over a whitespace-token vocabulary.

    Sequences are scored as the sum of conditional token log-probabilities
    with begin-of-sequence padding (no end marker). Out-of-vocabulary
    tokens map to a reserved UNK type that always has a vocabulary slot.
    """

    def __init__(self, order: int, k: float, vocab: dict[str, int],
                 ngram_counts: dict[int, int], context_counts: dict[int, int],
                 kernel: str = "auto"):
        if order < 1:
            raise ConfigError(f"n-gram order must be >= 1, got {order}")
        if not k > 0:
            raise ConfigError(f"add-k smoothing needs k > 0, got {k}")
        self.order = order
        self.k = float(k)
        self.k_fraction = Fraction(str(k))
        self.vocab = vocab
        self.vocab_size = len(vocab)
        self.base = self.vocab_size + 1  # id 0 is the BOS pad
        if self.base ** order >= 2 ** 62:
            raise ConfigError(
                "vocabulary too large to pack n-gram keys at this order; "
                "reduce the order or the vocabulary")
        self.ngram_counts = ngram_counts
        self.context_counts = context_counts
        self._kernel = self._make_kernel(kernel)

    def _make_kernel(self, which: str):
        from . import CompiledKernel, PureKernel

        if which == "auto":
            which = "compiled" if CompiledKernel is not None else "pure"
        if which == "compiled":
            if CompiledKernel is None:
                raise ConfigError("compiled n-gram kernel is not built")
            return CompiledKernel(self.order, self.k, self.vocab_size, self.base,
                                  self.ngram_counts, self.context_counts)
        if which == "pure":
            return PureKernel(self.order, self.k, self.vocab_size, self.base,
                              self.ngram_counts, self.context_counts)
        raise ConfigError(f"unknown kernel selector: {which!r}")

    @property
    def kernel_name(self) -> str:
        return type(self._kernel).__name__

    # --- id plumbing ------------------------------------------------------

    def _ids(self, tokens: Sequence[str]) -> np.ndarray:
        unk = self.vocab[UNK]
        return np.array([self.vocab.get(t, unk) for t in tokens], dtype=np.int64)

    def _window_ids(self, tokens: Sequence[str]) -> list[int]:
        unk = self.vocab[UNK]
        return [self.vocab.get(t, unk) for t in tokens]

    def _pack(self, ids: Sequence[int]) -> int:
        key = 0
        for tid in ids:
            key = key * self.base + tid
        return key

    # --- scoring ----------------------------------------------------------

    def sequence_log_prob(self, tokens: Sequence[str]) -> float:
        if not tokens:
            raise DataError("cannot score an empty token sequence")
        return self._kernel.sequence_log_prob(self._ids(tokens))

    def text_log_prob(self, text: str) -> float:
        return self.sequence_log_prob(tokenize(text))

    def token_log_probs(self, tokens: Sequence[str]) -> list[float]:
        """Per-token conditional log-probabilities (pure path; used by the
        decomposition and locality checks)."""
        import math

        ids = self._window_ids(tokens)
        padded = [_BOS_ID] * (self.order - 1) + ids
        out = []
        for i in range(len(ids)):
            ctx_key = self._pack(padded[i:i + self.order - 1])
            ngram_key = ctx_key * self.base + padded[i + self.order - 1]
            cnt = self.ngram_counts.get(ngram_key, 0)
            ctx = self.context_counts.get(ctx_key, 0)
            out.append(math.log(cnt + self.k) - math.log(ctx + self.k * self.vocab_size))
        return out

    def cond_prob_fraction(self, token: str, context: Sequence[str] = ()) -> Fraction:
        """Exact smoothed P(token | context) as a rational number. The
        context is truncated/padded on the left to order-1 tokens."""
        ids = self._window_ids(context)[max(0, len(context) - self.order + 1):]
        padded = [_BOS_ID] * (self.order - 1 - len(ids)) + ids
        ctx_key = self._pack(padded)
        unk = self.vocab[UNK]
        ngram_key = ctx_key * self.base + self.vocab.get(token, unk)
        cnt = self.ngram_counts.get(ngram_key, 0)
        ctx = self.context_counts.get(ctx_key, 0)
        kf = self.k_fraction
        return (cnt + kf) / (ctx + kf * self.vocab_size)

    def with_kernel(self, which: str) -> "NGramModel":
        """Same tables, different scoring kernel (used by the benchmark)."""
        return NGramModel(self.order, self.k, self.vocab, self.ngram_counts,
                          self.context_counts, kernel=which)


def train_ngram(source: str | Iterable[Sequence[str]], order: int, k: float = 1.0,
                kernel: str = "auto") -> NGramModel:
    """Count n-grams over the training sequences and build a model.

    ``source`` is either raw text (one sequence per line) or an iterable of
    token sequences. The vocabulary is the set of training types plus UNK.
    """
    if order < 1:
        raise ConfigError(f"n-gram order must be >= 1, got {order}")
    if isinstance(source, str):
        sequences = sequences_from_text(source)
    else:
        sequences = [list(seq) for seq in source]
    sequences = [seq for seq in sequences if seq]
    if not sequences:
        raise DataError("n-gram training text is empty")

    vocab: dict[str, int] = {}
    for seq in sequences:
        for token in seq:
            if token not in vocab:
                vocab[token] = len(vocab) + 1
    vocab.setdefault(UNK, len(vocab) + 1)

    base = len(vocab) + 1
    ngram_counts: dict[int, int] = {}
    context_counts: dict[int, int] = {}
    for seq in sequences:
        ids = [vocab[t] for t in seq]
        padded = [_BOS_ID] * (order - 1) + ids
        for i in range(len(ids)):
            ctx_key = 0
            for j in range(i, i + order - 1):
                ctx_key = ctx_key * base + padded[j]
            ngram_key = ctx_key * base + padded[i + order - 1]
            ngram_counts[ngram_key] = ngram_counts.get(ngram_key, 0) + 1
            context_counts[ctx_key] = context_counts.get(ctx_key, 0) + 1

    return NGramModel(order, k, vocab, ngram_counts, context_counts, kernel=kernel)
