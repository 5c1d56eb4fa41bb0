"""Pure-Python n-gram scoring kernel. Semantics must stay in lockstep with
the Cython twin in _kernel_cy.pyx; the parity test compares them."""

from math import log


class PureKernel:
    """Scores token-id sequences under add-k smoothing.

    N-grams are packed into single integers: token ids start at 1, id 0 is
    the begin-of-sequence pad, and a window (t1..tn) packs to
    ``((t1*base + t2)*base + ...)`` with ``base = vocab_size + 1``.
    """

    def __init__(self, order, k, vocab_size, base, ngram_counts, context_counts):
        self.order = order
        self.k = k
        self.base = base
        self.kv = k * vocab_size
        self.ngram_counts = ngram_counts
        self.context_counts = context_counts

    def sequence_log_prob(self, ids):
        order = self.order
        base = self.base
        ngrams = self.ngram_counts
        contexts = self.context_counts
        total = 0.0
        for i, tid in enumerate(ids):
            ctx_key = 0
            for j in range(i - order + 1, i):
                ctx_key = ctx_key * base + (ids[j] if j >= 0 else 0)
            ngram_key = ctx_key * base + tid
            cnt = ngrams.get(ngram_key, 0)
            ctx_cnt = contexts.get(ctx_key, 0)
            total += log(cnt + self.k) - log(ctx_cnt + self.kv)
        return total
