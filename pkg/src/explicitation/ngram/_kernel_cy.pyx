# cython: boundscheck=False, wraparound=False
# distutils: language = c++
"""Compiled n-gram scoring kernel. Mirror of _kernel_py.PureKernel."""

from libc.math cimport log
from libcpp.unordered_map cimport unordered_map


cdef class CompiledKernel:
    cdef unordered_map[unsigned long long, double] ngrams
    cdef unordered_map[unsigned long long, double] contexts
    cdef int order
    cdef double k
    cdef unsigned long long base
    cdef double kv

    def __init__(self, int order, double k, long long vocab_size,
                 unsigned long long base, dict ngram_counts, dict context_counts):
        self.order = order
        self.k = k
        self.base = base
        self.kv = k * vocab_size
        for key, cnt in ngram_counts.items():
            self.ngrams[<unsigned long long> key] = <double> cnt
        for key, cnt in context_counts.items():
            self.contexts[<unsigned long long> key] = <double> cnt

    cpdef double sequence_log_prob(self, long long[::1] ids):
        cdef Py_ssize_t n = ids.shape[0]
        cdef Py_ssize_t i, j
        cdef unsigned long long ctx_key, ngram_key
        cdef double cnt, ctx_cnt, total = 0.0
        for i in range(n):
            ctx_key = 0
            for j in range(i - self.order + 1, i):
                ctx_key = ctx_key * self.base + (<unsigned long long> ids[j] if j >= 0 else 0ULL)
            ngram_key = ctx_key * self.base + <unsigned long long> ids[i]
            cnt = self.ngrams[ngram_key] if self.ngrams.count(ngram_key) else 0.0
            ctx_cnt = self.contexts[ctx_key] if self.contexts.count(ctx_key) else 0.0
            total += log(cnt + self.k) - log(ctx_cnt + self.kv)
        return total
