"""Add-k smoothed n-gram language model with a compiled scoring kernel.

The per-token loop over packed n-gram keys is the hot path when scoring
65 candidates per relation over a whole corpus. A Cython kernel is built
at install time when possible; import falls back to the pure-Python twin
with identical semantics.
"""

from ._kernel_py import PureKernel

try:
    from ._kernel_cy import CompiledKernel
    HAVE_COMPILED_KERNEL = True
except ImportError:
    CompiledKernel = None
    HAVE_COMPILED_KERNEL = False

from .model import NGramModel, sequences_from_text, tokenize, train_ngram

__all__ = [
    "NGramModel",
    "PureKernel",
    "CompiledKernel",
    "HAVE_COMPILED_KERNEL",
    "tokenize",
    "sequences_from_text",
    "train_ngram",
]
