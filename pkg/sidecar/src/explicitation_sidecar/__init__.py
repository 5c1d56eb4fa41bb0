"""JSON Lines service exposing pretrained masked and causal language-model
scoring, plus an optional fine-tuned explicit-relation classifier, to the
explicitation toolkit."""

__version__ = "0.1.0"
