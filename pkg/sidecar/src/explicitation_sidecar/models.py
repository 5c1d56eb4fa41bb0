"""Model backends: masked and causal scorers over Hugging Face models, a
sentence-pair classifier, and seeded tiny variants of all three that build
offline for tests and protocol development.

Documented defaults (the upstream papers leave these open):
  - causal candidates are scored without begin/end-of-text wrapping;
  - over-long inputs are truncated from the outer ends (arg1 loses its
    head, arg2 its tail), keeping the material adjacent to the connective;
  - connectives that tokenize to several subwords are scored as the sum of
    per-subword log-probabilities over that many mask slots and flagged in
    the response ("multi_subword": "error" rejects them instead).
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import torch
import torch.nn.functional as F

from .joining import join_causal, masked_arg2, strip_trailing_terminal

TINY = "tiny"


class ScoringError(ValueError):
    """Request-level scoring failure; becomes an error response."""


@dataclass
class BackendSpec:
    family: str  # "masked" | "causal"
    model: str = TINY
    device: str = "cpu"
    max_length: int = 512
    multi_subword: str = "sum"  # or "error"
    seed: int = 12345

    def __post_init__(self):
        if self.family not in ("masked", "causal"):
            raise ValueError(f"family must be masked or causal, got {self.family!r}")
        if self.multi_subword not in ("sum", "error"):
            raise ValueError("multi_subword must be 'sum' or 'error'")


def _tiny_tokenizer():
    from transformers import BertTokenizer

    ref = resources.files("explicitation_sidecar.data").joinpath("tiny_vocab.txt")
    with resources.as_file(ref) as path:
        return BertTokenizer(str(path), do_lower_case=True)


def _truncate_outer(left: list, right: list, budget: int) -> tuple[list, list]:
    """Drop tokens from arg1's head and arg2's tail until the pair fits."""
    if budget < 0:
        raise ScoringError(f"input exceeds the maximum length by {-budget} "
                           "tokens even after truncation")
    left, right = list(left), list(right)
    while len(left) + len(right) > budget:
        if len(left) >= len(right):
            left.pop(0)
        else:
            right.pop()
    return left, right


class MaskedScorer:
    """log P(connective | arg1 [SEP] [MASK]... arg2 [SEP]) under a masked
    bidirectional model, one mask slot per connective subword."""

    def __init__(self, model, tokenizer, max_length: int = 512,
                 multi_subword: str = "sum"):
        self.model = model.eval()
        self.tokenizer = tokenizer
        self.max_length = max_length
        self.multi_subword = multi_subword

    def _piece_ids(self, text: str) -> list[int]:
        return self.tokenizer.convert_tokens_to_ids(self.tokenizer.tokenize(text))

    def score(self, arg1: str, arg2: str, connectives: list[str]):
        if not connectives:
            raise ScoringError("no connectives to score")
        tok = self.tokenizer
        arg1_ids = self._piece_ids(arg1.strip())
        arg2_ids = self._piece_ids(masked_arg2(arg2))

        pieces = {}
        for conn in connectives:
            ids = self._piece_ids(conn)
            if not ids:
                raise ScoringError(f"connective {conn!r} tokenizes to nothing")
            if len(ids) > 1 and self.multi_subword == "error":
                raise ScoringError(f"connective {conn!r} tokenizes to "
                                   f"{len(ids)} subwords")
            pieces[conn] = ids

        scores: dict[str, float] = {}
        for width in sorted({len(ids) for ids in pieces.values()}):
            budget = self.max_length - 3 - width  # CLS + 2 SEP + mask slots
            left, right = _truncate_outer(arg1_ids, arg2_ids, budget)
            input_ids = ([tok.cls_token_id] + left + [tok.sep_token_id]
                         + [tok.mask_token_id] * width + right + [tok.sep_token_id])
            slot_start = 2 + len(left)
            with torch.no_grad():
                logits = self.model(input_ids=torch.tensor([input_ids])).logits[0]
            log_probs = F.log_softmax(logits[slot_start:slot_start + width], dim=-1)
            for conn, ids in pieces.items():
                if len(ids) == width:
                    scores[conn] = float(sum(log_probs[j, pid]
                                             for j, pid in enumerate(ids)))

        multi = [conn for conn in connectives if len(pieces[conn]) > 1]
        return [scores[conn] for conn in connectives], multi


class CausalScorer:
    """Full-sequence log-likelihood of each joined candidate under a
    left-to-right model. No wrapping tokens; the first token is
    unconditioned and contributes nothing."""

    def __init__(self, model, tokenizer, max_length: int = 512):
        self.model = model.eval()
        self.tokenizer = tokenizer
        self.max_length = max_length

    def _encode(self, text: str, mid: bool) -> list[int]:
        # a leading space keeps byte-BPE tokenizers from gluing the part
        # onto the previous word; wordpiece tokenizers ignore it
        return self.tokenizer.encode((" " if mid else "") + text,
                                     add_special_tokens=False)

    def score(self, arg1: str, arg2: str, connectives: list[str]) -> list[float]:
        if not connectives:
            raise ScoringError("no connectives to score")
        left_ids = self._encode(strip_trailing_terminal(arg1.strip()), mid=False)
        right_ids = self._encode(masked_arg2(arg2), mid=True)

        rows = []
        for conn in connectives:
            conn_ids = self._encode(conn, mid=True)
            if not conn_ids:
                raise ScoringError(f"connective {conn!r} tokenizes to nothing")
            left, right = _truncate_outer(left_ids, right_ids,
                                          self.max_length - len(conn_ids))
            rows.append(left + conn_ids + right)
        return self._batch_log_likelihood(rows)

    def _batch_log_likelihood(self, rows: list[list[int]]) -> list[float]:
        width = max(len(r) for r in rows)
        if width < 2:
            return [0.0] * len(rows)
        input_ids = torch.zeros(len(rows), width, dtype=torch.long)
        attention = torch.zeros(len(rows), width, dtype=torch.long)
        for i, row in enumerate(rows):
            input_ids[i, :len(row)] = torch.tensor(row)
            attention[i, :len(row)] = 1
        with torch.no_grad():
            logits = self.model(input_ids=input_ids, attention_mask=attention).logits
        log_probs = F.log_softmax(logits[:, :-1], dim=-1)
        targets = input_ids[:, 1:].unsqueeze(-1)
        token_scores = log_probs.gather(-1, targets).squeeze(-1) * attention[:, 1:]
        return [float(token_scores[i, :max(len(row) - 1, 0)].sum())
                for i, row in enumerate(rows)]

    def joined_text(self, arg1: str, connective: str, arg2: str) -> str:
        return join_causal(arg1, connective, arg2)


class PairClassifier:
    """P(label | connective, arg1, arg2) from a fine-tuned sentence-pair
    model; the connective is prepended to the second argument."""

    def __init__(self, model, tokenizer, labels: list[str], level: int,
                 max_length: int = 256):
        if model.config.num_labels != len(labels):
            raise ValueError(f"model has {model.config.num_labels} outputs for "
                             f"{len(labels)} labels")
        self.model = model.eval()
        self.tokenizer = tokenizer
        self.labels = list(labels)
        self.level = level
        self.max_length = max_length

    def classify(self, connective: str, arg1: str, arg2: str, level: int) -> list[float]:
        if level != self.level:
            raise ScoringError(f"classifier serves level {self.level}, "
                               f"request asked for level {level}")
        encoded = self.tokenizer(arg1, text_pair=f"{connective} {arg2}",
                                 truncation=True, max_length=self.max_length,
                                 return_tensors="pt")
        with torch.no_grad():
            logits = self.model(**encoded).logits[0]
        return [float(p) for p in F.softmax(logits, dim=-1)]


# --- constructors ------------------------------------------------------------

def _tiny_bert_config(tokenizer, **extra):
    from transformers import BertConfig

    return BertConfig(vocab_size=tokenizer.vocab_size, hidden_size=32,
                      num_hidden_layers=2, num_attention_heads=2,
                      intermediate_size=64, max_position_embeddings=128,
                      pad_token_id=tokenizer.pad_token_id, **extra)


def build_masked(spec: BackendSpec) -> MaskedScorer:
    if spec.model == TINY:
        from transformers import BertForMaskedLM

        tokenizer = _tiny_tokenizer()
        torch.manual_seed(spec.seed)
        model = BertForMaskedLM(_tiny_bert_config(tokenizer))
        max_length = min(spec.max_length, 128)
    else:
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(spec.model)
        model = AutoModelForMaskedLM.from_pretrained(spec.model)
        max_length = spec.max_length
    return MaskedScorer(model.to(spec.device), tokenizer, max_length,
                        spec.multi_subword)


def build_causal(spec: BackendSpec) -> CausalScorer:
    if spec.model == TINY:
        from transformers import GPT2Config, GPT2LMHeadModel

        tokenizer = _tiny_tokenizer()
        torch.manual_seed(spec.seed)
        config = GPT2Config(vocab_size=tokenizer.vocab_size, n_embd=32,
                            n_layer=2, n_head=2, n_positions=128,
                            bos_token_id=None, eos_token_id=None)
        model = GPT2LMHeadModel(config)
        max_length = min(spec.max_length, 128)
    else:
        from transformers import AutoModelForCausalLM, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(spec.model)
        model = AutoModelForCausalLM.from_pretrained(spec.model)
        max_length = spec.max_length
    return CausalScorer(model.to(spec.device), tokenizer, max_length)


def build_tiny_classifier(labels: list[str], level: int, seed: int = 12345) -> PairClassifier:
    from transformers import BertForSequenceClassification

    tokenizer = _tiny_tokenizer()
    torch.manual_seed(seed)
    model = BertForSequenceClassification(
        _tiny_bert_config(tokenizer, num_labels=len(labels)))
    return PairClassifier(model, tokenizer, labels, level, max_length=128)


def load_classifier(path: str, labels: list[str], level: int,
                    max_length: int = 256) -> PairClassifier:
    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(path)
    model = AutoModelForSequenceClassification.from_pretrained(path)
    return PairClassifier(model, tokenizer, labels, level, max_length)
