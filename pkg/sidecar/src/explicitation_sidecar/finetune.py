"""Fine-tune the explicit-relation sentence-pair classifier.

Consumes the toolkit's canonical corpus JSON Lines (explicit relations
with their senses) and trains a sequence classifier whose input is
``arg1 [SEP] connective arg2``. Defaults: ten epochs, batch size 16,
learning rate 5e-6, Adam with fixed weight decay, 1000 linear warm-up
steps, dev evaluation every 500 steps keeping the best checkpoint.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.utils.data import DataLoader, Dataset


@dataclass
class Example:
    arg1: str
    second: str  # connective + arg2
    label: int


def read_label_file(path: str) -> list[str]:
    labels = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            labels.append(line)
    return labels


def label_at_level(sense: str, level: int) -> str | None:
    parts = sense.split(".")
    if level == 1:
        return parts[0]
    if len(parts) < 2:
        return None
    return f"{parts[0]}.{parts[1]}"


def examples_from_jsonl(path: str, labels: list[str], level: int) -> list[Example]:
    """One example per (relation, usable sense); relations outside the
    label set contribute nothing."""
    index = {label: i for i, label in enumerate(labels)}
    examples = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            if doc.get("kind") != "Explicit":
                continue
            second = f"{doc['connective']} {doc['arg2']}"
            for sense in doc["senses"]:
                label = label_at_level(sense, level)
                if label in index:
                    examples.append(Example(doc["arg1"], second, index[label]))
    return examples


class PairDataset(Dataset):
    def __init__(self, examples, tokenizer, max_length):
        self.examples = examples
        self.tokenizer = tokenizer
        self.max_length = max_length

    def __len__(self):
        return len(self.examples)

    def __getitem__(self, i):
        ex = self.examples[i]
        encoded = self.tokenizer(ex.arg1, text_pair=ex.second, truncation=True,
                                 max_length=self.max_length, padding="max_length",
                                 return_tensors="pt")
        item = {k: v.squeeze(0) for k, v in encoded.items()}
        item["labels"] = torch.tensor(ex.label)
        return item


def evaluate(model, loader, device) -> float:
    model.eval()
    hits = total = 0
    with torch.no_grad():
        for batch in loader:
            batch = {k: v.to(device) for k, v in batch.items()}
            logits = model(**{k: v for k, v in batch.items() if k != "labels"}).logits
            hits += int((logits.argmax(-1) == batch["labels"]).sum())
            total += len(batch["labels"])
    model.train()
    return hits / max(total, 1)


def train_classifier(model, tokenizer, train_examples, dev_examples=None, *,
                     epochs=10, batch_size=16, lr=5e-6, warmup_steps=1000,
                     eval_steps=500, max_length=256, device="cpu", seed=42,
                     log=print):
    """Returns (model, best_dev_accuracy). The best dev checkpoint's state
    is loaded back into the model before returning."""
    torch.manual_seed(seed)
    rng = random.Random(seed)
    train_examples = list(train_examples)
    rng.shuffle(train_examples)

    train_loader = DataLoader(PairDataset(train_examples, tokenizer, max_length),
                              batch_size=batch_size, shuffle=False)
    dev_loader = None
    if dev_examples:
        dev_loader = DataLoader(PairDataset(dev_examples, tokenizer, max_length),
                                batch_size=batch_size)

    model.to(device).train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=lr)
    total_steps = max(len(train_loader) * epochs, 1)

    def warmup(step):
        if warmup_steps and step < warmup_steps:
            return (step + 1) / warmup_steps
        return 1.0

    scheduler = torch.optim.lr_scheduler.LambdaLR(optimizer, warmup)

    best_acc = -1.0
    best_state = None
    step = 0
    for epoch in range(epochs):
        for batch in train_loader:
            batch = {k: v.to(device) for k, v in batch.items()}
            loss = model(**batch).loss
            loss.backward()
            optimizer.step()
            scheduler.step()
            optimizer.zero_grad()
            step += 1
            if dev_loader is not None and step % eval_steps == 0:
                acc = evaluate(model, dev_loader, device)
                log(f"step {step}: dev accuracy {acc:.4f}")
                if acc > best_acc:
                    best_acc = acc
                    best_state = {k: v.detach().clone()
                                  for k, v in model.state_dict().items()}
        log(f"epoch {epoch + 1}/{epochs} done ({step} steps)")

    if dev_loader is not None:
        acc = evaluate(model, dev_loader, device)
        if acc > best_acc:
            best_acc = acc
            best_state = None  # current weights already are the best
        if best_state is not None:
            model.load_state_dict(best_state)
    return model, best_acc


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--train", required=True, help="explicit relations (JSONL)")
    parser.add_argument("--dev", help="dev relations (JSONL)")
    parser.add_argument("--labels", required=True, help="label file")
    parser.add_argument("--level", type=int, default=1, choices=(1, 2))
    parser.add_argument("--model", default="bert-large-uncased")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--batch-size", type=int, default=16)
    parser.add_argument("--lr", type=float, default=5e-6)
    parser.add_argument("--warmup-steps", type=int, default=1000)
    parser.add_argument("--eval-steps", type=int, default=500)
    parser.add_argument("--max-length", type=int, default=256)
    parser.add_argument("--device", default="cuda" if torch.cuda.is_available() else "cpu")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args(argv)

    from transformers import AutoModelForSequenceClassification, AutoTokenizer

    labels = read_label_file(args.labels)
    tokenizer = AutoTokenizer.from_pretrained(args.model)
    model = AutoModelForSequenceClassification.from_pretrained(
        args.model, num_labels=len(labels))

    train_examples = examples_from_jsonl(args.train, labels, args.level)
    dev_examples = examples_from_jsonl(args.dev, labels, args.level) if args.dev else None
    print(f"{len(train_examples)} training examples "
          f"({len(dev_examples or [])} dev)", file=sys.stderr)

    model, best = train_classifier(
        model, tokenizer, train_examples, dev_examples, epochs=args.epochs,
        batch_size=args.batch_size, lr=args.lr, warmup_steps=args.warmup_steps,
        eval_steps=args.eval_steps, max_length=args.max_length,
        device=args.device, seed=args.seed,
        log=lambda msg: print(msg, file=sys.stderr))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out)
    tokenizer.save_pretrained(out)
    (out / "labels.txt").write_text("\n".join(labels) + "\n", encoding="utf-8")
    if best >= 0:
        print(f"best dev accuracy {best:.4f}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
