"""Serve the scoring/classification protocol over stdio or TCP.

Examples:
    explicitation-sidecar --family masked --model bert-large-uncased
    explicitation-sidecar --family causal --model gpt2 --transport tcp --port 7860
    explicitation-sidecar --family masked --model tiny   # offline test model
"""

from __future__ import annotations

import argparse
import json
import socketserver
import sys

from .models import (
    BackendSpec, build_causal, build_masked, build_tiny_classifier,
    load_classifier,
)
from .protocol import Service

DEFAULT_LABELS = ("Temporal", "Contingency", "Comparison", "Expansion")


def build_service(args) -> Service:
    spec = BackendSpec(family=args.family, model=args.model, device=args.device,
                       max_length=args.max_length, multi_subword=args.multi_subword,
                       seed=args.seed)
    service = Service()
    if spec.family == "masked":
        service.masked = build_masked(spec)
    else:
        service.causal = build_causal(spec)

    if args.classifier:
        labels = _read_labels(args.labels) if args.labels else list(DEFAULT_LABELS)
        if args.classifier == "tiny":
            service.classifier = build_tiny_classifier(labels, args.level, args.seed)
        else:
            service.classifier = load_classifier(args.classifier, labels, args.level)
    return service


def _read_labels(path: str) -> list[str]:
    labels = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                labels.append(line)
    if not labels:
        raise SystemExit(f"label file {path} is empty")
    return labels


def serve_stdio(service: Service) -> None:
    for line in sys.stdin:
        if not line.strip():
            continue
        response = service.handle_line(line)
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()


def serve_tcp(service: Service, host: str, port: int) -> None:
    class Handler(socketserver.StreamRequestHandler):
        def handle(self):
            for raw in self.rfile:
                line = raw.decode("utf-8")
                if not line.strip():
                    continue
                response = service.handle_line(line)
                self.wfile.write((json.dumps(response) + "\n").encode("utf-8"))
                self.wfile.flush()

    with socketserver.TCPServer((host, port), Handler) as server:
        bound = server.server_address
        print(f"listening on {bound[0]}:{bound[1]}", file=sys.stderr, flush=True)
        server.serve_forever()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="explicitation-sidecar",
        description="Language-model scoring service speaking JSON Lines.")
    parser.add_argument("--family", choices=("masked", "causal"), required=True,
                        help="model family this instance serves")
    parser.add_argument("--model", default="tiny",
                        help="Hugging Face model name/path, or 'tiny' for the "
                             "seeded offline test model")
    parser.add_argument("--classifier", default=None,
                        help="path to a fine-tuned sentence-pair classifier, "
                             "or 'tiny'")
    parser.add_argument("--labels", default=None,
                        help="label file for the classifier (one per line)")
    parser.add_argument("--level", type=int, default=1, choices=(1, 2),
                        help="sense level the classifier serves")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-length", type=int, default=512)
    parser.add_argument("--multi-subword", choices=("sum", "error"), default="sum",
                        help="how to score connectives spanning several subwords")
    parser.add_argument("--seed", type=int, default=12345,
                        help="weight seed for the tiny test models")
    parser.add_argument("--transport", choices=("stdio", "tcp"), default="stdio")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=0,
                        help="TCP port (0 picks a free one, printed to stderr)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        service = build_service(args)
    except Exception as exc:  # model load failures must exit non-zero
        print(f"explicitation-sidecar: cannot start: {exc}", file=sys.stderr)
        return 1
    if args.transport == "stdio":
        serve_stdio(service)
    else:
        serve_tcp(service, args.host, args.port)
    return 0


if __name__ == "__main__":
    sys.exit(main())
