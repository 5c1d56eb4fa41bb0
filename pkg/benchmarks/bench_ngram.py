#!/usr/bin/env python3
"""Benchmark the pure-Python vs compiled n-gram scoring kernels on a
synthetic candidate-scoring workload (the hot loop of a full corpus run:
every relation scored once per connective in the inventory).

Usage: python3 benchmarks/bench_ngram.py [--relations 300] [--order 2]
"""

import argparse
import random
import time

from explicitation.candidates import default_inventory
from explicitation.ngram import HAVE_COMPILED_KERNEL, train_ngram


def synthetic_corpus(rng, vocab_size=2000, sentences=3000, length=22):
    words = [f"w{i}" for i in range(vocab_size)]
    return "\n".join(" ".join(rng.choice(words) for _ in range(length))
                     for _ in range(sentences))


def synthetic_candidates(rng, inventory, relations, arg_len=14):
    words = [f"w{i}" for i in range(2000)] + ["oov1", "oov2"]
    cands = []
    for _ in range(relations):
        arg1 = [rng.choice(words) for _ in range(arg_len)]
        arg2 = [rng.choice(words) for _ in range(arg_len)]
        cands.append([arg1 + [conn] + arg2 for conn in inventory])
    return cands


def time_kernel(model, candidate_sets):
    started = time.perf_counter()
    checksum = 0.0
    for cand_set in candidate_sets:
        for tokens in cand_set:
            checksum += model.sequence_log_prob(tokens)
    return time.perf_counter() - started, checksum


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--relations", type=int, default=300)
    parser.add_argument("--order", type=int, default=2)
    parser.add_argument("--seed", type=int, default=9)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    inventory = list(default_inventory())
    print(f"training order-{args.order} model on synthetic corpus ...")
    pure = train_ngram(synthetic_corpus(rng), order=args.order, k=1.0, kernel="pure")
    cands = synthetic_candidates(rng, inventory, args.relations)
    total = args.relations * len(inventory)
    print(f"scoring {args.relations} relations x {len(inventory)} connectives "
          f"= {total} candidates\n")

    pure_time, pure_sum = time_kernel(pure, cands)
    print(f"  pure python   {pure_time:8.3f}s   "
          f"{total / pure_time:10.0f} candidates/s")

    if not HAVE_COMPILED_KERNEL:
        print("  compiled kernel not built; install with Cython available to compare")
        return

    fast = pure.with_kernel("compiled")
    fast_time, fast_sum = time_kernel(fast, cands)
    print(f"  compiled      {fast_time:8.3f}s   "
          f"{total / fast_time:10.0f} candidates/s")
    print(f"\n  speedup {pure_time / fast_time:.1f}x   "
          f"(checksum delta {abs(pure_sum - fast_sum):.2e})")


if __name__ == "__main__":
    main()
