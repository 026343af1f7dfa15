#!/usr/bin/env python3
"""Benchmark the compiled Gibbs-sweep kernel against the pure-Python
fallback and verify they produce bitwise-identical models.

Usage: python benchmarks/bench_gibbs.py [--docs 150] [--iterations 100]
"""

import argparse
import time

import numpy as np

from lexgraph import _gibbs_py, corpus, topics
from lexgraph.resources import default_stopwords


def fit(tokenized, k, iterations, seed, kernel):
    original = topics._gibbs_sweep
    topics._gibbs_sweep = kernel
    try:
        start = time.perf_counter()
        model = topics.fit_lda(tokenized, k=k, iterations=iterations, seed=seed)
        elapsed = time.perf_counter() - start
    finally:
        topics._gibbs_sweep = original
    return model, elapsed


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=150)
    parser.add_argument("--iterations", type=int, default=100)
    parser.add_argument("--topics", type=int, default=3)
    parser.add_argument("--doc-length", type=int, default=60)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    config = corpus.SynthConfig(
        n_docs=args.docs,
        n_topics=args.topics,
        vocab_size=300,
        doc_length=args.doc_length,
        seed=args.seed,
    )
    docs, _ = corpus.synth_corpus(config)
    stops = default_stopwords()
    tokenized = [(d.id, corpus.tokenize(d.body, stops).stems()) for d in docs]
    n_tokens = sum(len(stems) for _, stems in tokenized)
    updates = n_tokens * args.iterations
    print(f"{args.docs} docs, {n_tokens} tokens, {args.iterations} sweeps")

    try:
        from lexgraph import _gibbs

        kernels = [("cython", _gibbs.gibbs_sweep), ("python", _gibbs_py.gibbs_sweep)]
    except ImportError:
        print("compiled kernel not built; benchmarking the fallback only")
        kernels = [("python", _gibbs_py.gibbs_sweep)]

    results = {}
    for name, kernel in kernels:
        model, elapsed = fit(tokenized, args.topics, args.iterations, args.seed, kernel)
        results[name] = (model, elapsed)
        print(f"  {name:>7}: {elapsed:8.3f}s  ({updates / elapsed / 1e6:7.2f} M token-updates/s)")

    if len(results) == 2:
        fast, slow = results["cython"][0], results["python"][0]
        identical = (
            np.array_equal(fast.assignments, slow.assignments)
            and fast.phi.tobytes() == slow.phi.tobytes()
            and fast.theta.tobytes() == slow.theta.tobytes()
        )
        speedup = results["python"][1] / results["cython"][1]
        print(f"  bitwise-identical output: {identical}")
        print(f"  speedup: {speedup:.1f}x")
        if not identical:
            raise SystemExit("kernel outputs diverged")


if __name__ == "__main__":
    main()
