"""Time the compiled E-step kernel against the numpy fallback.

Runs both kernels on the same encoded corpus, checks they agree, and prints
per-sweep timings. Usage: python benchmarks/bench_em.py [--pairs N]
[--vocab N] [--iterations N] [--tension T]
"""

import argparse
import time

import numpy as np

from mtadapt.aligner import _normalize_rows, encode_corpus
from mtadapt.aligner.kernels import available_kernels
from mtadapt.fixtures import ToyLanguageSpec, generate


def run(kernel, layout, iterations: int, tension: float):
    probs = np.full(layout.n_params, 1.0 / layout.n_tgt)
    lls = []
    best = float("inf")
    for _ in range(iterations):
        counts = np.zeros(layout.n_params)
        started = time.perf_counter()
        ll = kernel(probs, layout.idx_flat, layout.pair_offsets,
                    layout.src_lens, layout.tgt_lens, counts, tension, 0.08)
        best = min(best, time.perf_counter() - started)
        lls.append(ll)
        probs = _normalize_rows(counts, layout.param_src, layout.n_src)
    return probs, lls, best


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--pairs", type=int, default=20000)
    parser.add_argument("--vocab", type=int, default=500)
    parser.add_argument("--iterations", type=int, default=5)
    parser.add_argument("--tension", type=float, default=0.0)
    args = parser.parse_args()

    spec = ToyLanguageSpec(vocab_size=args.vocab, n_pairs=args.pairs,
                           length_range=(6, 18), seed=11)
    corpus = generate(spec)
    layout, _, _ = encode_corpus(corpus)
    tokens = int(layout.tgt_lens.sum())
    print(f"{len(corpus)} pairs, {tokens} target tokens, "
          f"{layout.n_params} parameters")

    kernels = available_kernels()
    results = {}
    for name, kernel in sorted(kernels.items()):
        probs, lls, best = run(kernel, layout, args.iterations, args.tension)
        results[name] = (probs, lls, best)
        print(f"{name:>8}: {best:.4f}s per sweep "
              f"({tokens / best / 1e6:.2f}M target tokens/s), "
              f"final LL {lls[-1]:.3f}")

    if len(results) == 2:
        (p1, l1, t1), (p2, l2, t2) = results["cython"], results["numpy"]
        assert np.allclose(p1, p2, rtol=1e-10), "kernels disagree on probabilities"
        assert np.allclose(l1, l2, rtol=1e-10), "kernels disagree on log-likelihood"
        print(f"kernels agree; speedup {t2 / t1:.1f}x")
    else:
        print("compiled kernel not built; timed the numpy fallback only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
