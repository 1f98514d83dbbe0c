"""Pure-numpy E-step sweep, the fallback when the compiled kernel is absent."""

import math

import numpy as np


def diag_weight_matrix(source_len: int, target_len: int, tension: float,
                       null_prior: float) -> np.ndarray:
    """Position prior with mass `null_prior` on NULL and the rest spread
    over source positions, concentrated near the diagonal; columns sum to 1.

    Row 0 is NULL, rows 1..source_len are source positions (1-based in the
    distance term so first aligns with first, last with last).
    """
    i = np.arange(1, source_len + 1, dtype=np.float64)[:, None] / source_len
    j = np.arange(1, target_len + 1, dtype=np.float64)[None, :] / target_len
    real = np.exp(-tension * np.abs(i - j))
    real *= (1.0 - null_prior) / real.sum(axis=0, keepdims=True)
    return np.vstack([np.full((1, target_len), null_prior), real])


def em_sweep(probs, idx_flat, pair_offsets, src_lens, tgt_lens, counts,
             tension=0.0, null_prior=0.08):
    """One E-step over the encoded corpus.

    Adds posterior fractional counts into `counts` (caller zeroes it) and
    returns the corpus log-likelihood under `probs`. Pairs are laid out in
    idx_flat as row-major (source incl. NULL) x (target) parameter indices.
    """
    ll = 0.0
    n_pairs = src_lens.shape[0]
    for p in range(n_pairs):
        start = pair_offsets[p]
        m = int(src_lens[p])
        n = int(tgt_lens[p])
        idx = idx_flat[start:start + m * n].reshape(m, n)
        scores = probs[idx]
        if tension > 0.0:
            scores = scores * diag_weight_matrix(m - 1, n, tension, null_prior)
            denom = scores.sum(axis=0)
            ll += float(np.log(denom).sum())
        else:
            denom = scores.sum(axis=0)
            ll += float(np.log(denom).sum()) - n * math.log(m)
        np.add.at(counts, idx, scores / denom)
    return ll
