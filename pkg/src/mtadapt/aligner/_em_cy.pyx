# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled E-step sweep; arithmetic mirrors the numpy fallback."""

from libc.math cimport exp, fabs, log

import numpy as np


def em_sweep(double[::1] probs, int[::1] idx_flat, long long[::1] pair_offsets,
             int[::1] src_lens, int[::1] tgt_lens, double[::1] counts,
             double tension=0.0, double null_prior=0.08):
    cdef Py_ssize_t n_pairs = src_lens.shape[0]
    cdef Py_ssize_t p, i, j, m, n, base
    cdef double ll = 0.0
    cdef double denom, z, w, sl, tl
    cdef Py_ssize_t max_n = 0
    for p in range(n_pairs):
        if tgt_lens[p] > max_n:
            max_n = tgt_lens[p]
    if max_n == 0:
        return ll
    cdef double[::1] denoms = np.empty(max_n, dtype=np.float64)
    cdef double[::1] zbuf = np.empty(max_n, dtype=np.float64)

    for p in range(n_pairs):
        base = pair_offsets[p]
        m = src_lens[p]
        n = tgt_lens[p]
        if tension > 0.0:
            sl = m - 1.0
            tl = n
            # per-column normalizer of the real-position prior
            for j in range(n):
                z = 0.0
                for i in range(1, m):
                    z += exp(-tension * fabs(i / sl - (j + 1.0) / tl))
                zbuf[j] = z
            for j in range(n):
                denom = null_prior * probs[idx_flat[base + j]]
                for i in range(1, m):
                    w = (1.0 - null_prior) * exp(
                        -tension * fabs(i / sl - (j + 1.0) / tl)) / zbuf[j]
                    denom += w * probs[idx_flat[base + i * n + j]]
                denoms[j] = denom
                ll += log(denom)
            for i in range(m):
                for j in range(n):
                    if i == 0:
                        w = null_prior
                    else:
                        w = (1.0 - null_prior) * exp(
                            -tension * fabs(i / sl - (j + 1.0) / tl)) / zbuf[j]
                    counts[idx_flat[base + i * n + j]] += (
                        w * probs[idx_flat[base + i * n + j]] / denoms[j])
        else:
            for j in range(n):
                denom = 0.0
                for i in range(m):
                    denom += probs[idx_flat[base + i * n + j]]
                denoms[j] = denom
                ll += log(denom)
            ll -= n * log(<double> m)
            for i in range(m):
                for j in range(n):
                    counts[idx_flat[base + i * n + j]] += (
                        probs[idx_flat[base + i * n + j]] / denoms[j])
    return ll
