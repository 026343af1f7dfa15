# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled collapsed-Gibbs sweep.

Must stay arithmetically identical (same operation order) to the pure-Python
kernel in ``_gibbs_py.py``; the test suite asserts bitwise-equal assignments.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def gibbs_sweep(
    cnp.int32_t[::1] word_ids,
    cnp.int32_t[::1] doc_ids,
    cnp.int32_t[::1] z,
    cnp.int64_t[:, ::1] n_dk,
    cnp.int64_t[:, ::1] n_kw,
    cnp.int64_t[::1] n_k,
    double alpha,
    double beta,
    double[::1] uniforms,
):
    """One full sweep over all tokens, updating assignments and counts in
    place. ``uniforms`` supplies one U(0,1) draw per token."""
    cdef Py_ssize_t t, n_tokens = word_ids.shape[0]
    cdef Py_ssize_t k, n_topics = n_kw.shape[0]
    cdef double beta_v = beta * n_kw.shape[1]
    cdef Py_ssize_t w, d, k_old, k_new
    cdef double total, u, acc, p
    cdef double[::1] probs = np.empty(n_topics, dtype=np.float64)

    for t in range(n_tokens):
        w = word_ids[t]
        d = doc_ids[t]
        k_old = z[t]
        n_dk[d, k_old] -= 1
        n_kw[k_old, w] -= 1
        n_k[k_old] -= 1

        total = 0.0
        for k in range(n_topics):
            p = (n_kw[k, w] + beta) * (n_dk[d, k] + alpha) / (n_k[k] + beta_v)
            probs[k] = p
            total += p

        u = uniforms[t] * total
        acc = 0.0
        k_new = n_topics - 1
        for k in range(n_topics):
            acc += probs[k]
            if u < acc:
                k_new = k
                break

        z[t] = <cnp.int32_t> k_new
        n_dk[d, k_new] += 1
        n_kw[k_new, w] += 1
        n_k[k_new] += 1
