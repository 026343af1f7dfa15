"""Pure-Python collapsed-Gibbs sweep, the fallback for the compiled kernel.

Operation order matches ``_gibbs.pyx`` exactly so both kernels produce
bitwise-identical assignments from the same uniform draws (Python floats and
C doubles share IEEE-754 semantics).
"""

import numpy as np


def gibbs_sweep(word_ids, doc_ids, z, n_dk, n_kw, n_k, alpha, beta, uniforms):
    """One full sweep over all tokens, updating assignments and counts in
    place. ``uniforms`` supplies one U(0,1) draw per token."""
    n_topics, vocab_size = n_kw.shape
    beta_v = beta * vocab_size

    # plain lists: scalar indexing on ndarrays is the bottleneck here
    words = word_ids.tolist()
    docs = doc_ids.tolist()
    assign = z.tolist()
    dk = n_dk.tolist()
    kw = n_kw.tolist()
    kt = n_k.tolist()
    u_list = uniforms.tolist()
    probs = [0.0] * n_topics
    topics = range(n_topics)

    for t, w in enumerate(words):
        d = docs[t]
        k_old = assign[t]
        row_d = dk[d]
        row_d[k_old] -= 1
        kw[k_old][w] -= 1
        kt[k_old] -= 1

        total = 0.0
        for k in topics:
            p = (kw[k][w] + beta) * (row_d[k] + alpha) / (kt[k] + beta_v)
            probs[k] = p
            total += p

        u = u_list[t] * total
        acc = 0.0
        k_new = n_topics - 1
        for k in topics:
            acc += probs[k]
            if u < acc:
                k_new = k
                break

        assign[t] = k_new
        row_d[k_new] += 1
        kw[k_new][w] += 1
        kt[k_new] += 1

    z[:] = assign
    n_dk[:] = dk
    n_kw[:] = kw
    n_k[:] = kt
