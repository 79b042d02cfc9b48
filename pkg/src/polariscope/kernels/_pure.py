"""Pure NumPy training kernels.

Fallback used when the compiled extension is unavailable (or when
POLARISCOPE_PURE_PYTHON=1). Both implementations consume random draws from
the same linear-congruential generator in the same order, so the training
schedule (subsampling, window sizes, negative samples) is identical across
them; only floating-point rounding differs.

Draw order per document: one uniform per token for subsampling, then per
surviving center one window draw followed by `negatives` draws per
prediction. A negative that collides with the positive target is skipped
(the draw is still consumed).
"""
from __future__ import annotations

import math
from bisect import bisect_right

import numpy as np

_MASK64 = (1 << 64) - 1
_MULT = 25214903917
_INC = 11
_UNIF = 2.0 ** -53

COMPILED = False


def make_tables(cum_unigram: np.ndarray, keep_probs: np.ndarray):
    """Prepare sampler tables in the representation this kernel wants."""
    return cum_unigram.tolist(), keep_probs.tolist()


def _subsample(doc: np.ndarray, keep: list, state: int):
    kept = []
    append = kept.append
    for t in doc.tolist():
        state = (state * _MULT + _INC) & _MASK64
        if (state >> 11) * _UNIF < keep[t]:
            append(t)
    return kept, state


def _one_target(w_out, tid, label, vec, grad, alpha, update_out=True):
    """Process one (positive or negative) output row against an input vector.

    Accumulates the input-side gradient into `grad` using the pre-update
    output row and returns the pre-update loss term.
    """
    u = w_out[tid]
    x = float(u @ vec)
    if x >= 0:
        e = math.exp(-x)
        s = 1.0 / (1.0 + e)
        loss = math.log1p(e) if label else x + math.log1p(e)
    else:
        e = math.exp(x)
        s = e / (1.0 + e)
        loss = -x + math.log1p(e) if label else math.log1p(e)
    g = s - label
    grad += g * u
    if update_out:
        u -= (alpha * g) * vec
    return loss


def sgns_pair(w_in, w_out, center, target, negatives, alpha):
    """One skip-gram pair: input row = center word, outputs = target + negatives."""
    v = w_in[center]
    grad = np.zeros(w_in.shape[1], dtype=np.float64)
    loss = _one_target(w_out, target, 1.0, v, grad, alpha)
    for nid in negatives:
        loss += _one_target(w_out, nid, 0.0, v, grad, alpha)
    v -= alpha * grad
    return loss


def pvdm_pair(
    w_in,
    w_out,
    d_in,
    doc_row,
    ctx,
    center,
    negatives,
    alpha,
    update_words=True,
    update_out=True,
    update_doc=True,
):
    """One PV-DM-mean prediction: mean(doc vector, window words) -> center."""
    m = len(ctx) + 1
    h = d_in[doc_row].astype(np.float64)
    if ctx:
        h += w_in[np.asarray(ctx, dtype=np.intp)].sum(axis=0, dtype=np.float64)
    h /= m
    grad = np.zeros(w_in.shape[1], dtype=np.float64)
    loss = _one_target(w_out, center, 1.0, h, grad, alpha, update_out)
    for nid in negatives:
        loss += _one_target(w_out, nid, 0.0, h, grad, alpha, update_out)
    step = (alpha / m) * grad
    if update_doc:
        d_in[doc_row] -= step
    if update_words:
        for c in ctx:
            w_in[c] -= step
    return loss


def train_document_sg(w_in, w_out, doc, window, k_neg, alpha, tables, state):
    cum, keep = tables
    n_table = len(cum)
    kept, state = _subsample(doc, keep, state)
    n = len(kept)
    dim = w_in.shape[1]
    grad = np.empty(dim, dtype=np.float64)
    loss = 0.0
    pairs = 0
    for pos in range(n):
        state = (state * _MULT + _INC) & _MASK64
        b = 1 + ((state >> 16) % window)
        center = kept[pos]
        v = w_in[center]
        lo = pos - b if pos > b else 0
        hi = pos + b + 1
        if hi > n:
            hi = n
        for p2 in range(lo, hi):
            if p2 == pos:
                continue
            target = kept[p2]
            grad.fill(0.0)
            pair_loss = _one_target(w_out, target, 1.0, v, grad, alpha)
            for _ in range(k_neg):
                state = (state * _MULT + _INC) & _MASK64
                nid = bisect_right(cum, (state >> 11) * _UNIF)
                if nid >= n_table:
                    nid = n_table - 1
                if nid == target:
                    continue
                pair_loss += _one_target(w_out, nid, 0.0, v, grad, alpha)
            v -= alpha * grad
            loss += pair_loss
            pairs += 1
    return loss, pairs, state


def train_document_dm(
    w_in,
    w_out,
    d_in,
    doc_row,
    doc,
    window,
    k_neg,
    alpha,
    tables,
    state,
    update_words=True,
    update_out=True,
    update_doc=True,
):
    cum, keep = tables
    n_table = len(cum)
    kept, state = _subsample(doc, keep, state)
    n = len(kept)
    dvec = d_in[doc_row]
    dim = w_in.shape[1]
    grad = np.empty(dim, dtype=np.float64)
    loss = 0.0
    pairs = 0
    for pos in range(n):
        state = (state * _MULT + _INC) & _MASK64
        b = 1 + ((state >> 16) % window)
        lo = pos - b if pos > b else 0
        hi = pos + b + 1
        if hi > n:
            hi = n
        ctx = [kept[p2] for p2 in range(lo, hi) if p2 != pos]
        m = len(ctx) + 1
        h = dvec.astype(np.float64)
        if ctx:
            h += w_in[np.asarray(ctx, dtype=np.intp)].sum(axis=0, dtype=np.float64)
        h /= m
        grad.fill(0.0)
        center = kept[pos]
        loss += _one_target(w_out, center, 1.0, h, grad, alpha, update_out)
        for _ in range(k_neg):
            state = (state * _MULT + _INC) & _MASK64
            nid = bisect_right(cum, (state >> 11) * _UNIF)
            if nid >= n_table:
                nid = n_table - 1
            if nid == center:
                continue
            loss += _one_target(w_out, nid, 0.0, h, grad, alpha, update_out)
        step = (alpha / m) * grad
        if update_doc:
            dvec -= step
        if update_words:
            for c in ctx:
                w_in[c] -= step
        pairs += 1
    return loss, pairs, state


def train_document_dbow(
    w_out,
    d_in,
    doc_row,
    doc,
    k_neg,
    alpha,
    tables,
    state,
    update_out=True,
    update_doc=True,
):
    cum, keep = tables
    n_table = len(cum)
    kept, state = _subsample(doc, keep, state)
    dvec = d_in[doc_row]
    dim = d_in.shape[1]
    grad = np.empty(dim, dtype=np.float64)
    loss = 0.0
    pairs = 0
    for center in kept:
        grad.fill(0.0)
        loss += _one_target(w_out, center, 1.0, dvec, grad, alpha, update_out)
        for _ in range(k_neg):
            state = (state * _MULT + _INC) & _MASK64
            nid = bisect_right(cum, (state >> 11) * _UNIF)
            if nid >= n_table:
                nid = n_table - 1
            if nid == center:
                continue
            loss += _one_target(w_out, nid, 0.0, dvec, grad, alpha, update_out)
        if update_doc:
            dvec -= alpha * grad
        pairs += 1
    return loss, pairs, state
