# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled training kernels.

Mirrors kernels._pure: same generator, same draw order, same update
semantics (per-target sequential output updates, input gradient accumulated
against pre-update output rows). Inner loops run without the GIL so
multi-worker training gets real parallelism.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log1p

cnp.import_array()

ctypedef unsigned long long u64

cdef double _UNIF = 2.0 ** -53

COMPILED = True


def make_tables(cum_unigram, keep_probs):
    cum = np.ascontiguousarray(cum_unigram, dtype=np.float64)
    keep = np.ascontiguousarray(keep_probs, dtype=np.float64)
    return cum, keep


cdef inline u64 _next(u64 s) nogil:
    return s * 25214903917ULL + 11ULL


cdef inline double _unif(u64 s) nogil:
    return <double>(s >> 11) * _UNIF


cdef inline Py_ssize_t _sample(const double[::1] cum, double u) nogil:
    cdef Py_ssize_t lo = 0, hi = cum.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cum[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    if lo >= cum.shape[0]:
        lo = cum.shape[0] - 1
    return lo


cdef inline double _one_target(
    float[:, ::1] w_out,
    Py_ssize_t tid,
    double label,
    const double[::1] vec,
    double[::1] grad,
    double alpha,
    bint update_out,
) nogil:
    cdef Py_ssize_t d, dim = w_out.shape[1]
    cdef double x = 0.0, e, s, g, loss, old
    for d in range(dim):
        x += (<double>w_out[tid, d]) * vec[d]
    if x >= 0:
        e = exp(-x)
        s = 1.0 / (1.0 + e)
        loss = log1p(e) if label == 1.0 else x + log1p(e)
    else:
        e = exp(x)
        s = e / (1.0 + e)
        loss = -x + log1p(e) if label == 1.0 else log1p(e)
    g = s - label
    for d in range(dim):
        old = <double>w_out[tid, d]
        grad[d] += g * old
        if update_out:
            w_out[tid, d] = <float>(old - alpha * g * vec[d])
    return loss


cdef Py_ssize_t _subsample(
    const int[::1] doc, const double[::1] keep, int[::1] kept, u64* state
) nogil:
    cdef Py_ssize_t i, n = 0
    cdef u64 s = state[0]
    for i in range(doc.shape[0]):
        s = _next(s)
        if _unif(s) < keep[doc[i]]:
            kept[n] = doc[i]
            n += 1
    state[0] = s
    return n


def train_document_sg(
    float[:, ::1] w_in,
    float[:, ::1] w_out,
    int[::1] doc,
    int window,
    int k_neg,
    double alpha,
    tables,
    state,
):
    cdef const double[::1] cum = tables[0]
    cdef const double[::1] keep = tables[1]
    cdef Py_ssize_t dim = w_in.shape[1]
    kept_arr = np.empty(doc.shape[0], dtype=np.int32)
    cdef int[::1] kept = kept_arr
    vec_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] vec = vec_arr
    grad_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef u64 s = <u64>state
    cdef Py_ssize_t n, pos, p2, lo, hi, d, nid
    cdef int center, target, b, neg_i
    cdef double loss = 0.0, pair_loss
    cdef long pairs = 0
    with nogil:
        n = _subsample(doc, keep, kept, &s)
        for pos in range(n):
            s = _next(s)
            b = 1 + <int>((s >> 16) % <u64>window)
            center = kept[pos]
            for d in range(dim):
                vec[d] = <double>w_in[center, d]
            lo = pos - b if pos - b > 0 else 0
            hi = pos + b + 1 if pos + b + 1 < n else n
            for p2 in range(lo, hi):
                if p2 == pos:
                    continue
                target = kept[p2]
                for d in range(dim):
                    grad[d] = 0.0
                    vec[d] = <double>w_in[center, d]
                pair_loss = _one_target(w_out, target, 1.0, vec, grad, alpha, True)
                for neg_i in range(k_neg):
                    s = _next(s)
                    nid = _sample(cum, _unif(s))
                    if nid == target:
                        continue
                    pair_loss += _one_target(w_out, nid, 0.0, vec, grad, alpha, True)
                for d in range(dim):
                    w_in[center, d] = <float>(w_in[center, d] - alpha * grad[d])
                loss += pair_loss
                pairs += 1
    return loss, pairs, int(s)


def train_document_dm(
    float[:, ::1] w_in,
    float[:, ::1] w_out,
    float[:, ::1] d_in,
    Py_ssize_t doc_row,
    int[::1] doc,
    int window,
    int k_neg,
    double alpha,
    tables,
    state,
    bint update_words=True,
    bint update_out=True,
    bint update_doc=True,
):
    cdef const double[::1] cum = tables[0]
    cdef const double[::1] keep = tables[1]
    cdef Py_ssize_t dim = w_in.shape[1]
    kept_arr = np.empty(doc.shape[0], dtype=np.int32)
    cdef int[::1] kept = kept_arr
    ctx_arr = np.empty(2 * window + 1, dtype=np.int32)
    cdef int[::1] ctx = ctx_arr
    h_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] h = h_arr
    grad_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef u64 s = <u64>state
    cdef Py_ssize_t n, pos, p2, lo, hi, d, nid, i
    cdef int center, b, neg_i, m
    cdef double loss = 0.0, step
    cdef long pairs = 0
    with nogil:
        n = _subsample(doc, keep, kept, &s)
        for pos in range(n):
            s = _next(s)
            b = 1 + <int>((s >> 16) % <u64>window)
            lo = pos - b if pos - b > 0 else 0
            hi = pos + b + 1 if pos + b + 1 < n else n
            m = 0
            for p2 in range(lo, hi):
                if p2 == pos:
                    continue
                ctx[m] = kept[p2]
                m += 1
            for d in range(dim):
                h[d] = <double>d_in[doc_row, d]
            for i in range(m):
                for d in range(dim):
                    h[d] += <double>w_in[ctx[i], d]
            for d in range(dim):
                h[d] /= (m + 1)
                grad[d] = 0.0
            center = kept[pos]
            loss += _one_target(w_out, center, 1.0, h, grad, alpha, update_out)
            for neg_i in range(k_neg):
                s = _next(s)
                nid = _sample(cum, _unif(s))
                if nid == center:
                    continue
                loss += _one_target(w_out, nid, 0.0, h, grad, alpha, update_out)
            step = alpha / (m + 1)
            if update_doc:
                for d in range(dim):
                    d_in[doc_row, d] = <float>(d_in[doc_row, d] - step * grad[d])
            if update_words:
                for i in range(m):
                    for d in range(dim):
                        w_in[ctx[i], d] = <float>(w_in[ctx[i], d] - step * grad[d])
            pairs += 1
    return loss, pairs, int(s)


def train_document_dbow(
    float[:, ::1] w_out,
    float[:, ::1] d_in,
    Py_ssize_t doc_row,
    int[::1] doc,
    int k_neg,
    double alpha,
    tables,
    state,
    bint update_out=True,
    bint update_doc=True,
):
    cdef const double[::1] cum = tables[0]
    cdef const double[::1] keep = tables[1]
    cdef Py_ssize_t dim = d_in.shape[1]
    kept_arr = np.empty(doc.shape[0], dtype=np.int32)
    cdef int[::1] kept = kept_arr
    vec_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] vec = vec_arr
    grad_arr = np.empty(dim, dtype=np.float64)
    cdef double[::1] grad = grad_arr
    cdef u64 s = <u64>state
    cdef Py_ssize_t n, pos, d, nid
    cdef int center, neg_i
    cdef double loss = 0.0
    cdef long pairs = 0
    with nogil:
        n = _subsample(doc, keep, kept, &s)
        for pos in range(n):
            center = kept[pos]
            for d in range(dim):
                vec[d] = <double>d_in[doc_row, d]
                grad[d] = 0.0
            loss += _one_target(w_out, center, 1.0, vec, grad, alpha, update_out)
            for neg_i in range(k_neg):
                s = _next(s)
                nid = _sample(cum, _unif(s))
                if nid == center:
                    continue
                loss += _one_target(w_out, nid, 0.0, vec, grad, alpha, update_out)
            if update_doc:
                for d in range(dim):
                    d_in[doc_row, d] = <float>(d_in[doc_row, d] - alpha * grad[d])
            pairs += 1
    return loss, pairs, int(s)
