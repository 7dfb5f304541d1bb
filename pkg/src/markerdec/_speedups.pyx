# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled twins of the kernels in ``_kernels_np`` (same signatures)."""

import numpy as np

from libc.math cimport atanh, log, tanh

from markerdec._kernels_np import SPA_CLAMP, ZeroMassError


def drift_forward_backward(y, emit, double pd):
    y_arr = np.ascontiguousarray(y, dtype=np.uint8)
    emit_arr = np.ascontiguousarray(emit, dtype=np.float64)
    cdef const unsigned char[::1] yv = y_arr
    cdef const double[:, ::1] ev = emit_arr
    cdef Py_ssize_t T = ev.shape[0]
    cdef Py_ssize_t R = yv.shape[0]
    if R > T:
        raise ValueError(f"received length {R} exceeds transmitted length {T}")
    cdef Py_ssize_t D = T - R
    cdef double qd = 1.0 - pd

    alpha_arr = np.zeros((T + 1, D + 2))
    beta_arr = np.zeros((T + 1, D + 2))
    ls_a_arr = np.zeros(T + 1)
    ls_b_arr = np.zeros(T + 1)
    cdef double[:, ::1] alpha = alpha_arr
    cdef double[:, ::1] beta = beta_arr
    cdef double[::1] ls_a = ls_a_arr
    cdef double[::1] ls_b = ls_b_arr

    cdef Py_ssize_t i, d, lo, hi, hi_tr, lo_tr
    cdef double s, v

    alpha[0, 0] = 1.0
    for i in range(1, T + 1):
        lo = i - R if i - R > 0 else 0
        hi = i if i < D else D
        s = 0.0
        hi_tr = hi if hi < i - 1 else i - 1
        for d in range(lo, hi + 1):
            v = 0.0
            if d > 0:
                v += pd * alpha[i - 1, d - 1]
            if d <= hi_tr:
                v += qd * ev[i - 1, yv[i - 1 - d]] * alpha[i - 1, d]
            alpha[i, d] = v
            s += v
        if s <= 0.0:
            raise ZeroMassError(
                f"zero forward probability mass at step {i}; assumed channel "
                f"parameters are inconsistent with the received length"
            )
        for d in range(lo, hi + 1):
            alpha[i, d] /= s
        ls_a[i] = ls_a[i - 1] + log(s)

    beta[T, D] = 1.0
    for i in range(T, 0, -1):
        lo = i - 1 - R if i - 1 - R > 0 else 0
        hi = i - 1 if i - 1 < D else D
        lo_tr = i - R if i - R > lo else lo
        s = 0.0
        for d in range(lo, hi + 1):
            v = pd * beta[i, d + 1]
            if d >= lo_tr:
                v += qd * ev[i - 1, yv[i - 1 - d]] * beta[i, d]
            beta[i - 1, d] = v
            s += v
        if s <= 0.0:
            raise ZeroMassError(
                f"zero backward probability mass at step {i - 1}; assumed "
                f"channel parameters are inconsistent with the received length"
            )
        for d in range(lo, hi + 1):
            beta[i - 1, d] /= s
        ls_b[i - 1] = ls_b[i] + log(s)

    return alpha_arr[:, : D + 1], beta_arr[:, : D + 1], ls_a_arr, ls_b_arr


def drift_posteriors(y, emit, double pd, double ps, alpha, beta):
    y_arr = np.ascontiguousarray(y, dtype=np.uint8)
    emit_arr = np.ascontiguousarray(emit, dtype=np.float64)
    cdef const unsigned char[::1] yv = y_arr
    cdef const double[:, ::1] ev = emit_arr
    cdef const double[:, :] av = np.asarray(alpha, dtype=np.float64)
    cdef const double[:, :] bv = np.asarray(beta, dtype=np.float64)
    cdef Py_ssize_t T = ev.shape[0]
    cdef Py_ssize_t R = yv.shape[0]
    cdef Py_ssize_t D = T - R
    cdef double qd = 1.0 - pd

    num0_arr = np.zeros(T)
    num1_arr = np.zeros(T)
    cdef double[::1] num0 = num0_arr
    cdef double[::1] num1 = num1_arr

    cdef Py_ssize_t t, d, lo, hi, lo_tr
    cdef double del_sum, tr0, tr1, ab, p0

    for t in range(T):
        lo = t - R if t - R > 0 else 0
        hi = t if t < D else D
        lo_tr = t - R + 1 if t - R + 1 > lo else lo
        del_sum = 0.0
        for d in range(lo, hi + 1):
            if d + 1 <= D:
                del_sum += av[t, d] * bv[t + 1, d + 1]
        del_sum *= pd
        tr0 = 0.0
        tr1 = 0.0
        for d in range(lo_tr, hi + 1):
            ab = av[t, d] * bv[t + 1, d]
            if yv[t - d] == 0:
                p0 = 1.0 - ps
            else:
                p0 = ps
            tr0 += ab * p0
            tr1 += ab * (1.0 - p0)
        tr0 *= qd
        tr1 *= qd
        num0[t] = 0.5 * (del_sum + tr0)
        num1[t] = 0.5 * (del_sum + tr1)
    return num0_arr, num1_arr


def spa_decode(llr, cn_idx, int max_iter, double clamp=SPA_CLAMP):
    llr_arr = np.ascontiguousarray(llr, dtype=np.float64)
    idx_arr = np.ascontiguousarray(cn_idx, dtype=np.int32)
    cdef const double[::1] lv = llr_arr
    cdef const int[:, ::1] iv = idx_arr
    cdef Py_ssize_t n = lv.shape[0]
    cdef Py_ssize_t m = iv.shape[0]
    cdef Py_ssize_t dmax = iv.shape[1]

    post_arr = llr_arr.copy()
    bits_arr = np.empty(n, dtype=np.uint8)
    c2v_arr = np.zeros((m, dmax))
    th_arr = np.empty(dmax)
    pre_arr = np.empty(dmax + 1)
    suf_arr = np.empty(dmax + 1)
    cdef double[::1] post = post_arr
    cdef unsigned char[::1] bits = bits_arr
    cdef double[:, ::1] c2v = c2v_arr
    cdef double[::1] th = th_arr
    cdef double[::1] pre = pre_arr
    cdef double[::1] suf = suf_arr

    cdef Py_ssize_t i, e, it, v
    cdef int j
    cdef double x
    cdef int par, ok

    for v in range(n):
        bits[v] = 1 if post[v] < 0.0 else 0
    ok = 1
    for i in range(m):
        par = 0
        for e in range(dmax):
            j = iv[i, e]
            if j < 0:
                continue
            par ^= bits[j]
        if par:
            ok = 0
            break
    if ok:
        return bits_arr, 0, True, post_arr

    for it in range(1, max_iter + 1):
        # post currently holds llr + column sums of the previous c2v
        for i in range(m):
            pre[0] = 1.0
            for e in range(dmax):
                j = iv[i, e]
                if j < 0:
                    th[e] = 1.0
                else:
                    x = post[j] - c2v[i, e]
                    if x > clamp:
                        x = clamp
                    elif x < -clamp:
                        x = -clamp
                    th[e] = tanh(0.5 * x)
                pre[e + 1] = pre[e] * th[e]
            suf[dmax] = 1.0
            for e in range(dmax - 1, -1, -1):
                suf[e] = suf[e + 1] * th[e]
            for e in range(dmax):
                j = iv[i, e]
                if j < 0:
                    c2v[i, e] = 0.0
                else:
                    c2v[i, e] = 2.0 * atanh(pre[e] * suf[e + 1])
        for v in range(n):
            post[v] = lv[v]
        for i in range(m):
            for e in range(dmax):
                j = iv[i, e]
                if j >= 0:
                    post[j] += c2v[i, e]
        for v in range(n):
            bits[v] = 1 if post[v] < 0.0 else 0
        ok = 1
        for i in range(m):
            par = 0
            for e in range(dmax):
                j = iv[i, e]
                if j < 0:
                    continue
                par ^= bits[j]
            if par:
                ok = 0
                break
        if ok:
            return bits_arr, it, True, post_arr
    return bits_arr, max_iter, False, post_arr


# (5,7) trellis tables; see _kernels_np for the state convention.
cdef int[4][2] PRED
cdef double[4][2] SIGN1
cdef double[4][2] SIGN2
cdef Py_ssize_t _sn, _p
cdef int _b, _s, _c1, _c2
for _sn in range(4):
    _b = <int>(_sn >> 1)
    for _p in range(2):
        _s = 2 * (<int>_sn & 1) + <int>_p
        PRED[_sn][_p] = _s
        _c1 = _b ^ (_s & 1)
        _c2 = _b ^ (_s >> 1) ^ (_s & 1)
        SIGN1[_sn][_p] = 1.0 - 2.0 * _c1
        SIGN2[_sn][_p] = 1.0 - 2.0 * _c2


def viterbi_57(vals):
    vals_arr = np.ascontiguousarray(vals, dtype=np.float64)
    cdef const double[::1] vv = vals_arr
    if vv.shape[0] % 2:
        raise ValueError("soft value sequence must have even length")
    cdef Py_ssize_t k = vv.shape[0] // 2
    cdef double[4] pm
    cdef double[4] pm_new
    cdef double neg_inf = -np.inf
    cdef Py_ssize_t t, sn, p
    cdef double v1, v2, best, cand
    cdef int choice, state

    back_arr = np.empty((k, 4), dtype=np.int8)
    msg_arr = np.empty(k, dtype=np.uint8)
    cdef signed char[:, ::1] back = back_arr
    cdef unsigned char[::1] msg = msg_arr

    pm[0] = 0.0
    pm[1] = neg_inf
    pm[2] = neg_inf
    pm[3] = neg_inf
    for t in range(k):
        v1 = vv[2 * t]
        v2 = vv[2 * t + 1]
        for sn in range(4):
            best = neg_inf
            choice = 0
            for p in range(2):
                cand = pm[PRED[sn][p]] + SIGN1[sn][p] * v1 + SIGN2[sn][p] * v2
                if cand > best:
                    best = cand
                    choice = <int>p
            pm_new[sn] = best
            back[t, sn] = <signed char>choice
        for sn in range(4):
            pm[sn] = pm_new[sn]

    state = 0
    best = pm[0]
    for sn in range(1, 4):
        if pm[sn] > best:
            best = pm[sn]
            state = <int>sn
    for t in range(k - 1, -1, -1):
        msg[t] = <unsigned char>(state >> 1)
        state = PRED[state][back[t, state]]
    return msg_arr
