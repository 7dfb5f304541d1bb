"""Pure numpy implementations of the hot kernels.

These are the fallback twins of the compiled routines in ``_speedups``;
both expose identical signatures and are selected in :mod:`markerdec.kernels`.
All probability bookkeeping is float64.
"""
from __future__ import annotations

import numpy as np

# Message magnitude clamp for the sum-product check update; keeps
# atanh(tanh(x/2)) finite in float64.
SPA_CLAMP = 19.07


class ZeroMassError(ValueError):
    """Received sequence has zero probability under the assumed parameters."""


def drift_forward_backward(y, emit, pd):
    """Forward/backward recursion over the (time, drift) lattice.

    ``y``: received bits, uint8 shape (R,). ``emit``: per-position emission
    probability of observing bit 0/1, shape (T, 2) (coded positions carry the
    prior-marginalized value 0.5). ``pd``: assumed deletion probability.

    Returns ``(alpha, beta, ls_a, ls_b)`` where ``alpha[i, d]`` is the
    normalized probability of having consumed ``i - d`` received bits after
    ``i`` transmitted ones, rows summing to 1, and ``ls_a[i]`` accumulates the
    log of the normalization factors (same for beta from the other end).
    """
    y = np.asarray(y, dtype=np.uint8)
    emit = np.asarray(emit, dtype=np.float64)
    T = emit.shape[0]
    R = y.size
    if R > T:
        raise ValueError(f"received length {R} exceeds transmitted length {T}")
    D = T - R
    qd = 1.0 - pd

    # One spare column keeps the d+1 / d-1 shifts branch-free.
    alpha = np.zeros((T + 1, D + 2))
    beta = np.zeros((T + 1, D + 2))
    ls_a = np.zeros(T + 1)
    ls_b = np.zeros(T + 1)

    alpha[0, 0] = 1.0
    for i in range(1, T + 1):
        lo = max(0, i - R)
        hi = min(i, D)
        prev = alpha[i - 1]
        row = alpha[i]
        lo_del = max(lo, 1)
        if lo_del <= hi:
            row[lo_del : hi + 1] += pd * prev[lo_del - 1 : hi]
        hi_tr = min(hi, i - 1)
        if lo <= hi_tr:
            obs = y[i - 1 - hi_tr : i - lo][::-1]
            row[lo : hi_tr + 1] += qd * emit[i - 1, obs] * prev[lo : hi_tr + 1]
        s = row.sum()
        if s <= 0.0:
            raise ZeroMassError(
                f"zero forward probability mass at step {i}; assumed channel "
                f"parameters are inconsistent with the received length"
            )
        row /= s
        ls_a[i] = ls_a[i - 1] + np.log(s)

    beta[T, D] = 1.0
    for i in range(T, 0, -1):
        lo = max(0, i - 1 - R)
        hi = min(i - 1, D)
        nxt = beta[i]
        row = beta[i - 1]
        row[lo : hi + 1] += pd * nxt[lo + 1 : hi + 2]
        lo_tr = max(lo, i - R)
        if lo_tr <= hi:
            obs = y[i - 1 - hi : i - lo_tr][::-1]
            row[lo_tr : hi + 1] += qd * emit[i - 1, obs] * nxt[lo_tr : hi + 1]
        s = row.sum()
        if s <= 0.0:
            raise ZeroMassError(
                f"zero backward probability mass at step {i - 1}; assumed "
                f"channel parameters are inconsistent with the received length"
            )
        row /= s
        ls_b[i - 1] = ls_b[i] + np.log(s)

    return alpha[:, : D + 1], beta[:, : D + 1], ls_a, ls_b


def drift_posteriors(y, emit, pd, ps, alpha, beta):
    """Per-position joint numerators P(x_t = b, y) on the lattice scale.

    For every transmitted position t combines alpha row t with beta row t+1,
    replacing the marginalized emission by the pinned-bit substitution
    probability. Values are scaled by the row normalizations of alpha[t] and
    beta[t+1]; the caller reapplies ``ls_a[t] + ls_b[t+1]`` in log domain.

    Returns ``(num0, num1)``, each shape (T,), including the uniform 1/2
    prior so that num0 + num1 rescales to P(y).
    """
    y = np.asarray(y, dtype=np.uint8)
    emit = np.asarray(emit, dtype=np.float64)
    T = emit.shape[0]
    R = y.size
    D = T - R
    qd = 1.0 - pd
    num0 = np.zeros(T)
    num1 = np.zeros(T)
    beta_pad = np.concatenate([beta, np.zeros((T + 1, 1))], axis=1)

    for t in range(T):
        lo = max(0, t - R)
        hi = min(t, D)
        a = alpha[t, lo : hi + 1]
        b_next = beta_pad[t + 1]
        del_sum = pd * float(a @ b_next[lo + 1 : hi + 2])
        lo_tr = max(lo, t - R + 1)
        tr0 = tr1 = 0.0
        if lo_tr <= hi:
            obs = y[t - hi : t - lo_tr + 1][::-1]
            ab = alpha[t, lo_tr : hi + 1] * b_next[lo_tr : hi + 1]
            p_obs_given_0 = np.where(obs == 0, 1.0 - ps, ps)
            tr0 = qd * float(ab @ p_obs_given_0)
            tr1 = qd * float(ab @ (1.0 - p_obs_given_0))
        num0[t] = 0.5 * (del_sum + tr0)
        num1[t] = 0.5 * (del_sum + tr1)
    return num0, num1


def _exclusive_products(t):
    """Leave-one-out products along axis 1 via prefix/suffix cumprods."""
    m, d = t.shape
    pre = np.ones((m, d))
    suf = np.ones((m, d))
    np.cumprod(t[:, :-1], axis=1, out=pre[:, 1:])
    np.cumprod(t[:, :0:-1], axis=1, out=suf[:, -2::-1])
    return pre * suf


def spa_decode(llr, cn_idx, max_iter, clamp=SPA_CLAMP):
    """Flooding sum-product decoding on a padded check-adjacency matrix.

    ``cn_idx``: int32 (m, max_check_degree), variable indices per check,
    padded with -1. Returns ``(bits, iterations, converged, posterior)``.
    """
    llr = np.asarray(llr, dtype=np.float64)
    n = llr.size
    cn_idx = np.asarray(cn_idx, dtype=np.int32)
    mask = cn_idx >= 0
    idx = np.where(mask, cn_idx, 0)

    def syndrome_zero(bits):
        par = np.bitwise_xor.reduce(np.where(mask, bits[idx], 0), axis=1)
        return not par.any()

    posterior = llr.copy()
    bits = (posterior < 0).astype(np.uint8)
    if syndrome_zero(bits):
        return bits, 0, True, posterior

    c2v = np.zeros(cn_idx.shape)
    for it in range(1, max_iter + 1):
        tot = llr + np.bincount(idx[mask], weights=c2v[mask], minlength=n)
        v2c = np.clip(tot[idx] - c2v, -clamp, clamp)
        t = np.tanh(0.5 * v2c)
        t[~mask] = 1.0
        c2v = 2.0 * np.arctanh(_exclusive_products(t))
        c2v[~mask] = 0.0
        posterior = llr + np.bincount(idx[mask], weights=c2v[mask], minlength=n)
        bits = (posterior < 0).astype(np.uint8)
        if syndrome_zero(bits):
            return bits, it, True, posterior
    return bits, max_iter, False, posterior


# (5,7) octal, memory-2 trellis: state s encodes (m_{t-1}, m_{t-2}) as
# 2*m_{t-1} + m_{t-2}; the branch into next state s' always carries input
# bit s' >> 1 and comes from predecessors 2*(s'&1) + {0,1}.
_PRED = np.array([[0, 1], [2, 3], [0, 1], [2, 3]], dtype=np.int64)
_SIGN1 = np.empty((4, 2))
_SIGN2 = np.empty((4, 2))
for _s_next in range(4):
    _b = _s_next >> 1
    for _p in range(2):
        _s = _PRED[_s_next, _p]
        _c1 = _b ^ (_s & 1)
        _c2 = _b ^ (_s >> 1) ^ (_s & 1)
        _SIGN1[_s_next, _p] = 1.0 - 2.0 * _c1
        _SIGN2[_s_next, _p] = 1.0 - 2.0 * _c2
del _s_next, _b, _p, _s, _c1, _c2


def viterbi_57(vals):
    """Maximum-correlation sequence estimate for the (5,7) code.

    ``vals``: per-coded-bit soft values (length 2k). The path score is
    sum over branches of (1-2c)*value; the trellis starts in state 0 and the
    final state is free. Metric ties resolve toward the lower-index
    predecessor / final state.
    """
    vals = np.asarray(vals, dtype=np.float64)
    if vals.size % 2:
        raise ValueError("soft value sequence must have even length")
    k = vals.size // 2
    pm = np.full(4, -np.inf)
    pm[0] = 0.0
    back = np.empty((k, 4), dtype=np.int8)
    for t in range(k):
        cand = pm[_PRED] + _SIGN1 * vals[2 * t] + _SIGN2 * vals[2 * t + 1]
        choice = np.argmax(cand, axis=1)
        pm = cand[np.arange(4), choice]
        back[t] = choice
    state = int(np.argmax(pm))
    msg = np.empty(k, dtype=np.uint8)
    for t in range(k - 1, -1, -1):
        msg[t] = state >> 1
        state = int(_PRED[state, back[t, state]])
    return msg
