"""Layers with explicit forward/backward passes.

Sequences are carried as (T, B, F) arrays so the per-step (B, F) slices fed
to the GEMMs are contiguous. Every layer caches what its backward needs on
the instance; backward must follow the matching forward (train mode).
"""
from __future__ import annotations

import numpy as np

from .core import Parameter, sigmoid, uniform_init


def gru_cell_forward(h_prev, u, Wz, Wr, Wh, bz=None, br=None, bh=None):
    """One GRU step: z=σ(W_z[h;u]), r=σ(W_r[h;u]), h̃=tanh(W_h[r⊙h;u]).

    Accepts a single step (vectors) or a batch (2-D arrays). Biases default
    to absent, matching the bare-matrix update equations.
    """
    a = np.concatenate([h_prev, u], axis=-1)
    z = sigmoid(a @ Wz.T + (0 if bz is None else bz))
    r = sigmoid(a @ Wr.T + (0 if br is None else br))
    b = np.concatenate([r * h_prev, u], axis=-1)
    g = np.tanh(b @ Wh.T + (0 if bh is None else bh))
    return (1.0 - z) * h_prev + z * g


class GruDirection:
    """Unidirectional GRU scan over (T, B, in_dim) with full BPTT.

    ``reverse=True`` scans t = T-1..0 (outputs stay aligned to input
    positions). The z and r gates share one fused GEMM per step, and the
    input-side projections W[:, d:] @ u_t are hoisted out of the scan into
    one GEMM over all steps; only the recurrent d-by-d blocks stay inside
    the loop. backward likewise defers the weight gradients to stacked
    GEMMs after the time loop instead of accumulating per step, which is
    what keeps BPTT affordable at 1024-wide layers.
    """

    def __init__(self, name, in_dim, hidden, rng, *, reverse=False, bias=False,
                 dtype=np.float32):
        self.in_dim = in_dim
        self.hidden = hidden
        self.reverse = reverse
        fan = hidden + in_dim
        self.Wz = Parameter(f"{name}.Wz", uniform_init(rng, (hidden, fan), fan, dtype))
        self.Wr = Parameter(f"{name}.Wr", uniform_init(rng, (hidden, fan), fan, dtype))
        self.Wh = Parameter(f"{name}.Wh", uniform_init(rng, (hidden, fan), fan, dtype))
        self.bias = bias
        if bias:
            zeros = np.zeros(hidden, dtype=dtype)
            self.bz = Parameter(f"{name}.bz", zeros.copy())
            self.br = Parameter(f"{name}.br", zeros.copy())
            self.bh = Parameter(f"{name}.bh", zeros.copy())

    def params(self):
        out = [self.Wz, self.Wr, self.Wh]
        if self.bias:
            out += [self.bz, self.br, self.bh]
        return out

    def _order(self, T):
        return range(T - 1, -1, -1) if self.reverse else range(T)

    def forward(self, x, train):
        T, B, _ = x.shape
        d = self.hidden
        H = np.zeros((T, B, d), dtype=x.dtype)
        Z = np.empty_like(H)
        R = np.empty_like(H)
        G = np.empty_like(H)
        Wzr = np.vstack([self.Wz.value, self.Wr.value])
        Wzr_h_T = np.ascontiguousarray(Wzr[:, :d].T)
        Wh_h_T = np.ascontiguousarray(self.Wh.value[:, :d].T)
        flat = x.reshape(T * B, self.in_dim)
        U_zr = (flat @ Wzr[:, d:].T).reshape(T, B, 2 * d)
        U_g = (flat @ self.Wh.value[:, d:].T).reshape(T, B, d)
        if self.bias:
            U_zr += np.concatenate([self.bz.value, self.br.value])
            U_g += self.bh.value
        h = np.zeros((B, d), dtype=x.dtype)
        for t in self._order(T):
            zr = sigmoid(h @ Wzr_h_T + U_zr[t])
            z, r = zr[:, :d], zr[:, d:]
            g = np.tanh((r * h) @ Wh_h_T + U_g[t])
            h = (1.0 - z) * h + z * g
            Z[t], R[t], G[t], H[t] = z, r, g, h
        if train:
            self._cache = (x, Z, R, G, H)
        return H

    def backward(self, dH):
        x, Z, R, G, H = self._cache
        T, B, _ = x.shape
        d = self.hidden
        # h_prev per step: the scan output shifted one step along the
        # processing order, zeros at the start of the scan.
        Hprev = np.zeros_like(H)
        if self.reverse:
            Hprev[:-1] = H[1:]
        else:
            Hprev[1:] = H[:-1]
        Wzr = np.vstack([self.Wz.value, self.Wr.value])
        Wzr_h = np.ascontiguousarray(Wzr[:, :d])
        Wh_h = np.ascontiguousarray(self.Wh.value[:, :d])
        dSzr = np.empty((T, B, 2 * d), dtype=x.dtype)
        dSg = np.empty((T, B, d), dtype=x.dtype)
        carry = np.zeros((B, d), dtype=x.dtype)
        for t in reversed(list(self._order(T))):
            h_prev = Hprev[t]
            z, r, g = Z[t], R[t], G[t]
            dh = dH[t] + carry
            dz = dh * (g - h_prev)
            dg = dh * z
            dhp = dh * (1.0 - z)
            dsg = dg * (1.0 - g * g)
            db_h = dsg @ Wh_h
            dr = db_h * h_prev
            dhp += db_h * r
            dsz = dz * z * (1.0 - z)
            dsr = dr * r * (1.0 - r)
            dszr = np.concatenate([dsz, dsr], axis=1)
            dhp += dszr @ Wzr_h
            dSzr[t], dSg[t] = dszr, dsg
            carry = dhp
        # Weight gradients in two stacked GEMMs over all T*B steps.
        a_all = np.concatenate([Hprev, x], axis=2).reshape(T * B, d + self.in_dim)
        fszr = dSzr.reshape(T * B, 2 * d)
        fsg = dSg.reshape(T * B, d)
        dWzr = fszr.T @ a_all
        a_all[:, :d] = (R * Hprev).reshape(T * B, d)
        dWh = fsg.T @ a_all
        dx = (fsg @ self.Wh.value[:, d:] + fszr @ Wzr[:, d:]).reshape(x.shape)
        self.Wz.grad += dWzr[:d]
        self.Wr.grad += dWzr[d:]
        self.Wh.grad += dWh
        if self.bias:
            dbzr = fszr.sum(axis=0)
            self.bz.grad += dbzr[:d]
            self.br.grad += dbzr[d:]
            self.bh.grad += fsg.sum(axis=0)
        self._cache = None
        return dx


class BiGruLayer:
    """Forward and backward GRU scans, hidden states concatenated per step."""

    def __init__(self, name, in_dim, hidden, rng, *, bias=False, dtype=np.float32):
        self.fwd = GruDirection(f"{name}.fwd", in_dim, hidden, rng, reverse=False,
                                bias=bias, dtype=dtype)
        self.bwd = GruDirection(f"{name}.bwd", in_dim, hidden, rng, reverse=True,
                                bias=bias, dtype=dtype)
        self.out_dim = 2 * hidden

    def params(self):
        return self.fwd.params() + self.bwd.params()

    def forward(self, x, train):
        return np.concatenate([self.fwd.forward(x, train),
                               self.bwd.forward(x, train)], axis=2)

    def backward(self, dout):
        d = self.fwd.hidden
        return self.fwd.backward(dout[:, :, :d]) + self.bwd.backward(dout[:, :, d:])


class BatchNorm:
    """Per-feature normalization over batch × time (axes 0 and 1).

    Train mode uses batch statistics (biased variance) and updates running
    estimates with the given momentum; eval mode uses the running estimates.
    """

    def __init__(self, name, num_features, *, momentum=0.1, eps=1e-5, dtype=np.float32):
        self.name = name
        self.gamma = Parameter(f"{name}.gamma", np.ones(num_features, dtype=dtype))
        self.beta = Parameter(f"{name}.beta", np.zeros(num_features, dtype=dtype))
        self.running_mean = np.zeros(num_features, dtype=dtype)
        self.running_var = np.ones(num_features, dtype=dtype)
        self.momentum = momentum
        self.eps = eps

    def params(self):
        return [self.gamma, self.beta]

    def buffers(self):
        return [(f"{self.name}.running_mean", self.running_mean),
                (f"{self.name}.running_var", self.running_var)]

    def forward(self, x, train):
        if train:
            mean = x.mean(axis=(0, 1))
            var = x.var(axis=(0, 1))
            self.running_mean += self.momentum * (mean - self.running_mean)
            self.running_var += self.momentum * (var - self.running_var)
        else:
            mean, var = self.running_mean, self.running_var
        ivar = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean) * ivar
        if train:
            self._cache = (xhat, ivar)
        return self.gamma.value * xhat + self.beta.value

    def backward(self, dout):
        xhat, ivar = self._cache
        N = xhat.shape[0] * xhat.shape[1]
        self.beta.grad += dout.sum(axis=(0, 1))
        self.gamma.grad += (dout * xhat).sum(axis=(0, 1))
        dxhat = dout * self.gamma.value
        dx = (ivar / N) * (N * dxhat - dxhat.sum(axis=(0, 1))
                           - xhat * (dxhat * xhat).sum(axis=(0, 1)))
        self._cache = None
        return dx


class Dense:
    """Per-step affine map; flattens (T, B, in) to one GEMM."""

    def __init__(self, name, in_dim, out_dim, rng, *, dtype=np.float32):
        self.W = Parameter(f"{name}.W", uniform_init(rng, (out_dim, in_dim), in_dim, dtype))
        self.b = Parameter(f"{name}.b", np.zeros(out_dim, dtype=dtype))

    def params(self):
        return [self.W, self.b]

    def forward(self, x, train):
        if train:
            self._cache = x
        return x @ self.W.value.T + self.b.value

    def backward(self, dout):
        x = self._cache
        flat_x = x.reshape(-1, x.shape[-1])
        flat_d = dout.reshape(-1, dout.shape[-1])
        self.W.grad += flat_d.T @ flat_x
        self.b.grad += flat_d.sum(axis=0)
        self._cache = None
        return dout @ self.W.value


class Relu:
    def params(self):
        return []

    def forward(self, x, train):
        out = np.maximum(x, 0.0)
        if train:
            self._cache = x > 0
        return out

    def backward(self, dout):
        dx = dout * self._cache
        self._cache = None
        return dx


class Sigmoid:
    def params(self):
        return []

    def forward(self, x, train):
        out = sigmoid(x)
        if train:
            self._cache = out
        return out

    def backward(self, dout):
        p = self._cache
        self._cache = None
        return dout * p * (1.0 - p)
