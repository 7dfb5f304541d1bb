"""Adam with staircase learning-rate decay and gradient clipping."""
from __future__ import annotations

import numpy as np


class Adam:
    """lr(step) = base_lr * decay^(step // decay_every), applied after clipping.

    ``clip_mode``: "norm" rescales the whole gradient so its global L2 norm
    is at most ``clip``; "value" clips each component to ±clip; None disables.
    """

    def __init__(self, params, base_lr, *, decay=1.0, decay_every=1000,
                 clip=0.1, clip_mode="norm", beta1=0.9, beta2=0.999, eps=1e-8):
        if not 0.0 < decay <= 1.0:
            raise ValueError("decay must be in (0, 1]")
        if decay_every < 1:
            raise ValueError("decay_every must be >= 1")
        if clip_mode not in (None, "norm", "value"):
            raise ValueError(f"unknown clip_mode {clip_mode!r}")
        self.params = list(params)
        self.base_lr = base_lr
        self.decay = decay
        self.decay_every = decay_every
        self.clip = clip
        self.clip_mode = clip_mode
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.m = [np.zeros_like(p.value) for p in self.params]
        self.v = [np.zeros_like(p.value) for p in self.params]

    @property
    def lr(self):
        return self.base_lr * self.decay ** (self.step_count // self.decay_every)

    def zero_grad(self):
        for p in self.params:
            p.zero_grad()

    def step(self):
        sq = 0.0
        for p in self.params:
            sq += float(np.vdot(p.grad, p.grad))
        norm = np.sqrt(sq)
        if not np.isfinite(norm):
            raise FloatingPointError("non-finite gradient")
        scale = 1.0
        if self.clip_mode == "norm" and norm > self.clip:
            scale = self.clip / norm

        lr = self.lr
        t = self.step_count + 1
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad * scale if scale != 1.0 else p.grad
            if self.clip_mode == "value":
                g = np.clip(g, -self.clip, self.clip)
            m += (1.0 - self.beta1) * (g - m)
            v += (1.0 - self.beta2) * (g * g - v)
            p.value -= lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)
        self.step_count += 1
        return norm
