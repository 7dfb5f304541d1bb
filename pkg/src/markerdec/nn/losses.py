"""Per-element losses on head probabilities vs. {0,1} labels.

Both return (mean loss, gradient wrt predictions); labels are broadcast to
the prediction dtype.
"""
from __future__ import annotations

import numpy as np

BCE_EPS = 1e-12


def mse_loss(pred, labels):
    y = np.asarray(labels, dtype=pred.dtype)
    diff = pred - y
    loss = float(np.mean(diff * diff))
    return loss, (2.0 / diff.size) * diff


def bce_loss(pred, labels):
    y = np.asarray(labels, dtype=pred.dtype)
    loss = float(np.mean(-y * np.log(pred + BCE_EPS)
                         - (1.0 - y) * np.log(1.0 - pred + BCE_EPS)))
    grad = (-y / (pred + BCE_EPS) + (1.0 - y) / (1.0 - pred + BCE_EPS)) / pred.size
    return loss, grad.astype(pred.dtype, copy=False)


LOSSES = {"mse": mse_loss, "bce": bce_loss}
