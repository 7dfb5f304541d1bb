"""Central finite-difference verification of the analytic gradients."""
from __future__ import annotations

import numpy as np

from .losses import LOSSES


def gradcheck_model(model, x, labels, loss_kind="bce", *, step=1e-4):
    """Compare every parameter gradient against central differences.

    The model should be built in float64. Returns (max_rel_err, per_param)
    where per_param maps parameter name -> worst relative error, using
    |g - g_fd| / max(|g|, |g_fd|, 1e-6).
    """
    if model.dtype != np.float64:
        raise ValueError("gradient checks need a float64 model")
    loss_fn = LOSSES[loss_kind]

    def eval_loss():
        return loss_fn(model.forward(x, train=True), labels)[0]

    model.zero_grad()
    pred = model.forward(x, train=True)
    _, dpred = loss_fn(pred, labels)
    model.backward(dpred)

    worst = 0.0
    per_param = {}
    for p in model.parameters():
        analytic = p.grad.copy()
        flat = p.value.reshape(-1)
        fd = np.empty(flat.size)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = eval_loss()
            flat[i] = orig - step
            down = eval_loss()
            flat[i] = orig
            fd[i] = (up - down) / (2.0 * step)
        fd = fd.reshape(p.value.shape)
        denom = np.maximum(np.maximum(np.abs(analytic), np.abs(fd)), 1e-6)
        rel = float((np.abs(analytic - fd) / denom).max())
        per_param[p.name] = rel
        worst = max(worst, rel)
    return worst, per_param


def desk_gradcheck(seed: int = 0):
    """Finite-difference suite over small estimator- and decoder-shaped models.

    Returns {model description: (max rel err, per-parameter dict)}; covers
    both losses and the bias flag on a 2-layer stack with batch norm.
    """
    from .models import BiGruModel

    rng = np.random.default_rng(seed)
    results = {}
    cases = [
        ("estimator mse", dict(in_dim=2, hidden=5, num_layers=2, mlp_dims=[7, 3, 1]), "mse"),
        ("estimator bce", dict(in_dim=2, hidden=5, num_layers=2, mlp_dims=[7, 3, 1]), "bce"),
        ("estimator bias bce", dict(in_dim=2, hidden=4, num_layers=2, mlp_dims=[5, 1],
                                    bias=True), "bce"),
        ("decoder bce", dict(in_dim=2, hidden=6, num_layers=2, mlp_dims=[4, 1]), "bce"),
        ("prefix estimator bce", dict(in_dim=6, hidden=4, num_layers=2, mlp_dims=[5, 1]), "bce"),
    ]
    for label, kwargs, kind in cases:
        model = BiGruModel(dtype=np.float64, init_seed=rng.integers(2**31), **kwargs)
        x = rng.normal(size=(6, 3, model.in_dim))
        labels = rng.integers(0, 2, (6, 3))
        results[label] = gradcheck_model(model, x, labels, kind)
    return results
