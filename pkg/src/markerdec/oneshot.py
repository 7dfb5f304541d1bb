"""One-shot BI-GRU outer decoder: LLR pairs in, message bits out.

Replaces Viterbi decoding of the rate-1/2 convolutional code: step t of the
sequence input is the stripped, deinterleaved LLR pair (L*_{2t-1}, L*_{2t})
and the sigmoid head models P(m_t = 1). Trained against the true messages
with BCE; the upstream LLR source (MAP detector or a frozen estimator) is
never updated here.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import Adam, BiGruModel, bce_loss, load_checkpoint, save_checkpoint


@dataclass
class DecoderConfig:
    """Decoder network and training recipe (defaults: the full-size setup)."""

    num_layers: int = 2
    hidden: int = 400
    mlp_dims: tuple = (32, 1)
    bias: bool = False
    steps: int = 5000
    batch: int = 16
    base_lr: float = 3e-4
    decay: float = 1.0
    decay_every: int = 1000
    grad_clip: float = 0.1


def pair_features(lstar) -> np.ndarray:
    lstar = np.asarray(lstar, dtype=np.float32)
    if lstar.size % 2:
        raise ValueError("LLR sequence length must be even")
    return lstar.reshape(-1, 2)


def decode_messages(lstar, model: BiGruModel) -> np.ndarray:
    """Hard message estimate for one frame; ties (p = 0.5) go to bit 0."""
    p = model.forward(pair_features(lstar)[:, None, :], train=False)[:, 0]
    return (p > 0.5).astype(np.uint8)


def decode_messages_batch(lstars, model: BiGruModel) -> np.ndarray:
    """(B, k) hard messages for same-length frames in one forward pass."""
    feats = np.stack([pair_features(l) for l in lstars], axis=1)
    p = model.forward(feats, train=False)
    return (p.T > 0.5).astype(np.uint8)


def build_decoder(cfg: DecoderConfig, init_seed) -> BiGruModel:
    return BiGruModel(2, cfg.hidden, cfg.num_layers, cfg.mlp_dims,
                      bias=cfg.bias, init_seed=init_seed)


def train_decoder(cfg: DecoderConfig, frame_fn, seed: int, on_step=None):
    """Train the decoder on frames produced by ``frame_fn(rng) -> (m, lstar)``.

    ``frame_fn`` runs the whole transmit + detect + strip chain with a frozen
    LLR source and returns the true message and the decoder input for one
    frame. Returns (model, per-step loss list).
    """
    ss = np.random.SeedSequence(seed)
    init_ss, data_ss = ss.spawn(2)
    model = build_decoder(cfg, init_ss)
    if cfg.steps == 0:
        return model, []
    rng = np.random.default_rng(data_ss)
    opt = Adam(model.parameters(), cfg.base_lr, decay=cfg.decay,
               decay_every=cfg.decay_every, clip=cfg.grad_clip)
    losses = []
    for step in range(cfg.steps):
        msgs, feats = [], []
        for _ in range(cfg.batch):
            m, lstar = frame_fn(rng)
            msgs.append(m)
            feats.append(pair_features(lstar))
        x = np.stack(feats, axis=1)
        labels = np.stack(msgs, axis=1).astype(np.float32)
        pred = model.forward(x, train=True)
        loss, dpred = bce_loss(pred, labels)
        if not np.isfinite(loss):
            raise FloatingPointError(f"training loss diverged at step {step}: {loss}")
        opt.zero_grad()
        model.backward(dpred)
        opt.step()
        losses.append(loss)
        if on_step is not None:
            on_step(step, loss)
    return model, losses


def save_decoder(path, model: BiGruModel, extra_meta: dict | None = None) -> None:
    meta = {"kind": "decoder"}
    meta.update(model.hyper())
    if extra_meta:
        meta.update(extra_meta)
    save_checkpoint(path, meta, model.state())


def load_decoder(path, *, dtype=np.float32) -> BiGruModel:
    meta, arrays = load_checkpoint(path)
    if meta.get("kind") != "decoder":
        raise ValueError(f"{path}: checkpoint kind {meta.get('kind')!r} is not a decoder")
    model = BiGruModel.from_hyper(meta, dtype=dtype)
    model.load_state(arrays)
    return model
