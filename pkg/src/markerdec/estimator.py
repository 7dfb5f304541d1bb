"""BI-GRU LLR estimator: featurization, training loop, LLR conversion.

The network sees the received bits mapped 0 -> +1, 1 -> -1 and zero-padded
to the frame length T (pad value 0 is distinct from both bit symbols). Its
sigmoid head models P(x_t = 1 | y); the LLR convention log(P0/P1) then makes
L = log((1 - p) / p).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, as_bits, transmit
from .marker import MarkerConfig, interleave, make_interleaver, insert_markers
from .nn import Adam, BiGruModel, LOSSES, load_checkpoint, save_checkpoint

FEATURE_MODES = ("pair-window", "causal-prefix")


@dataclass
class EstimatorConfig:
    """Architecture + training recipe for one estimator network.

    ``pd_grid``/``ps_grid`` with a single entry train at fixed channel
    parameters; longer grids sample one (pd, ps) pair per frame (robust
    training). ``interleaver_seed`` 0 means identity.
    """

    nc: int = 5
    marker: tuple = (0, 1)
    feature_mode: str = "pair-window"
    num_layers: int = 2
    hidden: int = 64
    mlp_dims: tuple = (32, 1)
    loss: str = "bce"
    llr_clip: float = 10.0
    bias: bool = False
    steps: int = 2000
    batch: int = 16
    base_lr: float = 9e-5
    decay: float = 0.95
    decay_every: int = 1000
    grad_clip: float = 0.1
    pd_grid: tuple = (0.05,)
    ps_grid: tuple = (0.0,)
    interleaver_seed: int = 0

    def __post_init__(self):
        if self.feature_mode not in FEATURE_MODES:
            raise ValueError(f"unknown feature_mode {self.feature_mode!r}")
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss {self.loss!r}")
        if not self.pd_grid or not self.ps_grid:
            raise ValueError("channel grids must be nonempty")
        for name, grid in (("pd_grid", self.pd_grid), ("ps_grid", self.ps_grid)):
            if any(not 0.0 <= v <= 1.0 for v in grid):
                raise ValueError(f"{name} entries must be in [0, 1], got {grid}")

    def marker_config(self) -> MarkerConfig:
        return MarkerConfig(marker=self.marker, nc=self.nc)

    def in_dim(self, T: int) -> int:
        return 2 if self.feature_mode == "pair-window" else T


def featurize(y, T: int, mode: str = "pair-window") -> np.ndarray:
    """Map received bits to the (T, in_dim) network input."""
    y = as_bits(y)
    if y.size > T:
        raise ValueError(f"received length {y.size} exceeds frame length {T}")
    ypad = np.zeros(T, dtype=np.float32)
    ypad[: y.size] = 1.0 - 2.0 * y.astype(np.float32)
    if mode == "pair-window":
        feats = np.zeros((T, 2), dtype=np.float32)
        feats[:, 0] = ypad
        feats[:-1, 1] = ypad[1:]
        return feats
    if mode == "causal-prefix":
        feats = np.zeros((T, T), dtype=np.float32)
        for t in range(T):
            feats[t, : t + 1] = ypad[: t + 1]
        return feats
    raise ValueError(f"unknown feature mode {mode!r}")


def featurize_batch(ys, T: int, mode: str) -> np.ndarray:
    """Stack per-frame features into the (T, B, in_dim) layout."""
    feats = np.stack([featurize(y, T, mode) for y in ys], axis=1)
    return feats


@dataclass
class Estimator:
    """Trained (or initialized) LLR estimator with its featurization."""

    model: BiGruModel
    feature_mode: str
    llr_clip: float = 10.0

    def llrs(self, y, T: int) -> np.ndarray:
        return estimate_llrs(y, self, T)


def probs_to_llrs(p: np.ndarray, llr_clip: float) -> np.ndarray:
    with np.errstate(divide="ignore"):
        llrs = np.log((1.0 - p.astype(np.float64)) / p.astype(np.float64))
    return np.clip(llrs, -llr_clip, llr_clip)


def estimate_llrs(y, est: Estimator, T: int) -> np.ndarray:
    feats = featurize(y, T, est.feature_mode)[:, None, :]
    p = est.model.forward(feats, train=False)[:, 0]
    return probs_to_llrs(p, est.llr_clip)


def estimate_llrs_batch(ys, est: Estimator, T: int) -> np.ndarray:
    """(B, T) LLRs for same-length frames in one forward pass."""
    p = est.model.forward(featurize_batch(ys, T, est.feature_mode), train=False)
    return probs_to_llrs(p.T, est.llr_clip)


def make_training_batch(rng, outer, cfg: EstimatorConfig, il, T: int, batch: int):
    """Draw messages, run the transmit chain, featurize. Returns (feats, labels)."""
    mcfg = cfg.marker_config()
    labels = np.empty((T, batch), dtype=np.float32)
    ys = []
    for b in range(batch):
        msg = rng.integers(0, 2, outer.k).astype(np.uint8)
        x = insert_markers(interleave(outer.encode(msg), il), mcfg)
        pd = float(cfg.pd_grid[rng.integers(len(cfg.pd_grid))])
        ps = float(cfg.ps_grid[rng.integers(len(cfg.ps_grid))])
        y = transmit(x, ChannelParams(pd, ps), seed=int(rng.integers(2**63)))
        labels[:, b] = x
        ys.append(y)
    return featurize_batch(ys, T, cfg.feature_mode), labels


def train_estimator(cfg: EstimatorConfig, outer, seed: int, on_step=None):
    """Train on randomly generated mini-batches; labels are the sent frames.

    Returns (Estimator, per-step loss list). Aborts with a diagnostic on a
    non-finite loss. ``on_step(step, loss)`` is called after each update.
    """
    ss = np.random.SeedSequence(seed)
    init_ss, data_ss = ss.spawn(2)
    mcfg = cfg.marker_config()
    T = mcfg.padded_length(outer.n)
    model = BiGruModel(cfg.in_dim(T), cfg.hidden, cfg.num_layers, cfg.mlp_dims,
                       bias=cfg.bias, init_seed=init_ss)
    est = Estimator(model, cfg.feature_mode, cfg.llr_clip)
    if cfg.steps == 0:
        return est, []
    il = make_interleaver(outer.n, cfg.interleaver_seed)
    rng = np.random.default_rng(data_ss)
    opt = Adam(model.parameters(), cfg.base_lr, decay=cfg.decay,
               decay_every=cfg.decay_every, clip=cfg.grad_clip)
    loss_fn = LOSSES[cfg.loss]
    losses = []
    for step in range(cfg.steps):
        feats, labels = make_training_batch(rng, outer, cfg, il, T, cfg.batch)
        pred = model.forward(feats, train=True)
        loss, dpred = loss_fn(pred, labels)
        if not np.isfinite(loss):
            raise FloatingPointError(f"training loss diverged at step {step}: {loss}")
        opt.zero_grad()
        model.backward(dpred)
        opt.step()
        losses.append(loss)
        if on_step is not None:
            on_step(step, loss)
    return est, losses


def save_estimator(path, est: Estimator, extra_meta: dict | None = None) -> None:
    meta = {"kind": "estimator", "feature_mode": est.feature_mode,
            "llr_clip": repr(est.llr_clip)}
    meta.update(est.model.hyper())
    if extra_meta:
        meta.update(extra_meta)
    save_checkpoint(path, meta, est.model.state())


def load_estimator(path, *, dtype=np.float32) -> Estimator:
    meta, arrays = load_checkpoint(path)
    if meta.get("kind") != "estimator":
        raise ValueError(f"{path}: checkpoint kind {meta.get('kind')!r} is not an estimator")
    model = BiGruModel.from_hyper(meta, dtype=dtype)
    model.load_state(arrays)
    return Estimator(model, meta["feature_mode"], float(meta["llr_clip"]))
