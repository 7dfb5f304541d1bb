"""Model assembly: BI-GRU stack with batch norm between layers + MLP head."""
from __future__ import annotations

import numpy as np

from .core import check_finite
from .layers import BatchNorm, BiGruLayer, Dense, Relu, Sigmoid


class MlpHead:
    """Per-step MLP: ReLU-activated hidden layers, sigmoid on the final unit."""

    def __init__(self, name, in_dim, dims, rng, *, dtype=np.float32):
        if dims[-1] != 1:
            raise ValueError(f"final MLP dim must be 1, got {dims}")
        self.dims = list(dims)
        self.layers = []
        cur = in_dim
        for i, d in enumerate(dims):
            self.layers.append(Dense(f"{name}{i}", cur, d, rng, dtype=dtype))
            self.layers.append(Relu() if i < len(dims) - 1 else Sigmoid())
            cur = d

    def params(self):
        return [p for lay in self.layers for p in lay.params()]

    def forward(self, x, train):
        for lay in self.layers:
            x = lay.forward(x, train)
        return x

    def backward(self, dout):
        for lay in reversed(self.layers):
            dout = lay.backward(dout)
        return dout


class BiGruModel:
    """Sequence labeller: per-position probability that the bit is 1.

    Input (T, B, in_dim), output (T, B). Batch norm sits between consecutive
    BI-GRU layers (none after the last, which feeds the MLP directly).
    """

    def __init__(self, in_dim, hidden, num_layers, mlp_dims, *, bias=False,
                 dtype=np.float32, init_seed=0):
        if num_layers < 1 or hidden < 1:
            raise ValueError("need at least one BI-GRU layer with positive width")
        self.in_dim = in_dim
        self.hidden = hidden
        self.num_layers = num_layers
        self.mlp_dims = list(mlp_dims)
        self.bias = bias
        self.dtype = np.dtype(dtype)
        rng = np.random.default_rng(init_seed)
        self.layers = []
        cur = in_dim
        for i in range(num_layers):
            self.layers.append(BiGruLayer(f"gru{i}", cur, hidden, rng, bias=bias,
                                          dtype=self.dtype))
            cur = 2 * hidden
            if i < num_layers - 1:
                self.layers.append(BatchNorm(f"bn{i}", cur, dtype=self.dtype))
        self.head = MlpHead("mlp", cur, mlp_dims, rng, dtype=self.dtype)

    def parameters(self):
        out = [p for lay in self.layers for p in lay.params()]
        return out + self.head.params()

    def zero_grad(self):
        for p in self.parameters():
            p.zero_grad()

    def forward(self, x, train=False):
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim != 3 or x.shape[2] != self.in_dim:
            raise ValueError(f"expected (T, B, {self.in_dim}) input, got {x.shape}")
        for lay in self.layers:
            x = lay.forward(x, train)
        p = self.head.forward(x, train)
        return check_finite(p[:, :, 0], "model output")

    def backward(self, dprob):
        dout = self.head.backward(dprob[:, :, None].astype(self.dtype, copy=False))
        for lay in reversed(self.layers):
            dout = lay.backward(dout)
        return dout

    # --- persistence -----------------------------------------------------
    def hyper(self) -> dict:
        return {
            "in_dim": str(self.in_dim),
            "hidden": str(self.hidden),
            "num_layers": str(self.num_layers),
            "mlp_dims": ",".join(str(d) for d in self.mlp_dims),
            "bias": str(int(self.bias)),
        }

    @classmethod
    def from_hyper(cls, meta: dict, *, dtype=np.float32) -> "BiGruModel":
        return cls(int(meta["in_dim"]), int(meta["hidden"]), int(meta["num_layers"]),
                   [int(d) for d in meta["mlp_dims"].split(",")],
                   bias=bool(int(meta.get("bias", "0"))), dtype=dtype)

    def state(self):
        """Named arrays, trainable parameters first, then batch-norm buffers."""
        out = [(p.name, p.value) for p in self.parameters()]
        for lay in self.layers:
            if isinstance(lay, BatchNorm):
                out.extend(lay.buffers())
        return out

    def load_state(self, arrays: dict):
        for name, value in self.state():
            if name not in arrays:
                raise KeyError(f"checkpoint missing array {name}")
            src = arrays[name]
            if src.shape != value.shape:
                raise ValueError(f"{name}: shape {src.shape} != expected {value.shape}")
            value[...] = src.astype(self.dtype)
