"""Rate-1/2 memory-2 convolutional code, generators (5, 7) octal.

Output pair per input bit m_t (zero initial state, no termination tail):
    c_{2t}   = m_t ^ m_{t-2}            (generator 101)
    c_{2t+1} = m_t ^ m_{t-1} ^ m_{t-2}  (generator 111)

Decoding is Viterbi over the 4-state trellis with a free end state; the
soft-decision metric is sum_t (1 - 2 c_t) * L_t, so it consumes the same
sign convention as the detector LLRs (positive favors bit 0).
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .channel import as_bits


class ConvCode:
    """Outer-code adapter (k message bits -> n = 2k coded bits)."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k
        self.n = 2 * k

    def encode(self, msg) -> np.ndarray:
        m = as_bits(msg)
        if m.size != self.k:
            raise ValueError(f"message length {m.size} != k={self.k}")
        return conv_encode(m)


def conv_encode(msg) -> np.ndarray:
    m = as_bits(msg)
    k = m.size
    pad = np.concatenate([np.zeros(2, dtype=np.uint8), m])
    out = np.empty(2 * k, dtype=np.uint8)
    out[0::2] = pad[2:] ^ pad[:-2]
    out[1::2] = pad[2:] ^ pad[1:-1] ^ pad[:-2]
    return out


def llr_to_hard(llrs) -> np.ndarray:
    """Hard decisions from LLRs log(P0/P1); ties (L == 0) go to bit 0."""
    return (np.asarray(llrs, dtype=np.float64) < 0).astype(np.uint8)


def viterbi_sdd(llrs) -> np.ndarray:
    """Soft-decision Viterbi decode of 2k LLRs into k message bits."""
    return kernels.viterbi_57(np.asarray(llrs, dtype=np.float64))


def viterbi_hdd(bits) -> np.ndarray:
    """Hard-decision Viterbi: Hamming-metric decode of 2k hard bits."""
    b = as_bits(bits)
    return kernels.viterbi_57(1.0 - 2.0 * b.astype(np.float64))
