"""I.i.d. deletion/substitution channel.

Bit sequences are numpy uint8 arrays with values in {0, 1}. Each transmitted
bit is dropped with probability ``pd``; a surviving bit is flipped with
probability ``ps``. Deletions shorten the output without marking positions.

Randomness comes from the stdlib Mersenne Twister (``random.Random(seed)``),
consuming one uniform draw for the deletion decision and, only if the bit
survives, a second draw for the flip decision, in transmit order. This fixes
the event ordering so outputs are bit-identical for a given seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    """Deletion probability ``pd`` and substitution probability ``ps``."""

    pd: float
    ps: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.pd <= 1.0:
            raise ValueError(f"pd must be in [0, 1], got {self.pd}")
        if not 0.0 <= self.ps <= 1.0:
            raise ValueError(f"ps must be in [0, 1], got {self.ps}")


def as_bits(seq) -> np.ndarray:
    """Coerce to a uint8 bit array, validating values are 0/1."""
    bits = np.asarray(seq, dtype=np.uint8).ravel()
    if bits.size and bits.max() > 1:
        raise ValueError("bit sequence contains values outside {0, 1}")
    return bits


def transmit_rng(x: np.ndarray, params: ChannelParams, rng: random.Random) -> np.ndarray:
    """Send ``x`` through the channel drawing randomness from ``rng``."""
    x = as_bits(x)
    pd, ps = params.pd, params.ps
    out = []
    for b in x:
        if rng.random() < pd:
            continue
        if rng.random() < ps:
            out.append(b ^ 1)
        else:
            out.append(b)
    return np.array(out, dtype=np.uint8)


def transmit(x: np.ndarray, params: ChannelParams, seed: int) -> np.ndarray:
    """Send ``x`` through the channel; deterministic for a given ``seed``."""
    return transmit_rng(x, params, random.Random(seed))


def transmit_detailed(x: np.ndarray, params: ChannelParams, seed: int):
    """Like :func:`transmit` but also reports what happened per input bit.

    Returns ``(y, deleted, flipped)`` where ``deleted`` and ``flipped`` are
    boolean masks over the input positions (``flipped`` is False at deleted
    positions). Uses the same draw ordering as :func:`transmit`, so ``y``
    is identical to ``transmit(x, params, seed)``.
    """
    x = as_bits(x)
    rng = random.Random(seed)
    pd, ps = params.pd, params.ps
    deleted = np.zeros(x.size, dtype=bool)
    flipped = np.zeros(x.size, dtype=bool)
    out = []
    for t, b in enumerate(x):
        if rng.random() < pd:
            deleted[t] = True
            continue
        if rng.random() < ps:
            flipped[t] = True
            out.append(b ^ 1)
        else:
            out.append(b)
    return np.array(out, dtype=np.uint8), deleted, flipped
