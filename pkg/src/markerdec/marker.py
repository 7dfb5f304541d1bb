"""Interleaving, marker insertion/removal, and overall-rate bookkeeping.

A marker block (a short, known bit pattern) is appended after every ``nc``
coded bits of the interleaved codeword. When ``nc`` does not divide the
codeword length, the trailing partial block is emitted without a marker, so
the padded length is always ``T = n + len(marker) * (n // nc)``.

LLR convention throughout the package: ``L = log(P(bit=0)/P(bit=1))``,
positive values favour bit 0.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .channel import as_bits


@dataclass(frozen=True)
class MarkerConfig:
    """Marker pattern and coded-bits-per-block count ``nc``.

    An empty marker is permitted as a degenerate no-marker configuration.
    """

    marker: np.ndarray
    nc: int

    def __post_init__(self):
        object.__setattr__(self, "marker", as_bits(self.marker))
        if self.nc < 1:
            raise ValueError(f"nc must be >= 1, got {self.nc}")

    @property
    def nm(self) -> int:
        return int(self.marker.size)

    def marker_tuple(self) -> tuple:
        return tuple(int(b) for b in self.marker)

    def padded_length(self, n: int) -> int:
        """Transmitted length T for an n-bit coded sequence."""
        return n + self.nm * (n // self.nc)


@dataclass(frozen=True)
class Interleaver:
    """Bijection on coded-bit positions, stored 0-based."""

    perm: np.ndarray = field()

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=np.int64).ravel()
        if np.sort(perm).tolist() != list(range(perm.size)):
            raise ValueError("perm is not a permutation of 0..n-1")
        object.__setattr__(self, "perm", perm)

    @property
    def n(self) -> int:
        return int(self.perm.size)


def make_interleaver(n: int, seed: int) -> Interleaver:
    """Uniformly random permutation of n positions, deterministic by seed.

    Seed 0 is reserved for the identity permutation. Other seeds draw from
    numpy's PCG64 generator.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if seed == 0:
        return Interleaver(np.arange(n))
    return Interleaver(np.random.default_rng(seed).permutation(n))


def interleave(c: np.ndarray, il: Interleaver) -> np.ndarray:
    """Reorder ``c`` so output position j carries ``c[perm[j]]``."""
    c = np.asarray(c)
    if c.size != il.n:
        raise ValueError(f"length {c.size} does not match interleaver size {il.n}")
    return c[il.perm]


def deinterleave_llrs(llrs: np.ndarray, il: Interleaver) -> np.ndarray:
    """Positional inverse of :func:`interleave` (works for any per-position data)."""
    llrs = np.asarray(llrs)
    if llrs.size != il.n:
        raise ValueError(f"length {llrs.size} does not match interleaver size {il.n}")
    out = np.empty_like(llrs)
    out[il.perm] = llrs
    return out


def save_interleaver(il: Interleaver, path) -> None:
    """Persist as whitespace-separated 1-based indices (one line)."""
    with open(path, "w") as fh:
        fh.write(" ".join(str(int(p) + 1) for p in il.perm))
        fh.write("\n")


def load_interleaver(path) -> Interleaver:
    with open(path) as fh:
        idx = np.array(fh.read().split(), dtype=np.int64)
    return Interleaver(idx - 1)


def insert_markers(cpi: np.ndarray, cfg: MarkerConfig) -> np.ndarray:
    """Append the marker after every complete block of ``nc`` coded bits."""
    cpi = as_bits(cpi)
    n = cpi.size
    blocks = n // cfg.nc
    out = np.empty(cfg.padded_length(n), dtype=np.uint8)
    pos = 0
    for b in range(blocks):
        out[pos : pos + cfg.nc] = cpi[b * cfg.nc : (b + 1) * cfg.nc]
        pos += cfg.nc
        out[pos : pos + cfg.nm] = cfg.marker
        pos += cfg.nm
    out[pos:] = cpi[blocks * cfg.nc :]
    return out


def marker_mask(cfg: MarkerConfig, n: int) -> np.ndarray:
    """Boolean mask over the T transmitted positions, True at marker bits."""
    mask = np.zeros(cfg.padded_length(n), dtype=bool)
    step = cfg.nc + cfg.nm
    for b in range(n // cfg.nc):
        start = b * step + cfg.nc
        mask[start : start + cfg.nm] = True
    return mask


def marker_fill(cfg: MarkerConfig, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(mask, values): marker positions and the marker bit at each of them.

    ``values`` is 0 at coded positions.
    """
    mask = marker_mask(cfg, n)
    values = np.zeros(mask.size, dtype=np.uint8)
    step = cfg.nc + cfg.nm
    for b in range(n // cfg.nc):
        start = b * step + cfg.nc
        values[start : start + cfg.nm] = cfg.marker
    return mask, values


def strip_marker_llrs(llrs: np.ndarray, cfg: MarkerConfig, n: int) -> np.ndarray:
    """Drop marker-position entries, returning the n coded-position values."""
    llrs = np.asarray(llrs)
    T = cfg.padded_length(n)
    if llrs.size != T:
        raise ValueError(f"expected length {T}, got {llrs.size}")
    return llrs[~marker_mask(cfg, n)]


def overall_rate(cfg: MarkerConfig, k: int, n: int) -> Fraction:
    """Nominal rate of the concatenated code: nc*k / ((nc+nm)*n)."""
    if k > n:
        raise ValueError(f"k={k} exceeds n={n}")
    return Fraction(cfg.nc * k, (cfg.nc + cfg.nm) * n)
