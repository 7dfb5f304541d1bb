"""LDPC outer code: alist parsing, systematic-by-permutation encoding, SPA.

Parity-check matrices ship in MacKay's alist format (zero-padded adjacency
lists, 1-based indices). The encoder reduces H to [I_r | A] over GF(2) with
full pivoting; the column permutation picks which codeword positions carry
the message.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .channel import as_bits


def parse_alist(text: str) -> np.ndarray:
    """Parse alist text into a dense uint8 parity-check matrix (m, n)."""
    tok = text.split()
    if len(tok) < 4:
        raise ValueError("alist: truncated header")
    try:
        vals = [int(t) for t in tok]
    except ValueError as e:
        raise ValueError(f"alist: non-integer token ({e})") from None
    n, m, dv_max, dc_max = vals[0], vals[1], vals[2], vals[3]
    if n <= 0 or m <= 0:
        raise ValueError(f"alist: bad dimensions n={n} m={m}")
    expect = 4 + n + m + n * dv_max + m * dc_max
    if len(vals) != expect:
        raise ValueError(f"alist: expected {expect} tokens, got {len(vals)}")
    pos = 4
    dv = vals[pos : pos + n]
    pos += n
    dc = vals[pos : pos + m]
    pos += m
    if max(dv) > dv_max or max(dc) > dc_max:
        raise ValueError("alist: degree exceeds stated maximum")
    if min(dv) < 0 or min(dc) < 0:
        raise ValueError("alist: negative degree")
    if sum(dv) != sum(dc):
        raise ValueError("alist: column/row edge counts disagree")

    H = np.zeros((m, n), dtype=np.uint8)
    for j in range(n):
        entries = vals[pos : pos + dv_max]
        pos += dv_max
        for e in entries[: dv[j]]:
            if not 1 <= e <= m:
                raise ValueError(f"alist: row index {e} out of range in column {j + 1}")
            H[e - 1, j] = 1
        if any(e != 0 for e in entries[dv[j] :]):
            raise ValueError(f"alist: nonzero padding in column {j + 1}")
    H_rows = np.zeros((m, n), dtype=np.uint8)
    for i in range(m):
        entries = vals[pos : pos + dc_max]
        pos += dc_max
        for e in entries[: dc[i]]:
            if not 1 <= e <= n:
                raise ValueError(f"alist: column index {e} out of range in row {i + 1}")
            H_rows[i, e - 1] = 1
        if any(e != 0 for e in entries[dc[i] :]):
            raise ValueError(f"alist: nonzero padding in row {i + 1}")
    if not np.array_equal(H, H_rows):
        raise ValueError("alist: column and row adjacency lists disagree")
    return H


def write_alist(H: np.ndarray, path) -> None:
    H = np.asarray(H, dtype=np.uint8)
    m, n = H.shape
    dv = H.sum(axis=0).astype(int)
    dc = H.sum(axis=1).astype(int)
    dv_max, dc_max = int(dv.max()), int(dc.max())
    lines = [f"{n} {m}", f"{dv_max} {dc_max}"]
    lines.append(" ".join(str(d) for d in dv))
    lines.append(" ".join(str(d) for d in dc))
    for j in range(n):
        idx = (np.nonzero(H[:, j])[0] + 1).tolist()
        lines.append(" ".join(str(i) for i in idx + [0] * (dv_max - len(idx))))
    for i in range(m):
        idx = (np.nonzero(H[i])[0] + 1).tolist()
        lines.append(" ".join(str(j) for j in idx + [0] * (dc_max - len(idx))))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


@dataclass
class SpaResult:
    codeword: np.ndarray
    message: np.ndarray
    iterations: int
    converged: bool
    posterior: np.ndarray


class LdpcCode:
    """Binary LDPC code defined by a parity-check matrix."""

    def __init__(self, H: np.ndarray):
        H = np.asarray(H, dtype=np.uint8) & 1
        self.H = H
        self.m, self.n = H.shape

        # Reduce a working copy to [I_r | A] with row xors plus column swaps.
        work = H.copy()
        perm = np.arange(self.n)
        rank = 0
        for p in range(self.m):
            pivot = None
            for jj in range(p, self.n):
                rows = np.nonzero(work[p:, jj])[0]
                if rows.size:
                    pivot = (p + rows[0], jj)
                    break
            if pivot is None:
                break
            i, jj = pivot
            if i != p:
                work[[p, i]] = work[[i, p]]
            if jj != p:
                work[:, [p, jj]] = work[:, [jj, p]]
                perm[[p, jj]] = perm[[jj, p]]
            others = np.nonzero(work[:, p])[0]
            others = others[others != p]
            work[others] ^= work[p]
            rank = p + 1
        self.rank = rank
        self.k = self.n - rank
        self.perm = perm
        self._A = work[:rank, rank:]

        dc = H.sum(axis=1).astype(int)
        cn_idx = np.full((self.m, int(dc.max())), -1, dtype=np.int32)
        for i in range(self.m):
            idx = np.nonzero(H[i])[0]
            cn_idx[i, : idx.size] = idx
        self.cn_idx = cn_idx

    def encode(self, msg) -> np.ndarray:
        msg = as_bits(msg)
        if msg.size != self.k:
            raise ValueError(f"message length {msg.size} != k={self.k}")
        parity = (self._A @ msg) & 1
        cw = np.empty(self.n, dtype=np.uint8)
        cw[self.perm[: self.rank]] = parity
        cw[self.perm[self.rank :]] = msg
        return cw

    def extract_message(self, codeword) -> np.ndarray:
        codeword = as_bits(codeword)
        return codeword[self.perm[self.rank :]]

    def syndrome(self, bits) -> np.ndarray:
        return (self.H @ as_bits(bits)) & 1

    def decode(self, llrs, max_iter: int = 100) -> SpaResult:
        llrs = np.asarray(llrs, dtype=np.float64)
        if llrs.size != self.n:
            raise ValueError(f"LLR length {llrs.size} != n={self.n}")
        bits, iters, ok, post = kernels.spa_decode(llrs, self.cn_idx, max_iter)
        bits = np.asarray(bits, dtype=np.uint8)
        return SpaResult(bits, self.extract_message(bits), int(iters), bool(ok), post)


def load_alist(path) -> LdpcCode:
    with open(path) as f:
        return LdpcCode(parse_alist(f.read()))
