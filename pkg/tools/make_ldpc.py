"""Generate the regular (204, 102) parity-check matrix shipped with the package.

Progressive edge growth: every variable gets dv edges, each time picking the
check farthest from it in the current Tanner graph among checks still under
the target degree dc (ties broken by lowest degree, then seeded random).
The result is accepted only if it is exactly (dv, dc)-regular, 4-cycle-free
and full rank over GF(2); otherwise the next seed is tried.

Usage: python tools/make_ldpc.py [--n 204] [--m 102] [--dv 3] [--seed 1]
                                 [--out src/markerdec/data/ldpc_204_102.alist]
"""
from __future__ import annotations

import argparse
import sys
from collections import deque
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from markerdec.ldpc import LdpcCode, write_alist  # noqa: E402


def peg(n, m, dv, dc, rng):
    var_adj = [[] for _ in range(n)]
    chk_adj = [[] for _ in range(m)]
    deg = np.zeros(m, dtype=int)

    def check_distances(v):
        """BFS distances from variable v to every check; -1 if unreachable."""
        dist = np.full(m, -1)
        seen_v = np.zeros(n, dtype=bool)
        seen_v[v] = True
        frontier = [v]
        d = 1
        while frontier:
            checks = []
            for vv in frontier:
                for c in var_adj[vv]:
                    if dist[c] < 0:
                        dist[c] = d
                        checks.append(c)
            frontier = []
            for c in checks:
                for vv in chk_adj[c]:
                    if not seen_v[vv]:
                        seen_v[vv] = True
                        frontier.append(vv)
            d += 2
        return dist

    for v in range(n):
        for _ in range(dv):
            dist = check_distances(v) if var_adj[v] else np.full(m, -1)
            open_c = np.nonzero(deg < dc)[0]
            if open_c.size == 0:
                return None
            far = open_c[dist[open_c] < 0]
            if far.size == 0:
                dmax = dist[open_c].max()
                far = open_c[dist[open_c] == dmax]
            dmin = deg[far].min()
            far = far[deg[far] == dmin]
            c = int(rng.choice(far))
            var_adj[v].append(c)
            chk_adj[c].append(v)
            deg[c] += 1

    H = np.zeros((m, n), dtype=np.uint8)
    for v in range(n):
        H[var_adj[v], v] = 1
    return H


def has_4cycle(H):
    overlap = (H.astype(np.int64) @ H.T.astype(np.int64))
    np.fill_diagonal(overlap, 0)
    return bool((overlap > 1).any())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=204)
    ap.add_argument("--m", type=int, default=102)
    ap.add_argument("--dv", type=int, default=3)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", default="src/markerdec/data/ldpc_204_102.alist")
    args = ap.parse_args()

    dc = args.n * args.dv // args.m
    if args.n * args.dv != args.m * dc:
        ap.error("n*dv must be divisible by m")

    for seed in range(args.seed, args.seed + 200):
        rng = np.random.default_rng(seed)
        H = peg(args.n, args.m, args.dv, dc, rng)
        if H is None:
            continue
        if not (H.sum(axis=0) == args.dv).all() or not (H.sum(axis=1) == dc).all():
            continue
        if has_4cycle(H):
            continue
        code = LdpcCode(H)
        if code.rank != args.m:
            continue
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        write_alist(H, out)
        print(f"seed {seed}: ({args.n},{code.k}) regular ({args.dv},{dc}), "
              f"girth>4, rank {code.rank} -> {out}")
        return
    raise SystemExit("no admissible matrix found in seed range")


if __name__ == "__main__":
    main()
