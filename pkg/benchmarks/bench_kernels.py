"""Time the numba kernels against their numpy fallbacks on a cusped ball.

    python3 benchmarks/bench_kernels.py [--radius 5] [--depth 3] [--triangles 20000]

Both variants are called directly, so the environment flag does not matter
here; results are checked for agreement before timings are printed.
"""
from __future__ import annotations

import argparse
import random
import time

import numpy as np

from cuspwork import _accel
from cuspwork.cusped import cusped_from_pair
from cuspwork.grouppair import free_pair


def timed(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t)
    return best, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--radius", type=int, default=5)
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--triangles", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")

    g = cusped_from_pair(free_pair(2), args.radius, args.depth).graph
    print(f"graph: {g.n} vertices, {len(g.edges)} edges")
    ip, ix = g.indptr, g.indices

    rng = random.Random(args.seed)
    tri = np.array([[rng.randrange(g.n) for _ in range(3)] for _ in range(args.triangles)], dtype=np.int64)
    pair_list = sorted({(int(a), int(b)) for x, y, z in tri for a, b in ((x, y), (y, z), (z, x))})
    pair_id = {p: i for i, p in enumerate(pair_list)}
    pairs = np.array(pair_list, dtype=np.int64)
    ptri = np.array([[pair_id[(x, y)], pair_id[(y, z)], pair_id[(z, x)]] for x, y, z in tri.tolist()], dtype=np.int64)

    # warm the JIT so compile time is excluded
    _accel.all_pairs_bfs_numba(ip, ix)
    dist = _accel.all_pairs_bfs_numpy(ip, ix)
    maxlen = int(dist.max()) + 1
    _accel.lex_paths_numba(ip, ix, dist, pairs[:4], maxlen)
    p0, l0 = _accel.lex_paths_numpy(ip, ix, dist, pairs[:4], maxlen)
    _accel.triangle_delta_numba(dist, p0, l0, np.zeros((1, 3), dtype=np.int64))

    rows = []
    t_np, d_np = timed(_accel.all_pairs_bfs_numpy, ip, ix)
    t_nb, d_nb = timed(_accel.all_pairs_bfs_numba, ip, ix)
    assert np.array_equal(d_np, d_nb)
    rows.append(("all-pairs BFS", t_np, t_nb))

    t_np, (pa, la) = timed(_accel.lex_paths_numpy, ip, ix, dist, pairs, maxlen, repeat=1)
    t_nb, (pb, lb) = timed(_accel.lex_paths_numba, ip, ix, dist, pairs, maxlen, repeat=1)
    assert np.array_equal(pa, pb) and np.array_equal(la, lb)
    rows.append((f"lex paths ({len(pairs)})", t_np, t_nb))

    t_np, a = timed(_accel.triangle_delta_numpy, dist, pa, la, ptri, repeat=1)
    t_nb, b = timed(_accel.triangle_delta_numba, dist, pa, la, ptri, repeat=1)
    assert int(a) == int(b)
    rows.append((f"thin triangles ({args.triangles})", t_np, t_nb))

    print(f"{'kernel':<28}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for name, a, b in rows:
        print(f"{name:<28}{a:>10.4f}{b:>10.4f}{a / b:>9.1f}")


if __name__ == "__main__":
    main()
