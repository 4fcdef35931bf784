"""Time the numba kernels against their numpy twins and check they agree bit for bit.

    python3 benchmarks/bench_kernels.py --replicates 20000 --repeat 3
"""
import argparse
import time

import numpy as np

from oa_spacefill import generate_rao_hamming, generate_table1
from oa_spacefill import kernels as kn
from oa_spacefill._jit import HAS_NUMBA


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(R):
    seed = np.uint64(42)
    streams = np.arange(R, dtype=np.uint64)
    t1, oa25 = generate_table1(), generate_rao_hamming(5, 6)
    big = generate_rao_hamming(31, 32)
    out = []
    for label, oa, ud in (("roa table1", t1, False), ("u-design table1", t1, True), ("u-design oa25", oa25, True)):
        H = np.ascontiguousarray(oa.entries, dtype=np.int64)
        pos = oa.alpha_positions() if ud else np.zeros_like(H)
        out.append((f"{label}, R={R}",
                    lambda H=H, n=oa.levels, ud=ud, pos=pos: kn.oa_designs_jit(H, n, seed, streams, ud, pos),
                    lambda H=H, n=oa.levels, ud=ud, pos=pos: kn.oa_designs_np(H, n, seed, streams, ud, pos)))
    out.append((f"lhs 18x6, R={R}", lambda: kn.lhs_designs_jit(18, 6, seed, streams),
                lambda: kn.lhs_designs_np(18, 6, seed, streams)))
    out.append(("lhs 10^4x4, R=1", lambda: kn.lhs_designs_jit(10**4, 4, seed, streams[:1]),
                lambda: kn.lhs_designs_np(10**4, 4, seed, streams[:1])))
    out.append((f"iid 18x6, R={R}", lambda: kn.iid_points_jit(18, 6, seed, streams),
                lambda: kn.iid_points_np(18, 6, seed, streams)))
    Hb = np.ascontiguousarray(big.entries, dtype=np.int64)
    out.append(("agreement scan OA(961,32,31,2)", lambda: kn.first_agreement_jit(Hb, 2),
                lambda: kn.first_agreement_np(Hb, 2)))
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicates", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    print(f"{'kernel':38s} {'numba s':>9s} {'numpy s':>9s} {'speedup':>8s}  equal")
    for label, jit_fn, np_fn in cases(args.replicates):
        jit_fn()  # compile or load from cache
        tj, a = best_of(jit_fn, args.repeat)
        tn, b = best_of(np_fn, args.repeat)
        same = np.array_equal(np.asarray(a), np.asarray(b))
        print(f"{label:38s} {tj:9.4f} {tn:9.4f} {tn / tj:8.1f}  {same}", flush=True)


if __name__ == "__main__":
    main()
