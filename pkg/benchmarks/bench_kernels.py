"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--json out.json]

Each case runs on both backends with identical inputs; outputs are compared
before timings are reported.
"""

import argparse
import json
import time

import numpy as np

from evenpowers import _kernels
from evenpowers.arith import _dyadic, dyadic_range


def _cases():
    rng = np.random.default_rng(0)
    ms = dyadic_range(2, 10 ** 6)
    alphas = rng.random(2000)
    nums, ebits = _dyadic(alphas)
    squares = np.arange(1, 317, dtype=np.int64) ** 2
    fourth = np.arange(1, 18, dtype=np.int64) ** 4
    partials = (fourth[:, None] + (np.arange(1, 7, dtype=np.int64) ** 6)[None, :]).ravel()
    lists = [np.arange(1, 7, dtype=np.int64) ** 6, fourth, squares]
    flat = np.concatenate(lists)
    offsets = np.cumsum([0] + [len(x) for x in lists]).astype(np.int64)
    return {
        "lpf_sieve(10^6)": lambda m: m.lpf_sieve(10 ** 6),
        "power_residue_counts(8, 50000)": lambda m: m.power_residue_counts(8, 50_000),
        "weyl_sums(k=2, 1000 terms x 2000 alphas)": lambda m: m.weyl_sums(ms, 2, nums, ebits, alphas),
        "sumset_counts(N=10^5)": lambda m: m.sumset_counts(partials, squares, 100_000),
        "count_nested(n<=3000, K={6,4,2})": lambda m: sum(
            m.count_nested(n, flat, offsets) for n in range(3000)
        ),
    }


def _same(a, b):
    if isinstance(a, np.ndarray):
        return np.allclose(a, b, rtol=1e-9, atol=1e-9)
    return a == b


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", help="also write results here")
    args = ap.parse_args(argv)

    mods = {m.BACKEND: m for m in _kernels.backends()}
    if "cython" not in mods:
        print("compiled extension not built; only the python backend is available")
    rows = []
    for name, fn in _cases().items():
        times, outs = {}, {}
        for label, mod in mods.items():
            best = float("inf")
            for _ in range(args.repeat):
                t0 = time.perf_counter()
                outs[label] = fn(mod)
                best = min(best, time.perf_counter() - t0)
            times[label] = best
        agree = all(_same(outs["python"], v) for v in outs.values())
        speedup = times["python"] / times["cython"] if "cython" in times else None
        rows.append({"case": name, **{f"{k}_s": v for k, v in times.items()},
                     "speedup": speedup, "agree": agree})

    width = max(len(r["case"]) for r in rows)
    print(f"{'case':<{width}}  {'python s':>10}  {'cython s':>10}  {'speedup':>8}  agree")
    for r in rows:
        cy = "-" if r.get("cython_s") is None else f"{r['cython_s']:.4f}"
        sp = "-" if r["speedup"] is None else f"{r['speedup']:.1f}x"
        print(f"{r['case']:<{width}}  {r['python_s']:>10.4f}  {cy:>10}  {sp:>8}  {r['agree']}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
