"""Compare the numba and numpy kernel paths.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Sizes mirror the workloads in the verification suites: the classicality
check on the F^Omega basis (405 operators on C^25 at d = 5) and the
dispersion scan over 1000 qudit states.
"""
import argparse
import json
import time

import numpy as np

from bohrepr import _kernels

KERNELS = {"pair_commutator": "pair_commutator_residuals", "dispersions": "dispersions"}
CASES = [
    ("pair_commutator", "spin Def(S)+P", (7, 4)),
    ("pair_commutator", "F^Omega d=3", (39, 9)),
    ("pair_commutator", "F^Omega d=5", (405, 25)),
    ("dispersions", "scan d=3", (1000, 6, 3)),
    ("dispersions", "scan d=5", (1000, 10, 5)),
    ("dispersions", "scan d=16", (1000, 32, 16)),
]


def _inputs(kind, shape, rng):
    def cplx(*s):
        return rng.standard_normal(s) + 1j * rng.standard_normal(s)

    if kind == "pair_commutator":
        k, n = shape
        return cplx(k, n, n), cplx(n)
    s, k, n = shape
    return cplx(s, n), cplx(k, n, n)


def best_of(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--json", help="also write results to this path")
    args = parser.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba is not installed; only the numpy path is available")
    t0 = time.perf_counter()
    _kernels.warmup()
    print(f"numba warmup (compile or cache load): {time.perf_counter() - t0:.3f}s")

    rng = np.random.default_rng(args.seed)
    rows = []
    print(f"{'kernel':<16} {'case':<16} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8} {'max diff':>9}")
    for kind, label, shape in CASES:
        inputs = _inputs(kind, shape, rng)
        np_fn = getattr(_kernels, f"{KERNELS[kind]}_numpy")
        nb_fn = getattr(_kernels, f"{KERNELS[kind]}_numba")
        nb_fn(*inputs)
        t_np = best_of(np_fn, inputs, args.repeat)
        t_nb = best_of(nb_fn, inputs, args.repeat)
        diff = float(np.max(np.abs(np_fn(*inputs) - nb_fn(*inputs))))
        rows.append({"kernel": kind, "case": label, "shape": shape, "numpy_s": t_np, "numba_s": t_nb, "max_diff": diff})
        print(f"{kind:<16} {label:<16} {t_np * 1e3:11.3f} {t_nb * 1e3:11.3f} {t_np / t_nb:8.2f} {diff:9.1e}")

    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
