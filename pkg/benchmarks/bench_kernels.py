"""Numba vs pure-numpy timings for the batched kernels and a full sweep.

    python3 benchmarks/bench_kernels.py [--draws 2000] [--repeat 5]

Kernel timings run in-process (best of ``--repeat``, compile excluded and
reported separately). Sweep timings run the CLI in fresh interpreters with
``ALTCSIT_DISABLE_NUMBA`` set each way, so they include import and, for a cold
numba cache, compilation.
"""
import argparse
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from altcsit import analysis, precoding
from altcsit.scheme import stream_powers


def complex_normal(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def bench_kernels(K, draws, repeat):
    rng = np.random.default_rng(K)
    H_p = complex_normal(rng, (draws, K, K))
    rows_d = complex_normal(rng, (draws, K - 1, K))
    t0 = time.perf_counter()
    precoding.precoders_numba(H_p[:2], rows_d[:2])
    Vp, Vd, _ = precoding.precoders_numpy(H_p, rows_d)
    gp, gd = H_p @ Vp, np.concatenate([complex_normal(rng, (draws, 1, K)), rows_d], axis=1) @ Vd
    var = stream_powers(K, 1e10).source_variances()
    k, obs = analysis.secrecy_pairs(K)[-1]
    analysis.leakage_numba(gp[:2], gd[:2], var, k, obs)
    compile_s = time.perf_counter() - t0
    rows = [
        ("precoders", best_of(lambda: precoding.precoders_numba(H_p, rows_d), repeat),
         best_of(lambda: precoding.precoders_numpy(H_p, rows_d), repeat)),
        (f"leakage {analysis.pair_key(k, obs)}", best_of(lambda: analysis.leakage_numba(gp, gd, var, k, obs), repeat),
         best_of(lambda: analysis.leakage_numpy(gp, gd, var, k, obs), repeat)),
    ]
    return compile_s, rows


def bench_sweep(K, disable):
    env = dict(os.environ, ALTCSIT_DISABLE_NUMBA="1" if disable else "0")
    cmd = [sys.executable, "-m", "altcsit", "--users", str(K), "--out", os.devnull]
    t0 = time.perf_counter()
    subprocess.run(cmd, env=env, check=True, capture_output=True)
    return time.perf_counter() - t0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--users", type=int, nargs="+", default=[2, 3, 4, 6])
    args = ap.parse_args(argv)

    print(f"kernels, {args.draws} draws, best of {args.repeat}")
    print(f"{'K':>2}  {'kernel':<14} {'numba ms':>10} {'numpy ms':>10} {'speedup':>8}")
    for K in args.users:
        compile_s, rows = bench_kernels(K, args.draws, args.repeat)
        for name, t_nb, t_np in rows:
            print(f"{K:>2}  {name:<14} {1e3 * t_nb:>10.2f} {1e3 * t_np:>10.2f} {t_np / t_nb:>7.2f}x")
        print(f"{K:>2}  {'first call':<14} {1e3 * compile_s:>10.0f} ms (compile or cache load)")

    print("\nfull CLI sweep (60-140 dB, 200 draws), fresh interpreter")
    print(f"{'K':>2}  {'numba s':>8} {'numpy s':>8}")
    for K in args.users:
        print(f"{K:>2}  {bench_sweep(K, False):>8.2f} {bench_sweep(K, True):>8.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
