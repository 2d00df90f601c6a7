"""Timing comparison of the numba-jitted kernels against the pure-numpy
fallback path.

The JIT flag is read at import time, so the script re-launches itself in a
subprocess for each mode:

    python3 benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time


def bench_integrate(repeats=200):
    from diffusion_lens.sir import SirParams, SirState, integrate

    p = SirParams(2.65, 2.04, 12423)
    init = SirState(12422, 1, 0)
    integrate(p, init, horizon=32.0, step=0.01)  # warm-up / compile
    start = time.perf_counter()
    for _ in range(repeats):
        integrate(p, init, horizon=32.0, step=0.01)
    return (time.perf_counter() - start) / repeats


def bench_kmeans(repeats=10):
    import numpy as np

    from diffusion_lens.embed import EmbeddingMatrix, cosine_normalize
    from diffusion_lens.topics import kmeans

    rng = np.random.default_rng(3)
    n, d, k = 4000, 16, 20
    centers = rng.standard_normal((k, d))
    data = centers[rng.integers(0, k, n)] + 0.15 * rng.standard_normal((n, d))
    matrix, _ = cosine_normalize(
        EmbeddingMatrix([f"d{i}" for i in range(n)], data)
    )
    kmeans(matrix, k, seed=0)  # warm-up / compile
    start = time.perf_counter()
    for _ in range(repeats):
        kmeans(matrix, k, seed=0)
    return (time.perf_counter() - start) / repeats


def run_mode():
    from diffusion_lens._accel import JIT_ENABLED

    mode = "numba" if JIT_ENABLED else "numpy"
    print(f"{mode:>6}  integrate {bench_integrate() * 1e3:9.3f} ms/call"
          f"  kmeans {bench_kmeans() * 1e3:9.2f} ms/call")


def main():
    if "--mode" in sys.argv:
        run_mode()
        return
    print("kernel timings (lower is better)", flush=True)
    for flag in ("1", "0"):
        env = dict(os.environ, DIFFUSION_LENS_JIT=flag)
        subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--mode"],
            env=env, check=True,
        )


if __name__ == "__main__":
    main()
