"""Compare the numba and numpy backends of the two hot kernels.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints median wall times per call and the speed-up; compile time for the
numba versions is excluded by a warm-up call.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from hierdu import haar_gate
from hierdu._kernels import apply_two_site, flat_perm_scan


def timed(fn, repeat: int) -> float:
    fn()
    out = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    cases = []
    for q, N in ((2, 16), (2, 20), (3, 12), (4, 8)):
        psi = rng.standard_normal(q**N) + 1j * rng.standard_normal(q**N)
        U = haar_gate(q, 1).matrix
        for use in ("numpy", "numba"):
            cases.append((f"apply_two_site q={q} N={N}", use,
                          lambda psi=psi, U=U, q=q, N=N, use=use: apply_two_site(psi, U, q, N, N // 2 - 1, N // 2, use=use)))
    for use in ("numpy", "numba"):
        cases.append(("flat_perm_scan q=3 (50k perms)", use, lambda use=use: flat_perm_scan(3, 0, 50_000, use=use)))

    print(f"{'kernel':<34} {'numpy [ms]':>11} {'numba [ms]':>11} {'speed-up':>9}")
    times: dict[str, dict[str, float]] = {}
    for name, use, fn in cases:
        times.setdefault(name, {})[use] = timed(fn, args.repeat)
    for name, t in times.items():
        print(f"{name:<34} {1e3 * t['numpy']:11.2f} {1e3 * t['numba']:11.2f} {t['numpy'] / t['numba']:8.1f}x")


if __name__ == "__main__":
    main()
