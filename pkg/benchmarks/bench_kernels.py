"""Time the batched scattering kernel: compiled extension vs pure Python.

    python benchmarks/bench_kernels.py [--count N] [--repeat R]
"""

import argparse
import timeit

import numpy as np

from eomnet import build_coefficient_matrix, preset
from eomnet._backend import available_backends


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=1001, help="frequencies per sweep")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = available_backends()
    omegas = np.linspace(-4, 4, args.count)
    print(f"{'preset':<22}{'backend':<10}{'best ms':>10}{'speedup':>10}")
    for name in ("fig2_theta_half_pi", "fig4_theta_half_pi"):
        cm = build_coefficient_matrix(preset(name))
        times = {}
        for label, kernel in sorted(backends.items()):
            kernel(cm.m, cm.sqrt_gamma, omegas)  # warm up
            runs = timeit.repeat(lambda: kernel(cm.m, cm.sqrt_gamma, omegas), number=1, repeat=args.repeat)
            times[label] = min(runs)
        if len(times) > 1:
            ref = backends["python"](cm.m, cm.sqrt_gamma, omegas)
            err = np.max(np.abs(backends["compiled"](cm.m, cm.sqrt_gamma, omegas) - ref))
            print(f"  max |compiled - python| = {err:.1e}")
        for label, t in sorted(times.items()):
            print(f"{name:<22}{label:<10}{t * 1e3:>10.2f}{times['python'] / t:>9.1f}x")
    if "compiled" not in backends:
        print("compiled extension not built; only the Python kernel was timed")


if __name__ == "__main__":
    main()
