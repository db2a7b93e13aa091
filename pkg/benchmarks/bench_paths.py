"""Time the compiled path kernel against the numpy fallback.

    python benchmarks/bench_paths.py [--paths 20000] [--steps 500] [--repeat 3]
"""

import argparse
import time

import numpy as np

from rangecorr import kernels


def best_time(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=20_000)
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"backends: {', '.join(backends)}; {args.paths} paths x {args.steps} steps, workers={args.workers}")
    for label, process in (("bm", kernels.PROCESS_BM), ("vg", kernels.PROCESS_VG)):
        results = {}
        for name in backends:
            results[name] = best_time(
                lambda: kernels.simulate_extremes(12345, 0, args.paths, args.steps, process, 0.5,
                                                  0.0, 0.5, workers=args.workers, backend=name),
                args.repeat,
            )
        line = [f"{label}:"] + [f"{n} {t:.3f}s" for n, (t, _) in results.items()]
        if len(results) == 2:
            (tc, oc), (tp, op) = results["compiled"], results["python"]
            line.append(f"speedup {tp / tc:.2f}x, max |diff| {np.max(np.abs(oc - op)):.1e}")
        print("  ".join(line))


if __name__ == "__main__":
    main()
