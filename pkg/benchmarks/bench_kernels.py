"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from obethermo import SystemParams, obe_generator
from obethermo import _pykernels
from obethermo.cascade import initial_cascade_state, truncation_for

try:
    from obethermo import _ckernels
except ImportError:
    _ckernels = None


def cases():
    p = SystemParams.from_ratios(10.0, 2.0, 1e-4, 2.0)
    m = np.ascontiguousarray(obe_generator(p).matrix)
    y0 = np.array([1, 0, 0, 0], dtype=complex)
    h = 1e-3 / p.gamma
    yield "rk4_linear, 20000 steps", lambda mod: mod.rk4_linear(m, y0, h, 20000, 10)
    for alpha in (4, 16):
        n_max = truncation_for(alpha)
        amp = np.ascontiguousarray(initial_cascade_state(alpha, n_max).amplitudes)
        g0 = 0.01 / alpha
        top = np.sqrt(1e-4 + 4 * g0 ** 2 * (n_max + 1))
        step = 0.01 / top
        n = int(2 * np.pi / 0.0224 / step)
        yield (f"jc_rk4, alpha={alpha}, n_max={n_max}, {n} steps",
               lambda mod, amp=amp, g0=g0, step=step, n=n: mod.jc_rk4(0.01, g0, amp, step, n, 100))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    print(f"{'case':45s} " + " ".join(f"{name:>12s}" for name, _ in backends) + "   speedup")
    for label, fn in cases():
        times = []
        ref = None
        for _, mod in backends:
            out = fn(mod)
            ref = out if ref is None else ref
            assert np.allclose(out, ref, rtol=1e-10, atol=1e-12), "backends disagree"
            times.append(min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)))
        speed = f"{times[0] / times[-1]:8.1f}x" if len(times) > 1 else "   n/a"
        print(f"{label:45s} " + " ".join(f"{t * 1e3:10.2f}ms" for t in times) + f"  {speed}")


if __name__ == "__main__":
    main()
