"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from oimlab import _backend


def _cases(n_osc=16, n_spin=14):
    rng = np.random.default_rng(0)
    w = np.triu(rng.uniform(-1, 1, (n_osc, n_osc)), 1)
    w = np.ascontiguousarray(w + w.T)
    th = rng.uniform(0, 2 * np.pi, n_osc)
    ws = np.triu(rng.uniform(-1, 1, (n_spin, n_spin)), 1)
    ws = np.ascontiguousarray(ws + ws.T)
    m = rng.normal(size=(24, 24))
    m = np.ascontiguousarray(m + m.T)
    return {
        "velocity N=16": lambda k: k.velocity(w, 1.0, 0.5, th),
        "rk4_run N=16, 2000 steps": lambda k: k.rk4_run(w, 1.0, 0.5, th, 0.01, 2000, 0.0, 10),
        "jacobi_eigh 24x24": lambda k: k.jacobi_eigh(m, 1e-12, 100),
        "spin_energies N=14": lambda k: k.spin_energies(ws),
    }


def _basins_seconds(pure: bool) -> float:
    """Monte-Carlo batch in a subprocess so the backend is chosen at import."""
    code = ("import time; from oimlab import *\n"
            "from oimlab.experiments import monte_carlo_basins\n"
            "inst = IsingInstance.from_upper(3, [(0, 1, 1.0), (0, 2, -1.0), (1, 2, 1.0)])\n"
            "t = time.perf_counter(); monte_carlo_basins(inst, OimParams(1.0, 0.5), 100, 0)\n"
            "print(time.perf_counter() - t)")
    env = dict(os.environ)
    env.pop("OIMLAB_PURE_PYTHON", None)
    if pure:
        env["OIMLAB_PURE_PYTHON"] = "1"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    return float(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = _backend.available()
    names = sorted(backends)
    print(f"{'kernel':<28}" + "".join(f"{n:>12}" for n in names) + "     speedup")
    for label, fn in _cases().items():
        times = {}
        for name in names:
            k = backends[name]
            number = 1 if name == "python" and "spin" in label else 3
            times[name] = min(timeit.repeat(lambda: fn(k), number=number,
                                            repeat=args.repeat)) / number
        row = "".join(f"{times[n] * 1e3:>10.3f}ms" for n in names)
        speed = f"{times['python'] / times['cython']:>10.1f}x" if "cython" in times else ""
        print(f"{label:<28}{row}{speed}")
    mc = {n: _basins_seconds(n == "python") for n in names}
    row = "".join(f"{mc[n] * 1e3:>10.1f}ms" for n in names)
    speed = f"{mc['python'] / mc['cython']:>10.1f}x" if "cython" in mc else ""
    print(f"{'monte_carlo_basins 100 runs':<28}{row}{speed}")


if __name__ == "__main__":
    main()
