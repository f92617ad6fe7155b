"""Compare the compiled and numpy integrand kernels.

Run ``python3 benchmarks/bench_kernels.py``. The first part times the kernel
itself on a realistic batch; the second times a full Hamaker sweep with each
backend in a fresh interpreter (the backend is fixed at import).
"""
import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from ioncasimir import _kernels_py, default_stack
from ioncasimir.engine import _block_eps
from ioncasimir.quantities import CONSTANTS, matsubara_xi1

try:
    from ioncasimir import _ckernels
except ImportError:
    _ckernels = None

SWEEP = """
import json, time
import numpy as np
from ioncasimir import default_stack, total_free_energy, kernels
t0 = time.perf_counter()
H = [total_free_energy(default_stack(separation=L)).hamaker_over_kBT for L in np.geomspace(1e-9, 5e-6, {count})]
print(json.dumps({{"backend": kernels.BACKEND, "seconds": time.perf_counter() - t0, "H": H}}))
"""


def kernel_inputs(L=100e-9, orders=400, nodes=15 * 64):
    stack = default_stack(separation=L)
    xi = matsubara_xi1(stack.temperature) * np.arange(1, orders + 1)
    e1 = np.array([_block_eps(stack.half_space, x) for x in xi])
    e2 = np.array([_block_eps(stack.slab, x) for x in xi])
    e3 = np.array([stack.gap.eps_b(x) for x in xi])
    q = xi * L / CONSTANTS.c
    s = np.linspace(0.0, 40.0, nodes)
    return s, 2.0 * np.sqrt(e3) * q, q * q, e1, e2, e3, stack.thickness / L


def bench_kernel(repeat):
    args = kernel_inputs()
    out = {}
    impls = {"python": _kernels_py.lifshitz_local}
    if _ckernels is not None:
        impls["cython"] = _ckernels.lifshitz_local
    for name, fn in impls.items():
        out[name] = min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))
    if _ckernels is not None:
        a, b = np.asarray(_ckernels.lifshitz_local(*args)), _kernels_py.lifshitz_local(*args)
        out["max_abs_diff"] = float(np.max(np.abs(a - b)))
    return out


def bench_sweep(count):
    res = {}
    for name, env in (("cython", {}), ("python", {"IONCASIMIR_PURE_PYTHON": "1"})):
        proc = subprocess.run([sys.executable, "-c", SWEEP.format(count=count)], capture_output=True,
                              text=True, env={**os.environ, **env}, check=True)
        res[name] = json.loads(proc.stdout)
    return res


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--count", type=int, default=30, help="points in the Hamaker sweep")
    a = p.parse_args(argv)

    k = bench_kernel(a.repeat)
    print("kernel, 400 orders x 960 nodes (best of %d):" % a.repeat)
    for name in ("python", "cython"):
        if name in k:
            print(f"  {name:7s} {k[name] * 1e3:8.2f} ms")
    if "cython" in k:
        print(f"  speedup {k['python'] / k['cython']:.1f}x, max |diff| = {k['max_abs_diff']:.1e}")
    else:
        print("  compiled kernel not built")

    s = bench_sweep(a.count)
    print(f"Hamaker sweep, {a.count} separations in [1 nm, 5 um]:")
    for name, r in s.items():
        print(f"  {name:7s} (loaded {r['backend']}) {r['seconds']:.3f} s")
    dH = max(abs(x - y) for x, y in zip(s["cython"]["H"], s["python"]["H"]))
    print(f"  max |H_cython - H_python| = {dH:.1e}")


if __name__ == "__main__":
    main()
