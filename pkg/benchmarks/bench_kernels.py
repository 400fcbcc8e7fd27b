"""Compare the compiled and pure-Python kernels.

Run with ``python3 benchmarks/bench_kernels.py``.  The polynomial-level timing
spawns one subprocess per backend because the choice is fixed at import.
"""

import argparse
import os
import random
import subprocess
import sys
import timeit

import numpy as np

from feyninv import _pykernels

try:
    from feyninv import _ckernels
except ImportError:
    _ckernels = None

POLY_SNIPPET = """
import random, timeit
from feyninv import kernels
from feyninv.invariant import random_polynomial
rng = random.Random(0)
ring = ("w", "wp", "wh", "wb")
p = random_polynomial(ring, 8, 60, rng)
q = random_polynomial(ring, 8, 60, rng)
t = min(timeit.repeat(lambda: p * q, number=5, repeat=3)) / 5
print(kernels.BACKEND, t)
"""


def packed_operands(n, fields=4, width=16, rng=None):
    rng = rng or random.Random(0)
    out = {}
    while len(out) < n:
        key = sum(rng.randint(0, 8) << (width * i) for i in range(fields))
        out[key] = rng.randint(-10**6, 10**6) or 1
    return out


def best(fn, number, repeat=3):
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--terms", type=int, default=300)
    ap.add_argument("--points", type=int, default=20000)
    args = ap.parse_args(argv)

    impls = [("python", _pykernels)]
    if _ckernels is not None:
        impls.append(("cython", _ckernels))
    else:
        print("compiled kernels not built; timing the Python path only")

    rng = random.Random(1)
    p, q = packed_operands(args.terms, rng=rng), packed_operands(args.terms, rng=rng)
    exps = np.array([[rng.randint(0, 6) for _ in range(4)] for _ in range(args.terms)], dtype=np.int64)
    coeffs = np.array([rng.uniform(-1, 1) for _ in range(args.terms)])
    pts = np.random.default_rng(2).random((args.points, 4))

    ref_mul = _pykernels.mul_packed(p, q)
    ref_eval = _pykernels.eval_monomials(exps, coeffs, pts)
    rows = []
    for name, mod in impls:
        assert mod.mul_packed(p, q) == ref_mul
        assert np.allclose(mod.eval_monomials(exps, coeffs, pts), ref_eval, rtol=1e-12)
        rows.append((name, best(lambda: mod.mul_packed(p, q), 3), best(lambda: mod.eval_monomials(exps, coeffs, pts), 3)))

    print(f"{'backend':<8} {'mul_packed':>12} {'eval_monomials':>16}")
    for name, tm, te in rows:
        print(f"{name:<8} {tm * 1e3:>10.2f}ms {te * 1e3:>14.2f}ms")
    if len(rows) == 2:
        print(f"speedup  {rows[0][1] / rows[1][1]:>11.1f}x {rows[0][2] / rows[1][2]:>15.1f}x")

    print("\nPolynomial product, degree 8, 60 x 60 terms")
    for flag in ("1", "0"):
        env = dict(os.environ, FEYNINV_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", POLY_SNIPPET], env=env, capture_output=True, text=True, check=True)
        backend, t = res.stdout.split()
        print(f"{backend:<8} {float(t) * 1e3:>10.2f}ms")


if __name__ == "__main__":
    main()
