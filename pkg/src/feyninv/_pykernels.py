"""Pure-Python reference kernels.

Same call signatures as the compiled ``_ckernels`` module; ``feyninv.kernels``
picks one of the two at import time.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def mul_packed(p: dict, q: dict) -> dict:
    """Product of two packed polynomials.

    Keys are packed monomials (exponent fields added without carry), values are
    Python ints sharing an implicit common denominator.
    """
    if len(p) < len(q):
        p, q = q, p
    out: dict = {}
    get = out.get
    qitems = list(q.items())
    for k1, c1 in p.items():
        for k2, c2 in qitems:
            k = k1 + k2
            out[k] = get(k, 0) + c1 * c2
    return {k: c for k, c in out.items() if c}


def eval_monomials(exps: np.ndarray, coeffs: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Evaluate sum_t coeffs[t] * prod_v pts[:, v] ** exps[t, v] at every row of pts."""
    exps = np.asarray(exps, dtype=np.int64)
    coeffs = np.asarray(coeffs, dtype=np.float64)
    pts = np.asarray(pts, dtype=np.float64)
    npts, nvars = pts.shape
    out = np.zeros(npts)
    if exps.shape[0] == 0:
        return out
    maxdeg = int(exps.max(initial=0))
    powers = np.empty((nvars, maxdeg + 1, npts))
    powers[:, 0, :] = 1.0
    for d in range(1, maxdeg + 1):
        powers[:, d, :] = powers[:, d - 1, :] * pts.T
    for t in range(exps.shape[0]):
        term = np.full(npts, coeffs[t])
        for v in range(nvars):
            e = exps[t, v]
            if e:
                term *= powers[v, e]
        out += term
    return out
