"""Backend selection for the hot kernels.

The compiled extension is used when it imports; set ``FEYNINV_PURE_PYTHON=1``
to force the reference implementation.
"""

from __future__ import annotations

import os

if os.environ.get("FEYNINV_PURE_PYTHON", "") not in ("", "0"):
    from feyninv import _pykernels as _impl
else:
    try:
        from feyninv import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:  # pragma: no cover - depends on the build
        from feyninv import _pykernels as _impl

BACKEND: str = _impl.BACKEND
mul_packed = _impl.mul_packed
eval_monomials = _impl.eval_monomials

__all__ = ["BACKEND", "mul_packed", "eval_monomials"]
