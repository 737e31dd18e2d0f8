"""Backend selection for the hot loops.

The compiled extension ``gbmissing._kernels`` is used when it imports; set
``GBMISSING_PURE_PYTHON=1`` to force the numpy fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _purepy

split_frequency = _purepy.split_frequency
phases = _purepy.phases

_compiled = None
if os.environ.get("GBMISSING_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"
_impl = _compiled if _compiled is not None else _purepy


def available_backends() -> list[str]:
    names = ["python"]
    if _compiled is not None:
        names.append("cython")
    return names


def backend_module(name: str | None = None):
    if name is None:
        return _impl
    if name == "python":
        return _purepy
    if name == "cython" and _compiled is not None:
        return _compiled
    raise ValueError(f"backend {name!r} is not available")


def sieve_window(start: int, length: int, primes: np.ndarray, backend: str | None = None):
    primes = np.ascontiguousarray(primes, dtype=np.int64)
    return backend_module(backend).sieve_window(start, length, primes)


def expsum(ns, ws, alphas, backend: str | None = None) -> np.ndarray:
    """Sum_i ws[i] e(ns[i] alpha) for every alpha; ns must be non-negative."""
    ns = np.ascontiguousarray(ns, dtype=np.uint64)
    ws = np.ascontiguousarray(ws, dtype=np.float64)
    alphas = np.ascontiguousarray(np.atleast_1d(alphas), dtype=np.float64)
    if ns.shape != ws.shape:
        raise ValueError("ns and ws must have the same shape")
    return backend_module(backend).expsum(ns, ws, alphas)


def d4sharp_accumulate(X: int, H: int, coeffs: np.ndarray, backend: str | None = None) -> np.ndarray:
    coeffs = np.ascontiguousarray(coeffs, dtype=np.float64)
    return backend_module(backend).d4sharp_accumulate(X, H, coeffs)


def farey_sequence(Q: int, backend: str | None = None):
    count = 1 + int(_totient_sum(Q))
    return backend_module(backend).farey_sequence(Q, count)


def _totient_sum(Q: int) -> int:
    phi = np.arange(Q + 1, dtype=np.int64)
    for p in range(2, Q + 1):
        if phi[p] == p:
            phi[p::p] -= phi[p::p] // p
    return int(phi[1:].sum())
