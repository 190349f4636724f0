"""Batched decision kernels for the Monte Carlo harness.

Every kernel exists twice: a numba @njit version (the default hot path)
and a pure-numpy fallback. TIMING_DIVERSITY_BACKEND=numpy forces the
fallback, TIMING_DIVERSITY_BACKEND=numba insists on numba (and raises if
it is unavailable); anything else auto-selects.

The two implementations are kept operation-for-operation parallel — the
numpy path accumulates log-likelihoods and means sequentially over the
arrival axis exactly like the numba loops — so tallies agree between
backends, and are bit-identical across worker counts within a backend.

benchmarks/bench_backends.py times one against the other.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .distributions import (
    FAM_EXPONENTIAL,
    FAM_INVERSE_GAUSSIAN,
    FAM_LEVY,
    FAM_UNIFORM,
)

__all__ = [
    "HAVE_NUMBA",
    "active_backend",
    "ml_decide_batch",
    "fa_decide_batch",
    "linear_decide_batch",
]

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

_ENV_FLAG = "TIMING_DIVERSITY_BACKEND"


def active_backend() -> str:
    """'numba' or 'numpy', resolved from the environment at call time."""
    choice = os.environ.get(_ENV_FLAG, "auto").strip().lower()
    if choice in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if choice == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError(f"{_ENV_FLAG}=numba but numba is not importable")
        return "numba"
    if choice == "numpy":
        return "numpy"
    raise ValueError(f"{_ENV_FLAG} must be 'numba', 'numpy' or 'auto', got {choice!r}")


# ---------------------------------------------------------------------------
# numpy fallback path
# ---------------------------------------------------------------------------


def _logpdf_np(fam: int, p: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.full(z.shape, -np.inf)
    if fam == FAM_UNIFORM:
        m = (z >= 0.0) & (z <= p[0])
        out[m] = -p[1]
    elif fam == FAM_EXPONENTIAL:
        m = z >= 0.0
        out[m] = p[1] - p[0] * z[m]
    elif fam == FAM_INVERSE_GAUSSIAN:
        m = z > 0.0
        zm = z[m]
        d = zm - p[0]
        out[m] = p[2] - 1.5 * np.log(zm) - p[3] * d * d / zm
    elif fam == FAM_LEVY:
        m = z > p[0]
        w = z[m] - p[0]
        out[m] = p[2] - 1.5 * np.log(w) - 0.5 * p[1] / w
    else:
        raise ValueError(f"unknown family code {fam}")
    return out


def _ml_decide_np(fam: int, p: np.ndarray, points: np.ndarray, y: np.ndarray) -> np.ndarray:
    n, m = y.shape
    best = np.full(n, -np.inf)
    best_idx = np.zeros(n, dtype=np.int64)
    for idx in range(points.size):
        ll = np.zeros(n)
        for k in range(m):  # sequential over arrivals, same order as numba
            ll = ll + _logpdf_np(fam, p, y[:, k] - points[idx])
        upd = ll >= best  # ties toward the larger point
        best[upd] = ll[upd]
        best_idx[upd] = idx
    return best_idx


def _fa_decide_np(y: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    y_fa = y[:, 0].copy()
    for k in range(1, y.shape[1]):
        np.minimum(y_fa, y[:, k], out=y_fa)
    # thresholds increase, so the decision is the count of passed ones
    return (y_fa[:, None] >= thresholds[None, :]).sum(axis=1).astype(np.int64)


def _linear_decide_np(y: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    total = y[:, 0].copy()
    for k in range(1, y.shape[1]):
        total += y[:, k]
    mean = total / y.shape[1]
    return (mean[:, None] > thresholds[None, :]).sum(axis=1).astype(np.int64)


# ---------------------------------------------------------------------------
# numba path
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, nogil=True)
    def _logpdf_nb(fam, p, z):
        if fam == FAM_UNIFORM:
            if z < 0.0 or z > p[0]:
                return -np.inf
            return -p[1]
        if fam == FAM_EXPONENTIAL:
            if z < 0.0:
                return -np.inf
            return p[1] - p[0] * z
        if fam == FAM_INVERSE_GAUSSIAN:
            if z <= 0.0:
                return -np.inf
            d = z - p[0]
            return p[2] - 1.5 * np.log(z) - p[3] * d * d / z
        if z <= p[0]:
            return -np.inf
        w = z - p[0]
        return p[2] - 1.5 * np.log(w) - 0.5 * p[1] / w

    @njit(cache=True, nogil=True)
    def _ml_decide_nb(fam, p, points, y):
        n, m = y.shape
        out = np.empty(n, dtype=np.int64)
        for t in range(n):
            best = -np.inf
            best_idx = 0
            for idx in range(points.size):
                ll = 0.0
                for k in range(m):
                    ll += _logpdf_nb(fam, p, y[t, k] - points[idx])
                    if ll == -np.inf:
                        break
                if ll >= best:
                    best = ll
                    best_idx = idx
            out[t] = best_idx
        return out

    @njit(cache=True, nogil=True)
    def _fa_decide_nb(y, thresholds):
        n, m = y.shape
        out = np.empty(n, dtype=np.int64)
        for t in range(n):
            y_fa = y[t, 0]
            for k in range(1, m):
                if y[t, k] < y_fa:
                    y_fa = y[t, k]
            idx = 0
            for j in range(thresholds.size):
                if y_fa >= thresholds[j]:
                    idx = j + 1
                else:
                    break
            out[t] = idx
        return out

    @njit(cache=True, nogil=True)
    def _linear_decide_nb(y, thresholds):
        n, m = y.shape
        out = np.empty(n, dtype=np.int64)
        for t in range(n):
            total = 0.0
            for k in range(m):
                total += y[t, k]
            mean = total / m
            idx = 0
            for j in range(thresholds.size):
                if mean > thresholds[j]:
                    idx = j + 1
                else:
                    break
            out[t] = idx
        return out


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def ml_decide_batch(fam: int, params, points, y: np.ndarray) -> np.ndarray:
    p = np.asarray(params, dtype=np.float64)
    pts = np.asarray(points, dtype=np.float64)
    if active_backend() == "numba":
        return _ml_decide_nb(fam, p, pts, y)
    return _ml_decide_np(fam, p, pts, y)


def fa_decide_batch(y: np.ndarray, thresholds) -> np.ndarray:
    t = np.asarray(thresholds, dtype=np.float64)
    if active_backend() == "numba":
        return _fa_decide_nb(y, t)
    return _fa_decide_np(y, t)


def linear_decide_batch(y: np.ndarray, thresholds) -> np.ndarray:
    t = np.asarray(thresholds, dtype=np.float64)
    if active_backend() == "numba":
        return _linear_decide_nb(y, t)
    return _linear_decide_np(y, t)
