"""Central finite-difference gradient checking.

The numeric gradient is an oracle: it only ever calls the value function, so
it stays independent of whatever analytic path it is used to verify.
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def finite_diff_grad(fn: Callable[[np.ndarray], float], x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central differences (f(x + s e) - f(x - s e)) / (2 s) per entry."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = grad.ravel()
    base = x.copy()
    bflat = base.ravel()
    for i in range(bflat.size):
        orig = bflat[i]
        bflat[i] = orig + step
        hi = fn(base)
        bflat[i] = orig - step
        lo = fn(base)
        bflat[i] = orig
        flat[i] = (hi - lo) / (2.0 * step)
    return grad


def max_rel_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8) -> float:
    """max over entries of |a - n| / max(|a|, |n|, floor)."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float((np.abs(a - n) / denom).max())


def finite_diff_check(
    fn: Callable[[np.ndarray], float],
    x: np.ndarray,
    analytic: np.ndarray,
    step: float = 1e-5,
) -> float:
    """Max relative error between the analytic gradient and the FD oracle."""
    return max_rel_error(analytic, finite_diff_grad(fn, x, step))
