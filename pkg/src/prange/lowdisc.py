"""Faure low-discrepancy sequences for uniform search-space coverage.

The base is the smallest prime >= the dimension. Coordinate j applies the
j-th power of the Pascal matrix (mod base) to the base-b digits of the
index before radical inversion; coordinate 0 is the plain van der Corput
sequence. Indexing starts at 1 so the all-zero point is never produced.
"""
from __future__ import annotations

import numpy as np

__all__ = ["smallest_prime_at_least", "faure_points", "scale_to_box"]


def smallest_prime_at_least(n: int) -> int:
    candidate = max(2, n)
    while True:
        for p in range(2, int(candidate ** 0.5) + 1):
            if candidate % p == 0:
                break
        else:
            return candidate
        candidate += 1


def faure_points(count: int, dim: int) -> np.ndarray:
    """First `count` points of the dim-dimensional Faure sequence in [0, 1)."""
    if count < 0 or dim < 1:
        raise ValueError("count must be >= 0 and dim >= 1")
    base = smallest_prime_at_least(dim)
    width = 1
    while base ** width <= count:
        width += 1
    # pascal[i, k] = C(i, k) mod base
    pascal = np.zeros((width, width), dtype=np.int64)
    for i in range(width):
        pascal[i, 0] = 1
        for k in range(1, i + 1):
            pascal[i, k] = (pascal[i - 1, k - 1] + pascal[i - 1, k]) % base
    weights = base ** -(np.arange(width, dtype=float) + 1.0)
    digits = np.empty((count, width), dtype=np.int64)
    rest = np.arange(1, count + 1, dtype=np.int64)
    for k in range(width):
        digits[:, k] = rest % base
        rest //= base
    out = np.empty((count, dim))
    for j in range(dim):
        out[:, j] = digits @ weights
        if j + 1 < dim:
            digits = (digits @ pascal) % base
    return out


def scale_to_box(unit: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Map unit-cube points into the axis-aligned box [lo, hi]."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    return lo + unit * (hi - lo)
