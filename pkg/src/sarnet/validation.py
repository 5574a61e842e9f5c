"""Input validation helpers shared by the estimators and the scenario parser."""
from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ValidationError


def check_positive(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ValidationError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be positive and finite, got {value}")
    return value


def check_vector(values, name: str, m: int | None = None) -> np.ndarray:
    """Return ``values`` as a read-only float vector with non-negative finite entries."""
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not numeric: {exc}") from None
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if m is not None and arr.shape[0] != m:
        raise ValidationError(f"{name} must have length {m}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    bad = np.flatnonzero(arr < 0)
    if bad.size:
        raise ValidationError(f"{name}_{bad[0] + 1} is negative ({arr[bad[0]]})")
    arr.setflags(write=False)
    return arr


def check_rate_matrix(values, name: str, m: int) -> np.ndarray:
    """Square non-negative matrix with a zero diagonal (no self-migration)."""
    try:
        arr = np.array(values, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not numeric: {exc}") from None
    if arr.shape != (m, m):
        raise ValidationError(f"{name} must have shape ({m}, {m}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    neg = np.argwhere(arr < 0)
    if neg.size:
        i, j = neg[0]
        raise ValidationError(f"{name}_{i + 1}{j + 1} is negative ({arr[i, j]})")
    diag = np.flatnonzero(np.diag(arr) != 0)
    if diag.size:
        i = diag[0]
        raise ValidationError(f"{name}_{i + 1}{i + 1} must be zero (diagonal)")
    arr.setflags(write=False)
    return arr


def check_set_index(index, m: int) -> int:
    """Validate a 1-based diffusion-set label and return its 0-based position."""
    if isinstance(index, bool) or not isinstance(index, numbers.Integral):
        raise ValidationError(f"set index must be an integer, got {index!r}")
    if not 1 <= index <= m:
        raise ValidationError(f"set index {index} out of range 1..{m}")
    return int(index) - 1
