"""Input validation helpers used by the public functions and estimators."""

from __future__ import annotations

import numbers

import numpy as np

from zerohot.exceptions import InputError


def check_count(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InputError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InputError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_real(value, name, minimum=None, strict=False):
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise InputError(f"{name} must be a real number, got {value!r}") from None
    if not np.isfinite(value):
        raise InputError(f"{name} must be finite, got {value}")
    if minimum is not None:
        if strict and value <= minimum:
            raise InputError(f"{name} must be > {minimum}, got {value}")
        if not strict and value < minimum:
            raise InputError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_assignment(s, n_vars, q_values, name="assignment"):
    """Return ``s`` as a 1-based int array of length ``n_vars`` with values in 1..Q."""
    arr = np.asarray(s)
    if arr.ndim != 1 or arr.shape[0] != n_vars:
        raise InputError(f"{name} must have length {n_vars}, got shape {arr.shape}")
    if arr.size and not np.all(np.equal(np.mod(arr, 1), 0)):
        raise InputError(f"{name} must contain integers")
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 1 or arr.max() > q_values):
        raise InputError(f"{name} values must lie in 1..{q_values}")
    return arr


def check_assignments_2d(S, n_vars, q_values):
    arr = np.atleast_2d(np.asarray(S))
    if arr.ndim != 2 or arr.shape[1] != n_vars:
        raise InputError(f"assignments must have shape (n_samples, {n_vars}), got {arr.shape}")
    for row in arr:
        check_assignment(row, n_vars, q_values)
    return arr.astype(np.int64)


def check_spins(sigma, n_spins, name="spins"):
    arr = np.asarray(sigma)
    if arr.shape[-1:] != (n_spins,):
        raise InputError(f"{name} must have trailing length {n_spins}, got shape {arr.shape}")
    if not np.all(np.isin(arr, (-1, 1))):
        raise InputError(f"{name} entries must be +1 or -1")
    return arr.astype(np.int64)


def check_fractions(rho, length, atol=1e-9):
    arr = np.asarray(rho, dtype=float)
    if arr.shape != (length,):
        raise InputError(f"rho must have length {length}, got shape {arr.shape}")
    if np.any(arr < 0):
        raise InputError("rho entries must be non-negative")
    if abs(arr.sum() - 1.0) > atol:
        raise InputError(f"rho must sum to 1 (got {arr.sum():.12g})")
    return arr


def check_grid(grid, name="grid", allow_single=True):
    arr = np.asarray(grid, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InputError(f"{name} must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} must be finite")
    if arr.size == 1 and not allow_single:
        raise InputError(f"{name} needs at least two points")
    d = np.diff(arr)
    if arr.size > 1 and not (np.all(d > 0) or np.all(d < 0)):
        raise InputError(f"{name} must be strictly monotone")
    return arr
