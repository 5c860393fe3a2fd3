"""Small input-validation helpers in the spirit of ``sklearn.utils.validation``."""

import math

import numpy as np

from .exceptions import DataError, DomainError

# |gamma - 1| below this is treated as exactly 1 (LP round-off)
GAMMA_TOL = 1e-12


def check_unit_interval(u, name="u"):
    u = float(u)
    if not (0.0 <= u <= 1.0):
        raise DomainError(f"{name}={u!r} is outside [0, 1]")
    return u


def check_gamma(gamma, name="gamma", allow_zero=False):
    """Validate a truncation mass and clamp round-off at the endpoints."""
    gamma = float(gamma)
    if math.isnan(gamma):
        raise DomainError(f"{name} is NaN")
    if abs(gamma - 1.0) <= GAMMA_TOL:
        return 1.0
    if abs(gamma) <= GAMMA_TOL and allow_zero:
        return 0.0
    lo_ok = gamma >= 0.0 if allow_zero else gamma > 0.0
    if not lo_ok or gamma > 1.0:
        interval = "[0, 1]" if allow_zero else "(0, 1]"
        raise DomainError(f"{name}={gamma!r} is outside {interval}")
    return gamma


def check_1d(x, name, dtype=float):
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DataError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def check_consistent_length(*arrays):
    lengths = {len(a) for a in arrays if a is not None}
    if len(lengths) > 1:
        raise DataError(f"inconsistent lengths: {sorted(lengths)}")


def check_sample_weight(sample_weight, n):
    if sample_weight is None:
        return np.ones(n)
    w = check_1d(sample_weight, "sample_weight")
    check_consistent_length(w, np.empty(n))
    if np.any(~np.isfinite(w)) or np.any(w < 0):
        raise DataError("sample weights must be finite and nonnegative")
    return w


def check_arm(z):
    z = check_1d(z, "arm", dtype=float)
    if not np.all((z == 0) | (z == 1)):
        raise DataError("treatment arm must be coded 0/1")
    return z.astype(int)


def check_gamma_array(gamma):
    g = np.array(gamma, dtype=float).ravel()
    g[np.abs(g - 1.0) <= GAMMA_TOL] = 1.0
    bad = ~((g > 0.0) & (g <= 1.0))
    if np.any(bad):
        raise DomainError(f"gamma values outside (0, 1]: {g[bad][:5]}")
    return g
