"""Weighted one-dimensional distributions.

A :class:`WeightedSample` is a finite, normalized discrete law.  It serves
both as an empirical distribution built from (weighted) microdata and as a
fine discretization of a continuous population law.  The truncated means
are mass-exact: when the truncation point falls inside an atom, only the
fraction of the atom needed to reach the requested mass is included, so
the same code handles continuous, discrete and mixed outcomes.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._validation import (
    check_1d, check_consistent_length, check_gamma, check_gamma_array, check_unit_interval,
)
from .exceptions import DataError, DomainError

# cumulative-weight comparisons in quantile lookups
_CUM_TOL = 1e-12


@dataclass(frozen=True)
class SupportBounds:
    """Lower and upper end of the outcome support (may be infinite)."""

    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise DataError("support bounds must not be NaN")
        if self.lower > self.upper:
            raise DataError(f"support lower {self.lower} exceeds upper {self.upper}")

    @property
    def bounded(self):
        return math.isfinite(self.lower) and math.isfinite(self.upper)


class WeightedSample:
    """Finite weighted collection of outcome values.

    Parameters
    ----------
    values : array-like
        Outcome values. Ties are merged into single atoms.
    weights : array-like, optional
        Nonnegative design weights; defaults to equal weights.

    Attributes
    ----------
    values : ndarray
        Sorted distinct support points.
    weights : ndarray
        Normalized atom masses (sum to one).
    raw_weight_sum : float
        Sum of the weights before normalization.
    """

    __slots__ = (
        "values", "weights", "raw_weight_sum", "_raw_sq_sum",
        "_cw", "_cwv", "_rcw", "_rcwv", "_mean",
    )

    def __init__(self, values, weights=None):
        v = check_1d(values, "values")
        w = np.ones_like(v) if weights is None else check_1d(weights, "weights")
        check_consistent_length(v, w)
        if v.size == 0:
            raise DataError("a weighted sample needs at least one value")
        if not np.all(np.isfinite(v)):
            raise DataError("sample values must be finite")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise DataError("weights must be finite and nonnegative")
        total = math.fsum(w)
        if total <= 0:
            raise DataError("at least one weight must be positive")
        keep = w > 0
        v, w = v[keep], w[keep]
        uniq, inv = np.unique(v, return_inverse=True)
        merged = np.bincount(inv, weights=w, minlength=uniq.size)
        self.raw_weight_sum = total
        self._raw_sq_sum = math.fsum(w * w)
        self.values = uniq
        self.weights = merged / merged.sum()
        self.values.setflags(write=False)
        self.weights.setflags(write=False)
        self._cw = np.cumsum(self.weights)
        self._cwv = np.cumsum(self.weights * self.values)
        self._rcw = np.cumsum(self.weights[::-1])
        self._rcwv = np.cumsum((self.weights * self.values)[::-1])
        self._mean = float(self._cwv[-1])

    @classmethod
    def mixture(cls, components):
        """Mix ``[(mass, sample), ...]``; masses are renormalized."""
        components = [(float(m), s) for m, s in components if m > 0]
        if not components:
            raise DataError("mixture needs a component with positive mass")
        values = np.concatenate([s.values for _, s in components])
        weights = np.concatenate([m * s.weights for m, s in components])
        return cls(values, weights)

    @classmethod
    def binary(cls, p_one):
        """Two-point law on {0, 1} with ``P(Y=1) = p_one``."""
        p_one = check_unit_interval(p_one, "p_one")
        return cls([0.0, 1.0], [1.0 - p_one, p_one])

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"WeightedSample(n_atoms={len(self)}, mean={self._mean:.6g})"

    @property
    def effective_size(self):
        """Kish effective sample size of the raw weights."""
        return self.raw_weight_sum ** 2 / self._raw_sq_sum

    @property
    def is_binary(self):
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))

    def support(self):
        return SupportBounds(float(self.values[0]), float(self.values[-1]))

    def mean(self):
        return self._mean

    def cdf(self, y):
        """Right-continuous cumulative mass ``P(Y <= y)``."""
        k = np.searchsorted(self.values, y, side="right")
        return 0.0 if k == 0 else float(min(self._cw[k - 1], 1.0))

    def quantile(self, u):
        """Generalized inverse ``inf{y : P(Y <= y) >= u}``; ``u=0`` gives the minimum."""
        if np.ndim(u) == 0:
            u = check_unit_interval(u)
        else:
            u = np.asarray(u, dtype=float)
            if np.any(~((u >= 0.0) & (u <= 1.0))):
                raise DomainError("quantile levels must lie in [0, 1]")
        k = np.minimum(np.searchsorted(self._cw, u - _CUM_TOL, side="left"), len(self) - 1)
        return float(self.values[k]) if np.ndim(k) == 0 else self.values[k]

    def lower_truncated_mean(self, gamma):
        """Mean of the lowest ``gamma`` of the mass, ``E[F^{-1}(U) | U <= gamma]``."""
        return self._tail_mean(gamma, self._cw, self._cwv, self.values)

    def upper_truncated_mean(self, gamma):
        """Mean of the highest ``gamma`` of the mass, ``E[F^{-1}(U) | U >= 1 - gamma]``."""
        return self._tail_mean(gamma, self._rcw, self._rcwv, self.values[::-1])

    def _tail_mean(self, gamma, cw, cwv, vals):
        if np.ndim(gamma) == 0:
            g = np.array([check_gamma(gamma)])
        else:
            g = check_gamma_array(gamma)
        n = vals.size
        k = np.minimum(np.searchsorted(cw, g, side="left"), n - 1)
        prev_w = np.where(k > 0, cw[k - 1], 0.0)
        prev_wv = np.where(k > 0, cwv[k - 1], 0.0)
        # partial mass of the boundary atom; never negative after round-off
        part = np.clip(g - prev_w, 0.0, None)
        out = (prev_wv + part * vals[k]) / g
        if np.ndim(gamma) == 0:
            return float(out[0])
        return out.reshape(np.shape(gamma))
