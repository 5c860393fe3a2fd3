"""Estimator-style wrappers: configure in ``__init__``, compute in ``fit``.

Bounds are functionals of the observed joint law, so there is nothing
to predict or transform; the wrappers expose ``fit`` plus fitted
attributes with a trailing underscore.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from . import bounds as _bounds
from .dataset import Dataset
from .dist import SupportBounds
from .exceptions import DataError
from .responseset import LEE, IdentifiedSet, RestrictionSet, ResponseType, all_types


def _dataset(y, d, z, sample_weight):
    y = np.asarray(y, dtype=float).ravel()
    d = np.asarray(d).ravel()
    z = np.asarray(z).ravel()
    if not np.issubdtype(d.dtype, np.integer) or np.any(d < 0):
        raise DataError("layer indices d must be nonnegative integers")
    if not set(np.unique(z)) <= {0, 1}:
        raise DataError("arm indicator z must be 0/1")
    w = np.ones_like(y) if sample_weight is None else np.asarray(sample_weight, dtype=float).ravel()
    labels = tuple(str(i) for i in range(int(d.max(initial=1)) + 1))
    return Dataset(y, d.astype(int), z.astype(int), w, labels)


class LeeBounds(BaseEstimator):
    """Trimming bounds on the always-employed effect.

    Parameters
    ----------
    outcome_kind : {"continuous", "binary"}
    support : tuple of float
        Outcome support ``(lower, upper)``.

    Attributes
    ----------
    ptable_ : PropensityTable
    trimming_proportion_ : float
    bounds_ : Interval
    """

    def __init__(self, outcome_kind="continuous", support=(-np.inf, np.inf)):
        self.outcome_kind = outcome_kind
        self.support = support

    def fit(self, y, d, z, sample_weight=None):
        """``y`` outcomes (NaN when ``d == 0``), ``d`` layers, ``z`` arm indicators."""
        data = _dataset(y, d, z, sample_weight).conditional_data(SupportBounds(*self.support))
        self.ptable_ = data.ptable
        self.trimming_proportion_ = _bounds.trimming_proportion(data.ptable)
        self.bounds_ = _bounds.lee_bounds(data, self.outcome_kind)
        return self


class MultilayerBounds(BaseEstimator):
    """Within-layer direct effect bounds for every always-employed response type.

    Parameters
    ----------
    restrictions : RestrictionSet
    support : tuple of float
    aggregate_layers : tuple of int or None
        Layers for the aggregate stayer effect; ``None`` skips it.
    grid : int
        Grid resolution of the aggregate search.
    threads : int

    Attributes
    ----------
    ptable_ : PropensityTable
    identified_set_ : IdentifiedSet
    gamma_ : dict
        ``(type, z) -> minimal truncation mass``.
    bounds_ : dict
        ``(type, layer) -> Interval``.
    aggregate_ : Interval or None
    """

    def __init__(self, restrictions=RestrictionSet((LEE,)), support=(-np.inf, np.inf),
                 aggregate_layers=None, grid=200, threads=1):
        self.restrictions = restrictions
        self.support = support
        self.aggregate_layers = aggregate_layers
        self.grid = grid
        self.threads = threads

    def fit(self, y, d, z, sample_weight=None):
        data = _dataset(y, d, z, sample_weight).conditional_data(SupportBounds(*self.support))
        iset = IdentifiedSet(data.ptable, self.restrictions)
        iset.feasible_point()  # raises on falsified restrictions
        self.ptable_ = data.ptable
        self.identified_set_ = iset
        self.gamma_, self.bounds_ = {}, {}
        for t in all_types(data.K):
            if not t.always_employed:
                continue
            for z_ in (0, 1):
                if data.ptable(t.layer(z_), z_) > 0:
                    self.gamma_[(t, z_)] = iset.gamma_lower(t, z_)
            layers = [t.d0] if t.is_stayer else [t.d1, t.d0]
            for layer in layers:
                self.bounds_[(t, layer)] = _bounds.lcde(data, iset, t, layer=layer)
        self.aggregate_ = None
        if self.aggregate_layers is not None:
            self.aggregate_ = _bounds.aggregate_lcde_bounds(
                data, iset, self.aggregate_layers, grid=self.grid, threads=self.threads)
        return self

    def interval(self, t, layer=None):
        """Fitted bounds for type ``t`` at ``layer`` (its untreated layer by default)."""
        check_is_fitted(self, "bounds_")
        t = ResponseType(*t)
        return self.bounds_[(t, t.d0 if layer is None else layer)]
