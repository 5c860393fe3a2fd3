"""Partial identification of effects under multilayered sample selection."""

from .bounds import (
    ConditionalData, Interval, aggregate_lcde_bounds, lcde, lcde_stayer_bounds,
    lcde_switcher_bounds, lcie, lcie_bounds, lee_bounds, naive_aggregate_bounds,
    pointwise_aggregate_bounds, trimming_proportion,
)
from .dataset import Dataset, ingest
from .dist import SupportBounds, WeightedSample
from .estimators import LeeBounds, MultilayerBounds
from .exceptions import (
    ConfigurationError, DataError, DegenerateLayerError, DomainError, FalsificationError,
    LayerBoundsError, LPError, MonotonicityViolation,
)
from .report import BoundsReport
from .responseset import (
    LEE, STAYERS_GE_DOWN, STRONG_MONO, TABLE1, UP_GE_DOWN, IdentifiedSet, LinearConstraint,
    PropensityTable, RestrictionSet, ResponseType, smallest_type, zero_type,
)

__version__ = "0.1.0"
