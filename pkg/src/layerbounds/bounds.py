"""Lee bounds and sharp bounds for the multilayered selection model.

All bounds are closed-form functions of generalized truncated means of
the observed conditional outcome laws ``Y | D=d, Z=z`` evaluated at the
minimal feasible mixture weights of the target response type.  When that
weight is zero the truncated mean is replaced by the matching support
endpoint and the interval is flagged trivial.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import itertools
import math

import numpy as np

from . import simplex
from ._validation import check_gamma
from .dist import SupportBounds, WeightedSample
from .exceptions import (
    ConfigurationError, DataError, DegenerateLayerError, MonotonicityViolation,
)
from .responseset import PropensityTable, ResponseType, polygon_contains, type_index

# truncation masses below this are treated as zero
GAMMA_ZERO_TOL = 1e-12


@dataclass(frozen=True)
class Interval:
    """Closed interval with provenance.

    ``trivial`` marks intervals with an infinite endpoint or an endpoint
    built from a support bound because a truncation mass was zero.
    ``gammas`` records the truncation masses used and ``weights`` the
    optimizing type probabilities of aggregate programs.
    """

    lower: float
    upper: float
    trivial: bool = False
    gammas: dict = field(default_factory=dict, compare=False)
    weights: dict = field(default=None, compare=False)

    def __post_init__(self):
        if self.lower > self.upper + 1e-12:
            raise ValueError(f"interval lower {self.lower} exceeds upper {self.upper}")

    def __contains__(self, x):
        return self.lower <= x <= self.upper

    @property
    def width(self):
        return self.upper - self.lower

    def excludes_zero(self):
        return self.lower > 0 or self.upper < 0

    def within(self, other, tol=0.0):
        """True if this interval is contained in ``other`` up to ``tol``."""
        return self.lower >= other.lower - tol and self.upper <= other.upper + tol

    def as_tuple(self):
        return (self.lower, self.upper)


@dataclass(frozen=True)
class ConditionalData:
    """Observed outcome laws per ``(layer, arm)`` cell plus the propensities."""

    samples: dict
    ptable: PropensityTable
    support: SupportBounds = SupportBounds()

    def __post_init__(self):
        K = self.ptable.K
        for (d, z), s in self.samples.items():
            if not (1 <= d <= K and z in (0, 1)):
                raise DataError(f"cell (d={d}, z={z}) is out of range for K={K}")
            lo, hi = s.values[0], s.values[-1]
            if lo < self.support.lower or hi > self.support.upper:
                raise DataError(f"sample for cell ({d}, {z}) leaves the declared support")
        for z in (0, 1):
            for d in range(1, K + 1):
                if self.ptable(d, z) > 0 and (d, z) not in self.samples:
                    raise DataError(f"no outcome sample for layer {d}, arm {z} with positive propensity")

    @property
    def K(self):
        return self.ptable.K

    def sample(self, d, z):
        try:
            return self.samples[(d, z)]
        except KeyError:
            raise DataError(f"no outcome sample for layer {d}, arm {z}") from None

    def pooled(self, z):
        """Employed outcome law in arm ``z``: propensity-weighted merge of layers."""
        comps = [(self.ptable(d, z), self.samples[(d, z)])
                 for d in range(1, self.K + 1) if self.ptable(d, z) > 0]
        if not comps:
            raise DataError(f"no employed observations in arm {z}")
        return WeightedSample.mixture(comps)


def _lower(sample, gamma, support):
    """``(E_lower(gamma), fell_back_to_support)``."""
    if gamma <= GAMMA_ZERO_TOL:
        return support.lower, True
    return sample.lower_truncated_mean(gamma), False


def _upper(sample, gamma, support):
    if gamma <= GAMMA_ZERO_TOL:
        return support.upper, True
    return sample.upper_truncated_mean(gamma), False


def _interval(lo, hi, fallback, gammas, weights=None):
    trivial = fallback or not (math.isfinite(lo) and math.isfinite(hi))
    return Interval(float(lo), float(hi), bool(trivial), gammas, weights)


def trimming_proportion(ptable):
    """Ratio of control to treated employment rates."""
    treated = ptable.employment_rate(1)
    if treated <= 0:
        raise DegenerateLayerError("no employment in the treated arm")
    return ptable.employment_rate(0) / treated


def lee_bounds(data, outcome_kind="continuous"):
    """Bounds on the mean effect for the always-employed, ignoring layer identity.

    Parameters
    ----------
    data : ConditionalData
    outcome_kind : {"continuous", "binary"}
        ``"binary"`` uses the explicit two-point formulas and requires
        {0, 1}-valued samples.

    Raises
    ------
    MonotonicityViolation
        If control employment exceeds treated employment.
    """
    p = trimming_proportion(data.ptable)
    if p > 1.0 + 1e-12:
        raise MonotonicityViolation(f"trimming proportion {p:.6g} > 1 rejects Lee monotonicity")
    if p <= GAMMA_ZERO_TOL:
        raise DataError("no employment in the control arm")
    p = min(p, 1.0)
    treated, control = data.pooled(1), data.pooled(0)
    base = control.mean()
    if outcome_kind == "binary":
        if not (treated.is_binary and control.is_binary):
            raise DataError("binary Lee bounds need {0, 1}-valued outcomes")
        p0 = treated.cdf(0.0)
        lo = max(0.0, 1.0 - p0 / p) - base
        hi = min(1.0, (1.0 - p0) / p) - base
    elif outcome_kind == "continuous":
        lo = treated.lower_truncated_mean(p) - base
        hi = treated.upper_truncated_mean(p) - base
    else:
        raise ConfigurationError(f"unknown outcome kind {outcome_kind!r}")
    return _interval(lo, hi, False, {"p": p})


def lcde_stayer_bounds(data, d, gamma1, gamma0):
    """Bounds on ``E[Y(1,d) - Y(0,d) | T=(d,d)]`` at truncation masses ``gamma1``, ``gamma0``."""
    g1 = check_gamma(gamma1, "gamma1", allow_zero=True)
    g0 = check_gamma(gamma0, "gamma0", allow_zero=True)
    sup = data.support
    s1 = data.sample(d, 1) if g1 > 0 else None
    s0 = data.sample(d, 0) if g0 > 0 else None
    lo1, f1 = _lower(s1, g1, sup)
    hi0, f2 = _upper(s0, g0, sup)
    hi1, f3 = _upper(s1, g1, sup)
    lo0, f4 = _lower(s0, g0, sup)
    return _interval(lo1 - hi0, hi1 - lo0, f1 or f2 or f3 or f4, {"gamma1": g1, "gamma0": g0})


def lcde_switcher_bounds(data, t, layer, gamma):
    """Bounds on the within-layer effect at ``layer`` for a switcher type ``t``.

    For ``layer == t.d1`` only the treated outcome is observed (in cell
    ``(layer, 1)``); for ``layer == t.d0`` only the control outcome is.
    The unobserved counterfactual ranges over the whole support.
    """
    t = ResponseType(*t)
    if t.d0 == t.d1:
        raise ConfigurationError(f"{tuple(t)} is a stayer; use lcde_stayer_bounds")
    g = check_gamma(gamma, "gamma", allow_zero=True)
    sup = data.support
    if layer == t.d1 and layer > 0:
        s = data.sample(layer, 1) if g > 0 else None
        lo, f1 = _lower(s, g, sup)
        hi, f2 = _upper(s, g, sup)
        return _interval(lo - sup.upper, hi - sup.lower, f1 or f2, {"gamma1": g})
    if layer == t.d0 and layer > 0:
        s = data.sample(layer, 0) if g > 0 else None
        hi, f1 = _upper(s, g, sup)
        lo, f2 = _lower(s, g, sup)
        return _interval(sup.lower - hi, sup.upper - lo, f1 or f2, {"gamma0": g})
    raise ConfigurationError(f"layer {layer} is not occupied by type {tuple(t)}")


def lcie_bounds(data, z, d, d_alt, t, gamma):
    """Bounds on ``E[Y(z,d) - Y(z,d_alt) | T=t]`` where ``t`` occupies ``d`` under ``z``."""
    t = ResponseType(*t)
    if d == d_alt:
        raise ConfigurationError("indirect effect needs two distinct layers")
    if z not in (0, 1) or t.layer(z) != d or d == 0 or not 1 <= d_alt <= data.K:
        raise ConfigurationError(f"type {tuple(t)} does not occupy layer {d} under arm {z}")
    g = check_gamma(gamma, "gamma", allow_zero=True)
    sup = data.support
    s = data.sample(d, z) if g > 0 else None
    lo, f1 = _lower(s, g, sup)
    hi, f2 = _upper(s, g, sup)
    return _interval(lo - sup.upper, hi - sup.lower, f1 or f2, {f"gamma{z}": g})


def lcde(data, iset, t, layer=None):
    """Sharp bounds on a local controlled direct effect, with masses from ``iset``."""
    t = ResponseType(*t)
    if t.d0 == t.d1:
        if t.d0 == 0:
            raise ConfigurationError("type (0, 0) has no observed layer")
        return lcde_stayer_bounds(data, t.d0, iset.gamma_lower(t, 1), iset.gamma_lower(t, 0))
    if layer is None:
        layer = t.d1 if t.d1 > 0 else t.d0
    z = 1 if layer == t.d1 else 0
    return lcde_switcher_bounds(data, t, layer, iset.gamma_lower(t, z))


def lcie(data, iset, z, d, d_alt, t):
    """Sharp bounds on a local controlled indirect effect, with masses from ``iset``."""
    return lcie_bounds(data, z, d, d_alt, t, iset.gamma_lower(t, z))


class _AggregateObjective:
    """Pointwise aggregate bounds as a vectorized function of stayer masses."""

    def __init__(self, data, layers):
        self.data = data
        self.layers = layers
        self.P1 = np.array([data.ptable(d, 1) for d in layers])
        self.P0 = np.array([data.ptable(d, 0) for d in layers])

    def __call__(self, P):
        """``P`` has shape (n_points, n_layers); returns (lower, upper) arrays."""
        P = np.atleast_2d(P)
        S = P.sum(axis=1)
        lo = np.zeros(len(P))
        hi = np.zeros(len(P))
        for j, d in enumerate(self.layers):
            p = P[:, j]
            active = p > GAMMA_ZERO_TOL
            if not np.any(active):
                continue
            g1 = np.minimum(p[active] / self.P1[j], 1.0)
            g0 = np.minimum(p[active] / self.P0[j], 1.0)
            s1, s0 = self.data.sample(d, 1), self.data.sample(d, 0)
            w = p[active] / S[active]
            lo[active] += w * (s1.lower_truncated_mean(g1) - s0.upper_truncated_mean(g0))
            hi[active] += w * (s1.upper_truncated_mean(g1) - s0.lower_truncated_mean(g0))
        return lo, hi


def _evaluate(obj, pts, threads):
    if threads <= 1 or len(pts) < 2048:
        return obj(pts)
    chunks = np.array_split(pts, threads)
    with ThreadPoolExecutor(max_workers=threads) as ex:
        parts = list(ex.map(obj, chunks))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _golden(f, a, b, iters=60):
    """Minimize a scalar function on [a, b] by golden-section search."""
    r = (math.sqrt(5) - 1) / 2
    c, d = b - r * (b - a), a + r * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - r * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + r * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _segment_search(obj, a, b, grid, threads):
    """Extremes of the aggregate bounds on the segment from ``a`` to ``b``."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    s = np.linspace(0.0, 1.0, max(grid, 2))
    pts = a + s[:, None] * (b - a)
    lo, hi = _evaluate(obj, pts, threads)
    out = []
    for vals, sign in ((lo, 1.0), (hi, -1.0)):
        i = int(np.argmin(sign * vals))
        best_s, best_v = s[i], sign * vals[i]
        if len(s) > 2:
            left, right = s[max(i - 1, 0)], s[min(i + 1, len(s) - 1)]
            idx = 0 if sign > 0 else 1
            s_ref, v_ref = _golden(lambda u: sign * obj(a + u * (b - a))[idx][0], left, right)
            if v_ref < best_v:
                best_s, best_v = s_ref, v_ref
        out.append((a + best_s * (b - a), sign * best_v))
    return out


def _polygon_search(obj, poly, grid, threads, rounds=4, local=21):
    xs = [p[0] for p in poly]
    ys = [p[1] for p in poly]
    gx = np.linspace(min(xs), max(xs), grid)
    gy = np.linspace(min(ys), max(ys), grid)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    X, Y = X.ravel(), Y.ravel()
    inside = polygon_contains(poly, X, Y, tol=1e-12)
    cand = [np.column_stack([X[inside], Y[inside]]), np.array(poly)]
    for i, a in enumerate(poly):
        b = poly[(i + 1) % len(poly)]
        s = np.linspace(0.0, 1.0, grid)[:, None]
        cand.append(np.asarray(a) + s * (np.asarray(b) - np.asarray(a)))
    pts = np.vstack(cand)
    lo, hi = _evaluate(obj, pts, threads)
    h0 = max((max(xs) - min(xs)), (max(ys) - min(ys))) / max(grid - 1, 1)
    out = []
    for vals, sign, idx in ((lo, 1.0, 0), (hi, -1.0, 1)):
        i = int(np.argmin(sign * vals))
        best, best_v = pts[i], sign * vals[i]
        h = h0
        for _ in range(rounds):
            u = np.linspace(-h, h, local)
            LX, LY = np.meshgrid(best[0] + u, best[1] + u, indexing="ij")
            LX, LY = LX.ravel(), LY.ravel()
            ok = polygon_contains(poly, LX, LY, tol=1e-12)
            if np.any(ok):
                lp = np.column_stack([LX[ok], LY[ok]])
                v = sign * obj(lp)[idx]
                j = int(np.argmin(v))
                if v[j] < best_v:
                    best, best_v = lp[j], v[j]
            h = 2 * h / (local - 1)
        out.append((best, sign * best_v))
    return out


def _box_search(obj, iset, layers, grid, threads):
    """Feasibility-filtered grid for three or more stayer masses (no refinement)."""
    axes = [np.linspace(*iset.prob_range((d, d)), grid) for d in layers]
    A = np.zeros((len(layers), len(iset.types)))
    for j, d in enumerate(layers):
        A[j, type_index((d, d), iset.K)] = 1.0
    A_eq = np.vstack([iset.A_eq, A])
    pts = []
    for combo in itertools.product(*axes):
        res = simplex.linprog(np.zeros(len(iset.types)), A_eq, np.concatenate([iset.b_eq, combo]),
                              iset.A_ub, iset.b_ub)
        if res.success:
            pts.append(combo)
    pts = np.array(pts)
    lo, hi = _evaluate(obj, pts, threads)
    i, j = int(np.argmin(lo)), int(np.argmax(hi))
    return [(pts[i], lo[i]), (pts[j], hi[j])]


def aggregate_lcde_bounds(data, iset, layers, grid=200, threads=1):
    """Bounds on the stayer-share-weighted average of stayer effects over ``layers``.

    The program is optimized over the projection of the identified set on
    the stayer masses ``(p_dd : d in layers)``.  One or two layers use an
    exact projection (segment or polygon) with a dense grid, boundary
    sampling and local refinement; more layers fall back to a
    feasibility-filtered grid.  ``grid`` is the number of points per
    dimension.
    """
    layers = tuple(int(d) for d in layers)
    if not layers or any(not 1 <= d <= data.K for d in layers) or len(set(layers)) != len(layers):
        raise ConfigurationError(f"invalid layer range {layers}")
    obj = _AggregateObjective(data, layers)
    stayers = [ResponseType(d, d) for d in layers]
    total = np.zeros(len(iset.types))
    for t in stayers:
        total[type_index(t, iset.K)] = 1.0
    s_min, _ = iset.optimize(total)
    if s_min <= GAMMA_ZERO_TOL:
        sup = data.support
        return _interval(sup.lower - sup.upper, sup.upper - sup.lower, True, {"min_stayer_mass": s_min})
    if len(layers) == 1:
        lo_p, hi_p = iset.prob_range(stayers[0])
        res = _segment_search(obj, [lo_p], [hi_p], grid, threads)
    elif len(layers) == 2:
        poly = iset.project_2d(*stayers)
        if len(poly) == 1:
            pt = np.array(poly[0])
            lo, hi = obj(pt)
            res = [(pt, lo[0]), (pt, hi[0])]
        elif len(poly) == 2:
            res = _segment_search(obj, poly[0], poly[1], max(grid, 10_000), threads)
        else:
            res = _polygon_search(obj, poly, grid, threads)
    else:
        res = _box_search(obj, iset, layers, min(grid, 15), threads)
    (p_lo, v_lo), (p_hi, v_hi) = res
    names = [f"p{d}{d}" for d in layers]
    weights = {
        "lower": dict(zip(names, map(float, np.atleast_1d(p_lo)))),
        "upper": dict(zip(names, map(float, np.atleast_1d(p_hi)))),
    }
    return _interval(v_lo, v_hi, False, {"min_stayer_mass": s_min}, weights)


def naive_aggregate_bounds(data, iset, layers, weights):
    """Weighted average of per-layer stayer bounds at fixed ``weights``."""
    lo = hi = 0.0
    w = np.asarray(weights, dtype=float)
    w = w / w.sum()
    for wj, d in zip(w, layers):
        iv = lcde(data, iset, (d, d))
        lo += wj * iv.lower
        hi += wj * iv.upper
    return Interval(lo, hi)


def pointwise_aggregate_bounds(data, layers, stayer_masses):
    """Aggregate bounds at a fixed vector of stayer masses (no optimization)."""
    obj = _AggregateObjective(data, tuple(layers))
    lo, hi = obj(np.asarray(stayer_masses, dtype=float)[None, :])
    return Interval(float(lo[0]), float(hi[0]))
