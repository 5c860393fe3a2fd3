"""Identified set of response-type probabilities.

A response type ``(d0, d1)`` records the layer a unit occupies under
control and under treatment.  Given the propensity table
``P(D=d | Z=z)`` and a set of linear restrictions, the feasible type
distributions form a polytope; this module builds it and answers LP
queries over it (extreme type probabilities, minimal mixture weights,
falsification, 2-D projections).
"""

from dataclasses import dataclass, field
from functools import cached_property
import itertools
import math
from typing import NamedTuple

import numpy as np

from . import simplex
from .exceptions import ConfigurationError, DataError, DegenerateLayerError, FalsificationError

ROW_SUM_TOL = 1e-9


class ResponseType(NamedTuple):
    d0: int
    d1: int

    def layer(self, z):
        """Layer occupied under arm ``z``."""
        return self.d1 if z == 1 else self.d0

    @property
    def is_stayer(self):
        return self.d0 == self.d1 != 0

    @property
    def always_employed(self):
        return self.d0 > 0 and self.d1 > 0


def all_types(K):
    """Types in row-major ``(d0, d1)`` order; position = ``d0 * (K+1) + d1``."""
    return [ResponseType(a, b) for a in range(K + 1) for b in range(K + 1)]


def type_index(t, K):
    return t[0] * (K + 1) + t[1]


@dataclass(frozen=True)
class PropensityTable:
    """Conditional layer probabilities; ``probs[z, d] = P(D=d | Z=z)``.

    Column 0 is the non-employment layer.
    """

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float)
        if p.ndim != 2 or p.shape[0] != 2 or p.shape[1] < 2:
            raise DataError(f"propensity table must have shape (2, K+1) with K>=1, got {p.shape}")
        if np.any(~np.isfinite(p)) or np.any(p < -ROW_SUM_TOL) or np.any(p > 1 + ROW_SUM_TOL):
            raise DataError("propensities must lie in [0, 1]")
        if np.any(np.abs(p.sum(axis=1) - 1.0) > ROW_SUM_TOL):
            raise DataError(f"propensity rows must sum to 1, got {p.sum(axis=1)}")
        p = np.clip(p, 0.0, 1.0)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def from_employment(cls, treated, control):
        """Build from employed-layer probabilities ``[P(D=1|Z), ..., P(D=K|Z)]``.

        The non-employment probability is the complement.
        """
        treated = np.asarray(treated, dtype=float)
        control = np.asarray(control, dtype=float)
        rows = [np.concatenate([[1.0 - r.sum()], r]) for r in (control, treated)]
        return cls(np.vstack(rows))

    @property
    def K(self):
        return self.probs.shape[1] - 1

    def __call__(self, d, z):
        return float(self.probs[z, d])

    def employment_rate(self, z):
        return float(self.probs[z, 1:].sum())

    def swapped(self):
        """Exchange the treated and control rows."""
        return PropensityTable(self.probs[::-1])

    def to_dict(self):
        return {"control": self.probs[0].tolist(), "treated": self.probs[1].tolist()}


# reference employment propensities for the two designs; layers 0, L=1, H=2
TABLE1 = PropensityTable.from_employment(
    treated=[0.302886, 0.408114], control=[0.313959, 0.373041]
)


PRESET_NAMES = ("lee", "strong-mono", "up-ge-down", "stayers-ge-down", "smallest", "zero")


@dataclass(frozen=True)
class Preset:
    """Named restriction; ``type`` is required by ``smallest`` and ``zero``."""

    name: str
    type: ResponseType = None

    def __post_init__(self):
        if self.name not in PRESET_NAMES:
            raise ConfigurationError(f"unknown restriction preset {self.name!r}")
        needs_type = self.name in ("smallest", "zero")
        if needs_type != (self.type is not None):
            raise ConfigurationError(f"preset {self.name!r} {'needs' if needs_type else 'takes no'} type")
        if self.type is not None:
            object.__setattr__(self, "type", ResponseType(*self.type))

    def label(self, layer_names=None):
        if self.type is None:
            return self.name
        names = layer_names or [str(i) for i in range(max(self.type) + 1)]
        return f"{self.name}={names[self.type.d0]},{names[self.type.d1]}"


LEE = Preset("lee")
STRONG_MONO = Preset("strong-mono")
UP_GE_DOWN = Preset("up-ge-down")
STAYERS_GE_DOWN = Preset("stayers-ge-down")


def smallest_type(t):
    return Preset("smallest", ResponseType(*t))


def zero_type(t):
    return Preset("zero", ResponseType(*t))


@dataclass(frozen=True)
class LinearConstraint:
    """``coef @ p (op) rhs`` with ``op`` one of ``'=='``, ``'>='``, ``'<='``."""

    coef: tuple
    op: str
    rhs: float
    name: str = ""

    def __post_init__(self):
        if self.op not in ("==", ">=", "<="):
            raise ConfigurationError(f"bad constraint operator {self.op!r}")
        object.__setattr__(self, "coef", tuple(float(a) for a in self.coef))


@dataclass(frozen=True)
class RestrictionSet:
    """Presets plus explicit linear constraints over the ``(K+1)**2`` type vector."""

    presets: tuple = ()
    constraints: tuple = ()

    def __post_init__(self):
        presets = tuple(Preset(p) if isinstance(p, str) else p for p in self.presets)
        object.__setattr__(self, "presets", presets)
        object.__setattr__(self, "constraints", tuple(self.constraints))

    def __add__(self, other):
        if isinstance(other, (Preset, str)):
            other = RestrictionSet((other,))
        elif isinstance(other, LinearConstraint):
            other = RestrictionSet(constraints=(other,))
        return RestrictionSet(
            tuple(dict.fromkeys(self.presets + other.presets)),
            self.constraints + other.constraints,
        )

    def labels(self, layer_names=None):
        out = [p.label(layer_names) for p in self.presets]
        out += [c.name or "custom" for c in self.constraints]
        return out

    def zero_types(self, K):
        """Types forced to zero probability by the presets."""
        zeros = set()
        for p in self.presets:
            if p.name in ("lee", "strong-mono"):
                zeros.update(ResponseType(d, 0) for d in range(1, K + 1))
            if p.name == "strong-mono":
                zeros.update(ResponseType(d, e) for d in range(K + 1) for e in range(d))
            if p.name == "zero":
                zeros.add(p.type)
        return zeros

    def expand(self, K):
        """Explicit constraint list for ``K`` layers, in a fixed deterministic order."""
        n = (K + 1) ** 2

        def unit(*pairs):
            a = np.zeros(n)
            for t, v in pairs:
                a[type_index(t, K)] += v
            return tuple(a)

        for p in self.presets:
            if p.type is not None and max(p.type) > K:
                raise ConfigurationError(f"preset type {tuple(p.type)} exceeds K={K}")
        out = []
        for t in sorted(self.zero_types(K)):
            out.append(LinearConstraint(unit((t, 1.0)), "==", 0.0, f"p{tuple(t)}=0"))
        for p in self.presets:
            pairs = [(d, e) for d in range(K + 1) for e in range(d)]  # d > e
            if p.name == "up-ge-down":
                for d, e in pairs:
                    up, down = ResponseType(e, d), ResponseType(d, e)
                    out.append(LinearConstraint(unit((up, 1.0), (down, -1.0)), ">=", 0.0,
                                                f"p{tuple(up)}>=p{tuple(down)}"))
            elif p.name == "stayers-ge-down":
                for d, e in pairs:
                    if d == 0:
                        continue
                    stay, down = ResponseType(d, d), ResponseType(d, e)
                    out.append(LinearConstraint(unit((stay, 1.0), (down, -1.0)), ">=", 0.0,
                                                f"p{tuple(stay)}>=p{tuple(down)}"))
            elif p.name == "smallest":
                # over the types not already ruled out by the other presets
                others = RestrictionSet(tuple(q for q in self.presets if q != p)).zero_types(K)
                for s in all_types(K):
                    if s != p.type and s not in others:
                        out.append(LinearConstraint(unit((s, 1.0), (p.type, -1.0)), ">=", 0.0,
                                                    f"p{tuple(s)}>=p{tuple(p.type)}"))
        for c in self.constraints:
            if len(c.coef) != n:
                raise ConfigurationError(
                    f"constraint {c.name or c.coef} has {len(c.coef)} coefficients, expected {n}")
            out.append(c)
        return out


class IdentifiedSet:
    """Polytope of type distributions consistent with a propensity table.

    Rows: non-negativity, adding-up, the two marginal equations linking
    types to ``P(D=d | Z=z)`` and the expanded restrictions.  Immutable
    after construction.
    """

    def __init__(self, ptable, restrictions=RestrictionSet()):
        if not isinstance(restrictions, RestrictionSet):
            restrictions = RestrictionSet(tuple(restrictions))
        self.ptable = ptable
        self.restrictions = restrictions
        K = self.K = ptable.K
        self.types = all_types(K)
        n = len(self.types)
        A_eq, b_eq, A_ub, b_ub = [], [], [], []
        for d in range(K + 1):
            a = np.zeros(n)
            for e in range(K + 1):
                a[type_index((e, d), K)] = 1.0
            A_eq.append(a)
            b_eq.append(ptable(d, 1))
        for d in range(K + 1):
            a = np.zeros(n)
            for e in range(K + 1):
                a[type_index((d, e), K)] = 1.0
            A_eq.append(a)
            b_eq.append(ptable(d, 0))
        A_eq.append(np.ones(n))
        b_eq.append(1.0)
        self.constraint_names = [f"P(D={d}|Z=1)" for d in range(K + 1)]
        self.constraint_names += [f"P(D={d}|Z=0)" for d in range(K + 1)] + ["sum=1"]
        for c in restrictions.expand(K):
            a = np.array(c.coef)
            if c.op == "==":
                A_eq.append(a)
                b_eq.append(c.rhs)
            elif c.op == "<=":
                A_ub.append(a)
                b_ub.append(c.rhs)
            else:
                A_ub.append(-a)
                b_ub.append(-c.rhs)
            self.constraint_names.append(c.name)
        self.A_eq = np.array(A_eq)
        self.b_eq = np.array(b_eq)
        self.A_ub = np.array(A_ub).reshape(-1, n)
        self.b_ub = np.array(b_ub)

    def __repr__(self):
        return f"IdentifiedSet(K={self.K}, restrictions={self.restrictions.labels()})"

    def restrict(self, extra):
        return IdentifiedSet(self.ptable, self.restrictions + extra)

    def _solve(self, c, maximize=False):
        return simplex.linprog(c, self.A_eq, self.b_eq, self.A_ub, self.b_ub, maximize=maximize)

    @cached_property
    def _feasibility(self):
        return self._solve(np.zeros(len(self.types)))

    def is_empty(self):
        """True when the data and restrictions are jointly rejected."""
        return not self._feasibility.success

    @property
    def infeasibility(self):
        """Phase-one residual of the feasibility program; zero when nonempty."""
        return float(self._feasibility.infeasibility)

    def feasible_point(self):
        self._require_nonempty()
        return self._feasibility.x

    def _require_nonempty(self):
        if self.is_empty():
            raise FalsificationError(
                f"identified set is empty under {self.restrictions.labels()}",
                certificate=self._feasibility.infeasibility,
            )

    def contains(self, p, tol=1e-9):
        p = np.asarray(p, dtype=float)
        if np.any(p < -tol):
            return False
        if np.any(np.abs(self.A_eq @ p - self.b_eq) > tol):
            return False
        return not np.any(self.A_ub @ p - self.b_ub > tol)

    def optimize(self, c, maximize=False):
        """Optimal value and optimizer of a linear objective over the set."""
        self._require_nonempty()
        res = self._solve(np.asarray(c, dtype=float), maximize=maximize).raise_for_status()
        return res.fun, res.x

    def _unit(self, t):
        c = np.zeros(len(self.types))
        c[type_index(t, self.K)] = 1.0
        return c

    def min_prob(self, t):
        return self.optimize(self._unit(t))[0]

    def max_prob(self, t):
        return self.optimize(self._unit(t), maximize=True)[0]

    def prob_range(self, t):
        return self.min_prob(t), self.max_prob(t)

    def gamma_lower(self, t, z):
        """Smallest feasible mixture weight of type ``t`` in the ``(layer, z)`` cell."""
        t = ResponseType(*t)
        d = t.layer(z)
        denom = self.ptable(d, z)
        if d == 0 or denom <= 0:
            raise DegenerateLayerError(f"P(D={d}|Z={z}) = {denom}; gamma undefined for {tuple(t)}")
        return min(max(self.min_prob(t) / denom, 0.0), 1.0)

    def project_2d(self, tx, ty, tol=1e-12):
        """Counterclockwise vertices of the projection onto ``(p_tx, p_ty)``.

        Exact: vertices are found by LP in edge-normal directions until no
        edge can be pushed outward.
        """
        self._require_nonempty()
        ix, iy = type_index(tx, self.K), type_index(ty, self.K)

        def support(direction):
            c = np.zeros(len(self.types))
            c[ix], c[iy] = direction
            _, x = self.optimize(c, maximize=True)
            return (float(x[ix]), float(x[iy]))

        pts = [support(d) for d in ((1, 0), (0, 1), (-1, 0), (0, -1))]
        hull = _dedupe(pts, tol)
        if len(hull) <= 2:
            return _ordered(hull, tol)
        hull = _ordered(hull, tol)
        changed = True
        while changed:
            changed = False
            new = []
            for i, a in enumerate(hull):
                b = hull[(i + 1) % len(hull)]
                new.append(a)
                normal = (b[1] - a[1], a[0] - b[0])  # outward for a CCW ring
                if math.hypot(*normal) <= tol:
                    continue
                v = support(normal)
                gain = normal[0] * (v[0] - a[0]) + normal[1] * (v[1] - a[1])
                if gain > 1e-10 * math.hypot(*normal) and all(
                    math.hypot(v[0] - q[0], v[1] - q[1]) > tol for q in hull
                ):
                    new.append(v)
                    changed = True
            hull = _ordered(_dedupe(new, tol), tol)
        return hull

    def vertices_2d(self):
        """Projection onto ``(p_LL, p_HH)`` for the two-layer case."""
        if self.K != 2:
            raise ConfigurationError("vertices_2d requires K=2")
        return self.project_2d((1, 1), (2, 2))


def _dedupe(pts, tol):
    out = []
    for p in pts:
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) > max(tol, 1e-12) for q in out):
            out.append(p)
    return out


def _ordered(pts, tol):
    """CCW order with collinear points dropped; 1 or 2 points returned as is."""
    pts = sorted(set(pts))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 1e-15:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 1e-15:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]
    return ring if len(ring) >= 2 else pts[:1]


def polygon_contains(poly, x, y, tol=1e-12):
    """Vectorized point-in-convex-polygon test for a CCW ring (segments and points too)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(poly) == 1:
        return (np.abs(x - poly[0][0]) <= tol) & (np.abs(y - poly[0][1]) <= tol)
    if len(poly) == 2:
        (ax, ay), (bx, by) = poly
        dx, dy = bx - ax, by - ay
        L2 = dx * dx + dy * dy
        s = ((x - ax) * dx + (y - ay) * dy) / L2
        dist = np.abs((x - ax) * dy - (y - ay) * dx) / math.sqrt(L2)
        return (s >= -tol) & (s <= 1 + tol) & (dist <= tol)
    inside = np.ones(np.broadcast(x, y).shape, dtype=bool)
    for i, (ax, ay) in enumerate(poly):
        bx, by = poly[(i + 1) % len(poly)]
        inside &= (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= -tol
    return inside


@dataclass
class TwoTypeProfile:
    """Full type vector implied by ``(p_HH, p_LL)`` in the two-layer model."""

    probs: dict = field(default_factory=dict)
    feasible: bool = True

    def vector(self):
        return np.array([self.probs[t] for t in all_types(2)])


def two_type_profile(ptable, p_HH, p_LL, tol=1e-12):
    """Closed-form completion of the type vector under Lee monotonicity (K=2).

    Layer 1 is ``L`` and layer 2 is ``H``.  The returned profile is flagged
    infeasible when any implied probability is negative or the employment
    rates contradict monotonicity.
    """
    if ptable.K != 2:
        raise ConfigurationError("two_type_profile requires K=2")
    L1, H1 = ptable(1, 1), ptable(2, 1)
    L0, H0 = ptable(1, 0), ptable(2, 0)
    probs = {t: 0.0 for t in all_types(2)}
    probs[ResponseType(0, 0)] = 1.0 - H1 - L1
    probs[ResponseType(0, 1)] = L1 - H0 + p_HH - p_LL
    probs[ResponseType(0, 2)] = H1 - L0 + p_LL - p_HH
    probs[ResponseType(1, 2)] = L0 - p_LL
    probs[ResponseType(2, 1)] = H0 - p_HH
    probs[ResponseType(1, 1)] = p_LL
    probs[ResponseType(2, 2)] = p_HH
    feasible = all(v >= -tol for v in probs.values())
    feasible &= ptable(0, 1) <= ptable(0, 0) + tol
    return TwoTypeProfile(probs, bool(feasible))


def two_type_closed_form_ranges(ptable):
    """Closed-form ``(min, max)`` of ``p_HH`` and ``p_LL`` under Lee monotonicity."""
    L1, H1 = ptable(1, 1), ptable(2, 1)
    L0, H0 = ptable(1, 0), ptable(2, 0)
    return {
        ResponseType(2, 2): (max(0.0, H0 - L1), min(H0, H1)),
        ResponseType(1, 1): (max(0.0, L0 - H1), min(L0, L1)),
    }
