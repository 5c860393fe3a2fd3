"""Brute-force checks of the closed-form bounds.

Two independent routes: mixture-component bounds on a single observed
law, and a full linear program over the weighted component masses of
every (type, arm) cell for finitely supported outcomes.  The LP never
uses truncated means; agreement with the closed forms is the sharpness
check.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import bounds as _bounds
from . import simplex
from ._validation import check_gamma
from .bounds import ConditionalData, Interval
from .dist import SupportBounds, WeightedSample
from .exceptions import ConfigurationError, DataError, FalsificationError
from .responseset import (
    LEE, IdentifiedSet, PropensityTable, RestrictionSet, ResponseType, all_types, type_index,
)

MASS_TOL = 1e-12
MAX_K = 3
MAX_SUPPORT = 10


def hm_component_bounds(mixture, gamma_k):
    """Range of the mean of a component carrying mass ``gamma_k`` of ``mixture``."""
    g = check_gamma(gamma_k, "gamma_k")
    return Interval(mixture.lower_truncated_mean(g), mixture.upper_truncated_mean(g),
                    gammas={"gamma": g})


def hm_weighted_average_bounds(mixture, gammas):
    """Range of the mass-weighted average mean of several components jointly."""
    g = check_gamma(math.fsum(gammas), "sum of gammas")
    return Interval(mixture.lower_truncated_mean(g), mixture.upper_truncated_mean(g),
                    gammas={"gamma": g})


@dataclass(frozen=True)
class DiscreteMixtureInstance:
    """Observed joint law of ``(Y, D)`` given ``Z`` on a finite outcome support.

    ``masses[z, d, j] = P(Y = support[j], D = d | Z = z)`` for ``d >= 1``;
    ``masses[z, 0]`` is unused.  ``nonemployed[z] = P(D = 0 | Z = z)``.
    """

    support: np.ndarray
    masses: np.ndarray
    nonemployed: np.ndarray
    restrictions: RestrictionSet = RestrictionSet((LEE,))

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=float)
        if m.ndim != 3 or m.shape[0] != 2 or m.shape[2] != len(self.support):
            raise DataError(f"masses must have shape (2, K+1, |Y|), got {m.shape}")
        if np.any(m < 0) or np.any(np.asarray(self.nonemployed) < 0):
            raise DataError("masses must be nonnegative")
        tot = m[:, 1:].sum(axis=(1, 2)) + np.asarray(self.nonemployed)
        if np.any(np.abs(tot - 1.0) > 1e-9):
            raise DataError(f"arm masses must sum to 1, got {tot}")
        if np.any(np.diff(self.support) <= 0):
            raise DataError("support must be strictly increasing")

    @property
    def K(self):
        return self.masses.shape[1] - 1

    @property
    def ptable(self):
        probs = self.masses.sum(axis=2)
        probs[:, 0] = self.nonemployed
        return PropensityTable(probs)

    def outcome_support(self):
        return SupportBounds(float(self.support[0]), float(self.support[-1]))

    def conditional_data(self):
        samples = {}
        for z in (0, 1):
            for d in range(1, self.K + 1):
                if self.masses[z, d].sum() > 0:
                    samples[(d, z)] = WeightedSample(self.support, self.masses[z, d])
        return ConditionalData(samples, self.ptable, self.outcome_support())

    def identified_set(self):
        return IdentifiedSet(self.ptable, self.restrictions)


def random_instance(rng, K=2, n_support=3, restrictions=RestrictionSet((LEE,)), alpha=1.0,
                    max_tries=10_000):
    """Draw an instance from random types and outcome laws satisfying ``restrictions``.

    Type probabilities are Dirichlet over the types not zeroed by the
    presets; draws violating the remaining constraints are rejected.
    """
    if not (1 <= K <= MAX_K and 1 <= n_support <= MAX_SUPPORT):
        raise ConfigurationError(f"instance size K={K}, |Y|={n_support} exceeds the oracle cap")
    support = np.sort(rng.choice(np.arange(10), size=n_support, replace=False)).astype(float)
    types = all_types(K)
    zeros = restrictions.zero_types(K)
    free = [t for t in types if t not in zeros]
    checks = [c for c in restrictions.expand(K) if c.op != "=="]
    equalities = [c for c in restrictions.expand(K) if c.op == "=="]
    for _ in range(max_tries):
        p = np.zeros(len(types))
        p[[type_index(t, K) for t in free]] = rng.dirichlet(np.ones(len(free)))
        ok = all(abs(np.dot(c.coef, p) - c.rhs) <= 1e-12 for c in equalities)
        for c in checks:
            v = np.dot(c.coef, p) - c.rhs
            ok &= v >= 0 if c.op == ">=" else v <= 0
        if ok:
            break
    else:
        raise RuntimeError("could not draw types satisfying the restrictions")
    masses = np.zeros((2, K + 1, n_support))
    nonemp = np.zeros(2)
    for t, pt in zip(types, p):
        for z in (0, 1):
            d = t.layer(z)
            if d == 0:
                nonemp[z] += pt
            else:
                masses[z, d] += pt * rng.dirichlet(alpha * np.ones(n_support))
    # exact adding-up after float accumulation
    for z in (0, 1):
        nonemp[z] = 1.0 - masses[z, 1:].sum()
    return DiscreteMixtureInstance(support, masses, np.clip(nonemp, 0.0, None), restrictions)


@dataclass(frozen=True)
class Target:
    """A contrast of potential-outcome means for one type, or the aggregate stayer effect.

    ``terms`` holds ``(sign, z, d)`` entries for ``E[Y(z, d) | T = type]``.
    """

    kind: str
    type: ResponseType = None
    terms: tuple = ()
    layers: tuple = ()

    def label(self):
        if self.kind == "aggregate":
            return f"aggregate{self.layers}"
        parts = "".join(f"{'+' if s > 0 else '-'}Y({z},{d})" for s, z, d in self.terms)
        return f"{self.kind}[{parts}|T={tuple(self.type)}]"


def lcde_target(layer, t):
    t = ResponseType(*t)
    if layer not in (t.d0, t.d1) or layer == 0:
        raise ConfigurationError(f"type {tuple(t)} never occupies layer {layer}")
    return Target("lcde", t, ((1, 1, layer), (-1, 0, layer)))


def lcie_target(z, d, d_alt, t):
    t = ResponseType(*t)
    if t.layer(z) != d or d == 0 or d_alt in (0, d):
        raise ConfigurationError(f"invalid indirect-effect target for {tuple(t)}")
    return Target("lcie", t, ((1, z, d), (-1, z, d_alt)))


def aggregate_target(layers):
    return Target("aggregate", layers=tuple(layers))


class _MixtureProgram:
    """Constraint system over type probabilities and weighted component masses."""

    def __init__(self, instance, target):
        self.instance = instance
        K, ny = instance.K, len(instance.support)
        self.iset = instance.identified_set()
        types = self.iset.types
        nt = len(types)
        col = nt
        self.cells = {}
        for t in types:
            for z in (0, 1):
                if t.layer(z) > 0:
                    self.cells[(t, z)] = np.arange(col, col + ny)
                    col += ny
        # unconstrained counterfactual laws for unobserved target terms
        self.free = {}
        if target.kind != "aggregate":
            for _, z, d in target.terms:
                if target.type.layer(z) != d:
                    self.free[(z, d)] = np.arange(col, col + ny)
                    col += ny
        self.n = col
        rows, rhs = [], []

        def row():
            return np.zeros(self.n)

        for a, b in zip(self.iset.A_eq, self.iset.b_eq):
            r = row()
            r[:nt] = a
            rows.append(r)
            rhs.append(b)
        for (t, z), idx in self.cells.items():
            r = row()
            r[idx] = 1.0
            r[type_index(t, K)] = -1.0
            rows.append(r)
            rhs.append(0.0)
        for z in (0, 1):
            for d in range(1, K + 1):
                for j in range(ny):
                    r = row()
                    for (t, zz), idx in self.cells.items():
                        if zz == z and t.layer(z) == d:
                            r[idx[j]] = 1.0
                    rows.append(r)
                    rhs.append(instance.masses[z, d, j])
        for idx in self.free.values():
            r = row()
            r[idx] = 1.0
            r[type_index(target.type, K)] = -1.0
            rows.append(r)
            rhs.append(0.0)
        self.A_eq = np.array(rows)
        self.b_eq = np.array(rhs)
        self.A_ub = np.zeros((len(self.iset.A_ub), self.n))
        self.A_ub[:, :nt] = self.iset.A_ub
        self.b_ub = self.iset.b_ub.copy()

        y = instance.support
        self.num = np.zeros(self.n)
        self.den = np.zeros(self.n)
        if target.kind == "aggregate":
            for d in target.layers:
                t = ResponseType(d, d)
                self.num[self.cells[(t, 1)]] += y
                self.num[self.cells[(t, 0)]] -= y
                self.den[type_index(t, K)] = 1.0
        else:
            t = target.type
            for s, z, d in target.terms:
                idx = self.cells[(t, z)] if t.layer(z) == d else self.free[(z, d)]
                self.num[idx] += s * y
            self.den[type_index(t, K)] = 1.0

    def solve(self, c, maximize=False, extra_eq=None):
        A, b = self.A_eq, self.b_eq
        if extra_eq is not None:
            A = np.vstack([A, extra_eq[0]])
            b = np.append(b, extra_eq[1])
        return simplex.linprog(c, A, b, self.A_ub, self.b_ub, maximize=maximize)

    def ratio_charnes_cooper(self, maximize):
        """Optimize ``num @ x / den @ x`` exactly as one LP in ``(x * s, s)``."""
        A = np.hstack([self.A_eq, -self.b_eq[:, None]])
        A = np.vstack([A, np.append(self.den, 0.0)])
        b = np.zeros(len(A))
        b[-1] = 1.0
        G = np.hstack([self.A_ub, -self.b_ub[:, None]])
        c = np.append(self.num, 0.0)
        res = simplex.linprog(c, A, b, G, np.zeros(len(G)), maximize=maximize).raise_for_status()
        return res.fun

    def ratio_grid(self, lo, hi, maximize, n_grid):
        best = -math.inf if maximize else math.inf
        for v in np.linspace(lo, hi, n_grid):
            if v <= MASS_TOL:
                continue
            res = self.solve(self.num, maximize, extra_eq=(self.den, v))
            if res.success:
                val = res.fun / v
                best = max(best, val) if maximize else min(best, val)
        return best


def lp_sharp_bounds(instance, target, method="charnes-cooper", n_grid=200):
    """Sharp bounds on ``target`` by linear programming over the full mixture system.

    Parameters
    ----------
    method : {"charnes-cooper", "grid"}
        ``"charnes-cooper"`` solves the ratio objective exactly;
        ``"grid"`` fixes the target mass on ``n_grid`` values between its
        extremes and takes the envelope.

    When the target's type mass can be zero the conditional mean is
    unrestricted and the interval spans the support (flagged trivial),
    matching the closed-form convention.
    """
    if instance.K > MAX_K or len(instance.support) > MAX_SUPPORT:
        raise ConfigurationError("instance exceeds the oracle size cap")
    if method not in ("charnes-cooper", "grid"):
        raise ConfigurationError(f"unknown oracle method {method!r}")
    prog = _MixtureProgram(instance, target)
    feas = prog.solve(np.zeros(prog.n))
    if not feas.success:
        raise FalsificationError("mixture system is infeasible", feas.infeasibility)
    lo_m = prog.solve(prog.den).raise_for_status().fun
    hi_m = prog.solve(prog.den, maximize=True).raise_for_status().fun
    gammas = {"min_mass": lo_m, "max_mass": hi_m}
    if lo_m <= MASS_TOL:
        sup = instance.outcome_support()
        width = sup.upper - sup.lower
        return Interval(-width, width, True, gammas)
    if method == "charnes-cooper":
        lo = prog.ratio_charnes_cooper(False)
        hi = prog.ratio_charnes_cooper(True)
    else:
        lo = prog.ratio_grid(lo_m, hi_m, False, n_grid)
        hi = prog.ratio_grid(lo_m, hi_m, True, n_grid)
    return Interval(lo, hi, False, gammas)


def closed_form_bounds(instance, target, grid=200):
    """The closed-form interval for ``target`` computed from the observed cells."""
    data = instance.conditional_data()
    iset = instance.identified_set()
    if target.kind == "aggregate":
        return _bounds.aggregate_lcde_bounds(data, iset, target.layers, grid=grid)
    t = target.type
    if target.kind == "lcde":
        return _bounds.lcde(data, iset, t, layer=target.terms[0][2])
    (_, z, d), (_, _, d_alt) = target.terms
    return _bounds.lcie(data, iset, z, d, d_alt, t)


def standard_targets(K):
    """Every direct and indirect contrast with an observed term for always-employed types."""
    out = []
    for t in all_types(K):
        if not t.always_employed:
            continue
        if t.is_stayer:
            out.append(lcde_target(t.d0, t))
            continue
        out.append(lcde_target(t.d1, t))
        out.append(lcde_target(t.d0, t))
        out.append(lcie_target(1, t.d1, t.d0, t))
        out.append(lcie_target(0, t.d0, t.d1, t))
    return out


def _discrepancy(a, b):
    if a.trivial != b.trivial:
        return math.inf
    return max(abs(a.lower - b.lower), abs(a.upper - b.upper))


def oracle_check(n_instances=100, presets=None, K=2, max_support=5, seed=0, tol=1e-6,
                 lee_tol=1e-9, method="charnes-cooper"):
    """Compare LP bounds with the closed forms on seeded random instances.

    Returns a JSON-ready report with the maximum discrepancy per preset
    chain and for the single-layer binary Lee comparison.
    """
    if presets is None:
        presets = default_preset_chains(K)
    rng = np.random.default_rng(seed)
    report = {"seed": seed, "n_instances": n_instances, "K": K, "method": method, "checks": []}
    targets = standard_targets(K)
    passed = True
    for name, rset in presets.items():
        worst, nontrivial = 0.0, 0
        for _ in range(n_instances):
            inst = random_instance(rng, K, int(rng.integers(2, max_support + 1)), rset)
            for tg in targets:
                lp = lp_sharp_bounds(inst, tg, method=method)
                cf = closed_form_bounds(inst, tg)
                worst = max(worst, _discrepancy(lp, cf))
                nontrivial += not lp.trivial
        ok = worst <= tol
        passed &= ok
        report["checks"].append({"restrictions": name, "max_discrepancy": worst,
                                 "nontrivial_comparisons": nontrivial, "tolerance": tol, "pass": ok})
    worst = 0.0
    for _ in range(n_instances):
        inst = random_instance(rng, 1, 2, RestrictionSet((LEE,)))
        inst = DiscreteMixtureInstance(np.array([0.0, 1.0]), inst.masses, inst.nonemployed,
                                       inst.restrictions)
        lp = lp_sharp_bounds(inst, lcde_target(1, (1, 1)), method=method)
        lee = _bounds.lee_bounds(inst.conditional_data(), outcome_kind="binary")
        worst = max(worst, _discrepancy(lp, lee))
    ok = worst <= lee_tol
    passed &= ok
    report["checks"].append({"restrictions": "K=1 binary Lee", "max_discrepancy": worst,
                             "tolerance": lee_tol, "pass": ok})
    report["pass"] = bool(passed)
    return report


def default_preset_chains(K=2):
    """Restriction sets exercised by :func:`oracle_check`."""
    from .responseset import STAYERS_GE_DOWN, STRONG_MONO, UP_GE_DOWN, smallest_type, zero_type

    chains = {
        "lee": RestrictionSet((LEE,)),
        "lee,stayers-ge-down": RestrictionSet((LEE, STAYERS_GE_DOWN)),
        "lee,up-ge-down": RestrictionSet((LEE, UP_GE_DOWN)),
        "strong-mono": RestrictionSet((STRONG_MONO,)),
    }
    if K >= 2:
        chains[f"lee,smallest=({K},1)"] = RestrictionSet((LEE, smallest_type((K, 1))))
        chains[f"lee,zero=({K},1)"] = RestrictionSet((LEE, zero_type((K, 1))))
    return chains
