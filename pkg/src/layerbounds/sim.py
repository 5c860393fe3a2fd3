"""Two-layer data-generating processes with normal log-wages.

Each response type carries a normal law for the (log) outcome it would
realize under each arm.  The population path discretizes the exact
conditional mixtures; the sampling path draws microdata rows.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .bounds import ConditionalData
from .dataset import Dataset
from .dist import SupportBounds, WeightedSample
from .exceptions import ConfigurationError, DegenerateLayerError
from .responseset import TABLE1, PropensityTable, ResponseType, all_types, two_type_profile

T = ResponseType
LAYER_LABELS = ("0", "L", "H")


@dataclass(frozen=True)
class DgpSpec:
    """Type probabilities and per-(type, arm) normal outcome laws.

    Attributes
    ----------
    type_probs : dict
        ``ResponseType -> probability``.
    mu : dict
        ``(ResponseType, z) -> mean`` of the realized outcome ``Y(z, D_z)``
        for types employed under ``z``.
    sigma : float
        Common standard deviation.
    counterfactual_mu : dict
        ``(ResponseType, z, d) -> mean`` of the never-realized outcome
        ``Y(z, d)`` for ``d != D_z``; only used for the direct/indirect
        split of the total effect.
    """

    type_probs: dict
    mu: dict
    sigma: float = 1.0
    counterfactual_mu: dict = field(default_factory=dict)
    K: int = 2
    treat_share: float = 0.5
    name: str = "custom"

    def __post_init__(self):
        probs = np.array([self.type_probs.get(t, 0.0) for t in all_types(self.K)])
        if np.any(probs < -1e-12) or abs(probs.sum() - 1.0) > 1e-9:
            raise ConfigurationError("type probabilities must be nonnegative and sum to 1")
        for t, p in self.type_probs.items():
            for z in (0, 1):
                if p > 0 and T(*t).layer(z) > 0 and (T(*t), z) not in self.mu:
                    raise ConfigurationError(f"missing outcome mean for type {tuple(t)}, arm {z}")
        if not self.sigma > 0:
            raise ConfigurationError("sigma must be positive")

    @property
    def ptable(self):
        probs = np.zeros((2, self.K + 1))
        for t, p in self.type_probs.items():
            probs[1, t[1]] += p
            probs[0, t[0]] += p
        return PropensityTable(probs)

    def components(self, d, z):
        """``[(type, mass, mean)]`` of types occupying layer ``d`` under arm ``z``."""
        return [(T(*t), p, self.mu[(T(*t), z)]) for t, p in sorted(self.type_probs.items())
                if p > 0 and T(*t).layer(z) == d]

    def to_dict(self):
        def key(t):
            return f"{t[0]},{t[1]}"
        return {
            "name": self.name, "K": self.K, "sigma": self.sigma, "treat_share": self.treat_share,
            "type_probs": {key(t): p for t, p in self.type_probs.items()},
            "mu": {f"{key(t)}|{z}": m for (t, z), m in self.mu.items()},
            "counterfactual_mu": {f"{key(t)}|{z}|{d}": m for (t, z, d), m in self.counterfactual_mu.items()},
        }

    @classmethod
    def from_dict(cls, obj):
        def tp(s):
            return T(*map(int, s.split(",")))
        mu = {}
        for k, v in obj["mu"].items():
            t, z = k.split("|")
            mu[(tp(t), int(z))] = float(v)
        cf = {}
        for k, v in obj.get("counterfactual_mu", {}).items():
            t, z, d = k.split("|")
            cf[(tp(t), int(z), int(d))] = float(v)
        return cls(
            type_probs={tp(k): float(v) for k, v in obj["type_probs"].items()},
            mu=mu, sigma=float(obj.get("sigma", 1.0)), counterfactual_mu=cf,
            K=int(obj.get("K", 2)), treat_share=float(obj.get("treat_share", 0.5)),
            name=obj.get("name", "custom"),
        )


TRUE_P_HH = 0.373041
TRUE_P_LL = 0.278886

# (type: (mean under treatment, mean under control)); layers L=1, H=2
_DESIGN_MEANS = {
    1: {T(0, 1): (9.5, 9.5), T(0, 2): (11.5, 9.5), T(1, 2): (16.5, 9.5),
        T(2, 1): (9.75, 9.6), T(1, 1): (9.5, 9.5), T(2, 2): (14.5, 14.5)},
    2: {T(0, 1): (10.5, 9.5), T(0, 2): (12.5, 9.5), T(1, 2): (14.5, 9.5),
        T(2, 1): (10.5, 10.5), T(1, 1): (10.5, 9.5), T(2, 2): (14.0, 12.0)},
}
# control-arm means at the treated layer for switchers: zero within-firm
# effect in design 1, a unit effect in design 2
_DESIGN_CF = {
    1: {(T(1, 2), 0, 2): 16.5, (T(2, 1), 0, 1): 9.75},
    2: {(T(1, 2), 0, 2): 13.5, (T(2, 1), 0, 1): 9.5},
}


def design(spec_id):
    """One of the two built-in two-layer designs."""
    if spec_id not in _DESIGN_MEANS:
        raise ConfigurationError(f"unknown design {spec_id!r}; choose 1 or 2")
    prof = two_type_profile(TABLE1, TRUE_P_HH, TRUE_P_LL)
    # clip float dust such as p(0,H) = -5e-17
    probs = {t: max(p, 0.0) for t, p in prof.probs.items()}
    mu = {}
    for t, (m1, m0) in _DESIGN_MEANS[spec_id].items():
        if t.d1 > 0:
            mu[(t, 1)] = m1
        if t.d0 > 0:
            mu[(t, 0)] = m0
    return DgpSpec(probs, mu, sigma=1.0, counterfactual_mu=dict(_DESIGN_CF[spec_id]),
                   K=2, name=f"design{spec_id}")


@dataclass(frozen=True)
class TruePop:
    """Population parameters for the always-employed.

    ``lcde`` maps ``(layer, type)`` to the within-layer effect, ``lcie``
    maps ``(z, d, d_alt, type)`` to the between-layer contrast.
    """

    lcde: dict
    lcie: dict
    total_effect: float
    nde: float
    nie: float
    p_ae: float


def _potential_mean(spec, t, z, d):
    if t.layer(z) == d:
        return spec.mu[(t, z)]
    return spec.counterfactual_mu.get((t, z, d), np.nan)


def true_params(spec):
    """Analytic effects; the total splits into direct plus indirect parts."""
    ae = {T(*t): p for t, p in spec.type_probs.items() if T(*t).always_employed and p > 0}
    p_ae = sum(ae.values())
    lcde, lcie = {}, {}
    total = nde = nie = 0.0
    for t, p in sorted(ae.items()):
        w = p / p_ae
        total += w * (spec.mu[(t, 1)] - spec.mu[(t, 0)])
        direct = _potential_mean(spec, t, 1, t.d1) - _potential_mean(spec, t, 0, t.d1)
        lcde[(t.d1, t)] = direct
        nde += w * direct
        if t.d0 != t.d1:
            indirect = _potential_mean(spec, t, 0, t.d1) - _potential_mean(spec, t, 0, t.d0)
            lcie[(0, t.d1, t.d0, t)] = indirect
            nie += w * indirect
            other = _potential_mean(spec, t, 1, t.d0) - _potential_mean(spec, t, 0, t.d0)
            if not np.isnan(other):
                lcde[(t.d0, t)] = other
    return TruePop(lcde, lcie, total, nde, nie, p_ae)


def normal_nodes(mu, sigma, n):
    """Equal-mass discretization: the conditional mean of each of ``n`` quantile bins."""
    edges = special.ndtri(np.linspace(0.0, 1.0, n + 1))
    pdf = np.exp(-0.5 * edges ** 2) / np.sqrt(2 * np.pi)
    pdf[~np.isfinite(edges)] = 0.0
    return mu + sigma * n * (pdf[:-1] - pdf[1:])


def population_conditional(spec, d, z, nodes=100_000):
    """Discretized law of ``Y | D=d, Z=z`` (a normal mixture over types)."""
    comps = spec.components(d, z)
    total = sum(p for _, p, _ in comps)
    if total <= 0:
        raise DegenerateLayerError(f"P(D={d}|Z={z}) = 0")
    values = np.concatenate([normal_nodes(m, spec.sigma, nodes) for _, _, m in comps])
    weights = np.concatenate([np.full(nodes, p / total / nodes) for _, p, _ in comps])
    return WeightedSample(values, weights)


def population_data(spec, nodes=100_000):
    """:class:`ConditionalData` for all populated cells, unbounded support."""
    pt = spec.ptable
    samples = {(d, z): population_conditional(spec, d, z, nodes)
               for z in (0, 1) for d in range(1, spec.K + 1) if pt(d, z) > 0}
    return ConditionalData(samples, pt, SupportBounds())


@dataclass(frozen=True)
class SimulatedRows:
    """Sampled microdata plus the latent types and both realized potential outcomes."""

    dataset: Dataset
    types: np.ndarray
    y1: np.ndarray
    y0: np.ndarray


def _draw_block(spec, types, probs, m, seed_seq):
    rng = np.random.default_rng(seed_seq)
    z = (rng.random(m) < spec.treat_share).astype(int)
    k = rng.choice(len(types), size=m, p=probs)
    mu1 = np.array([spec.mu.get((t, 1), np.nan) for t in types])[k]
    mu0 = np.array([spec.mu.get((t, 0), np.nan) for t in types])[k]
    e1, e0 = rng.standard_normal(m), rng.standard_normal(m)
    y1 = np.where(np.isnan(mu1), np.nan, mu1 + spec.sigma * e1)
    y0 = np.where(np.isnan(mu0), np.nan, mu0 + spec.sigma * e0)
    d1 = np.array([t.d1 for t in types])[k]
    d0 = np.array([t.d0 for t in types])[k]
    d = np.where(z == 1, d1, d0)
    return z, k, d, y1, y0


def sample(spec, n, seed=0, threads=1, block_size=1 << 16):
    """Draw ``n`` unit-weight rows.

    Blocks of ``block_size`` rows use independent child seeds of ``seed``,
    so output is identical for any ``threads``.
    """
    if n < 1:
        raise ConfigurationError("n must be at least 1")
    types = [T(*t) for t, p in sorted(spec.type_probs.items()) if p > 0]
    probs = np.array([spec.type_probs[t] for t in types])
    probs = probs / probs.sum()
    sizes = [block_size] * (n // block_size) + ([n % block_size] if n % block_size else [])
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    args = [(spec, types, probs, m, s) for m, s in zip(sizes, seeds)]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda a: _draw_block(*a), args))
    else:
        parts = [_draw_block(*a) for a in args]
    z, k, d, y1, y0 = (np.concatenate(col) for col in zip(*parts))
    y = np.where(z == 1, y1, y0)
    y = np.where(d == 0, np.nan, y)
    labels = LAYER_LABELS if spec.K == 2 else tuple(str(i) for i in range(spec.K + 1))
    ds = Dataset(y, d.astype(int), z, np.ones(n), labels)
    return SimulatedRows(ds, np.array(types)[k], y1, y0)
