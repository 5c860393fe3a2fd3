"""Command-line front end.

Exit codes: 0 ok, 1 oracle check failed, 2 usage or configuration error,
3 restrictions falsified by the data, 4 data error.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import bounds as _bounds
from . import oracle, sim
from .config import parse_constraints, parse_restrictions, parse_type, type_label
from .dataset import ingest
from .dist import SupportBounds
from .exceptions import (
    ConfigurationError, DataError, DegenerateLayerError, DomainError, FalsificationError,
    LayerBoundsError, MonotonicityViolation,
)
from .report import BoundsReport, interval_entry
from .responseset import IdentifiedSet, PropensityTable, RestrictionSet, all_types

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_FALSIFIED, EXIT_DATA = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _support(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"support must be 'lower,upper', got {text!r}") from None
    return lo, hi


def _probs(text):
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    p = _Parser(prog="layerbounds", description="Bounds for multilayered sample selection")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def source(sp, table=False):
        g = sp.add_mutually_exclusive_group(required=not table)
        g.add_argument("--design", type=int, choices=(1, 2), help="built-in simulation design")
        g.add_argument("--data", help="CSV with header outcome,layer,arm,weight")
        if table:
            g.add_argument("--treated", type=_probs,
                           help="employment probabilities per layer under treatment")
            sp.add_argument("--control", type=_probs,
                            help="employment probabilities per layer under control")
        sp.add_argument("--nonemployed", default="0", help="non-employment layer label")
        sp.add_argument("--ordering", help="employed layer labels, lowest first")
        sp.add_argument("--nodes", type=int, default=100_000,
                        help="discretization nodes per type for --design")

    def common(sp, restrict=True):
        if restrict:
            sp.add_argument("--restrict", default="lee", help="comma-separated restriction presets")
            sp.add_argument("--constraints", help="sidecar file of custom linear constraints")
        sp.add_argument("--support", type=_support, help="outcome support 'lower,upper'")
        sp.add_argument("--out", help="JSON report path (default stdout)")
        sp.add_argument("--csv", help="plot-data CSV path")
        sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("lee", help="trimming bounds for the always-employed")
    source(sp)
    common(sp, restrict=False)
    sp.add_argument("--outcome-kind", choices=("continuous", "binary"), default="continuous")

    sp = sub.add_parser("idset", help="identified set of response-type probabilities")
    source(sp, table=True)
    common(sp)

    sp = sub.add_parser("falsify", help="test whether the restrictions are compatible with the data")
    source(sp, table=True)
    common(sp)

    sp = sub.add_parser("bounds", help="direct/indirect effect bounds per response type")
    source(sp)
    common(sp)
    sp.add_argument("--type", action="append", dest="types", help="target type, e.g. H,H")
    sp.add_argument("--aggregate", help="layer labels for the aggregate stayer effect, e.g. L,H")
    sp.add_argument("--grid", type=int, default=200, help="aggregate grid points per dimension")

    sp = sub.add_parser("simulate", help="draw microdata from a design")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--design", type=int, choices=(1, 2))
    g.add_argument("--spec", help="JSON design specification")
    sp.add_argument("--n", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--out", help="JSON report path (default stdout)")
    sp.add_argument("--csv", help="write the sampled rows here")

    sp = sub.add_parser("oracle-check", help="compare LP and closed-form bounds")
    sp.add_argument("--instances", type=int, default=100)
    sp.add_argument("--K", type=int, default=2, choices=(1, 2, 3))
    sp.add_argument("--max-support", type=int, default=5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--method", choices=("charnes-cooper", "grid"), default="charnes-cooper")
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--out", help="JSON report path (default stdout)")
    return p


def _load(args):
    """Return ``(ConditionalData or None, PropensityTable, labels)``."""
    support = SupportBounds(*args.support) if getattr(args, "support", None) else SupportBounds()
    if args.design is not None:
        spec = sim.design(args.design)
        data = sim.population_data(spec, args.nodes)
        if args.support:
            data = _bounds.ConditionalData(data.samples, data.ptable, support)
        return data, data.ptable, sim.LAYER_LABELS
    if args.data is not None:
        ordering = args.ordering.split(",") if args.ordering else None
        ds = ingest(args.data, ordering, args.nonemployed)
        data = ds.conditional_data(support)
        return data, data.ptable, ds.labels
    if args.control is None or len(args.control) != len(args.treated):
        raise ConfigurationError("--treated and --control need the same number of layers")
    pt = PropensityTable.from_employment(args.treated, args.control)
    labels = ("0", "L", "H") if pt.K == 2 else tuple(str(i) for i in range(pt.K + 1))
    return None, pt, labels


def _restrictions(args, labels):
    rset = parse_restrictions(args.restrict, labels)
    if args.constraints:
        with open(args.constraints) as fh:
            rset = RestrictionSet(rset.presets, parse_constraints(fh, labels))
    return rset


def _write(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _write_rows(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in r])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def _summary(report):
    for r in report.results:
        print(f"{r['target']}: {r['display']}", file=sys.stderr)


def _interval_rows(report):
    return [(r["target"], float(r["interval"]["lower"]), float(r["interval"]["upper"]),
             int(r["trivial"])) for r in report.results]


def cmd_lee(args):
    data, _, _ = _load(args)
    iv = _bounds.lee_bounds(data, args.outcome_kind)
    rep = BoundsReport("lee", ["lee"])
    rep.add("always-employed effect", iv)
    rep.extra["trimming_proportion"] = _bounds.trimming_proportion(data.ptable)
    return rep


def _type_report(command, iset, labels):
    rep = BoundsReport(command, iset.restrictions.labels(labels))
    if iset.is_empty():
        return rep
    for t in iset.types:
        lo, hi = iset.prob_range(t)
        rep.add(f"P(T={type_label(t, labels)})", _bounds.Interval(lo, hi))
    return rep


def cmd_idset(args):
    _, pt, labels = _load(args)
    iset = IdentifiedSet(pt, _restrictions(args, labels))
    if iset.is_empty():
        raise FalsificationError("identified set is empty", iset.infeasibility)
    rep = _type_report("idset", iset, labels)
    rep.extra["propensities"] = pt.to_dict()
    if pt.K == 2:
        poly = iset.vertices_2d()
        rep.extra["polygon"] = {"x": f"P(T={labels[1]},{labels[1]})",
                                "y": f"P(T={labels[2]},{labels[2]})",
                                "vertices": [list(map(float, v)) for v in poly]}
        if args.csv:
            _write_rows(args.csv, (f"p_{labels[1]}{labels[1]}", f"p_{labels[2]}{labels[2]}"),
                        [(float(x), float(y)) for x, y in poly])
    elif args.csv:
        _write_rows(args.csv, ("target", "lower", "upper", "trivial"), _interval_rows(rep))
    return rep


def cmd_falsify(args):
    _, pt, labels = _load(args)
    iset = IdentifiedSet(pt, _restrictions(args, labels))
    rep = _type_report("falsify", iset, labels)
    empty = iset.is_empty()
    rep.extra["rejected"] = bool(empty)
    rep.extra["infeasibility"] = iset.infeasibility
    rep.extra["propensities"] = pt.to_dict()
    rep.exit_code = EXIT_FALSIFIED if empty else EXIT_OK
    return rep


def _targets(args, K, labels):
    if args.types:
        types = [parse_type(s, labels) for s in args.types]
    else:
        types = [t for t in all_types(K) if t.always_employed]
    return types


def cmd_bounds(args):
    data, pt, labels = _load(args)
    iset = IdentifiedSet(pt, _restrictions(args, labels))
    if iset.is_empty():
        raise FalsificationError("restrictions are rejected by the propensities",
                                 iset.infeasibility)
    rep = BoundsReport("bounds", iset.restrictions.labels(labels))
    for t in _targets(args, pt.K, labels):
        if not t.always_employed:
            raise ConfigurationError(f"type {type_label(t, labels)} is not always employed")
        tl = type_label(t, labels)
        if t.is_stayer:
            rep.add(f"LCDE({labels[t.d0]}|{tl})", _bounds.lcde(data, iset, t))
            continue
        for layer in (t.d1, t.d0):
            rep.add(f"LCDE({labels[layer]}|{tl})", _bounds.lcde(data, iset, t, layer=layer))
        rep.add(f"LCIE(z=1;{labels[t.d1]}-{labels[t.d0]}|{tl})",
                _bounds.lcie(data, iset, 1, t.d1, t.d0, t))
        rep.add(f"LCIE(z=0;{labels[t.d0]}-{labels[t.d1]}|{tl})",
                _bounds.lcie(data, iset, 0, t.d0, t.d1, t))
    if args.aggregate:
        layers = tuple(labels.index(s.strip()) if s.strip() in labels else -1
                       for s in args.aggregate.split(","))
        if min(layers) < 1:
            raise ConfigurationError(f"unknown layer in --aggregate {args.aggregate!r}")
        iv = _bounds.aggregate_lcde_bounds(data, iset, layers, grid=args.grid, threads=args.threads)
        if iv.weights:
            names = {f"p{d}{d}": f"P(T={labels[d]},{labels[d]})" for d in layers}
            iv = _bounds.Interval(iv.lower, iv.upper, iv.trivial, iv.gammas,
                                  {k: {names[n]: v for n, v in w.items()} for k, w in iv.weights.items()})
        rep.add(f"aggregate LCDE({','.join(labels[d] for d in layers)})", iv)
    rep.extra["gamma_lower"] = {
        f"{type_label(t, labels)}|z={z}": iset.gamma_lower(t, z)
        for t in iset.types if t.always_employed for z in (1, 0)
    }
    if args.csv:
        _write_rows(args.csv, ("target", "lower", "upper", "trivial"), _interval_rows(rep))
    return rep


def cmd_simulate(args):
    if args.spec:
        with open(args.spec) as fh:
            spec = sim.DgpSpec.from_dict(json.load(fh))
    else:
        spec = sim.design(args.design)
    rows = sim.sample(spec, args.n, seed=args.seed, threads=args.threads)
    if args.csv:
        rows.dataset.to_csv(args.csv)
    data = rows.dataset.conditional_data()
    rep = BoundsReport("simulate", ["lee"])
    rep.add("always-employed effect (sample)", _bounds.lee_bounds(data))
    truth = sim.true_params(spec)
    labels = rows.dataset.labels
    rep.extra = {
        "design": spec.to_dict(),
        "n": args.n,
        "seed": args.seed,
        "true": {
            "total_effect": truth.total_effect,
            "direct_effect": truth.nde,
            "indirect_effect": truth.nie,
            "lcde": {f"{labels[d]}|{type_label(t, labels)}": v
                     for (d, t), v in sorted(truth.lcde.items())},
        },
        "propensities": data.ptable.to_dict(),
    }
    return rep


def cmd_oracle_check(args):
    res = oracle.oracle_check(n_instances=args.instances, K=args.K, max_support=args.max_support,
                              seed=args.seed, tol=args.tol, method=args.method)
    rep = BoundsReport("oracle-check", [c["restrictions"] for c in res["checks"]])
    rep.extra = res
    rep.exit_code = EXIT_OK if res["pass"] else EXIT_CHECK_FAILED
    return rep


COMMANDS = {
    "lee": cmd_lee, "idset": cmd_idset, "falsify": cmd_falsify, "bounds": cmd_bounds,
    "simulate": cmd_simulate, "oracle-check": cmd_oracle_check,
}


def run(argv=None):
    """Parse ``argv``, dispatch, write the report; returns the exit code."""
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"layerbounds: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    command = args.command
    try:
        rep = COMMANDS[command](args)
    except (FalsificationError, MonotonicityViolation) as exc:
        print(f"layerbounds {command}: rejected: {exc}", file=sys.stderr)
        return EXIT_FALSIFIED
    except (DataError, DegenerateLayerError, OSError) as exc:
        print(f"layerbounds {command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigurationError, DomainError, LayerBoundsError, ValueError) as exc:
        print(f"layerbounds {command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write(rep.to_json(), args.out)
    if args.out is not None:
        _summary(rep)
    return getattr(rep, "exit_code", EXIT_OK)


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
