"""Parsing of restriction flags, type labels and constraint sidecar files."""

import numpy as np

from .exceptions import ConfigurationError
from .responseset import (
    PRESET_NAMES, LinearConstraint, Preset, RestrictionSet, ResponseType, type_index,
)

_OPS = ("==", ">=", "<=")


def parse_type(text, labels):
    """``"H,L"`` -> ``ResponseType(index(H), index(L))`` given ordered layer ``labels``."""
    parts = [p.strip() for p in str(text).split(",")]
    if len(parts) != 2:
        raise ConfigurationError(f"type {text!r} must be two comma-separated layer labels")
    try:
        return ResponseType(*(labels.index(p) for p in parts))
    except ValueError:
        raise ConfigurationError(f"type {text!r} uses a layer label outside {list(labels)}") from None


def _split_flags(text):
    # "lee,smallest=H,L,zero=H,L": a bare label after "name=x" continues the type
    out = []
    for tok in (t.strip() for t in text.split(",")):
        if not tok:
            continue
        name = tok.split("=", 1)[0]
        if name in PRESET_NAMES or "=" in tok:
            out.append(tok)
        elif out and "=" in out[-1] and out[-1].count(",") == 0:
            out[-1] += "," + tok
        else:
            out.append(tok)
    return out


def parse_restrictions(text, labels):
    """Parse a comma-separated preset list.

    Examples
    --------
    >>> parse_restrictions("lee,smallest=H,L", ("0", "L", "H")).labels(("0", "L", "H"))
    ['lee', 'smallest=H,L']
    """
    presets = []
    for flag in _split_flags(text or ""):
        name, _, arg = flag.partition("=")
        if name not in PRESET_NAMES:
            raise ConfigurationError(f"unknown restriction preset {name!r}")
        presets.append(Preset(name, parse_type(arg, labels) if arg else None))
    return RestrictionSet(tuple(dict.fromkeys(presets)))


def parse_constraints(lines, labels):
    """Read custom constraints, one per line: ``<coef> <type> [...] <op> <bound>``.

    For example ``1 H,H -1 L,L >= 0``.  Blank lines and ``#`` comments are
    skipped.
    """
    K = len(labels) - 1
    out = []
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        ops = [i for i, t in enumerate(toks) if t in _OPS]
        if len(ops) != 1 or ops[0] != len(toks) - 2 or ops[0] % 2:
            raise ConfigurationError(f"constraint line {lineno}: expected '<coef> <type> ... <op> <bound>'")
        coef = np.zeros((K + 1) ** 2)
        try:
            for i in range(0, ops[0], 2):
                coef[type_index(parse_type(toks[i + 1], labels), K)] += float(toks[i])
            rhs = float(toks[-1])
        except ValueError as exc:
            raise ConfigurationError(f"constraint line {lineno}: {exc}") from None
        out.append(LinearConstraint(tuple(coef), toks[ops[0]], rhs, name=line))
    return tuple(out)


def type_label(t, labels):
    return f"{labels[t.d0]},{labels[t.d1]}"
