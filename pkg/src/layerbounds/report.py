"""JSON bounds reports with fixed 17-significant-digit number formatting."""

from dataclasses import dataclass, field
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_PATH = Path(__file__).with_name("report_schema.json")
SCHEMA_VERSION = 1


def _number(x):
    x = float(x)
    if math.isnan(x):
        return "null"
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e16:
        x = float(int(x))  # normalize -0.0
    return format(x, ".17g")


def dumps(obj, indent=2, _level=0):
    """Serialize ``obj`` to JSON, printing floats with 17 significant digits.

    Infinite floats become the strings ``"inf"`` / ``"-inf"``; NaN becomes
    ``null``.  Dict keys keep insertion order so output is byte-stable.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _number(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def decode_number(v):
    """Inverse of the number encoding used by :func:`dumps`."""
    if isinstance(v, str):
        return float(v)
    return math.nan if v is None else float(v)


def interval_entry(target, iv):
    """One result record for an :class:`~layerbounds.bounds.Interval`."""
    return {
        "target": target,
        "interval": {"lower": iv.lower, "upper": iv.upper},
        "trivial": bool(iv.trivial),
        "display": "Trivial Bounds" if iv.trivial else f"[{iv.lower:.4f}, {iv.upper:.4f}]",
        "gammas": dict(iv.gammas),
        "weights": iv.weights,
    }


@dataclass
class BoundsReport:
    """Results of one command together with the assumptions that produced them."""

    command: str
    assumptions: list
    results: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def add(self, target, iv):
        self.results.append(interval_entry(target, iv))
        return self

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "assumptions": list(self.assumptions),
            "results": self.results,
            "extra": self.extra,
        }

    def to_json(self):
        return dumps(self.to_dict()) + "\n"


def load_schema():
    with open(SCHEMA_PATH) as fh:
        return json.load(fh)
