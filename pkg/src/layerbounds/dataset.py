"""Microdata container and the ``outcome,layer,arm,weight`` CSV format."""

import csv
from dataclasses import dataclass
import io
import math

import numpy as np

from .bounds import ConditionalData
from .dist import SupportBounds, WeightedSample
from .exceptions import DataError
from .responseset import PropensityTable

HEADER = ("outcome", "layer", "arm", "weight")


def _fmt(x):
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Dataset:
    """Rows of ``(outcome, layer, arm, weight)``.

    ``layer`` holds integer indices into ``labels``; index 0 is the
    non-employment layer, whose outcome is missing (NaN).
    """

    outcome: np.ndarray
    layer: np.ndarray
    arm: np.ndarray
    weight: np.ndarray
    labels: tuple

    def __post_init__(self):
        n = len(self.outcome)
        if not (len(self.layer) == len(self.arm) == len(self.weight) == n):
            raise DataError("dataset columns have different lengths")
        if np.any(self.weight <= 0) or not np.all(np.isfinite(self.weight)):
            raise DataError("weights must be positive and finite")
        missing = np.isnan(self.outcome)
        if np.any(missing != (self.layer == 0)):
            row = int(np.flatnonzero(missing != (self.layer == 0))[0]) + 1
            raise DataError("outcome must be missing exactly for the non-employment layer", row)

    def __len__(self):
        return len(self.outcome)

    @property
    def K(self):
        return len(self.labels) - 1

    def propensity_table(self):
        probs = np.zeros((2, self.K + 1))
        for z in (0, 1):
            m = self.arm == z
            tot = self.weight[m].sum()
            if tot <= 0:
                raise DataError(f"no observations in arm {z}")
            probs[z] = np.bincount(self.layer[m], weights=self.weight[m], minlength=self.K + 1) / tot
        return PropensityTable(probs)

    def conditional_data(self, support=SupportBounds()):
        samples = {}
        for z in (0, 1):
            for d in range(1, self.K + 1):
                m = (self.arm == z) & (self.layer == d)
                if np.any(m):
                    samples[(d, z)] = WeightedSample(self.outcome[m], self.weight[m])
        return ConditionalData(samples, self.propensity_table(), support)

    def to_csv(self, path_or_buf=None):
        """Write the normalized CSV; returns the text when no path is given."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(HEADER)
        for y, d, z, wt in zip(self.outcome, self.layer, self.arm, self.weight):
            w.writerow(["" if math.isnan(y) else _fmt(y), self.labels[d], int(z), _fmt(wt)])
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        with open(path_or_buf, "w", newline="") as fh:
            fh.write(text)
        return None


def resolve_ordering(observed, ordering, nonemployed):
    """Map labels to layer indices; the non-employment label is always index 0."""
    if ordering is None:
        employed = sorted(set(observed) - {nonemployed})
        folded = {}
        for lab in employed:
            folded.setdefault(lab.casefold(), []).append(lab)
        clash = [v for v in folded.values() if len(v) > 1]
        if clash:
            raise DataError(f"layer labels differ only by case: {clash[0]}; declare an ordering")
        try:
            employed.sort(key=float)
        except ValueError:
            pass
    else:
        employed = [lab for lab in ordering if lab != nonemployed]
        if len(set(employed)) != len(employed):
            raise DataError("layer ordering repeats a label")
    return (nonemployed, *employed)


def ingest(path, ordering=None, nonemployed="0"):
    """Read and validate a CSV with header ``outcome,layer,arm,weight``.

    Parameters
    ----------
    path : str or path-like
    ordering : sequence of str, optional
        Employed layer labels from lowest to highest rank.  Inferred
        (numeric or lexical order) when omitted.
    nonemployed : str
        Label of the non-employment layer.
    """
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(h.strip() for h in rows[0]) != HEADER:
        raise DataError(f"header must be {','.join(HEADER)}", row=1)
    body = rows[1:]
    labels = resolve_ordering([r[1].strip() for r in body if len(r) > 1], ordering, nonemployed)
    index = {lab: i for i, lab in enumerate(labels)}
    n = len(body)
    outcome = np.empty(n)
    layer = np.empty(n, dtype=int)
    arm = np.empty(n, dtype=int)
    weight = np.empty(n)
    for i, r in enumerate(body):
        rowno = i + 2
        if len(r) != 4:
            raise DataError(f"expected 4 fields, got {len(r)}", rowno)
        y, lab, z, w = (f.strip() for f in r)
        if lab not in index:
            raise DataError(f"unknown layer label {lab!r}", rowno)
        layer[i] = index[lab]
        if z not in ("0", "1"):
            raise DataError(f"arm must be 0 or 1, got {z!r}", rowno)
        arm[i] = int(z)
        try:
            weight[i] = float(w)
        except ValueError:
            raise DataError(f"weight {w!r} is not a number", rowno) from None
        if not weight[i] > 0 or not math.isfinite(weight[i]):
            raise DataError(f"weight must be positive, got {w!r}", rowno)
        if lab == nonemployed:
            if y != "":
                raise DataError("outcome present for a non-employed row", rowno)
            outcome[i] = np.nan
        else:
            if y == "":
                raise DataError("missing outcome for an employed row", rowno)
            try:
                outcome[i] = float(y)
            except ValueError:
                raise DataError(f"outcome {y!r} is not a number", rowno) from None
            if not math.isfinite(outcome[i]):
                raise DataError("outcome must be finite", rowno)
    return Dataset(outcome, layer, arm, weight, labels)
