import json
import math

import jsonschema
import numpy as np
import pytest

from layerbounds.bounds import Interval
from layerbounds.config import parse_constraints, parse_restrictions, parse_type
from layerbounds.exceptions import ConfigurationError
from layerbounds.report import BoundsReport, decode_number, dumps, load_schema
from layerbounds.responseset import TABLE1, IdentifiedSet, ResponseType

LABELS = ("0", "L", "H")


class TestParsing:
    def test_type(self):
        assert parse_type("H,L", LABELS) == ResponseType(2, 1)
        with pytest.raises(ConfigurationError):
            parse_type("H", LABELS)
        with pytest.raises(ConfigurationError):
            parse_type("H,X", LABELS)

    @pytest.mark.parametrize("text, labels", [
        ("lee", ["lee"]),
        ("lee,stayers-ge-down", ["lee", "stayers-ge-down"]),
        ("lee,smallest=H,L", ["lee", "smallest=H,L"]),
        ("lee,zero=H,L,up-ge-down", ["lee", "zero=H,L", "up-ge-down"]),
        ("strong-mono,lee,lee", ["strong-mono", "lee"]),
    ])
    def test_restriction_flags(self, text, labels):
        assert parse_restrictions(text, LABELS).labels(LABELS) == labels

    @pytest.mark.parametrize("text", ["bogus", "zero", "lee=H,H", "smallest=Q,L"])
    def test_bad_flags(self, text):
        with pytest.raises(ConfigurationError):
            parse_restrictions(text, LABELS)

    def test_constraint_file(self):
        cons = parse_constraints(["# header", "1 H,H -1 L,L >= 0", "", "2 0,0 <= 1"], LABELS)
        assert [c.op for c in cons] == [">=", "<="]
        iset = IdentifiedSet(TABLE1, parse_restrictions("lee", LABELS) + cons[0])
        lo = iset.min_prob((2, 2))
        assert lo >= IdentifiedSet(TABLE1, parse_restrictions("lee", LABELS)).min_prob((2, 2))

    @pytest.mark.parametrize("line", ["1 H,H >=", "H,H >= 0", "1 H,H 0", "x H,H >= 0", "1 H,H >= 0 >= 1"])
    def test_bad_constraint_lines(self, line):
        with pytest.raises(ConfigurationError):
            parse_constraints([line], LABELS)


class TestReport:
    def test_seventeen_digits_and_infinities(self):
        text = dumps({"a": 0.1, "b": math.inf, "c": -math.inf, "d": [1, True, None], "e": np.float64(2.5)})
        obj = json.loads(text)
        assert '0.10000000000000001' in text
        assert obj["b"] == "inf" and decode_number(obj["c"]) == -math.inf
        assert obj["d"] == [1, True, None]

    def test_schema_validates(self):
        rep = BoundsReport("bounds", ["lee"])
        rep.add("x", Interval(-math.inf, math.inf, True, {"gamma1": 0.0}))
        rep.add("y", Interval(0.1, 0.2, False, {}, {"lower": {"p": 0.1}, "upper": {"p": 0.2}}))
        obj = json.loads(rep.to_json())
        jsonschema.validate(obj, load_schema())
        assert obj["results"][0]["display"] == "Trivial Bounds"

    def test_schema_rejects_missing_fields(self):
        obj = json.loads(BoundsReport("lee", []).to_json())
        del obj["assumptions"]
        with pytest.raises(jsonschema.ValidationError):
            jsonschema.validate(obj, load_schema())

    def test_float_round_trip(self, rng):
        xs = rng.normal(size=50) * 10.0 ** rng.integers(-10, 10, size=50)
        back = json.loads(dumps(list(xs)))
        assert [float(v) for v in back] == list(xs)
