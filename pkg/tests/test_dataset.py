import numpy as np
import pytest

from layerbounds import sim
from layerbounds.dataset import Dataset, ingest, resolve_ordering
from layerbounds.exceptions import DataError


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


FOUR_ROWS = "outcome,layer,arm,weight\n1.5,1,1,1\n,0,1,1\n2.0,1,0,2\n,0,0,2\n"


def test_four_row_file(tmp_path):
    ds = ingest(write(tmp_path, FOUR_ROWS))
    pt = ds.propensity_table()
    np.testing.assert_allclose(pt.probs.sum(axis=1), [1.0, 1.0])
    assert pt(1, 1) == 0.5 and pt(1, 0) == 0.5
    assert ds.labels == ("0", "1")


@pytest.mark.parametrize("text, row", [
    ("outcome,layer,arm,weight\n1.0,0,1,1\n", 2),
    ("outcome,layer,arm,weight\n,1,1,1\n", 2),
    ("outcome,layer,arm,weight\n1.0,1,1,1\n1.0,1,1,0\n", 3),
    ("outcome,layer,arm,weight\n1.0,1,2,1\n", 2),
    ("outcome,layer,arm,weight\n1.0,1,1\n", 2),
    ("outcome,layer,arm,weight\nabc,1,1,1\n", 2),
    ("y,layer,arm,weight\n1.0,1,1,1\n", 1),
])
def test_errors_carry_row_numbers(tmp_path, text, row):
    with pytest.raises(DataError) as err:
        ingest(write(tmp_path, text))
    assert err.value.row == row
    assert f"row {row}" in str(err.value)


def test_case_clash_needs_ordering(tmp_path):
    text = "outcome,layer,arm,weight\n1,h,1,1\n2,H,0,1\n,0,0,1\n,0,1,1\n"
    with pytest.raises(DataError):
        ingest(write(tmp_path, text))
    ds = ingest(write(tmp_path, text), ordering=["h", "H"])
    assert ds.labels == ("0", "h", "H")


def test_ordering_must_cover_labels(tmp_path):
    text = "outcome,layer,arm,weight\n1,L,1,1\n2,H,0,1\n"
    with pytest.raises(DataError):
        ingest(write(tmp_path, text), ordering=["L"])


def test_numeric_labels_sort_numerically():
    assert resolve_ordering(["10", "9", "0"], None, "0") == ("0", "9", "10")


def test_custom_nonemployment_label(tmp_path):
    text = "outcome,layer,arm,weight\n,none,1,1\n3,L,1,1\n,none,0,1\n2,L,0,1\n"
    ds = ingest(write(tmp_path, text), nonemployed="none")
    assert ds.labels == ("none", "L")


def test_round_trip_is_idempotent(tmp_path):
    ds = sim.sample(sim.design(1), 2000, seed=4).dataset
    first = write(tmp_path, ds.to_csv(), "a.csv")
    again = ingest(first, ordering=["L", "H"])
    text = again.to_csv()
    assert text == first.read_text()
    assert ingest(write(tmp_path, text, "b.csv"), ordering=["L", "H"]).to_csv() == text


def test_weighted_propensities():
    ds = Dataset(np.array([np.nan, 1.0, np.nan, 2.0]), np.array([0, 1, 0, 1]), np.array([1, 1, 0, 0]),
                 np.array([1.0, 3.0, 1.0, 1.0]), ("0", "1"))
    assert ds.propensity_table()(1, 1) == 0.75


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(np.array([1.0]), np.array([0]), np.array([1]), np.array([1.0]), ("0", "1"))
    with pytest.raises(DataError):
        Dataset(np.array([1.0]), np.array([1]), np.array([1]), np.array([-1.0]), ("0", "1"))
