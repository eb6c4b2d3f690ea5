import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from latcorr.exceptions import (
    DegenerateMarginsError,
    DimensionMismatchError,
    EmptyTableError,
    NegativeCountError,
    NonRectangularError,
)
from latcorr.tables import (
    ContingencyTable,
    ProbabilityTable,
    check_table,
    crosstab,
    flatten,
    from_counts,
    from_probabilities,
    to_probabilities,
    unflatten,
)


def test_from_counts_total():
    assert from_counts([[40, 10], [10, 40]]).n == 100


def test_men_total(men):
    t = from_counts(men)
    assert t.n == 3089
    assert t.shape == (7, 5)


@pytest.mark.parametrize("bad, err", [
    ([[0, 0], [0, 0]], EmptyTableError),
    ([[1, 2], [3]], NonRectangularError),
    ([[1, -2], [3, 4]], NegativeCountError),
    ([[1, 2.5], [3, 4]], NegativeCountError),
    ([[1, np.nan], [3, 4]], NegativeCountError),
    ([1, 2, 3], NonRectangularError),
    ([[1, 2, 3]], DegenerateMarginsError),
])
def test_from_counts_rejects(bad, err):
    with pytest.raises(err):
        from_counts(bad)


def test_to_probabilities_simple():
    pt = to_probabilities(from_counts([[40, 10], [10, 40]]))
    np.testing.assert_allclose(pt.p, [[0.4, 0.1], [0.1, 0.4]])
    np.testing.assert_allclose(pt.row_margins, [0.5, 0.5])
    np.testing.assert_allclose(pt.col_margins, [0.5, 0.5])
    assert not pt.collapsed


def test_collapse_drops_empty_middle_row():
    pt = to_probabilities(from_counts([[1, 0], [0, 0], [0, 1]]))
    assert pt.shape == (2, 2)
    assert pt.dropped_rows == (1,)
    assert pt.collapsed


def test_men_column_margins(men):
    pt = to_probabilities(from_counts(men))
    expected = np.array([448, 1789, 636, 177, 39]) / 3089
    np.testing.assert_allclose(pt.col_margins, expected, rtol=1e-14)
    np.testing.assert_allclose(pt.col_margins, [0.1450, 0.5792, 0.2059, 0.0573, 0.0126], atol=5e-5)


def test_flatten_row_major():
    pt = ProbabilityTable([[0.1, 0.2], [0.3, 0.4]])
    np.testing.assert_array_equal(flatten(pt), [0.1, 0.2, 0.3, 0.4])
    np.testing.assert_array_equal(unflatten([0.1, 0.2, 0.3, 0.4], 2, 2).p, [[0.1, 0.2], [0.3, 0.4]])


def test_unflatten_size_mismatch():
    with pytest.raises(DimensionMismatchError):
        unflatten(np.ones(5) / 5, 2, 2)


def test_tables_are_immutable():
    t = from_counts([[1, 2], [3, 4]])
    with pytest.raises(ValueError):
        t.counts[0, 0] = 7
    pt = t.to_probabilities()
    with pytest.raises(ValueError):
        pt.p[0, 0] = 0.5


def test_from_probabilities_tolerance():
    from_probabilities([[0.25, 0.25], [0.25, 0.25 + 5e-13]])
    with pytest.raises(DimensionMismatchError):
        from_probabilities([[0.25, 0.25], [0.25, 0.26]])


def test_check_table_kinds(men):
    pt, n = check_table(men)
    assert n == 3089
    pt2, n2 = check_table(pt.p)
    assert n2 is None
    np.testing.assert_array_equal(pt.p, pt2.p)
    with pytest.raises(ValueError):
        check_table(men, kind="nope")


def test_crosstab_orders_categories():
    ct, xs, ys = crosstab([2, 1, 1, 2, 2], ["b", "a", "b", "b", "a"])
    assert list(xs) == [1, 2]
    assert list(ys) == ["a", "b"]
    np.testing.assert_array_equal(ct.counts, [[1, 1], [1, 2]])


count_grids = st.integers(2, 6).flatmap(
    lambda r: st.integers(2, 6).flatmap(
        lambda c: arrays(np.int64, (r, c), elements=st.integers(0, 50))))


@given(count_grids)
@settings(max_examples=150, deadline=None)
def test_probabilities_on_simplex(grid):
    try:
        t = from_counts(grid)
    except (EmptyTableError, DegenerateMarginsError):
        return
    pt = to_probabilities(t)
    assert abs(pt.p.sum() - 1.0) <= 1e-12
    assert (pt.p >= 0).all()
    assert (pt.row_margins > 0).all() and (pt.col_margins > 0).all()
    # collapse never loses a positive count
    assert round(pt.p.sum() * t.n) == t.n
    assert pt.shape == (np.count_nonzero(grid.sum(1)), np.count_nonzero(grid.sum(0)))


@given(st.integers(2, 8), st.integers(2, 8), st.integers(0, 2**31))
def test_flatten_roundtrip(r, c, seed):
    p = np.random.default_rng(seed).random((r, c))
    pt = ProbabilityTable(p / p.sum())
    back = unflatten(flatten(pt), r, c)
    np.testing.assert_array_equal(back.p, pt.p)


def test_contingency_is_dataclass_value():
    assert ContingencyTable([[1, 2], [3, 4]]).n == 10
