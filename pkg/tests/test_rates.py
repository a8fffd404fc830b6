import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eewlan.errors import DomainError
from eewlan.rates import (
    DEFAULT_MCS_STEPS_DB,
    McsTable,
    default_mcs_table,
    min_sinr_for_rate,
    rate_for_sinr,
    rate_index_for_sinr,
)


def test_rate_for_sinr_examples(small_table):
    assert rate_for_sinr(small_table, 0.0) == 0.0
    assert rate_for_sinr(small_table, 5.0) == 10.0
    assert rate_for_sinr(small_table, 10.0) == 50.0  # inclusive at the threshold
    assert rate_for_sinr(small_table, np.nextafter(10.0, 0)) == 10.0
    assert rate_for_sinr(small_table, 1e9) == 50.0


def test_min_sinr_examples(small_table):
    assert min_sinr_for_rate(small_table, 0.0) == 0.0
    assert min_sinr_for_rate(small_table, 50.0) == 10.0
    with pytest.raises(DomainError):
        min_sinr_for_rate(small_table, 20.0)


def test_round_trip_every_entry():
    table = default_mcs_table()
    for rate in table.ladder:
        assert rate_for_sinr(table, min_sinr_for_rate(table, rate)) == rate


def test_negative_sinr_rejected(small_table):
    with pytest.raises(DomainError):
        rate_for_sinr(small_table, -1.0)


@given(st.floats(0, 1e5), st.floats(0, 1e5))
def test_rate_monotone(g1, g2):
    table = default_mcs_table()
    lo, hi = sorted((g1, g2))
    assert rate_for_sinr(table, lo) <= rate_for_sinr(table, hi)
    assert rate_index_for_sinr(table, lo) <= rate_index_for_sinr(table, hi)


@pytest.mark.parametrize(
    "steps",
    [
        [],
        [(1.0, 10.0), (1.0, 20.0)],
        [(1.0, 20.0), (2.0, 10.0)],
        [(0.0, 10.0)],
        [(1.0, -5.0)],
    ],
)
def test_table_invariants(steps):
    with pytest.raises(DomainError):
        McsTable.from_steps(steps)


def test_db_round_trip():
    table = default_mcs_table()
    assert len(table) == len(DEFAULT_MCS_STEPS_DB) == 12
    back = McsTable.from_db_steps(table.to_db_steps())
    assert np.allclose(back.thresholds, table.thresholds, rtol=1e-12)
    assert back.rates == table.rates
    assert table.thresholds[0] == pytest.approx(10 ** 0.5)
