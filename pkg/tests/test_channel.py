import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eewlan.channel import (
    Deployment,
    GainMatrices,
    RadioConfig,
    build_gains,
    dbm_to_mw,
    mw_to_dbm,
    noise_power_mw,
    pathloss_db,
    sinr,
    sinr_vector,
)
from eewlan.errors import DomainError

FC = 5.21


@pytest.mark.parametrize("d, expected", [(1.0, 46.78), (10.0, 66.78), (20.0, 77.32)])
def test_pathloss_reference_values(d, expected):
    assert pathloss_db(d, FC) == pytest.approx(expected, abs=0.005)


def test_pathloss_closed_form():
    base = 40.05 + 20 * math.log10(FC / 2.4)
    assert pathloss_db(1.0, FC) == pytest.approx(base, abs=1e-12)
    assert pathloss_db(20.0, FC) == pytest.approx(base + 20 + 35 * math.log10(2), abs=1e-12)


def test_pathloss_continuous_at_ten_metres():
    assert pathloss_db(10.0 - 1e-9, FC) == pytest.approx(pathloss_db(10.0 + 1e-9, FC), abs=1e-6)


@pytest.mark.parametrize("d", [0.0, -1.0, float("nan")])
def test_pathloss_rejects_non_positive_distance(d):
    with pytest.raises(DomainError):
        pathloss_db(d, FC)


@given(st.floats(0.01, 500), st.floats(0.01, 500))
def test_pathloss_monotone(d1, d2):
    lo, hi = sorted((d1, d2))
    assert pathloss_db(lo, FC) <= pathloss_db(hi, FC)


def test_noise_reference_values():
    assert mw_to_dbm(noise_power_mw(RadioConfig())) == pytest.approx(-87.97, abs=0.005)
    assert noise_power_mw(RadioConfig()) == pytest.approx(1.596e-9, rel=1e-3)
    assert mw_to_dbm(noise_power_mw(RadioConfig(amplifier_noise_db=0.0))) == pytest.approx(-94.97, abs=0.005)
    one_hz = RadioConfig(channel_width_hz=1.0, amplifier_noise_db=0.0)
    assert mw_to_dbm(noise_power_mw(one_hz)) == pytest.approx(-174.0, abs=1e-9)


def test_radio_config_validation():
    with pytest.raises(DomainError):
        RadioConfig(max_power_mw=0.0)
    with pytest.raises(DomainError):
        RadioConfig(sense_threshold_dbm=float("inf"))
    assert RadioConfig().sense_threshold_mw == pytest.approx(dbm_to_mw(-96.0))


def _single_link(tx=(50.0, 50.0, 3.0), rx=(50.0, 50.0, 1.0)):
    return Deployment(100.0, (tx,), (rx,), ((0, 0),))


def test_build_gains_vertical_link():
    g = build_gains(_single_link(), RadioConfig())
    assert g.a[0, 0] == pytest.approx(10 ** (-pathloss_db(2.0, FC) / 10))
    assert pathloss_db(2.0, FC) == pytest.approx(52.80, abs=0.005)
    assert g.b[0, 0] == 0.0
    assert g.noise[0] == pytest.approx(noise_power_mw(RadioConfig()))


def test_build_gains_symmetric_pair():
    dep = Deployment(
        100.0,
        ((40.0, 50.0, 3.0), (60.0, 50.0, 3.0)),
        ((45.0, 50.0, 1.0), (55.0, 50.0, 1.0)),
        ((0, 0), (1, 1)),
    )
    g = build_gains(dep, RadioConfig())
    assert g.a[0, 1] == pytest.approx(g.a[1, 0])
    assert g.b[0, 1] == pytest.approx(g.b[1, 0])
    assert np.all(np.diag(g.b) == 0)
    assert np.all((g.a >= 0) & (g.a <= 1))


def test_build_gains_coincident_positions_rejected():
    dep = Deployment(100.0, ((50.0, 50.0, 1.0),), ((50.0, 50.0, 1.0),), ((0, 0),))
    with pytest.raises(DomainError):
        build_gains(dep, RadioConfig())


def test_build_gains_shared_ap_has_no_sensing_entry():
    dep = Deployment(
        100.0, ((50.0, 50.0, 3.0),), ((10.0, 10.0, 1.0), (90.0, 90.0, 1.0)), ((0, 0), (0, 1))
    )
    g = build_gains(dep, RadioConfig())
    assert np.all(g.b == 0)
    assert list(g.tx_ap) == [0, 0]


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(ap_positions=((120.0, 50.0, 3.0),)),
        dict(client_positions=((50.0, 50.0, 0.0),)),
        dict(links=((1, 0),)),
        dict(links=((0, 0), (0, 0))),
    ],
)
def test_deployment_invariants(kwargs):
    base = dict(area_size=100.0, ap_positions=((50.0, 50.0, 3.0),), client_positions=((10.0, 10.0, 1.0),), links=((0, 0),))
    base.update(kwargs)
    with pytest.raises(DomainError):
        Deployment(**base)


def test_deployment_toml_round_trip(tmp_path):
    dep = Deployment(
        100.0,
        ((12.3456789, 50.0, 3.0), (70.0, 20.0, 3.0)),
        ((1.0, 2.0, 1.0), (3.0, 4.0, 1.0), (99.0, 99.0, 1.0)),
        ((0, 0), (1, 1), (1, 2)),
    )
    text = dep.to_toml()
    assert "12.345679" in text
    path = tmp_path / "dep.toml"
    dep.save(path)
    back = Deployment.load(path)
    assert back.links == dep.links
    assert back.ap_positions[0][0] == 12.345679
    assert back.client_positions == dep.client_positions


def test_gain_matrix_invariants():
    with pytest.raises(DomainError):
        GainMatrices([[0.0]], [[0.0]], [1.0])  # a_ii must be positive
    with pytest.raises(DomainError):
        GainMatrices([[1.0]], [[0.5]], [1.0])  # b_ii must be zero
    with pytest.raises(DomainError):
        GainMatrices([[2.0]], [[0.0]], [1.0])  # gains at most 1
    g = GainMatrices([[1.0]], [[0.0]], [1.0])
    with pytest.raises(ValueError):
        g.a[0, 0] = 0.5


def test_sinr_examples():
    g = GainMatrices([[1.0]], [[0.0]], [0.5])
    assert sinr([1.0], g, 0) == pytest.approx(2.0)
    g2 = GainMatrices([[1.0, 0.1], [0.1, 1.0]], np.zeros((2, 2)), [1.0, 1.0])
    assert sinr([2.5, 2.5], g2, 0) == pytest.approx(2.0)
    assert sinr([0.0, 2.5], g2, 0) == 0.0
    assert np.allclose(sinr_vector([2.5, 2.5], g2), [2.0, 2.0])


@settings(max_examples=200)
@given(
    st.lists(st.floats(0, 40), min_size=3, max_size=3),
    st.integers(0, 2),
    st.integers(0, 2),
    st.floats(0, 40),
)
def test_sinr_monotone_in_own_and_other_power(p, i, j, extra):
    rng = np.random.default_rng(0)
    a = rng.uniform(1e-9, 1e-6, size=(3, 3))
    g = GainMatrices(a, np.zeros((3, 3)), np.full(3, 1.6e-9))
    bumped = list(p)
    bumped[j] += extra
    if i == j:
        assert sinr(bumped, g, i) >= sinr(p, g, i)
    else:
        assert sinr(bumped, g, i) <= sinr(p, g, i) * (1 + 1e-12)
