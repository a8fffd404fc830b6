import numpy as np
import pytest

from eewlan.channel import RadioConfig
from eewlan.scenario import associate, make_deployment, place_aps, place_clients, spacing_objective

AREA = 100.0


def test_single_ap_centred():
    assert place_aps(1).tolist() == [[50.0, 50.0, 3.0]]


def test_two_aps_diagonal_and_locally_optimal():
    xy = place_aps(2)[:, :2]
    assert np.allclose(xy.sum(axis=0), [100.0, 100.0], atol=1e-4)  # symmetric about the centre
    assert abs(xy[0, 0] - xy[0, 1]) < 1e-4 or abs(xy[0, 0] + xy[0, 1] - 100) < 1e-4
    best = spacing_objective(xy, AREA)
    assert best == pytest.approx(200 - 100 * np.sqrt(2), abs=1e-3)
    rng = np.random.default_rng(0)
    for _ in range(200):
        trial = np.clip(xy + rng.uniform(-0.1, 0.1, size=xy.shape), 0, AREA)
        assert spacing_objective(trial, AREA) <= best + 1e-6


def test_four_aps_symmetric_and_stable():
    values = [spacing_objective(place_aps(4, seed=s)[:, :2], AREA) for s in range(10)]
    assert max(values) - min(values) <= 0.01 * max(values)
    xy = place_aps(4)[:, :2]
    assert values[0] == pytest.approx(50.0, rel=1e-3)
    centred = np.sort(np.abs(xy - 50.0).ravel())
    assert np.allclose(centred, 25.0, atol=0.05)


def test_spacing_invariant_under_square_symmetries():
    xy = place_aps(5)[:, :2]
    base = spacing_objective(xy, AREA)
    images = [
        np.column_stack([AREA - xy[:, 0], xy[:, 1]]),
        np.column_stack([xy[:, 0], AREA - xy[:, 1]]),
        xy[:, ::-1],
        AREA - xy,
    ]
    for img in images:
        assert spacing_objective(img, AREA) == pytest.approx(base, abs=1e-6)


def test_aps_inside_square_at_height():
    aps = place_aps(10)
    assert np.all((aps[:, :2] >= 0) & (aps[:, :2] <= AREA))
    assert np.all(aps[:, 2] == 3.0)


def test_clients_deterministic_uniform():
    assert np.array_equal(place_clients(10, seed=4), place_clients(10, seed=4))
    assert not np.array_equal(place_clients(10, seed=4), place_clients(10, seed=5))
    many = place_clients(10_000, seed=0)
    assert np.allclose(many[:, :2].mean(axis=0), 50.0, rtol=0.01)
    assert np.all(many[:, 2] == 1.0)
    assert len(place_clients()) == 10


def test_association_rules():
    cfg = RadioConfig()
    aps = [(10.0, 10.0, 3.0), (90.0, 90.0, 3.0), (30.0, 50.0, 3.0), (90.0, 10.0, 3.0), (10.0, 90.0, 3.0), (70.0, 50.0, 3.0)]
    clients = [(50.0, 50.0, 1.0)]  # equidistant from APs 2 and 5
    assert associate(aps, clients, cfg) == [(2, 0)]
    assert [ap for ap, _ in associate([(50.0, 50.0, 3.0)], place_clients(7, seed=1), cfg)] == [0] * 7


def test_association_permutation_invariant():
    cfg = RadioConfig()
    aps = place_aps(5)
    clients = place_clients(10, seed=2)
    perm = np.random.default_rng(0).permutation(10)
    direct = dict((c, ap) for ap, c in associate(aps, clients, cfg))
    permuted = associate(aps, clients[perm], cfg)
    assert all(direct[perm[c]] == ap for ap, c in permuted)


@pytest.mark.parametrize("k", [1, 3, 10])
def test_make_deployment_valid(k):
    dep = make_deployment(k, seed=k)
    assert len(dep.ap_positions) == k
    assert dep.n_links == 10
    assert make_deployment(k, seed=k) == dep


def test_invalid_counts():
    with pytest.raises(ValueError):
        place_aps(0)
    with pytest.raises(ValueError):
        place_clients(0)
