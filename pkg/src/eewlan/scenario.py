"""Evaluation topologies: maximin-spaced APs, uniform clients, nearest-AP association."""

from __future__ import annotations

import functools
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .channel import Deployment, RadioConfig, pathloss_db

DEFAULT_AREA = 100.0
DEFAULT_CLIENTS = 10
RESTARTS = 20
ANNEAL_STEPS = 400


def spacing_objective(xy: np.ndarray, area: float, wall_weight: float = 2.0) -> float:
    """min(pairwise AP distance, wall_weight * distance to the nearest wall)."""
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    wall = np.minimum(xy, area - xy).min()
    if len(xy) < 2:
        return float(wall_weight * wall)
    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.sqrt((diff**2).sum(-1))
    iu = np.triu_indices(len(xy), 1)
    return float(min(dist[iu].min(), wall_weight * wall))


def _polish(xy: np.ndarray, area: float, wall_weight: float) -> np.ndarray:
    """Epigraph form: maximise t with pairwise distances and scaled wall gaps >= t."""
    k = len(xy)
    iu, ju = np.triu_indices(k, 1)
    x0 = np.append(xy.ravel(), spacing_objective(xy, area, wall_weight))

    def cons(z):
        pts = z[:-1].reshape(k, 2)
        t = z[-1]
        d = np.sqrt(((pts[iu] - pts[ju]) ** 2).sum(-1))
        walls = wall_weight * np.concatenate([pts.ravel(), area - pts.ravel()])
        return np.concatenate([d - t, walls - t])

    def cons_jac(z):
        pts = z[:-1].reshape(k, 2)
        m = len(iu)
        jac = np.zeros((m + 4 * k, 2 * k + 1))
        diff = pts[iu] - pts[ju]
        d = np.maximum(np.sqrt((diff**2).sum(-1)), 1e-12)
        g = diff / d[:, None]
        rows = np.arange(m)
        jac[rows, 2 * iu] = g[:, 0]
        jac[rows, 2 * iu + 1] = g[:, 1]
        jac[rows, 2 * ju] = -g[:, 0]
        jac[rows, 2 * ju + 1] = -g[:, 1]
        eye = np.eye(2 * k) * wall_weight
        jac[m : m + 2 * k, :-1] = eye
        jac[m + 2 * k :, :-1] = -eye
        jac[:, -1] = -1.0
        return jac

    bounds = [(0.0, area)] * (2 * k) + [(0.0, None)]
    res = minimize(
        lambda z: -z[-1],
        x0,
        jac=lambda z: np.concatenate([np.zeros(2 * k), [-1.0]]),
        bounds=bounds,
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        method="SLSQP",
        options={"maxiter": 300, "ftol": 1e-12},
    )
    return np.clip(res.x[:-1].reshape(k, 2), 0.0, area)


def _local_search(xy: np.ndarray, area: float, wall_weight: float, rng: np.random.Generator) -> np.ndarray:
    best = spacing_objective(xy, area, wall_weight)
    step = area / 4
    for _ in range(ANNEAL_STEPS):
        i = rng.integers(len(xy))
        trial = xy.copy()
        trial[i] = np.clip(trial[i] + rng.normal(scale=step, size=2), 0.0, area)
        val = spacing_objective(trial, area, wall_weight)
        if val >= best:
            xy, best = trial, val
        step = max(step * 0.99, 1e-3)
    return xy


@functools.lru_cache(maxsize=256)
def _place_aps_cached(k: int, area: float, seed: int, wall_weight: float, restarts: int) -> tuple:
    if k == 1:
        return ((area / 2, area / 2),)
    best_xy, best_val = None, -np.inf
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        xy = _local_search(rng.uniform(0, area, size=(k, 2)), area, wall_weight, rng)
        polished = _polish(xy, area, wall_weight)
        if spacing_objective(polished, area, wall_weight) >= spacing_objective(xy, area, wall_weight):
            xy = polished
        val = spacing_objective(xy, area, wall_weight)
        if val > best_val + 1e-9:
            best_xy, best_val = xy, val
    return tuple(map(tuple, best_xy))


def place_aps(
    k: int,
    area: float = DEFAULT_AREA,
    seed: int = 0,
    height: float = 3.0,
    wall_weight: float = 2.0,
    restarts: int = RESTARTS,
) -> np.ndarray:
    """Maximin AP layout: returns a (k, 3) array of positions in metres.

    Multi-start local search followed by an SLSQP polish of the epigraph
    problem; the best restart wins, ties going to the earliest.
    """
    if k < 1:
        raise ValueError("need at least one AP")
    xy = np.array(_place_aps_cached(int(k), float(area), int(seed), float(wall_weight), int(restarts)))
    return np.column_stack([xy, np.full(k, height)])


def place_clients(n: int = DEFAULT_CLIENTS, area: float = DEFAULT_AREA, seed: int = 0, height: float = 1.0) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one client")
    rng = np.random.default_rng(seed)
    xy = rng.uniform(0.0, area, size=(n, 2))
    return np.column_stack([xy, np.full(n, height)])


def associate(aps: Sequence[Sequence[float]], clients: Sequence[Sequence[float]], config: RadioConfig) -> list[tuple[int, int]]:
    """Link each client to its lowest-pathloss AP; ties go to the lower AP index."""
    aps = np.asarray(aps, dtype=float)
    clients = np.asarray(clients, dtype=float)
    links = []
    for c, pos in enumerate(clients):
        dist = np.linalg.norm(aps - pos, axis=1)
        loss = [pathloss_db(d, config.carrier_freq_ghz) for d in dist]
        links.append((int(np.argmin(loss)), c))
    return links


def make_deployment(
    n_aps: int,
    n_clients: int = DEFAULT_CLIENTS,
    seed: int = 0,
    config: RadioConfig = RadioConfig(),
    area: float = DEFAULT_AREA,
    placement_seed: int = 0,
) -> Deployment:
    """AP layout depends only on ``n_aps`` (and ``placement_seed``); ``seed`` draws the clients."""
    aps = place_aps(n_aps, area, placement_seed, height=config.ap_height_m)
    clients = place_clients(n_clients, area, seed, height=config.client_height_m)
    return Deployment(
        area_size=area,
        ap_positions=tuple(map(tuple, aps)),
        client_positions=tuple(map(tuple, clients)),
        links=tuple(associate(aps, clients, config)),
    )
