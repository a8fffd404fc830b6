"""Alpha-fair utility, the energy-efficiency objective and its monotone split.

``log u_hat(r) = v_of(r) - w_of(r)`` where both terms are nondecreasing in
the rate vector: ``v_of`` is the log of the alpha-fair mean throughput and
``w_of`` the log of total consumed power at minimal transmit powers.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .channel import RadioConfig
from .errors import DomainError, WarmupError
from .power import LinkSystem


def _check_alpha(alpha: float) -> None:
    if not alpha >= 0:
        raise DomainError(f"alpha must be >= 0, got {alpha}")


def u_alpha(rate: float, alpha: float) -> float:
    _check_alpha(alpha)
    if rate < 0:
        raise DomainError("rate must be non-negative")
    if alpha == 1:
        return math.log(rate) if rate > 0 else -math.inf
    if rate == 0:
        return 0.0 if alpha < 1 else -math.inf
    return rate ** (1.0 - alpha) / (1.0 - alpha)


def u_alpha_inverse(value: float, alpha: float) -> float:
    _check_alpha(alpha)
    if alpha == 1:
        return math.exp(value)
    if value == -math.inf:
        return 0.0
    return ((1.0 - alpha) * value) ** (1.0 / (1.0 - alpha))


def mean_throughput(r: Sequence[float], alpha: float) -> float:
    """Alpha-fair mean: arithmetic at 0, geometric at 1, harmonic at 2."""
    _check_alpha(alpha)
    r = np.asarray(r, dtype=float)
    if r.size == 0:
        raise DomainError("need at least one link")
    if np.any(r < 0):
        raise DomainError("rates must be non-negative")
    if alpha >= 1 and np.any(r == 0):
        return 0.0
    if alpha == 1:
        return float(np.exp(np.mean(np.log(r))))
    if alpha == 0:
        return float(r.mean())
    e = 1.0 - alpha
    return float(np.mean(r**e) ** (1.0 / e))


def objective_u_hat(r: Sequence[float], p: Sequence[float], config: RadioConfig, alpha: float) -> float:
    """Fair mean throughput per unit of total consumed power (Mbit/s per mW).

    Circuit power is charged for every link whether it transmits or not.
    """
    p = np.asarray(p, dtype=float)
    total = float(p.sum()) + p.size * config.circuit_power_mw
    return mean_throughput(r, alpha) / total


def v_of(r: Sequence[float], alpha: float) -> float:
    m = mean_throughput(r, alpha)
    return math.log(m) if m > 0 else -math.inf


def w_of(r: Sequence[float], system: LinkSystem) -> float:
    """log of total power at minimal powers; +inf when ``r`` is infeasible."""
    return system.w_value(system.indices(r))


def derivative_weights(state, alpha: float) -> tuple[np.ndarray, float]:
    """Per-link rate weights and the power coefficient of the slot score.

    The slot score of a configuration is ``c @ r - power_coeff * total_power``,
    the time derivative of the cumulative log objective.
    """
    _check_alpha(alpha)
    R = np.asarray(state.R, dtype=float)
    P = float(state.P)
    if np.any(R <= 0) or P <= 0:
        raise WarmupError("cumulative data and energy must be positive before weighting")
    c = R ** (-alpha) / np.sum(R ** (1.0 - alpha))
    return c, 1.0 / P


def slot_score(c: np.ndarray, power_coeff: float, r: Sequence[float], p: Sequence[float], circuit_total: float) -> float:
    return float(np.dot(c, r)) - power_coeff * (float(np.sum(p)) + circuit_total)
