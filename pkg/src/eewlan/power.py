"""Minimal transmit powers for a rate vector and the feasibility predicate.

Rate vectors are float arrays of Mbit/s (each 0 or a table rate); power
vectors are float arrays of mW.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channel import Deployment, GainMatrices, RadioConfig, sinr_vector
from .errors import DomainError
from .rates import McsTable, min_sinr_for_rate

RESIDUAL_RTOL = 1e-9


class Violation(str, enum.Enum):
    NONE = "none"
    DIVERGENCE = "linear-system-divergence"
    POWER_CAP = "power-cap"
    CARRIER_SENSE = "carrier-sense"
    SHARED_TRANSMITTER = "shared-transmitter"
    # fixed-power mode only: the fixed powers do not reach the SINR target
    SINR_TARGET = "sinr-target"


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    feasible: bool
    powers: np.ndarray
    violated: Violation = Violation.NONE
    total_power: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "total_power", float(np.sum(self.powers)))


def powers_for_sinr_targets(targets: np.ndarray, gains: GainMatrices) -> np.ndarray | None:
    """Component-wise minimal powers meeting ``targets`` with equality.

    Links with a zero target stay silent. Returns None when the interference
    coupling has spectral radius >= 1, i.e. no non-negative solution exists.
    """
    targets = np.asarray(targets, dtype=float)
    p = np.zeros_like(targets)
    active = np.flatnonzero(targets > 0)
    if active.size == 0:
        return p
    a = gains.a[np.ix_(active, active)]
    diag = np.diag(a)
    scale = targets[active] / diag
    coupling = scale[:, None] * a
    np.fill_diagonal(coupling, 0.0)
    lhs = np.eye(active.size) - coupling
    rhs = scale * gains.noise[active]
    try:
        sol = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(sol)) or np.any(sol < 0):
        return None
    resid = np.abs(lhs @ sol - rhs).max()
    if resid > RESIDUAL_RTOL * max(np.abs(rhs).max(), np.abs(sol).max()):
        return None
    p[active] = sol
    return p


def sinr_targets(r: Sequence[float], table: McsTable) -> np.ndarray:
    return np.array([min_sinr_for_rate(table, x) for x in r], dtype=float)


def min_powers(r: Sequence[float], gains: GainMatrices, table: McsTable) -> np.ndarray | None:
    """Minimal powers sustaining rates ``r``; None if the target set is unreachable."""
    return powers_for_sinr_targets(sinr_targets(r, table), gains)


def check_constraints(
    r: Sequence[float],
    p: Sequence[float],
    gains: GainMatrices,
    config: RadioConfig,
    deployment: Deployment | None = None,
) -> FeasibilityReport:
    """Shared-radio exclusion, power caps and carrier sensing for ``p``."""
    p = np.asarray(p, dtype=float)
    r = np.asarray(r, dtype=float)
    tx_ap = deployment.link_aps() if deployment is not None else gains.tx_ap
    active = (p > 0) | (r > 0)
    aps = tx_ap[active]
    if aps.size != np.unique(aps).size:
        return FeasibilityReport(False, p, Violation.SHARED_TRANSMITTER)
    if np.any(p < 0) or np.any(p > config.max_power_mw):
        return FeasibilityReport(False, p, Violation.POWER_CAP)
    transmitting = p > 0
    if transmitting.any():
        sensed = (gains.b[transmitting] * p).max(axis=1)
        if np.any(sensed > config.sense_threshold_mw):
            return FeasibilityReport(False, p, Violation.CARRIER_SENSE)
    return FeasibilityReport(True, p)


class LinkSystem:
    """Everything the solver needs about one deployment, with cached evaluations.

    Rate vectors are addressed by ladder indices (0 = idle). ``power_mode``
    "min" uses minimal powers; "fixed" pins every active link at the cap.
    Evaluations are memoised because the channel is static within a run.
    """

    def __init__(
        self,
        gains: GainMatrices,
        config: RadioConfig,
        table: McsTable,
        deployment: Deployment | None = None,
        power_mode: str = "min",
    ):
        if power_mode not in ("min", "fixed"):
            raise DomainError(f"unknown power mode {power_mode!r}")
        self.gains = gains
        self.config = config
        self.table = table
        self.deployment = deployment
        self.power_mode = power_mode
        self.n = gains.n
        self.ladder = np.array(table.ladder)
        self.ladder_thresholds = np.array(table.ladder_thresholds)
        self.tx_ap = deployment.link_aps() if deployment is not None else gains.tx_ap
        self._cache: dict[tuple[int, ...], FeasibilityReport] = {}
        self._cliques: tuple[tuple[int, ...], ...] | None = None

    @property
    def ladder_sizes(self) -> tuple[int, ...]:
        return (len(self.ladder),) * self.n

    @property
    def circuit_total(self) -> float:
        return self.n * self.config.circuit_power_mw

    def rates(self, idx: Sequence[int]) -> np.ndarray:
        return self.ladder[np.asarray(idx, dtype=int)]

    def indices(self, r: Sequence[float]) -> tuple[int, ...]:
        out = []
        for x in r:
            if float(x) == 0.0:
                out.append(0)
            else:
                try:
                    out.append(self.table.rates.index(float(x)) + 1)
                except ValueError:
                    raise DomainError(f"rate {x} is not in the MCS table") from None
        return tuple(out)

    def evaluate(self, idx: Sequence[int]) -> FeasibilityReport:
        hit = self._cache.get(idx) if isinstance(idx, tuple) else None
        if hit is not None:
            return hit
        key = tuple(int(k) for k in idx)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        report = self._evaluate(key)
        self._cache[key] = report
        return report

    def _evaluate(self, key: tuple[int, ...]) -> FeasibilityReport:
        targets = self.ladder_thresholds[list(key)]
        active = targets > 0
        aps = self.tx_ap[active]
        if aps.size != np.unique(aps).size:
            return FeasibilityReport(False, np.zeros(self.n), Violation.SHARED_TRANSMITTER)
        if self.power_mode == "fixed":
            p = np.where(active, self.config.max_power_mw, 0.0)
            gamma = sinr_vector(p, self.gains)
            if np.any(gamma[active] < targets[active]):
                return FeasibilityReport(False, p, Violation.SINR_TARGET)
        else:
            p = powers_for_sinr_targets(targets, self.gains)
            if p is None:
                return FeasibilityReport(False, np.zeros(self.n), Violation.DIVERGENCE)
        return check_constraints(self.rates(key), p, self.gains, self.config, self.deployment)

    def feasible(self, idx: Sequence[int]) -> bool:
        return self.evaluate(idx).feasible

    def conflicts(self) -> np.ndarray:
        """``conflicts[i, j]``: links i and j cannot both be active at any rate."""
        out = np.zeros((self.n, self.n), dtype=bool)
        for i in range(self.n):
            for j in range(i + 1, self.n):
                idx = [0] * self.n
                idx[i] = idx[j] = 1
                out[i, j] = out[j, i] = not self.feasible(tuple(idx))
        return out

    def conflict_cliques(self) -> tuple[tuple[int, ...], ...]:
        """Greedy partition of the links into pairwise-conflicting groups.

        Feasibility is downward closed, so a pair infeasible at the lowest
        step is infeasible at every step: each group holds at most one
        active link in any feasible configuration.
        """
        if self._cliques is None:
            conflict = self.conflicts()
            cliques: list[list[int]] = []
            for i in range(self.n):
                for clique in cliques:
                    if all(conflict[i, j] for j in clique):
                        clique.append(i)
                        break
                else:
                    cliques.append([i])
            self._cliques = tuple(tuple(c) for c in cliques)
        return self._cliques

    def w_value(self, idx: Sequence[int]) -> float:
        """log of total consumed power (transmit plus circuit) at minimal powers."""
        rep = self.evaluate(idx)
        if not rep.feasible:
            return math.inf
        return math.log(rep.total_power + self.circuit_total)


def constraint_g(r: Sequence[float], w: float, system: LinkSystem) -> float:
    """Monotone constraint of the lifted problem: <= 0 iff feasible and W(r) + w <= 0.

    Infeasible rate vectors map to +inf so that pruning on it stays sound.
    """
    return system.w_value(system.indices(r)) + w
