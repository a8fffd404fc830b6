"""Comparison solutions: slotted CSMA/CA, scheduling at fixed power, and
throughput-oriented power control with scheduling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Deployment, GainMatrices, RadioConfig, dbm_to_mw, sinr_vector
from .errors import DomainError
from .power import LinkSystem
from .rates import McsTable, rate_for_sinr
from .scheduler import DEFAULT_SLOT_DURATION, TimeSeries, run
from .solver import SolverConfig


@dataclass(frozen=True)
class DcfConfig:
    contention_window: int = 16
    sense_threshold_dbm: float = -96.0
    tx_power_mw: float = 40.0
    sim_slots: int = 10_000
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.contention_window < 1:
            raise DomainError("contention_window must be >= 1")
        if not self.tx_power_mw > 0:
            raise DomainError("tx_power_mw must be positive")
        if self.sim_slots < 1:
            raise DomainError("sim_slots must be >= 1")


@dataclass(frozen=True, eq=False)
class LegacyRound:
    """Who transmitted in one contention round and when each started."""

    links: np.ndarray  # link served by each transmitting AP
    start: np.ndarray  # backoff slot at which each transmitting AP started


def _contend(counters: np.ndarray, sensed: np.ndarray, backlogged: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Resolve one round of slotted contention.

    An AP starts when its counter runs out unless it already hears an AP that
    started strictly earlier; APs reaching zero in the same backoff slot cannot
    hear each other yet and overlap. An AP that hears a transmission freezes
    its counter at the remaining value. Returns (transmits, start, remaining).
    """
    n_aps = counters.size
    transmits = np.zeros(n_aps, dtype=bool)
    start = np.full(n_aps, -1, dtype=int)
    remaining = counters.copy()
    busy_since = np.full(n_aps, np.iinfo(np.int64).max)
    for t in np.unique(counters[backlogged]):
        starters = np.flatnonzero(backlogged & (counters == t) & (busy_since > t))
        transmits[starters] = True
        start[starters] = t
        for s in starters:
            heard = backlogged & ~transmits & sensed[:, s] & (busy_since > t)
            busy_since[heard] = t
    frozen = backlogged & ~transmits & (busy_since < np.iinfo(np.int64).max)
    remaining[frozen] = counters[frozen] - busy_since[frozen]
    return transmits, start, remaining


def run_legacy(
    deployment: Deployment,
    gains: GainMatrices,
    table: McsTable,
    dcf: DcfConfig = DcfConfig(),
    config: RadioConfig = RadioConfig(),
    slot_duration: float = DEFAULT_SLOT_DURATION,
    rounds: list[LegacyRound] | None = None,
) -> TimeSeries:
    """Slotted DCF abstraction with full-buffer downlinks at fixed power.

    Each output slot is one contention round. Every AP with clients holds a
    backoff counter drawn uniformly from [0, CW); transmitters redraw after
    sending, deferring APs keep their frozen remainder. Each AP serves its
    clients round-robin. Concurrent transmissions interfere and a link whose
    SINR is below the lowest MCS threshold delivers nothing (a collision).
    """
    n = deployment.n_links
    link_ap = deployment.link_aps()
    n_aps = len(deployment.ap_positions)
    served = [np.flatnonzero(link_ap == ap) for ap in range(n_aps)]
    backlogged = np.array([s.size > 0 for s in served])
    rep = np.array([s[0] if s.size else 0 for s in served])
    ap_gain = gains.b[np.ix_(rep, rep)]
    sensed = ap_gain * dcf.tx_power_mw > dbm_to_mw(dcf.sense_threshold_dbm)
    np.fill_diagonal(sensed, False)

    rng = np.random.default_rng(dcf.rng_seed)
    cw = dcf.contention_window
    counters = rng.integers(0, cw, size=n_aps)
    pointer = np.zeros(n_aps, dtype=int)
    rates = np.zeros((dcf.sim_slots, n))
    powers = np.zeros((dcf.sim_slots, n))
    for t in range(dcf.sim_slots):
        transmits, start, remaining = _contend(counters, sensed, backlogged)
        aps = np.flatnonzero(transmits)
        links = np.array([served[ap][pointer[ap] % served[ap].size] for ap in aps], dtype=int)
        pointer[aps] += 1
        p = np.zeros(n)
        p[links] = dcf.tx_power_mw
        gamma = sinr_vector(p, gains)
        powers[t] = p
        rates[t, links] = [rate_for_sinr(table, gamma[i]) for i in links]
        if rounds is not None:
            rounds.append(LegacyRound(links, start[aps]))
        counters = remaining
        counters[aps] = rng.integers(0, cw, size=aps.size)
    return TimeSeries(rates, powers, slot_duration, config.circuit_power_mw)


def run_scheduling_only(
    deployment: Deployment,
    gains: GainMatrices,
    config: RadioConfig,
    table: McsTable,
    total_slots: int,
    solver_config: SolverConfig = SolverConfig(),
    slot_duration: float = DEFAULT_SLOT_DURATION,
) -> TimeSeries:
    """Proportional-fair scheduling with every active link at full power."""
    system = LinkSystem(gains, config, table, deployment, power_mode="fixed")
    return run(system, 1.0, total_slots, solver_config, slot_duration, include_power=False)


def run_power_scheduling(
    deployment: Deployment,
    gains: GainMatrices,
    config: RadioConfig,
    table: McsTable,
    total_slots: int,
    solver_config: SolverConfig = SolverConfig(),
    slot_duration: float = DEFAULT_SLOT_DURATION,
    system: LinkSystem | None = None,
) -> TimeSeries:
    """Proportional-fair scheduling at minimal powers; power only limits feasibility."""
    if system is None:
        system = LinkSystem(gains, config, table, deployment, power_mode="min")
    return run(system, 1.0, total_slots, solver_config, slot_duration, include_power=False)
