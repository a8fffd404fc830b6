"""Slot-by-slot scheduling that greedily maximises the increment of the log objective."""

from __future__ import annotations

import csv
import io
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .errors import WarmupError
from .power import LinkSystem
from .solver import Solution, SolverConfig, linear_objective, solve
from .utility import derivative_weights

EPSILON_DATA = 1e-6  # Mbit credited to a link that cannot transmit even alone
DEFAULT_SLOT_DURATION = 0.1
HINT_MEMORY = 16

CSV_HEADER = ("slot", "link", "rate_mbps", "power_mw", "cumulative_R_mbit", "cumulative_P_mws")


@dataclass(frozen=True, eq=False)
class ScheduleState:
    R: np.ndarray  # Mbit delivered per link
    P: float  # mW*s consumed in total
    slot_duration: float = DEFAULT_SLOT_DURATION
    slot_index: int = 0

    @classmethod
    def fresh(cls, n: int, slot_duration: float = DEFAULT_SLOT_DURATION) -> ScheduleState:
        return cls(np.zeros(n), 0.0, slot_duration, 0)

    def advance(self, rates: np.ndarray, powers: np.ndarray, circuit_total: float) -> ScheduleState:
        dt = self.slot_duration
        return replace(
            self,
            R=self.R + np.asarray(rates, dtype=float) * dt,
            P=self.P + (float(np.sum(powers)) + circuit_total) * dt,
            slot_index=self.slot_index + 1,
        )


@dataclass(eq=False)
class TimeSeries:
    """Per-slot rates and powers of one run, plus its accounting constants."""

    rates: np.ndarray  # (slots, links) Mbit/s
    powers: np.ndarray  # (slots, links) mW
    slot_duration: float
    circuit_power_mw: float
    seeded: np.ndarray | None = None  # Mbit credited without transmission

    @property
    def n_slots(self) -> int:
        return self.rates.shape[0]

    @property
    def n_links(self) -> int:
        return self.rates.shape[1]

    @property
    def duration(self) -> float:
        return self.n_slots * self.slot_duration

    def slot_energy(self) -> np.ndarray:
        return (self.powers.sum(axis=1) + self.n_links * self.circuit_power_mw) * self.slot_duration

    def cumulative_R(self) -> np.ndarray:
        return np.cumsum(self.rates * self.slot_duration, axis=0)

    def cumulative_P(self) -> np.ndarray:
        return np.cumsum(self.slot_energy())

    @property
    def total_energy(self) -> float:
        # same operation order as floor_energy, so total >= floor holds exactly
        circuit = self.n_links * self.circuit_power_mw * self.n_slots
        return (float(self.powers.sum()) + circuit) * self.slot_duration

    @property
    def floor_energy(self) -> float:
        return (self.n_links * self.circuit_power_mw * self.n_slots) * self.slot_duration

    def delivered(self) -> np.ndarray:
        return self.rates.sum(axis=0) * self.slot_duration

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        cum_r = self.cumulative_R()
        cum_p = self.cumulative_P()
        for t in range(self.n_slots):
            for i in range(self.n_links):
                writer.writerow(
                    (t, i, f"{self.rates[t, i]:.6f}", f"{self.powers[t, i]:.9g}", f"{cum_r[t, i]:.6f}", f"{cum_p[t]:.6f}")
                )
        return buf.getvalue()


class _Recorder:
    def __init__(self, n: int, total_slots: int):
        self.rates = np.zeros((total_slots, n))
        self.powers = np.zeros((total_slots, n))
        self.t = 0

    def add(self, rates: np.ndarray, powers: np.ndarray) -> None:
        self.rates[self.t] = rates
        self.powers[self.t] = powers
        self.t += 1


def _solo_index(system: LinkSystem, link: int) -> tuple[int, ...]:
    """Fastest ladder step ``link`` sustains on its own (all zeros if none)."""
    idx = [0] * system.n
    for k in range(len(system.ladder) - 1, 0, -1):
        idx[link] = k
        if system.feasible(idx):
            return tuple(idx)
    return (0,) * system.n


def _warmup(state: ScheduleState, system: LinkSystem, recorder: _Recorder | None) -> tuple[ScheduleState, np.ndarray]:
    seeded = np.zeros(system.n)
    for link in range(system.n):
        idx = _solo_index(system, link)
        rep = system.evaluate(idx)
        rates = system.rates(idx)
        state = state.advance(rates, rep.powers, system.circuit_total)
        if recorder is not None:
            recorder.add(rates, rep.powers)
        if state.R[link] <= 0:
            seeded[link] = EPSILON_DATA
    if seeded.any():
        state = replace(state, R=state.R + seeded)
    return state, seeded


def warmup(state: ScheduleState, system: LinkSystem) -> ScheduleState:
    """One solo slot per link, round-robin, so every counter becomes positive.

    A link that cannot transmit even alone is credited ``EPSILON_DATA``.
    """
    return _warmup(state, system, None)[0]


def step(
    state: ScheduleState,
    system: LinkSystem,
    alpha: float = 1.0,
    solver_config: SolverConfig = SolverConfig(),
    include_power: bool = True,
    hints=(),
) -> tuple[Solution, ScheduleState]:
    """Choose the configuration with the best slot score and advance the counters."""
    if np.any(state.R <= 0) or state.P <= 0:
        raise WarmupError("run warmup() before step()")
    c, power_coeff = derivative_weights(state, alpha)
    objective = linear_objective(c, power_coeff if include_power else 0.0, system)
    chosen = solve(objective, system, solver_config, hints=hints)
    return chosen, state.advance(chosen.rates, chosen.powers, system.circuit_total)


def run(
    system: LinkSystem,
    alpha: float = 1.0,
    total_slots: int = 10_000,
    solver_config: SolverConfig = SolverConfig(),
    slot_duration: float = DEFAULT_SLOT_DURATION,
    include_power: bool = True,
) -> TimeSeries:
    """Warm-up followed by greedy slots; the first N slots are the warm-up."""
    n = system.n
    if total_slots < n:
        raise ValueError(f"need at least {n} slots for the warm-up")
    recorder = _Recorder(n, total_slots)
    state, seeded = _warmup(ScheduleState.fresh(n, slot_duration), system, recorder)
    recent: deque[tuple[int, ...]] = deque(maxlen=HINT_MEMORY)
    while state.slot_index < total_slots:
        chosen, state = step(state, system, alpha, solver_config, include_power, hints=tuple(recent))
        recorder.add(chosen.rates, chosen.powers)
        if chosen.indices in recent:
            recent.remove(chosen.indices)
        recent.append(chosen.indices)
    return TimeSeries(recorder.rates, recorder.powers, slot_duration, system.config.circuit_power_mw, seeded)
