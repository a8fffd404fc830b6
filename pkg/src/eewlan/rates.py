"""Step function mapping SINR to data rate, and its inverse."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import DomainError

# 802.11ax, 1 spatial stream, 80 MHz, 0.8 us GI: (min SINR dB, Mbit/s) for MCS 0..11.
# The thresholds are typical link-level requirements, not values read off any
# measured curve; treat them as replaceable defaults.
DEFAULT_MCS_STEPS_DB: tuple[tuple[float, float], ...] = (
    (5.0, 36.0),
    (8.0, 72.1),
    (11.0, 108.1),
    (14.0, 144.1),
    (17.0, 216.2),
    (21.0, 288.2),
    (23.0, 324.3),
    (25.0, 360.3),
    (29.0, 432.4),
    (31.0, 480.4),
    (34.0, 540.4),
    (37.0, 600.5),
)


@dataclass(frozen=True)
class McsTable:
    """Thresholds (linear SINR) and rates (Mbit/s), both strictly increasing.

    A zero step (threshold 0, rate 0) is implicit. Comparison at a threshold
    is inclusive, so ``rate_for_sinr`` is right-continuous.
    """

    thresholds: tuple[float, ...]
    rates: tuple[float, ...]

    def __post_init__(self) -> None:
        th = tuple(float(t) for t in self.thresholds)
        rt = tuple(float(r) for r in self.rates)
        object.__setattr__(self, "thresholds", th)
        object.__setattr__(self, "rates", rt)
        if len(th) != len(rt) or not th:
            raise DomainError("MCS table needs matching, nonempty thresholds and rates")
        if th[0] <= 0 or rt[0] <= 0:
            raise DomainError("MCS thresholds and rates must be positive")
        if any(b <= a for a, b in zip(th, th[1:])) or any(b <= a for a, b in zip(rt, rt[1:])):
            raise DomainError("MCS thresholds and rates must be strictly increasing")

    @classmethod
    def from_steps(cls, steps: Iterable[tuple[float, float]]) -> McsTable:
        steps = list(steps)
        return cls(tuple(s for s, _ in steps), tuple(r for _, r in steps))

    @classmethod
    def from_db_steps(cls, steps: Iterable[Sequence[float]]) -> McsTable:
        return cls.from_steps((10.0 ** (float(db) / 10.0), float(rate)) for db, rate in steps)

    def to_db_steps(self) -> list[list[float]]:
        return [[10.0 * math.log10(t), r] for t, r in zip(self.thresholds, self.rates)]

    @property
    def ladder(self) -> tuple[float, ...]:
        """Admissible rates including the implicit 0."""
        return (0.0,) + self.rates

    @property
    def ladder_thresholds(self) -> tuple[float, ...]:
        return (0.0,) + self.thresholds

    def __len__(self) -> int:
        return len(self.rates)

    def rate_for_sinr(self, gamma: float) -> float:
        return rate_for_sinr(self, gamma)

    def min_sinr_for_rate(self, rate: float) -> float:
        return min_sinr_for_rate(self, rate)


def default_mcs_table() -> McsTable:
    return McsTable.from_db_steps(DEFAULT_MCS_STEPS_DB)


def rate_index_for_sinr(table: McsTable, gamma: float) -> int:
    """Ladder index (0 = idle) of the fastest step supported at ``gamma``."""
    return bisect.bisect_right(table.thresholds, gamma)


def rate_for_sinr(table: McsTable, gamma: float) -> float:
    if gamma < 0:
        raise DomainError("SINR must be non-negative")
    return table.ladder[rate_index_for_sinr(table, gamma)]


def min_sinr_for_rate(table: McsTable, rate: float) -> float:
    if rate == 0:
        return 0.0
    try:
        k = table.rates.index(float(rate))
    except ValueError:
        raise DomainError(f"rate {rate} is not in the MCS table") from None
    return table.thresholds[k]
