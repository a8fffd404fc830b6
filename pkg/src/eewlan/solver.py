"""Monotonic branch-and-bound over per-link rate ladders.

Maximises ``v(r) - w(r)`` where both ``v`` and ``w`` are nondecreasing in
the rate vector and the feasible set is a down-set (shrinking any rate never
breaks feasibility). This is the lifted problem ``max v(r) + t`` subject to
``w(r) + t <= 0`` with the auxiliary ``t`` eliminated analytically: on a box
``[lo, hi]`` the best ``t`` is at most ``-w(lo)``, so ``v(hi) - w(lo)`` bounds
every point of the box.
"""

from __future__ import annotations

import bisect
import heapq
import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError
from .power import FeasibilityReport, LinkSystem
from .utility import v_of

Index = tuple[int, ...]

BRUTE_FORCE_LIMIT = 10**6


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 1e-6
    max_iterations: int = 100_000
    tie_break: str = "lowest-index"
    reduce: bool = True  # shrink boxes to the feasible / still-improving part
    clique_bound: bool = True  # additive objectives: one active link per conflict clique

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if self.max_iterations < 1:
            raise DomainError("max_iterations must be >= 1")
        if self.tie_break != "lowest-index":
            raise DomainError(f"unsupported tie-break rule {self.tie_break!r}")


@dataclass(frozen=True)
class MonotoneObjective:
    """Maximise ``v(rates) - w(total transmit power)``.

    ``v`` must be nondecreasing in the rates and ``w`` nondecreasing in the
    power; since minimal powers grow with the rates, ``w`` is then
    nondecreasing in the rates too. ``v_terms[i][k]``, when given, declares
    ``v`` additive: the contribution of link ``i`` at ladder step ``k``.
    """

    v: Callable[[np.ndarray], float]
    w: Callable[[float], float]
    name: str = "objective"
    v_terms: tuple[tuple[float, ...], ...] | None = None


@dataclass(frozen=True)
class Box:
    """Ladder-index box with the implied range of the auxiliary variable."""

    r_lo: Index
    r_hi: Index
    w_lo: float
    w_hi: float


@dataclass(frozen=True, eq=False)
class Solution:
    rates: np.ndarray
    powers: np.ndarray
    objective: float
    bound_gap: float
    iterations: int
    status: str  # "optimal" | "iteration-capped"
    indices: Index = ()

    @property
    def active(self) -> np.ndarray:
        return self.rates > 0


@dataclass
class PruneRecord:
    """A discarded region: all of ``box``, or ``box`` minus ``kept`` for reductions."""

    box: Box
    upper_bound: float
    reason: str  # "infeasible" | "bound" | "reduction"
    kept: Box | None = None


def ee_objective(alpha: float, system: LinkSystem) -> MonotoneObjective:
    """Static objective ``log u_hat``: log fair-mean rate minus log total power."""
    circuit = system.circuit_total
    return MonotoneObjective(
        v=lambda rates: v_of(rates, alpha),
        w=lambda power: math.log(power + circuit),
        name=f"log-u-hat(alpha={alpha})",
    )


def gee_objective(system: LinkSystem) -> MonotoneObjective:
    """Global energy efficiency, sum rate over total consumed power, in log form."""
    circuit = system.circuit_total

    def v(rates: np.ndarray) -> float:
        s = float(rates.sum())
        return math.log(s) if s > 0 else -math.inf

    return MonotoneObjective(v=v, w=lambda power: math.log(power + circuit), name="log-gee")


def linear_objective(weights: np.ndarray, power_coeff: float, system: LinkSystem) -> MonotoneObjective:
    """Slot score ``weights @ r - power_coeff * (sum p + N p_c)``."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or power_coeff < 0:
        raise DomainError("slot score weights must be non-negative")
    circuit = system.circuit_total
    terms = tuple(tuple(float(x) for x in wi * system.ladder) for wi in weights)
    return MonotoneObjective(
        v=lambda rates: float(weights @ rates),
        w=lambda power: power_coeff * (power + circuit),
        name="slot-score",
        v_terms=terms,
    )


def _threshold(incumbent: float, epsilon: float) -> float:
    if not math.isfinite(incumbent):
        return incumbent
    return incumbent + epsilon * abs(incumbent)


class _Search:
    def __init__(self, objective: MonotoneObjective, system: LinkSystem, clique_bound: bool = False):
        self.objective = objective
        self.system = system
        self._v: dict[Index, float] = {}
        self._w: dict[Index, float] = {}
        self.cliques = None
        terms = objective.v_terms
        if clique_bound and terms is not None and all(t[0] == 0 and min(t) >= 0 for t in terms):
            self.cliques = system.conflict_cliques()

    def upper(self, lo: Index, hi: Index) -> float:
        """Bound on v - w over every feasible point of [lo, hi] (lo assumed feasible)."""
        if self.cliques is None:
            return self.v(hi) - self.w(lo)
        # at most one link per clique is active, the rest sit at their lower corner
        terms = self.objective.v_terms
        total = 0.0
        for clique in self.cliques:
            base = 0.0
            lift = 0.0
            for i in clique:
                t = terms[i]
                base += t[lo[i]]
                lift = max(lift, t[hi[i]] - t[lo[i]])
            total += base + lift
        return min(total, self.v(hi)) - self.w(lo)

    def report(self, idx: Index) -> FeasibilityReport:
        return self.system.evaluate(idx)

    def v(self, idx: Index) -> float:
        val = self._v.get(idx)
        if val is None:
            terms = self.objective.v_terms
            if terms is not None:
                val = sum([t[k] for t, k in zip(terms, idx)])
            else:
                val = self.objective.v(self.system.rates(idx))
            self._v[idx] = val
        return val

    def w(self, idx: Index) -> float:
        val = self._w.get(idx)
        if val is None:
            rep = self.report(idx)
            val = self.objective.w(rep.total_power) if rep.feasible else math.inf
            self._w[idx] = val
        return val

    def value(self, idx: Index) -> float:
        w = self.w(idx)
        return -math.inf if w == math.inf else self.v(idx) - w

    def reduce_upper(self, lo: Index, hi: Index) -> Index:
        """Largest hi' <= hi such that every feasible point of [lo, hi] stays inside."""
        new_hi = list(hi)
        for i in range(len(lo)):
            left, right = lo[i], hi[i]
            if left == right:
                continue
            probe = list(lo)
            probe[i] = right
            if self.system.feasible(tuple(probe)):
                continue
            # invariant: lo[i] <- left feasible, lo[i] <- right infeasible
            while right - left > 1:
                mid = (left + right) // 2
                probe[i] = mid
                if self.system.feasible(tuple(probe)):
                    left = mid
                else:
                    right = mid
            new_hi[i] = left
        return tuple(new_hi)

    def raise_lower(self, lo: Index, hi: Index, floor: float) -> Index | None:
        """Smallest lo' >= lo such that no point of [lo, hi] outside [lo', hi] beats ``floor``.

        A point x in the box is worth keeping only if v(x) - w(lo) > floor, and
        v(x) <= v(hi with coordinate i set to x_i). None means nothing survives.
        """
        w_lo = self.w(lo)
        if self.v(hi) - w_lo <= floor:
            return None
        if floor == -math.inf:
            return lo
        new_lo = list(lo)
        terms = self.objective.v_terms
        if terms is not None:
            rest = self.v(hi)
            for i in range(len(lo)):
                if lo[i] == hi[i]:
                    continue
                ti = terms[i]
                need = floor + w_lo - (rest - ti[hi[i]])
                new_lo[i] = min(hi[i], max(lo[i], bisect.bisect_right(ti, need, 0, hi[i] + 1)))
            return tuple(new_lo)
        for i in range(len(lo)):
            left, right = lo[i], hi[i]
            if left == right:
                continue
            probe = list(hi)
            probe[i] = left
            if self.v(tuple(probe)) - w_lo > floor:
                continue
            # invariant: value bound at left <= floor, at right > floor
            while right - left > 1:
                mid = (left + right) // 2
                probe[i] = mid
                if self.v(tuple(probe)) - w_lo > floor:
                    right = mid
                else:
                    left = mid
            new_lo[i] = right
        return tuple(new_lo)

    def box(self, lo: Index, hi: Index) -> Box:
        return Box(lo, hi, -self.w(hi), -self.w(lo))


def _solution(search: _Search, idx: Index, bound_gap: float, iterations: int, status: str) -> Solution:
    rep = search.report(idx)
    return Solution(
        rates=search.system.rates(idx),
        powers=np.array(rep.powers, dtype=float),
        objective=search.value(idx),
        bound_gap=bound_gap,
        iterations=iterations,
        status=status,
        indices=idx,
    )


def _split(lo: Index, hi: Index, terms=None) -> tuple[tuple[Index, Index], tuple[Index, Index]]:
    if terms is not None:
        spread = [terms[i][h] - terms[i][l] for i, (l, h) in enumerate(zip(lo, hi))]
    else:
        spread = [h - l for l, h in zip(lo, hi)]
    axis = max(range(len(spread)), key=lambda i: (spread[i], -i))
    mid = lo[axis] if lo[axis] == 0 else (lo[axis] + hi[axis]) // 2
    left_hi = hi[:axis] + (mid,) + hi[axis + 1 :]
    right_lo = lo[:axis] + (mid + 1,) + lo[axis + 1 :]
    return (lo, left_hi), (right_lo, hi)


def solve(
    objective: MonotoneObjective,
    system: LinkSystem,
    config: SolverConfig = SolverConfig(),
    hints: Iterable[Sequence[int]] = (),
    trace: list[PruneRecord] | None = None,
) -> Solution:
    """Global maximiser of ``objective`` over feasible ladder-index vectors.

    Boxes are expanded best-upper-bound first. ``hints`` are candidate index
    vectors tried as initial incumbents; they only speed pruning. When
    ``trace`` is a list, every pruned box is appended to it.
    """
    search = _Search(objective, system, config.clique_bound)
    n = system.n
    zero: Index = (0,) * n
    top: Index = tuple(s - 1 for s in system.ladder_sizes)

    best_idx = zero
    best = search.value(zero)
    for hint in hints:
        hint = tuple(int(k) for k in hint)
        val = search.value(hint)
        if val > best:
            best, best_idx = val, hint

    def record(lo: Index, hi: Index, ub: float, reason: str, kept: tuple[Index, Index] | None = None) -> None:
        if trace is not None:
            kept_box = Box(kept[0], kept[1], math.nan, math.nan) if kept else None
            trace.append(PruneRecord(Box(lo, hi, math.nan, math.nan), ub, reason, kept_box))

    counter = itertools.count()
    heap: list[tuple[float, int, Index, Index]] = []

    def push(lo: Index, hi: Index) -> None:
        if not system.feasible(lo):
            record(lo, hi, math.inf, "infeasible")
            return
        ub = search.upper(lo, hi)
        if ub <= _threshold(best, config.epsilon):
            record(lo, hi, ub, "bound")
            return
        heapq.heappush(heap, (-ub, next(counter), lo, hi))

    push(zero, top)
    iterations = 0
    status = "optimal"
    gap = 0.0
    while heap:
        neg_ub, _, lo, hi = heap[0]
        ub = -neg_ub
        if ub <= _threshold(best, config.epsilon):
            for neg, _, l, h in heap:
                record(l, h, -neg, "bound")
            heap.clear()
            break
        if iterations >= config.max_iterations:
            status = "iteration-capped"
            gap = ub - best if math.isfinite(best) else math.inf
            break
        heapq.heappop(heap)
        iterations += 1

        if config.reduce:
            orig = (lo, hi)
            hi = search.reduce_upper(lo, hi)
            new_lo = search.raise_lower(lo, hi, _threshold(best, config.epsilon))
            if new_lo is None or not system.feasible(new_lo):
                record(*orig, ub, "reduction", None)
                continue
            if new_lo != lo:
                lo = new_lo
                hi = search.reduce_upper(lo, hi)
            if (lo, hi) != orig:
                record(*orig, ub, "reduction", (lo, hi))
        ub = search.upper(lo, hi)
        for cand in (lo, hi):
            val = search.value(cand)
            if val > best:
                best, best_idx = val, cand
        if lo == hi or ub <= _threshold(best, config.epsilon):
            if lo != hi:
                record(lo, hi, ub, "bound")
            continue
        for child_lo, child_hi in _split(lo, hi, search.objective.v_terms):
            push(child_lo, child_hi)

    return _solution(search, best_idx, max(gap, 0.0), iterations, status)


def brute_force(objective: MonotoneObjective, system: LinkSystem) -> Solution:
    """Exhaustive maximiser; refuses instances with more than 10**6 rate vectors."""
    sizes = system.ladder_sizes
    total = math.prod(sizes)
    if total > BRUTE_FORCE_LIMIT:
        raise DomainError(f"{total} rate vectors exceed the brute-force limit")
    search = _Search(objective, system)
    best_idx: Index = (0,) * system.n
    best = search.value(best_idx)
    for idx in itertools.product(*(range(s) for s in sizes)):
        val = search.value(idx)
        if val > best:
            best, best_idx = val, idx
    return _solution(search, best_idx, 0.0, total, "optimal")
