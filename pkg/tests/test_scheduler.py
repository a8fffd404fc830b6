import csv
import io
import math

import numpy as np
import pytest

from conftest import blocked_pair, gains, system
from eewlan.channel import RadioConfig, build_gains
from eewlan.errors import WarmupError
from eewlan.power import LinkSystem
from eewlan.rates import default_mcs_table
from eewlan.scenario import make_deployment
from eewlan.scheduler import CSV_HEADER, EPSILON_DATA, ScheduleState, run, step, warmup
from eewlan.solver import ee_objective, solve
from eewlan.utility import derivative_weights, slot_score

TOP = 600.5


def test_warmup_one_slot_per_link():
    s = system(blocked_pair())
    state = warmup(ScheduleState.fresh(2), s)
    assert state.slot_index == 2
    assert np.all(state.R == TOP * 0.1)
    derivative_weights(state, 1.0)  # well defined now


def test_warmup_seeds_dead_link():
    s = system(gains([[1e-6, 0.0], [0.0, 1e-14]]))
    ts = run(s, 1.0, 2)
    assert ts.seeded.tolist() == [0.0, EPSILON_DATA]
    state = warmup(ScheduleState.fresh(2), s)
    assert state.R[1] == EPSILON_DATA


def test_step_requires_warmup():
    s = system(blocked_pair())
    with pytest.raises(WarmupError):
        step(ScheduleState.fresh(2), s)


def test_blocked_pair_alternates():
    s = system(blocked_pair())
    ts = run(s, 1.0, 10_000)
    thr = ts.delivered() / ts.duration
    assert thr == pytest.approx([TOP / 2, TOP / 2], rel=0.02)
    # after the first link has sent alone, the other one is favoured next
    state = ScheduleState(np.array([60.0, 30.0]), 1000.0)
    chosen, _ = step(state, s)
    assert chosen.indices == (0, 12)


def test_single_link_matches_static_optimum():
    s = system(gains([[2e-8]]))
    static = solve(ee_objective(1.0, s), s)
    ts = run(s, 1.0, 1000)
    assert np.all(ts.rates[:, 0] == static.rates[0])
    assert ts.delivered()[0] / ts.duration == pytest.approx(static.rates[0])


def test_idle_slots_still_pay_circuit_power():
    s = system(gains([[1e-14]]))
    ts = run(s, 1.0, 5)
    cfg = RadioConfig()
    assert np.all(ts.slot_energy() == cfg.circuit_power_mw * 0.1)
    assert ts.total_energy == ts.floor_energy


@pytest.fixture(scope="module")
def five_ap_run():
    cfg = RadioConfig()
    dep = make_deployment(5, seed=3, config=cfg)
    s = LinkSystem(build_gains(dep, cfg), cfg, default_mcs_table(), dep)
    return s, run(s, 1.0, 100 * s.n)


def test_accounting_identity(five_ap_run):
    s, ts = five_ap_run
    per_slot = [(p.sum() + s.circuit_total) * ts.slot_duration for p in ts.powers]
    assert ts.total_energy == pytest.approx(math.fsum(per_slot), rel=1e-12)
    assert ts.cumulative_P()[-1] == pytest.approx(ts.total_energy, rel=1e-12)
    assert ts.total_energy >= ts.floor_energy


def test_no_starvation(five_ap_run):
    s, ts = five_ap_run
    solo_ok = [s.feasible(tuple(1 if j == i else 0 for j in range(s.n))) for i in range(s.n)]
    assert all(solo_ok)
    warm = ts.rates[: s.n].sum(axis=0) * ts.slot_duration
    assert np.all(ts.delivered() > warm)


def test_powers_respect_constraints(five_ap_run):
    from eewlan.power import check_constraints

    s, ts = five_ap_run
    for r, p in zip(ts.rates, ts.powers):
        assert check_constraints(r, p, s.gains, s.config).feasible


def test_greedy_never_worse_than_idle():
    cfg = RadioConfig()
    dep = make_deployment(4, seed=1, config=cfg)
    s = LinkSystem(build_gains(dep, cfg), cfg, default_mcs_table(), dep)
    state = warmup(ScheduleState.fresh(s.n), s)
    for _ in range(50):
        c, k = derivative_weights(state, 1.0)
        chosen, state = step(state, s)
        idle = -k * s.circuit_total
        assert slot_score(c, k, chosen.rates, chosen.powers, s.circuit_total) >= idle - 1e-15


def test_deterministic_and_csv(five_ap_run):
    s, ts = five_ap_run
    again = run(s, 1.0, 100 * s.n)
    assert np.array_equal(ts.rates, again.rates) and np.array_equal(ts.powers, again.powers)
    text = ts.to_csv()
    assert text == again.to_csv()
    rows = list(csv.reader(io.StringIO(text)))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == 1 + ts.n_slots * ts.n_links
    last = rows[-1]
    assert float(last[5]) == pytest.approx(ts.total_energy, rel=1e-9)


def test_run_needs_warmup_slots():
    with pytest.raises(ValueError):
        run(system(blocked_pair()), 1.0, 1)
