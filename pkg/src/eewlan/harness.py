"""Experiment configuration, per-run metrics and the AP-count sweep."""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import tomli
import tomli_w

from .baselines import DcfConfig, run_legacy, run_power_scheduling, run_scheduling_only
from .channel import Deployment, RadioConfig, build_gains
from .errors import ConfigError, DomainError, InvariantViolation
from .power import LinkSystem
from .rates import DEFAULT_MCS_STEPS_DB, McsTable
from .scenario import make_deployment, place_aps
from .scheduler import DEFAULT_SLOT_DURATION, TimeSeries, run
from .solver import SolverConfig
from .utility import mean_throughput, objective_u_hat

SOLUTIONS = ("legacy", "sched", "powersched", "ee")
METRICS_HEADER = ("solution", "ap_count", "seed", "mean_mbps", "geomean_mbps", "energy_mws", "floor_mws", "u_hat")


@dataclass(frozen=True)
class ExperimentConfig:
    radio: RadioConfig = RadioConfig()
    alpha: float = 1.0
    ap_counts: tuple[int, ...] = (1, 5, 10, 20, 30)
    n_clients: int = 10
    seeds: tuple[int, ...] = tuple(range(10))
    total_slots: int = 2000
    slot_duration: float = DEFAULT_SLOT_DURATION
    solver: SolverConfig = SolverConfig()
    mcs_table: McsTable = field(default_factory=lambda: McsTable.from_db_steps(DEFAULT_MCS_STEPS_DB))
    output_dir: str = "results"
    solutions: tuple[str, ...] = SOLUTIONS
    contention_window: int = 16
    area: float = 100.0
    placement_seed: int = 0
    workers: int = 0  # 0 = one per CPU
    svg: bool = False

    def __post_init__(self) -> None:
        if not self.ap_counts or not self.seeds:
            raise ConfigError("ap_counts and seeds must be nonempty")
        if any(k < 1 for k in self.ap_counts):
            raise ConfigError("ap_counts must be >= 1")
        if self.n_clients < 1:
            raise ConfigError("n_clients must be >= 1")
        if not self.alpha >= 0:
            raise ConfigError("alpha must be >= 0")
        if not self.slot_duration > 0:
            raise ConfigError("slot_duration must be positive")
        if self.total_slots < self.n_clients:
            raise ConfigError("total_slots must cover the warm-up (one slot per link)")
        if self.contention_window < 1:
            raise ConfigError("contention_window must be >= 1")
        unknown = set(self.solutions) - set(SOLUTIONS)
        if unknown or not self.solutions:
            raise ConfigError(f"unknown solutions {sorted(unknown)}; choose from {SOLUTIONS}")

    @classmethod
    def from_dict(cls, doc: dict) -> ExperimentConfig:
        doc = dict(doc)
        try:
            radio = RadioConfig(**doc.pop("radio", {}))
            solver = SolverConfig(**doc.pop("solver", {}))
            mcs = doc.pop("mcs", {})
            table = McsTable.from_db_steps(mcs.pop("table", DEFAULT_MCS_STEPS_DB))
            if mcs:
                raise ConfigError(f"unknown [mcs] keys {sorted(mcs)}")
            known = {f.name for f in fields(cls)} - {"radio", "solver", "mcs_table"}
            extra = set(doc) - known
            if extra:
                raise ConfigError(f"unknown config keys {sorted(extra)}")
            for key in ("ap_counts", "seeds", "solutions"):
                if key in doc:
                    doc[key] = tuple(doc[key])
            return cls(radio=radio, solver=solver, mcs_table=table, **doc)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        try:
            doc = tomli.loads(Path(path).read_text())
        except (OSError, tomli.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        out = {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if f.name not in ("radio", "solver", "mcs_table")
        }
        for key in ("ap_counts", "seeds", "solutions"):
            out[key] = list(out[key])
        out["radio"] = asdict(self.radio)
        out["solver"] = asdict(self.solver)
        out["mcs"] = {"table": self.mcs_table.to_db_steps()}
        return out

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    def dcf(self, seed: int) -> DcfConfig:
        return DcfConfig(
            contention_window=self.contention_window,
            sense_threshold_dbm=self.radio.sense_threshold_dbm,
            tx_power_mw=self.radio.max_power_mw,
            sim_slots=self.total_slots,
            rng_seed=seed,
        )


@dataclass(frozen=True)
class MetricsRow:
    solution_name: str
    ap_count: int
    seed: int
    mean_throughput_mbps: float
    geomean_throughput_mbps: float
    total_energy_mws: float
    energy_efficiency: float
    floor_energy_mws: float

    def __post_init__(self) -> None:
        if self.total_energy_mws < self.floor_energy_mws:
            raise InvariantViolation(f"energy {self.total_energy_mws} below floor {self.floor_energy_mws}")
        if self.geomean_throughput_mbps > self.mean_throughput_mbps * (1 + 1e-12):
            raise InvariantViolation("geometric mean exceeds arithmetic mean")

    def csv_fields(self) -> tuple[str, ...]:
        return (
            self.solution_name,
            str(self.ap_count),
            str(self.seed),
            f"{self.mean_throughput_mbps:.6f}",
            f"{self.geomean_throughput_mbps:.6f}",
            f"{self.total_energy_mws:.6f}",
            f"{self.floor_energy_mws:.6f}",
            f"{self.energy_efficiency:.9e}",
        )


def per_link_throughput(ts: TimeSeries) -> np.ndarray:
    """Mbit/s actually delivered per link (warm-up seeds excluded)."""
    if ts.n_slots == 0:
        return np.zeros(ts.n_links)
    return ts.delivered() / ts.duration


def compute_metrics(
    ts: TimeSeries,
    radio: RadioConfig,
    alpha: float = 1.0,
    solution: str = "",
    ap_count: int = 0,
    seed: int = 0,
) -> MetricsRow:
    """Mean and geometric-mean throughput, energy, and u_hat on time averages."""
    thr = per_link_throughput(ts)
    avg_power = ts.powers.mean(axis=0) if ts.n_slots else np.zeros(ts.n_links)
    return MetricsRow(
        solution_name=solution,
        ap_count=ap_count,
        seed=seed,
        mean_throughput_mbps=float(thr.mean()),
        geomean_throughput_mbps=mean_throughput(thr, 1.0),
        total_energy_mws=ts.total_energy,
        energy_efficiency=objective_u_hat(thr, avg_power, radio, alpha),
        floor_energy_mws=ts.floor_energy,
    )


def deployment_for(config: ExperimentConfig, ap_count: int, seed: int) -> Deployment:
    return make_deployment(
        ap_count, config.n_clients, seed, config.radio, config.area, config.placement_seed
    )


def run_solution(name: str, deployment: Deployment, config: ExperimentConfig, seed: int, system: LinkSystem | None = None) -> TimeSeries:
    """One dynamic run of solution ``name``. ``system`` may share a min-power cache."""
    gains = build_gains(deployment, config.radio)
    table = config.mcs_table
    if name == "legacy":
        return run_legacy(deployment, gains, table, config.dcf(seed), config.radio, config.slot_duration)
    if name == "sched":
        return run_scheduling_only(
            deployment, gains, config.radio, table, config.total_slots, config.solver, config.slot_duration
        )
    if system is None:
        system = LinkSystem(gains, config.radio, table, deployment, power_mode="min")
    if name == "powersched":
        return run_power_scheduling(
            deployment, gains, config.radio, table, config.total_slots, config.solver, config.slot_duration, system
        )
    if name == "ee":
        return run(system, config.alpha, config.total_slots, config.solver, config.slot_duration, include_power=True)
    raise DomainError(f"unknown solution {name!r}")


def _sweep_point(args: tuple[ExperimentConfig, Deployment, int, int]) -> list[MetricsRow]:
    config, deployment, ap_count, seed = args
    gains = build_gains(deployment, config.radio)
    shared = LinkSystem(gains, config.radio, config.mcs_table, deployment, power_mode="min")
    rows = []
    for name in config.solutions:
        ts = run_solution(name, deployment, config, seed, shared)
        rows.append(compute_metrics(ts, config.radio, config.alpha, name, ap_count, seed))
    return rows


def sweep(config: ExperimentConfig, workers: int | None = None) -> list[MetricsRow]:
    """Every (solution, ap_count, seed) point, sorted canonically.

    Grid points run in worker processes; the result does not depend on the
    number of workers or on completion order.
    """
    workers = config.workers if workers is None else workers
    workers = workers or os.cpu_count() or 1
    for k in sorted(set(config.ap_counts)):
        place_aps(k, config.area, config.placement_seed, config.radio.ap_height_m)  # warm the layout cache
    jobs = [
        (config, deployment_for(config, k, seed), k, seed)
        for k in sorted(set(config.ap_counts))
        for seed in sorted(set(config.seeds))
    ]
    if workers == 1 or len(jobs) == 1:
        results = [_sweep_point(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            results = list(pool.map(_sweep_point, jobs))
    rows = [row for batch in results for row in batch]
    return sorted(rows, key=lambda r: (r.solution_name, r.ap_count, r.seed))


def metrics_csv(rows: Sequence[MetricsRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(METRICS_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def _grouped(rows: Sequence[MetricsRow]) -> dict[tuple[str, int], list[MetricsRow]]:
    groups: dict[tuple[str, int], list[MetricsRow]] = {}
    for row in rows:
        groups.setdefault((row.solution_name, row.ap_count), []).append(row)
    return dict(sorted(groups.items()))


FIGURES = {
    "fig3_throughput": (("mean_mbps", "mean_throughput_mbps"), ("geomean_mbps", "geomean_throughput_mbps")),
    "fig4_energy": (("energy_mws", "total_energy_mws"), ("floor_mws", "floor_energy_mws")),
    "fig5_efficiency": (("u_hat", "energy_efficiency"),),
}


def figure_csvs(rows: Sequence[MetricsRow]) -> dict[str, str]:
    """Seed-averaged series per figure, one CSV each."""
    out = {}
    groups = _grouped(rows)
    for fig, columns in FIGURES.items():
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("solution", "ap_count", "n_seeds") + tuple(c for c, _ in columns))
        for (name, k), members in groups.items():
            vals = [math.fsum(getattr(r, attr) for r in members) / len(members) for _, attr in columns]
            writer.writerow((name, k, len(members)) + tuple(f"{v:.9g}" for v in vals))
        out[fig] = buf.getvalue()
    return out


def svg_line_chart(series: dict[str, list[tuple[float, float]]], title: str, ylabel: str, width: int = 480, height: int = 320) -> str:
    """Minimal SVG line chart, one polyline per series."""
    pad = 50
    pts = [p for s in series.values() for p in s]
    xs = [p[0] for p in pts] or [0.0, 1.0]
    ys = [p[1] for p in pts] or [0.0, 1.0]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(ys)
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    colours = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<text x="{width / 2:.1f}" y="16" text-anchor="middle">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle">APs</text>',
        f'<text x="12" y="{height / 2:.1f}" transform="rotate(-90 12 {height / 2:.1f})" text-anchor="middle">{ylabel}</text>',
        f'<text x="{pad - 4}" y="{sy(y1):.1f}" text-anchor="end">{y1:.3g}</text>',
        f'<text x="{pad - 4}" y="{sy(y0):.1f}" text-anchor="end">{y0:.3g}</text>',
    ]
    for n, (name, s) in enumerate(series.items()):
        colour = colours[n % len(colours)]
        coords = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in s)
        parts.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{coords}"/>')
        parts.append(f'<text x="{width - pad + 4}" y="{pad + 14 * n}" fill="{colour}">{name}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_outputs(rows: Sequence[MetricsRow], out_dir: str | Path, svg: bool = False) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    path = out_dir / "metrics.csv"
    path.write_text(metrics_csv(rows))
    written.append(path)
    for fig, text in figure_csvs(rows).items():
        path = out_dir / f"{fig}.csv"
        path.write_text(text)
        written.append(path)
    if svg:
        groups = _grouped(rows)
        for fig, columns in FIGURES.items():
            label, attr = columns[0]
            series: dict[str, list[tuple[float, float]]] = {}
            for (name, k), members in groups.items():
                series.setdefault(name, []).append((k, sum(getattr(r, attr) for r in members) / len(members)))
            path = out_dir / f"{fig}.svg"
            path.write_text(svg_line_chart(series, fig, label))
            written.append(path)
    return written
