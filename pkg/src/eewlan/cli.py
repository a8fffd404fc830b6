"""Command line: gen, solve, run, sweep and oracle.

Exit status: 0 on success, 1 for usage or configuration errors, 2 when a
computed result breaks an invariant.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .channel import Deployment, GainMatrices, RadioConfig, build_gains
from .errors import DomainError, InvariantViolation
from .harness import SOLUTIONS, ExperimentConfig, compute_metrics, deployment_for, run_solution, sweep, write_outputs
from .power import LinkSystem, check_constraints
from .rates import McsTable
from .solver import SolverConfig, brute_force, ee_objective, solve


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(message)


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _parser() -> _Parser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="experiment TOML file")
    common.add_argument("--seed", type=_int_list, help="client seed (comma list for sweep)")
    common.add_argument("--aps", type=_int_list, help="AP count (comma list for sweep)")
    common.add_argument("--alpha", type=float)
    common.add_argument("--slots", type=int)
    common.add_argument("--clients", type=int, help="number of clients")
    common.add_argument("--out", help="output directory")

    parser = _Parser(prog="eewlan", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("gen", parents=[common], help="write a deployment TOML")
    p = sub.add_parser("solve", parents=[common], help="static optimum of log u_hat")
    p.add_argument("--deployment", help="deployment TOML instead of generating one")
    p = sub.add_parser("run", parents=[common], help="dynamic run of one solution")
    p.add_argument("--solution", choices=SOLUTIONS, default="ee")
    p.add_argument("--deployment", help="deployment TOML instead of generating one")
    p = sub.add_parser("sweep", parents=[common], help="solutions x AP counts x seeds")
    p.add_argument("--workers", type=int, help="worker processes (0 = one per CPU)")
    p.add_argument("--svg", action="store_true", help="also write SVG charts")
    p = sub.add_parser("oracle", parents=[common], help="cross-check solve against brute force")
    p.add_argument("--instances", type=int, default=200)
    return parser


def _config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    updates = {}
    if args.alpha is not None:
        updates["alpha"] = args.alpha
    if args.slots is not None:
        updates["total_slots"] = args.slots
    if args.clients is not None:
        updates["n_clients"] = args.clients
    if args.aps is not None:
        updates["ap_counts"] = args.aps
    if args.seed is not None:
        updates["seeds"] = args.seed
    if args.out is not None:
        updates["output_dir"] = args.out
    return replace(cfg, **updates) if updates else cfg


def _single(values: tuple[int, ...], name: str) -> int:
    if len(values) != 1:
        raise UsageError(f"--{name} takes a single value for this command")
    return values[0]


def _deployment(args, cfg: ExperimentConfig) -> Deployment:
    if getattr(args, "deployment", None):
        return Deployment.load(args.deployment)
    return deployment_for(cfg, _single(cfg.ap_counts, "aps"), _single(cfg.seeds, "seed"))


def _fmt(values: np.ndarray) -> str:
    return "[" + ", ".join(f"{v:.6g}" for v in values) + "]"


def _cmd_gen(args, cfg: ExperimentConfig) -> None:
    dep = _deployment(args, cfg)
    if args.out:
        path = Path(args.out) / "deployment.toml"
        path.parent.mkdir(parents=True, exist_ok=True)
        dep.save(path)
        print(path)
    else:
        sys.stdout.write(dep.to_toml())


def _cmd_solve(args, cfg: ExperimentConfig) -> None:
    dep = _deployment(args, cfg)
    gains = build_gains(dep, cfg.radio)
    system = LinkSystem(gains, cfg.radio, cfg.mcs_table, dep)
    sol = solve(ee_objective(cfg.alpha, system), system, cfg.solver)
    report = check_constraints(sol.rates, sol.powers, gains, cfg.radio, dep)
    if not report.feasible:
        raise InvariantViolation(f"solver returned an infeasible point ({report.violated.value})")
    print(f"status {sol.status}")
    print(f"rates_mbps {_fmt(sol.rates)}")
    print(f"powers_mw {_fmt(sol.powers)}")
    print(f"log_u_hat {sol.objective:.9g}")
    print(f"bound_gap {sol.bound_gap:.3g}")
    print(f"iterations {sol.iterations}")


def _cmd_run(args, cfg: ExperimentConfig) -> None:
    dep = _deployment(args, cfg)
    seed = _single(cfg.seeds, "seed")
    ts = run_solution(args.solution, dep, cfg, seed)
    row = compute_metrics(ts, cfg.radio, cfg.alpha, args.solution, len(dep.ap_positions), seed)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"timeseries_{args.solution}.csv").write_text(ts.to_csv())
    print(",".join(("solution", "ap_count", "seed", "mean_mbps", "geomean_mbps", "energy_mws", "floor_mws", "u_hat")))
    print(",".join(row.csv_fields()))


def _cmd_sweep(args, cfg: ExperimentConfig) -> None:
    rows = sweep(cfg, args.workers)
    for path in write_outputs(rows, cfg.output_dir, svg=args.svg or cfg.svg):
        print(path)


def random_instance(rng: np.random.Generator, n: int, steps: int, config: RadioConfig) -> tuple[GainMatrices, McsTable]:
    """Small random link system: direct gains near 1e-6, cross gains spread over decades."""
    a = 10.0 ** rng.uniform(-9.0, -6.0, size=(n, n))
    np.fill_diagonal(a, 10.0 ** rng.uniform(-7.0, -5.5, size=n))
    b = 10.0 ** rng.uniform(-13.0, -10.0, size=(n, n))
    np.fill_diagonal(b, 0.0)
    noise = np.full(n, 1.6e-9)
    thresholds = np.sort(rng.choice(np.arange(1, 40), size=steps, replace=False)).astype(float)
    rates = 36.0 * np.arange(1, steps + 1)
    table = McsTable.from_db_steps(zip(thresholds, rates))
    return GainMatrices(a, b, noise, tx_ap=np.arange(n)), table


def oracle_check(instances: int, seed: int = 0, alpha: float = 1.0, config: RadioConfig = RadioConfig()) -> int:
    """Number of random small instances where solve() and brute_force() disagree."""
    rng = np.random.default_rng(seed)
    mismatches = 0
    for _ in range(instances):
        n = int(rng.integers(1, 4))
        gains, table = random_instance(rng, n, int(rng.integers(1, 4)), config)
        system = LinkSystem(gains, config, table)
        objective = ee_objective(alpha, system)
        fast = solve(objective, system, SolverConfig())
        exact = brute_force(objective, system)
        if not _close(fast.objective, exact.objective, 1e-6):
            mismatches += 1
    return mismatches


def _close(x: float, y: float, rtol: float) -> bool:
    if x == y:
        return True
    return abs(x - y) <= rtol * abs(y)


def _cmd_oracle(args, cfg: ExperimentConfig) -> None:
    seed = cfg.seeds[0] if args.seed is not None else 0
    bad = oracle_check(args.instances, seed, cfg.alpha, cfg.radio)
    print(f"instances {args.instances} mismatches {bad}")
    if bad:
        raise InvariantViolation(f"{bad} oracle mismatches")


COMMANDS = {"gen": _cmd_gen, "solve": _cmd_solve, "run": _cmd_run, "sweep": _cmd_sweep, "oracle": _cmd_oracle}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = _parser().parse_args(argv)
        cfg = _config(args)
        COMMANDS[args.command](args, cfg)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 2
    except (UsageError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
