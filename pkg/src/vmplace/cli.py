"""Experiment runner.

Subcommands: static (one-shot placement), dynamic (trace-driven placement
with migrations), compare (several strategies on identical scenarios) and
gen-scenario (dump a reusable instance). Reports are CSV files plus rendered
figures; rerunning with the same arguments reproduces the CSVs byte for byte
(wall-clock timings go to a separate timings.csv).

Exit codes: 0 success, 2 configuration error, 3 infeasible instance.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from random import Random
from statistics import mean

from . import baselines, figures, migration, workload
from .errors import InfeasibleError, ScenarioError, TraceError, VmplaceError
from .model import Datacenter
from .objectives import evaluate
from .reporting import (
    EPOCH_COLUMNS,
    STATIC_COLUMNS,
    config_digest,
    improvement_pct,
    static_summary_row,
    write_csv,
)
from .woga import WogaParams, optimize

STRATEGIES = ("woga", "ga", "woa", "first-fit", "best-fit", "random-fit")


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs; the seed list is seed..seed+repeat-1."""

    strategy: str = "woga"
    n_vms: int = 100
    n_servers: int = 60
    n_users: int = 40
    seed: int = 1
    repeat: int = 25
    gmax: int = 100
    pop: int = 20
    stall: int = 15
    mutation_rate: float = 0.3
    scenario: str | None = None
    trace: str | None = None
    epochs: int = 50
    low_watermark: float = 0.2
    high_watermark: float = 0.9
    out: str = "runs"
    render: bool = True

    def __post_init__(self):
        if self.repeat < 1:
            raise ScenarioError("repeat must be at least 1")
        if self.strategy not in STRATEGIES:
            raise ScenarioError(f"unknown strategy {self.strategy!r}")

    @property
    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.repeat)]

    def params(self, seed: int) -> WogaParams:
        return WogaParams(
            population_size=self.pop,
            max_iterations=self.gmax,
            stall_limit=self.stall,
            mutation_rate=self.mutation_rate,
            seed=seed,
        )

    def digest(self) -> str:
        payload = dataclasses.asdict(self)
        payload.pop("out")
        payload.pop("render")
        if self.scenario:
            payload["scenario_content"] = Path(self.scenario).read_text()
        if self.trace:
            payload["trace_content"] = Path(self.trace).read_text()
        return config_digest(payload)


def _datacenter_for(config: RunConfig, seed: int) -> Datacenter:
    if config.scenario:
        return workload.load_scenario(config.scenario)
    return workload.generate_scenario(
        config.n_vms, config.n_servers, config.n_users, Random(seed)
    )


def _run_strategy(config: RunConfig, dc: Datacenter, seed: int):
    """Returns (objectives, active_servers, history, front_objectives)."""
    name = config.strategy
    if name in ("woga", "ga", "woa"):
        params = config.params(seed)
        if name == "woga":
            front = optimize(dc, params)
        elif name == "ga":
            front = baselines.ga_only(dc, params)
        else:
            front = baselines.woa_only(dc, params)
        alloc, obj = front.best()
        return obj, len(alloc.active_servers(dc)), front.history, [o for _, o in front.solutions]
    if name == "first-fit":
        alloc = baselines.first_fit(dc)
    elif name == "best-fit":
        alloc = baselines.best_fit(dc)
    else:
        alloc = baselines.random_fit(dc, Random(seed))
    obj = evaluate(alloc, dc)
    return obj, len(alloc.active_servers(dc)), None, [obj]


def run_static(config: RunConfig) -> dict:
    """Static placement experiment over the configured seed list."""
    out = Path(config.out)
    digest = config.digest()
    rows, front_rows, conv_rows, timing_rows = [], [], [], []
    histories = {}
    for seed in config.seeds:
        dc = _datacenter_for(config, seed)
        started = time.perf_counter()
        obj, active, history, front = _run_strategy(config, dc, seed)
        timing_rows.append((seed, time.perf_counter() - started))
        rows.append((seed, obj.ru, obj.phi, obj.theta, obj.pw, active))
        front_rows.extend((seed, o.ru, o.phi, o.theta, o.pw) for o in front)
        if history:
            histories[seed] = history
            conv_rows.extend(
                (seed, h.generation, h.best.ru, h.best.phi, h.best.theta,
                 h.best.pw, h.front_size, h.repairs)
                for h in history
            )
    write_csv(out / "per_seed.csv", STATIC_COLUMNS, rows, digest)
    header, summary = static_summary_row(
        config.strategy, config.n_vms, config.n_servers, config.n_users, rows
    )
    write_csv(out / "summary.csv", header, [summary], digest)
    write_csv(
        out / "fronts.csv",
        ("seed", "ru", "conflicting_pct", "comm_cost_pct", "power_w"),
        front_rows,
        digest,
    )
    if conv_rows:
        write_csv(
            out / "convergence.csv",
            ("seed", "generation", "ru", "conflicting_pct", "comm_cost_pct",
             "power_w", "front_size", "repairs"),
            conv_rows,
            digest,
        )
    write_csv(out / "timings.csv", ("seed", "wall_time_s"), timing_rows)
    if config.render:
        if histories:
            figures.render_convergence(histories, out / "convergence.png")
        first_seed = config.seeds[0]
        front_objs = [
            _Row(ru=r[1], phi=r[2], theta=r[3], pw=r[4])
            for r in front_rows
            if r[0] == first_seed
        ]
        figures.render_front(front_objs, out / "front.png")
    return dict(zip(header, summary))


@dataclass(frozen=True)
class _Row:
    ru: float
    phi: float
    theta: float
    pw: float


def run_dynamic(config: RunConfig) -> dict:
    """Trace-driven placement experiment; one trace pass per seed."""
    out = Path(config.out)
    digest = config.digest()
    epoch_rows, summary_rows, timing_rows = [], [], []
    last_reports = None
    for seed in config.seeds:
        dc = _datacenter_for(config, seed)
        if config.trace:
            trace = workload.load_trace(config.trace)
        else:
            trace = workload.generate_trace(dc, config.epochs, Random(f"trace/{seed}"))
        started = time.perf_counter()
        reports = migration.run_dynamic(
            dc,
            trace,
            config.params(seed),
            low_watermark=config.low_watermark,
            high_watermark=config.high_watermark,
        )
        timing_rows.append((seed, time.perf_counter() - started))
        last_reports = reports
        for r in reports:
            epoch_rows.append(
                (seed, r.epoch, r.objectives.ru, r.objectives.phi,
                 r.objectives.theta, r.objectives.pw, r.active_servers,
                 r.migrations, r.migration_cost, r.network_cost,
                 r.activation_cost)
            )
        if reports:
            summary_rows.append(
                (
                    seed,
                    mean(r.objectives.ru for r in reports),
                    mean(r.objectives.phi for r in reports),
                    mean(r.objectives.theta for r in reports),
                    mean(r.objectives.pw for r in reports),
                    mean(r.active_servers for r in reports),
                    sum(r.migrations for r in reports),
                    sum(r.migration_cost for r in reports),
                )
            )
    write_csv(out / "epochs.csv", EPOCH_COLUMNS, epoch_rows, digest)
    summary_header = (
        "seed", "ru_mean", "conflicting_pct_mean", "comm_cost_pct_mean",
        "power_w_mean", "active_servers_mean", "migrations_total",
        "migration_cost_total",
    )
    write_csv(out / "summary.csv", summary_header, summary_rows, digest)
    write_csv(out / "timings.csv", ("seed", "wall_time_s"), timing_rows)
    if config.render and last_reports:
        figures.render_epochs(last_reports, out / "epochs.png")
    return {
        "epochs": len(epoch_rows),
        "summary": [dict(zip(summary_header, row)) for row in summary_rows],
    }


def compare(configs: list[RunConfig]) -> list[dict]:
    """Run every configuration (same scenario seeds, different strategies)
    and emit a side-by-side table with relative improvements."""
    if not configs:
        raise ScenarioError("compare needs at least one configuration")
    out = Path(configs[0].out)
    summaries = []
    for cfg in configs:
        sub = dataclasses.replace(cfg, out=str(out / cfg.strategy))
        summaries.append(run_static(sub))
    header = tuple(summaries[0].keys())
    write_csv(
        out / "combined.csv",
        header,
        [tuple(s[k] for k in header) for s in summaries],
        configs[0].digest(),
    )
    reference = summaries[0]
    improvement_rows = []
    for s in summaries[1:]:
        improvement_rows.append(
            (
                reference["strategy"],
                s["strategy"],
                improvement_pct(reference["ru_mean"], s["ru_mean"], maximize=True),
                improvement_pct(
                    reference["conflicting_pct_mean"], s["conflicting_pct_mean"], maximize=False
                ),
                improvement_pct(
                    reference["comm_cost_pct_mean"], s["comm_cost_pct_mean"], maximize=False
                ),
                improvement_pct(reference["power_w_mean"], s["power_w_mean"], maximize=False),
            )
        )
    write_csv(
        out / "improvements.csv",
        ("reference", "against", "ru_gain_pct", "conflicting_reduction_pct",
         "comm_cost_reduction_pct", "power_reduction_pct"),
        improvement_rows,
        configs[0].digest(),
    )
    if configs[0].render:
        figures.render_compare(summaries, out / "compare.png")
    return summaries


def gen_scenario(config: RunConfig, trace_out: str | None = None) -> Path:
    """Dump a reusable scenario (and optionally a synthetic trace)."""
    dc = workload.generate_scenario(
        config.n_vms, config.n_servers, config.n_users, Random(config.seed)
    )
    out = Path(config.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    workload.dump_scenario(dc, out)
    if trace_out:
        trace = workload.generate_trace(dc, config.epochs, Random(f"trace/{config.seed}"))
        workload.save_trace(trace, trace_out)
    return out


def _add_common(parser: argparse.ArgumentParser, repeat_default: int) -> None:
    parser.add_argument("--vms", type=int, default=100)
    parser.add_argument("--servers", type=int, default=60)
    parser.add_argument("--users", type=int, default=None,
                        help="default: vms * 2 // 5 for static, vms // 5 for dynamic")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--repeat", type=int, default=repeat_default)
    parser.add_argument("--gmax", type=int, default=None)
    parser.add_argument("--pop", type=int, default=20)
    parser.add_argument("--stall", type=int, default=15)
    parser.add_argument("--mutation-rate", type=float, default=0.3)
    parser.add_argument("--scenario", default=None, help="instance JSON to reuse")
    parser.add_argument("--out", default=None)
    parser.add_argument("--no-figures", action="store_true")


def _config_from(args, command: str) -> RunConfig:
    users = args.users
    if users is None:
        users = max(1, args.vms // 5 if command == "dynamic" else args.vms * 2 // 5)
    gmax = args.gmax
    if gmax is None:
        gmax = 15 if command == "dynamic" else 100
    return RunConfig(
        strategy=getattr(args, "strategy", "woga"),
        n_vms=args.vms,
        n_servers=args.servers,
        n_users=users,
        seed=args.seed,
        repeat=args.repeat,
        gmax=gmax,
        pop=args.pop,
        stall=args.stall,
        mutation_rate=args.mutation_rate,
        scenario=args.scenario,
        trace=getattr(args, "trace", None),
        epochs=getattr(args, "epochs", 50),
        low_watermark=getattr(args, "low_watermark", 0.2),
        high_watermark=getattr(args, "high_watermark", 0.9),
        out=args.out or f"runs/{command}",
        render=not args.no_figures,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vmplace",
        description="Multi-objective VM placement experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_static = sub.add_parser("static", help="one-shot placement experiment")
    p_static.add_argument("--strategy", choices=STRATEGIES, default="woga")
    _add_common(p_static, repeat_default=25)

    p_dyn = sub.add_parser("dynamic", help="trace-driven placement experiment")
    p_dyn.add_argument("--strategy", choices=("woga", "ga", "woa"), default="woga")
    p_dyn.add_argument("--trace", default=None, help="utilization trace CSV")
    p_dyn.add_argument("--epochs", type=int, default=50,
                       help="synthetic trace length when --trace is absent")
    p_dyn.add_argument("--low-watermark", type=float, default=0.2)
    p_dyn.add_argument("--high-watermark", type=float, default=0.9)
    _add_common(p_dyn, repeat_default=1)

    p_cmp = sub.add_parser("compare", help="several strategies, identical scenarios")
    p_cmp.add_argument(
        "--strategy",
        default="woga,first-fit,best-fit,random-fit",
        help="comma-separated strategies; first one is the improvement reference",
    )
    _add_common(p_cmp, repeat_default=25)

    p_gen = sub.add_parser("gen-scenario", help="dump a scenario JSON (and trace)")
    p_gen.add_argument("--trace-out", default=None)
    p_gen.add_argument("--epochs", type=int, default=50)
    _add_common(p_gen, repeat_default=1)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "static":
            summary = run_static(_config_from(args, "static"))
            print(f"wrote {args.out or 'runs/static'} "
                  f"(ru_mean={summary['ru_mean']:.4f}, power_w_mean={summary['power_w_mean']:.1f})")
        elif args.command == "dynamic":
            result = run_dynamic(_config_from(args, "dynamic"))
            print(f"wrote {args.out or 'runs/dynamic'} ({result['epochs']} epoch rows)")
        elif args.command == "compare":
            names = [s.strip() for s in args.strategy.split(",") if s.strip()]
            base = _config_from(args, "compare")
            for name in names:
                if name not in STRATEGIES:
                    parser.error(f"unknown strategy {name!r}")
            configs = [dataclasses.replace(base, strategy=name) for name in names]
            compare(configs)
            print(f"wrote {base.out} ({len(names)} strategies)")
        elif args.command == "gen-scenario":
            cfg = _config_from(args, "gen-scenario")
            if args.out is None:
                cfg = dataclasses.replace(cfg, out="scenario.json")
            path = gen_scenario(cfg, trace_out=args.trace_out)
            print(f"wrote {path}")
    except (ScenarioError, TraceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except VmplaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
