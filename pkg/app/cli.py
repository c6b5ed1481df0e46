"""Command-line entry point: trial, batch and grid subcommands."""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from app.core.config import dump_run_config, load_run_config, settings
from app.core.exceptions import ConfigError, ExportError, InvalidScenarioError, PivotSimError
from app.core.logging import configure_logging
from app.schemas.box import PivotType
from app.schemas.control import MethodId
from app.schemas.run_config import RunConfig
from app.services.batch_service import BatchService, aggregate_overall
from app.services.trial_service import TrialService
from app.utils.export import export_results, export_summary, export_traces, format_table


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="YAML experiment file (default: $PIVOT_CONFIG or config/default.yaml)")
    common.add_argument("--seed", type=int, default=None, help="master seed")
    common.add_argument("--repeats", type=int, default=None, help="trials per grid cell")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--method", nargs="+", default=None, choices=[m.value for m in MethodId])
    common.add_argument("--box", nargs="+", default=None, help="box names from the config")
    common.add_argument("--noise", nargs="+", type=float, default=None, help="base-dimension noise in m")
    common.add_argument("--pivot", nargs="+", default=None, choices=[p.value for p in PivotType])
    common.add_argument("--direction", type=int, choices=[1, -1], default=None)
    common.add_argument("--parallel", type=int, default=None, help="worker processes")
    common.add_argument("--no-traces", action="store_true", help="skip per-trial trace files")
    common.add_argument("--log-level", default=None)

    parser = argparse.ArgumentParser(prog="pivotsim", description="Quasi-static box pivoting simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("trial", parents=[common], help="run one scenario and write its trace")
    sub.add_parser("batch", parents=[common], help="run the full grid and write summaries")
    sub.add_parser("grid", parents=[common], help="list planned scenarios without running them")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """File, then environment, then flags."""
    path = args.config or settings.config
    if args.config is None and not Path(path).exists():
        path = None
    overrides = {
        "seed": args.seed,
        "repeats": args.repeats,
        "output_dir": args.out,
        "methods": args.method,
        "noise": args.noise,
        "pivots": args.pivot,
        "direction": args.direction,
        "parallel": args.parallel,
        "export_traces": False if args.no_traces else None,
    }
    config = load_run_config(path, overrides)
    if args.box:
        unknown = [name for name in args.box if name not in {b.name for b in config.boxes}]
        if unknown:
            raise InvalidScenarioError(f"unknown box name(s): {', '.join(unknown)}")
        config = config.model_copy(update={"boxes": [config.box(name) for name in args.box]})
    return config


def cmd_trial(config: RunConfig, out: Path) -> int:
    single = config.model_copy(
        update={
            "repeats": 1,
            "methods": config.methods[:1],
            "boxes": config.boxes[:1],
            "pivots": [PivotType.LONG_TO_SHORT] if PivotType.LONG_TO_SHORT in config.pivots else config.pivots[:1],
            "noise": config.noise[:1],
        }
    )
    scenarios = BatchService.build_grid(single)
    if not scenarios:
        raise InvalidScenarioError("no scenario matches the selection (pick_place runs without noise only)")
    scenario = scenarios[0]
    result = TrialService.run_method(scenario.method, scenario, config.simulation)

    print(
        f"method={result.method} box={result.box} pivot={result.pivot} noise={result.noise:g} "
        f"seed={result.seed} success={str(result.success).lower()} lifted={str(result.lifted).lower()} "
        f"slipped_off={str(result.slipped_off).lower()} time={result.time:.2f}s work={result.work:.3f}J"
        + (f" reason={result.failure_reason}" if result.failure_reason else "")
    )
    (path,) = export_traces([result], out)
    print(f"trace: {path}")
    return EXIT_OK


def cmd_batch(config: RunConfig, out: Path) -> int:
    scenarios = BatchService.build_grid(config)
    results, rows = BatchService.run_batch(scenarios, config.simulation, config.parallel, progress=True)
    overall = aggregate_overall(results)

    export_summary(rows, out, "summary")
    export_summary(overall, out, "overall")
    export_results(results, out)
    if config.export_traces:
        export_traces(results, out)

    print(format_table(rows))
    print()
    print(format_table(overall))
    return EXIT_OK


def cmd_grid(config: RunConfig) -> int:
    scenarios = BatchService.build_grid(config)
    for s in scenarios:
        print(f"{s.box.name:<8}{s.pivot_type.value:<15}{s.base_noise:>6.3f}  {s.method.value:<14}r{s.repeat:02d}  seed={s.seed}")
    print(f"{len(scenarios)} planned trials")
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse has already printed its usage message; --help exits 0
        return EXIT_OK if not exc.code else EXIT_CONFIG
    configure_logging(args.log_level or settings.log_level)

    try:
        config = resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out = Path(config.output_dir)
    try:
        if args.command == "grid":
            return cmd_grid(config)
        out.mkdir(parents=True, exist_ok=True)
        dump_run_config(config, out / "effective_config.yaml")
        if args.command == "trial":
            return cmd_trial(config, out)
        return cmd_batch(config, out)
    except InvalidScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (PivotSimError, ExportError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
