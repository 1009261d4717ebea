"""``gridtariff`` command-line interface.

Exit codes: 0 ok, 1 usage error, 2 data/schema error, 3 infeasible scenario,
4 I/O failure. Errors are also written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from . import MODEL_REVISION, __version__
from .classification import DesignKind, DesignSpec
from .dataset import PROVENANCE_FILE, load_dataset_dir, write_dataset
from .errors import (
    DataError,
    GridTariffError,
    InfeasiblePeakRecovery,
    InvalidConfig,
    IoFailure,
    MissingThreshold,
    ZeroConsumption,
)
from .oracle import check_dataset
from .reporting import FIGURE_GROUPINGS, GroupingSpec, Weighting, emit_reports, scenario_echo, write_group_report
from .scenarios import ScenarioFailure, ScenarioSpec, default_jobs, load_sweep_file, run_scenario, sweep
from .solver import SolverConfig
from .synthgen import GeneratorConfig, generate_dataset

log = logging.getLogger("gridtariff")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with status 2
        raise UsageError(message)


def _fail(code: int, kind: str, message: str) -> int:
    print(json.dumps({"error": kind, "message": message, "exit_code": code}), file=sys.stderr)
    return code


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (UsageError, InvalidConfig, MissingThreshold)):
        return EXIT_USAGE
    if isinstance(exc, (InfeasiblePeakRecovery, ZeroConsumption)):
        return EXIT_INFEASIBLE
    if isinstance(exc, (IoFailure, OSError)):
        return EXIT_IO
    if isinstance(exc, (DataError, GridTariffError)):
        return EXIT_DATA
    return EXIT_DATA


def _groupings(raw: str | None, unweighted: bool) -> list[GroupingSpec]:
    weighting = Weighting.UNWEIGHTED if unweighted else Weighting.HOUSEHOLD_COUNT
    if raw is None:
        return [GroupingSpec(dims, weighting) for dims in FIGURE_GROUPINGS]
    specs = []
    for chunk in raw.split(";"):
        dims = tuple(d.strip() for d in chunk.split(",") if d.strip())
        specs.append(GroupingSpec(dims, weighting))
    return specs


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gridtariff", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version", version=f"gridtariff {__version__} (tariff model revision {MODEL_REVISION})"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a synthetic dataset")
    gen.add_argument("--seed", type=int, required=True)
    gen.add_argument("--out", type=Path, required=True)
    gen.add_argument("--config", type=Path, help="JSON file with generator options")

    run = sub.add_parser("run", help="evaluate one tariff design")
    run.add_argument("--data", type=Path, required=True)
    run.add_argument("--design", choices=["flat", "tou", "ipp", "dcpp", "dcipp"], required=True)
    run.add_argument("--threshold", type=float, help="kWh per hour (ipp, dcipp)")
    run.add_argument(
        "--trigger", type=float, help="fraction of top load hours, e.g. 0.05 for the top 5%% (dcpp, dcipp)"
    )
    run.add_argument("--frecov", type=float, default=0.95, help="base recovery factor (default 0.95)")
    run.add_argument("--gt-base", type=float, default=18.25, help="flat reference rate, Øre/kWh (default 18.25)")
    run.add_argument("--gt-flat", type=float, help="baseline rate for the revenue target (default: --gt-base)")
    run.add_argument("--out", type=Path, required=True)
    run.add_argument("--group-by", help="e.g. 'dwelling_type,area_band;ev,hp'")
    run.add_argument("--unweighted", action="store_true")

    sw = sub.add_parser("sweep", help="evaluate a grid of scenarios")
    sw.add_argument("--data", type=Path, required=True)
    sw.add_argument("--spec", type=Path, required=True, help="sweep specification JSON")
    sw.add_argument("--out", type=Path, required=True)
    sw.add_argument("--jobs", type=int, default=None, help="worker processes (default: all cores)")
    sw.add_argument("--group-by")
    sw.add_argument("--unweighted", action="store_true")

    rep = sub.add_parser("report", help="group averages from an emitted run")
    rep.add_argument("--results", type=Path, required=True)
    rep.add_argument("--group-by", required=True, help="comma-separated dimensions")
    rep.add_argument("--unweighted", action="store_true")
    rep.add_argument("--out", type=Path, help="output file (default: RESULTS/group_averages.csv)")

    orc = sub.add_parser("oracle-check", help="compare the engine with the brute-force oracle")
    orc.add_argument("--data", type=Path, help="dataset directory (default: bundled 4-hour toy)")
    return parser


def _cmd_generate(args: argparse.Namespace) -> int:
    raw: dict[str, Any] = {}
    if args.config is not None:
        try:
            raw = json.loads(args.config.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise IoFailure(f"missing config file {args.config}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"{args.config}: not valid JSON ({exc})") from exc
    raw["seed"] = args.seed
    cfg = GeneratorConfig.from_dict(raw)
    d = generate_dataset(cfg)
    try:
        write_dataset(d, args.out)
        provenance = {"engine_version": __version__, "generator": "gridtariff.synthgen", "config": cfg.to_dict()}
        (args.out / PROVENANCE_FILE).write_text(
            json.dumps(provenance, indent=2, sort_keys=True, ensure_ascii=False) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(str(exc)) from exc
    print(f"wrote {len(d.categories)} categories x {d.hours} hours to {args.out}")
    return EXIT_OK


def _design_from_args(args: argparse.Namespace) -> DesignSpec:
    kind = DesignKind.parse(args.design)
    wants_threshold = kind in (DesignKind.IPP, DesignKind.DCIPP)
    wants_trigger = kind in (DesignKind.DCPP, DesignKind.DCIPP)
    if wants_threshold and args.threshold is None:
        raise UsageError(f"--design {args.design} requires --threshold")
    if wants_trigger and args.trigger is None:
        raise UsageError(f"--design {args.design} requires --trigger")
    if not wants_threshold and args.threshold is not None:
        raise UsageError(f"--threshold does not apply to --design {args.design}")
    if not wants_trigger and args.trigger is not None:
        raise UsageError(f"--trigger does not apply to --design {args.design}")
    return DesignSpec(kind, args.threshold, args.trigger)


def _cmd_run(args: argparse.Namespace) -> int:
    design = _design_from_args(args)
    spec = ScenarioSpec(design.name, design, SolverConfig(args.gt_base, args.frecov), args.gt_flat)
    d = load_dataset_dir(args.data)
    groupings = _groupings(args.group_by, args.unweighted)
    try:
        result = run_scenario(d, spec)
    except (InfeasiblePeakRecovery, ZeroConsumption) as exc:
        emit_reports([ScenarioFailure(spec, type(exc).__name__, str(exc))], groupings, args.out, d,
                     config={"command": "run", "scenario": scenario_echo(spec)})
        raise
    emit_reports([result], groupings, args.out, d, config={"command": "run", "scenario": scenario_echo(spec)})
    print(f"{spec.name},{result.rates.base_rate!r},{result.rates.peak_rate!r}")
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace) -> int:
    specs = load_sweep_file(args.spec)
    d = load_dataset_dir(args.data)
    jobs = args.jobs if args.jobs is not None else default_jobs()
    results = sweep(d, specs, jobs)
    groupings = _groupings(args.group_by, args.unweighted)
    # the job count is deliberately not echoed: outputs must not depend on it
    emit_reports(results, groupings, args.out, d, config={"command": "sweep", "spec_file": args.spec.name})
    failed = [r for r in results if isinstance(r, ScenarioFailure)]
    print(f"{len(results) - len(failed)} scenarios solved, {len(failed)} failed -> {args.out}")
    if failed:
        return _fail(EXIT_INFEASIBLE, "ScenarioFailures", "; ".join(f"{f.spec.name}: {f.message}" for f in failed))
    return EXIT_OK


def _cmd_report(args: argparse.Namespace) -> int:
    weighting = Weighting.UNWEIGHTED if args.unweighted else Weighting.HOUSEHOLD_COUNT
    dims = tuple(d.strip() for d in args.group_by.split(",") if d.strip())
    path = write_group_report(args.results, GroupingSpec(dims, weighting), args.out)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    if args.data is None:
        with resources.as_file(resources.files("gridtariff") / "data" / "toy") as toy:
            d = load_dataset_dir(toy)
    else:
        d = load_dataset_dir(args.data)
    try:
        problems = check_dataset(d)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    for p in problems:
        print(p)
    if problems:
        return _fail(EXIT_DATA, "OracleMismatch", f"{len(problems)} mismatches")
    print(f"oracle check passed ({len(d.categories)} categories x {d.hours} hours)")
    return EXIT_OK


COMMANDS = {
    "generate": _cmd_generate,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "report": _cmd_report,
    "oracle-check": _cmd_oracle_check,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail(EXIT_USAGE, "UsageError", str(exc))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, GridTariffError, OSError) as exc:
        return _fail(_exit_code(exc), type(exc).__name__, str(exc))


if __name__ == "__main__":
    raise SystemExit(main())
