"""Command line entry point.

Exit codes: 0 success, 1 invalid configuration or arguments, 2 runtime
failure (solver error or a failed self-check).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..errors import ConfigurationError, SolverError
from .config import RunConfig
from .io import write_json
from .selfcheck import format_results, run_checks
from .studies import entropy_study_table, run_convergence, run_entropy_study, run_simulation, write_entropy_study

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("exnerdg")


def _add_config_args(p: argparse.ArgumentParser):
    p.add_argument("config", type=Path, help="INI run configuration")
    p.add_argument(
        "--override", "-s", "--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
        help="override one configuration value (repeatable)",
    )
    p.add_argument("-o", "--output-dir", type=Path, default=None, help="output directory (default: [output] directory)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="exnerdg", description="Entropy stable DGSEM for Saint-Venant-Exner in 1D")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one simulation, writing snapshots and the entropy series")
    _add_config_args(p)
    p = sub.add_parser("convergence", help="manufactured-solution convergence study")
    _add_config_args(p)
    p = sub.add_parser("entropy-study", help="entropy rate and rhs cost per EC fluctuation")
    _add_config_args(p)
    sub.add_parser("check", help="fast self-test of operators and fluctuations")
    return parser


def _out_dir(args, cfg: RunConfig) -> Path:
    return Path(args.output_dir or cfg.output.directory)


def _solve(args) -> int:
    cfg = RunConfig.from_file(args.config, args.overrides)
    summary = run_simulation(cfg, _out_dir(args, cfg))
    print(f"t_end={summary['t_end']}  steps={summary['steps']}  wall={summary['wall_seconds']:.2f}s")
    print(f"entropy {summary['total_entropy_initial']:.12e} -> {summary['total_entropy_final']:.12e}")
    if "l2_error" in summary:
        print("L2 error (h, hv, b):", " ".join(f"{e:.3e}" for e in summary["l2_error"]))
    return EXIT_OK


def _convergence(args) -> int:
    cfg = RunConfig.from_file(args.config, args.overrides)
    report = run_convergence(cfg)
    print(report.table())
    path = write_json(_out_dir(args, cfg) / f"{cfg.output.prefix}convergence.json", report.to_json())
    print(f"wrote {path}")
    if report.failure:
        print(f"error: {report.failure}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def _entropy_study(args) -> int:
    cfg = RunConfig.from_file(args.config, args.overrides)
    rows = run_entropy_study(cfg)
    print(entropy_study_table(rows))
    path = write_entropy_study(rows, _out_dir(args, cfg) / f"{cfg.output.prefix}entropy_study.csv")
    print(f"wrote {path}")
    return EXIT_RUNTIME if any(r.failure for r in rows) else EXIT_OK


def _check(args) -> int:
    results = run_checks()
    print(format_results(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_RUNTIME


_COMMANDS = {"solve": _solve, "convergence": _convergence, "entropy-study": _entropy_study, "check": _check}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (ConfigurationError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
