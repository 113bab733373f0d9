"""Command-line interface wiring the package into reproducible runs.

Subcommands: predict, simulate, bounds, spacetime, report.  Every
command is a pure function of its inputs and seed: rerunning with the
same arguments reproduces the output files byte for byte.

Exit codes: 0 success, 1 usage or configuration error, 2 domain error
(e.g. enumeration cap exceeded), 3 spacetime validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .classical import (
    EnumerationCapExceeded,
    classical_max_det,
    classical_max_linear,
    strategy_count,
)
from .qubits import ZeroProbabilityBranch
from .scenario import ProbabilityTable, Scenario, probability_table
from .spacetime import Schedule, validate
from .trials import CountTable, InsufficientStatisticsError, RunPlan, bootstrap_report, estimate, sample
from .witness import WitnessReport, dimension_witness, report_from_table

DW_TERMS = (
    ("D_00", 0, 0, 1),
    ("D_01", 0, 1, 1),
    ("D_10", 1, 0, 1),
    ("D_11", 1, 1, -1),
    ("D_20", 2, 0, -1),
)


class ConfigError(Exception):
    """Unusable configuration input (missing file, bad JSON, bad schema)."""


@dataclass
class RunConfig:
    scenario: Scenario | None = None
    plan: RunPlan | None = None
    resamples: int = 10_000
    schedule: Schedule | None = None
    outputs: Path | None = None


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def load_run_config(path: str) -> RunConfig:
    raw = _load_json(path)
    cfg = RunConfig()
    try:
        if "scenario" in raw:
            cfg.scenario = Scenario.from_json_dict(raw["scenario"])
        if "plan" in raw:
            cfg.plan = RunPlan.from_json_dict(raw["plan"])
        if "resamples" in raw:
            cfg.resamples = int(raw["resamples"])
        if "schedule" in raw:
            cfg.schedule = Schedule.from_json_dict(raw["schedule"])
        if "outputs" in raw:
            cfg.outputs = Path(raw["outputs"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"config file {path}: {exc}") from exc
    return cfg


def _apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if getattr(args, "out", None) is not None:
        cfg.outputs = Path(args.out)
    if getattr(args, "resamples", None) is not None:
        cfg.resamples = args.resamples
    if getattr(args, "fair_sampling", None) is not None and cfg.scenario is not None:
        cfg.scenario = Scenario(
            alphas=cfg.scenario.alphas,
            betas=cfg.scenario.betas,
            visibility=cfg.scenario.visibility,
            efficiency=cfg.scenario.efficiency,
            fair_sampling=args.fair_sampling,
        )
    if cfg.plan is not None:
        seed = args.seed if getattr(args, "seed", None) is not None else cfg.plan.seed
        trials = (
            args.trials
            if getattr(args, "trials", None) is not None
            else cfg.plan.trials_per_setting
        )
        cfg.plan = RunPlan(
            trials_per_setting=trials, seed=seed, setting_order=cfg.plan.setting_order
        )
    return cfg


def _outdir(cfg_outputs: Path | None) -> Path:
    out = cfg_outputs if cfg_outputs is not None else Path("out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _write_table_csv(path: Path, table: ProbabilityTable) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["i", "j", "p_e", "p_d", "p_none"])
        for i in range(table.n_prep):
            for j in range(table.n_meas):
                writer.writerow(
                    [i, j, repr(table.p_e[i, j]), repr(table.p_d[i, j]), repr(table.p_none[i, j])]
                )


def _write_dw_terms_csv(path: Path, table: ProbabilityTable) -> None:
    d = table.d_values()
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["term", "i", "j", "sign", "value"])
        for name, i, j, sign in DW_TERMS:
            writer.writerow([name, i, j, sign, repr(float(d[i, j]))])


def _write_witness(out: Path, report: WitnessReport) -> None:
    _write_text(out / "witness.json", report.to_json())
    _write_text(out / "witness.csv", report.to_csv_row())


def _print_report(report: WitnessReport) -> None:
    if report.det_abs is not None:
        line = f"|det W| = {report.det_abs:.6g}"
        if report.sigma_det is not None:
            line += f" ({report.sigma_det:.1f} sigma above 0)"
        print(line)
    line = f"I_DW = {report.i_dw:.6g}, R = {report.r:.6g}"
    if report.sigma_idw is not None:
        line += f" ({report.sigma_idw:.1f} sigma above 3)"
    print(line)


def _require(cfg_value, what: str):
    if cfg_value is None:
        raise ConfigError(f"this command needs a {what} section in the config file")
    return cfg_value


def _cmd_predict(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_run_config(args.config), args)
    scenario = _require(cfg.scenario, "scenario")
    out = _outdir(cfg.outputs)
    table = probability_table(scenario)
    report = report_from_table(table)
    _write_text(
        out / "scenario.json",
        json.dumps(scenario.to_json_dict(), indent=2, sort_keys=True) + "\n",
    )
    _write_table_csv(out / "probabilities.csv", table)
    _write_dw_terms_csv(out / "dw_terms.csv", table)
    _write_witness(out, report)
    _print_report(report)
    print(f"wrote {out}/probabilities.csv, dw_terms.csv, witness.json, witness.csv")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(load_run_config(args.config), args)
    scenario = _require(cfg.scenario, "scenario")
    plan = _require(cfg.plan, "plan")
    out = _outdir(cfg.outputs)
    table = probability_table(scenario)
    counts = sample(table, plan)
    estimated = estimate(counts, scenario.fair_sampling)
    report = bootstrap_report(counts, cfg.resamples, plan.seed, scenario.fair_sampling)
    counts.to_csv(out / "counts.csv")
    _write_table_csv(out / "estimated.csv", estimated)
    _write_witness(out, report)
    _print_report(report)
    print(f"wrote {out}/counts.csv, estimated.csv, witness.json, witness.csv")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    try:
        counts = CountTable.from_csv(args.counts)
    except FileNotFoundError as exc:
        raise ConfigError(f"counts file not found: {args.counts}") from exc
    except ValueError as exc:
        raise ConfigError(f"counts file {args.counts}: {exc}") from exc
    out = _outdir(Path(args.out) if args.out else None)
    fair_sampling = args.fair_sampling if args.fair_sampling is not None else True
    estimated = estimate(counts, fair_sampling)
    report = bootstrap_report(counts, args.resamples or 10_000, args.seed or 0, fair_sampling)
    _write_table_csv(out / "estimated.csv", estimated)
    _write_witness(out, report)
    _print_report(report)
    print(f"wrote {out}/estimated.csv, witness.json, witness.csv")
    return 0


def _cmd_bounds(args: argparse.Namespace) -> int:
    out = _outdir(Path(args.out) if args.out else None)
    seed = args.seed or 0
    if args.witness == "idw":
        value, strategy = classical_max_linear(dimension_witness, args.dimension, 3, 2)
        payload = {
            "witness": "idw",
            "dimension": args.dimension,
            "value": value,
            "n_strategies": strategy_count(args.dimension, 3, 2),
            "strategy": strategy.to_json_dict(),
        }
        print(f"classical I_DW bound (d={args.dimension}): {value:.6g}")
    else:
        result = classical_max_det(
            args.dimension, restarts=args.restarts, seed=seed
        )
        payload = {"witness": "det", "dimension": args.dimension, **result.to_json_dict()}
        print(
            f"classical |det W| bound (d={args.dimension}): deterministic max "
            f"{result.deterministic_max:.3g}, mixture search max {result.mixture_max:.3g} "
            f"over {result.restarts} restarts"
        )
    _write_text(out / "bounds.json", json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}/bounds.json")
    return 0


def _cmd_spacetime(args: argparse.Namespace) -> int:
    try:
        schedule = Schedule.from_json_file(args.schedule)
    except FileNotFoundError as exc:
        raise ConfigError(f"schedule file not found: {args.schedule}") from exc
    except (json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"schedule file {args.schedule}: {exc}") from exc
    report = validate(schedule)
    for cond in report.conditions:
        status = "PASS" if cond.passed else "FAIL"
        print(f"{cond.name} {status}: {cond.description} ({cond.detail})")
    if args.out:
        out = _outdir(Path(args.out))
        _write_text(
            out / "spacetime.json",
            json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n",
        )
        print(f"wrote {out}/spacetime.json")
    return 0 if report.all_passed else 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="pamsim",
        description="Prepare-and-measure experiment simulator and analyzer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="run configuration JSON")
        p.add_argument("--seed", type=int, help="override the RNG seed")
        p.add_argument("--resamples", type=int, help="bootstrap resample count")
        p.add_argument(
            "--fair-sampling",
            type=_parse_bool,
            default=None,
            metavar="BOOL",
            help="override postselection on detected events (true/false)",
        )
        p.add_argument("--out", help="output directory")

    p = sub.add_parser("predict", help="analytic probabilities and witness report")
    common(p)
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("simulate", help="finite sampled run with bootstrap errors")
    common(p)
    p.add_argument("--trials", type=int, help="override trials per setting")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("report", help="analyze an existing counts CSV")
    p.add_argument("--counts", required=True, help="counts CSV (i,j,n_e,n_d,n_none)")
    common(p, config=False)
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("bounds", help="classical witness bounds by enumeration/search")
    p.add_argument("--witness", choices=("idw", "det"), required=True)
    p.add_argument("--dimension", "-d", type=int, default=2, help="message dimension")
    p.add_argument("--restarts", type=int, default=10_000, help="mixture-search restarts")
    p.add_argument("--seed", type=int, help="mixture-search seed")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("spacetime", help="validate an event schedule's causal geometry")
    p.add_argument("schedule", help="schedule JSON file")
    p.add_argument("--out", help="output directory")
    p.set_defaults(func=_cmd_spacetime)

    return parser


def _parse_bool(text: str) -> bool:
    lower = text.strip().lower()
    if lower in ("true", "1", "yes", "on"):
        return True
    if lower in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (
        EnumerationCapExceeded,
        InsufficientStatisticsError,
        ZeroProbabilityBranch,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
