"""Command-line interface: forward, synth, invert, campaign and report."""

import argparse
import csv
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from . import __version__
from .config import RunConfig, load_run_config, resolve_path, resolve_workers
from .constants import (
    EXIT_ERROR,
    EXIT_INTERRUPTED,
    EXIT_MAX_ITERATIONS,
    EXIT_MODEL_FAILURE,
    EXIT_MU_BLOWUP,
    EXIT_OK,
)
from .errors import BioinverseError, ConfigError
from .geometry import write_curve_csv
from .lmsolver import LMResult, LMStatus, read_trace_csv, run, write_trace_csv
from .models import ForwardModel
from .synth import (
    CampaignRun,
    observation_residual,
    observations_for_sigmas,
    read_observation_json,
    run_bootstrap,
    run_campaign,
    write_observation_json,
    write_summary_csv,
)

logger = logging.getLogger(__name__)

TOOL_NAME = "bioinverse"

STATUS_EXIT_CODES: Dict[LMStatus, int] = {
    "converged_grad": EXIT_OK,
    "converged_res": EXIT_OK,
    "mu_blowup": EXIT_MU_BLOWUP,
    "model_failure": EXIT_MODEL_FAILURE,
    "max_iterations": EXIT_MAX_ITERATIONS,
}

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def create_parser() -> argparse.ArgumentParser:
    """Create argument parser for CLI."""
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Inverse analysis of biofilm interface deformation",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Deformed interface at given parameters
  bioinverse forward --config configs/bump_noise.json --theta 0.3,0.1

  # Synthetic observations for every noise level of the config
  bioinverse synth --config configs/bump_noise.json --out runs/bump

  # Identify parameters from one observation
  bioinverse invert --config configs/bump_noise.json \\
      --observation runs/bump/observation_00.json --out runs/bump/invert

  # Noise-sensitivity campaign (resumable)
  bioinverse campaign --config configs/bump_noise.json --out runs/bump-campaign

  # Plot-ready tables from traces
  bioinverse report runs/bump-campaign
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--verbose",
        "-v",
        action="count",
        default=0,
        help="Log progress (-v) or per-evaluation detail (-vv)",
    )
    parser.add_argument("--log-file", type=str, help="Write log records to this file")

    commands = parser.add_subparsers(dest="command", required=True)

    forward = commands.add_parser("forward", help="Evaluate the model and write the interface")
    forward.add_argument("--config", "-c", required=True, help="Run configuration JSON")
    forward.add_argument("--out", "-o", help="Output directory")
    forward.add_argument("--theta", help="Comma-separated parameters (default: theta_true)")
    forward.set_defaults(handler=cmd_forward)

    synth = commands.add_parser("synth", help="Generate synthetic observations")
    synth.add_argument("--config", "-c", required=True, help="Run configuration JSON")
    synth.add_argument("--out", "-o", help="Output directory")
    synth.add_argument("--seed", type=int, help="Noise seed (default: noise.seed)")
    synth.set_defaults(handler=cmd_synth)

    invert = commands.add_parser("invert", help="Identify parameters from an observation")
    invert.add_argument("--config", "-c", required=True, help="Run configuration JSON")
    invert.add_argument("--observation", required=True, help="Observation JSON")
    invert.add_argument("--out", "-o", help="Output directory")
    invert.add_argument(
        "--theta", help="Comma-separated initial guess (default: first initial guess)"
    )
    invert.set_defaults(handler=cmd_invert)

    campaign = commands.add_parser("campaign", help="Run all noise levels x initial guesses")
    campaign.add_argument("--config", "-c", required=True, help="Run configuration JSON")
    campaign.add_argument("--out", "-o", help="Output directory")
    campaign.add_argument("--seed", type=int, help="Noise seed (default: noise.seed)")
    campaign.set_defaults(handler=cmd_campaign)

    report = commands.add_parser("report", help="Write tidy CSVs from trace files")
    report.add_argument("run_dir", help="Directory searched for *trace.csv files")
    report.add_argument("--out", "-o", help="Output directory (default: <run_dir>/report)")
    report.set_defaults(handler=cmd_report)

    return parser


def configure_logging(verbosity: int, log_file: Optional[str] = None) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT, filename=log_file)


def parse_theta(text: str, model: Optional[ForwardModel] = None) -> List[float]:
    """Parse ``"0.3,0.1"`` or, given the model, ``"p2=0.1,p1=0.3"`` into floats.

    Raises:
        ConfigError: If an entry is not a number or names an unknown parameter
    """
    entries = [value.strip() for value in text.split(",") if value.strip()]
    try:
        if model is None or not any("=" in entry for entry in entries):
            return [float(value) for value in entries]
        named: Dict[str, float] = {}
        for entry in entries:
            name, sep, value = entry.partition("=")
            if not sep:
                raise ConfigError(f"--theta mixes named and positional values: {text!r}")
            named[name.strip()] = float(value)
    except ValueError as e:
        raise ConfigError(f"--theta must be a comma-separated list of numbers: {e}") from e
    unknown = sorted(set(named) - set(model.parameter_names))
    if unknown:
        raise ConfigError(
            f"--theta names unknown parameters {unknown}; "
            f"{model.model_id} has {list(model.parameter_names)}"
        )
    return model.theta_from_mapping(named).tolist()


def provenance(command: str, config: RunConfig) -> Dict[str, Any]:
    """Tool, version, subcommand and config hash; no timestamps."""
    return {
        "tool": TOOL_NAME,
        "version": __version__,
        "command": command,
        "config_sha256": config.config_hash(),
    }


def write_json(data: Dict[str, Any], path: Path) -> Path:
    """Write JSON through a sibling temp file so readers never see a partial record."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            json.dump(data, f, indent=2, sort_keys=True)
            f.write("\n")
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def output_dir(args: argparse.Namespace, config: Optional[RunConfig] = None) -> Path:
    if args.out:
        return Path(args.out).expanduser()
    if config is not None and config.output_dir:
        return resolve_path(config.output_dir, config.base_dir)
    return Path(f"{TOOL_NAME}-out") / args.command


def _result_record(result: LMResult) -> Dict[str, Any]:
    return result.model_dump(mode="json", exclude={"trace"})


def cmd_forward(args: argparse.Namespace) -> int:
    """Write the model interface at theta plus provenance."""
    config = load_run_config(args.config)
    model = config.build_model()
    theta = parse_theta(args.theta, model) if args.theta else config.require_theta_true()
    values = model.check_theta(theta)
    outside = config.parameters.violations(values)
    if outside:
        logger.warning(f"theta lies outside the search box for {outside}")

    curve = model.evaluate(values)
    out = output_dir(args, config)
    csv_path = write_curve_csv(curve, out / "interface.csv")
    write_json(
        {
            "provenance": provenance("forward", config),
            "model": model.describe(),
            "theta": dict(zip(model.parameter_names, values.tolist())),
        },
        out / "provenance.json",
    )
    print(csv_path)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    """Write one observation JSON per configured noise level."""
    config = load_run_config(args.config)
    model = config.build_model()
    seed = config.noise.seed if args.seed is None else args.seed
    observations = observations_for_sigmas(
        model,
        config.require_theta_true(),
        config.noise.sigmas,
        config.rays,
        seed,
        config.base_dir,
        provenance("synth", config),
    )
    out = output_dir(args, config)
    for index, observation in enumerate(observations):
        path = write_observation_json(observation, out / f"observation_{index:02d}.json")
        print(path)
    return EXIT_OK


def cmd_invert(args: argparse.Namespace) -> int:
    """Run the optimizer (after the tied stage, if configured) and write result and trace."""
    config = load_run_config(args.config)
    model = config.build_model()
    observation = read_observation_json(args.observation)
    observation.check_model(model)
    workers = resolve_workers(config.workers)
    out = output_dir(args, config)
    record: Dict[str, Any] = {
        "provenance": provenance("invert", config),
        "observation": observation.provenance.model_dump(mode="json"),
    }

    if config.bootstrap is not None and not args.theta:
        b = config.bootstrap
        staged = run_bootstrap(
            model,
            observation,
            b.ties,
            b.initial_guess,
            b.parameters,
            config.parameters,
            config.lm,
            b.fixed,
            workers,
        )
        write_trace_csv(staged.reduced.trace, out / "bootstrap_trace.csv")
        record["bootstrap"] = {
            "result": _result_record(staged.reduced),
            "initial_guess": staged.initial_guess,
        }
        result = staged.final
    else:
        if args.theta:
            x0 = parse_theta(args.theta, model)
        elif config.initial_guesses:
            x0 = config.initial_guesses[0]
        else:
            raise ConfigError("invert needs --theta or at least one initial guess in the config")
        residual = observation_residual(model, observation)
        result = run(residual, x0, config.parameters, config.lm, workers)

    write_trace_csv(result.trace, out / "trace.csv")
    record["result"] = _result_record(result)
    write_json(record, out / "result.json")
    print(f"{result.status}: {result.as_dict()} (err_res={result.err_res}, {result.message})")
    return STATUS_EXIT_CODES[result.status]


def _load_completed(runs_dir: Path, config_hash: str, seed: int) -> Dict[str, CampaignRun]:
    completed: Dict[str, CampaignRun] = {}
    for path in sorted(runs_dir.glob("*.json")):
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            logger.warning(f"Ignoring {path}: unreadable run record ({e}); the run is repeated")
            continue
        if not isinstance(data, dict):
            logger.warning(f"Ignoring {path}: not a run record; the run is repeated")
            continue
        if data.get("config_sha256") != config_hash or data.get("seed") != seed:
            logger.warning(f"Ignoring {path}: produced by a different configuration or seed")
            continue
        try:
            record = CampaignRun(**data)
        except ValidationError as e:
            logger.warning(f"Ignoring {path}: invalid run record ({e.error_count()} errors)")
            continue
        completed[record.run_id] = record
    return completed


def cmd_campaign(args: argparse.Namespace) -> int:
    """Run every noise level x initial guess; completed runs in the output are reused."""
    config = load_run_config(args.config)
    model = config.build_model()
    seed = config.noise.seed if args.seed is None else args.seed
    meta = provenance("campaign", config)
    out = output_dir(args, config)
    runs_dir = out / "runs"

    observations = observations_for_sigmas(
        model,
        config.require_theta_true(),
        config.noise.sigmas,
        config.rays,
        seed,
        config.base_dir,
        meta,
    )
    for index, observation in enumerate(observations):
        write_observation_json(observation, out / "observations" / f"observation_{index:02d}.json")

    def _persist(record: CampaignRun) -> None:
        if record.result is not None:
            write_trace_csv(record.result.trace, runs_dir / f"{record.run_id}_trace.csv")
        data = record.model_dump(mode="json", exclude={"result": {"trace"}})
        data.update(config_sha256=meta["config_sha256"], seed=seed)
        write_json(data, runs_dir / f"{record.run_id}.json")

    result = run_campaign(
        model,
        observations,
        config.initial_guesses,
        config.parameters,
        config.lm,
        workers=resolve_workers(config.workers),
        completed=_load_completed(runs_dir, meta["config_sha256"], seed),
        on_result=_persist,
    )
    summary_path = write_summary_csv(result.summary, result.names, out / "summary.csv")
    write_json(
        {
            "provenance": {**meta, "seed": seed},
            "names": result.names,
            "summary": [row.model_dump(mode="json") for row in result.summary],
            "runs": {
                r.run_id: r.result.status if r.result is not None else "error"
                for r in result.runs
            },
        },
        out / "campaign.json",
    )
    print(summary_path)
    return EXIT_OK


def _run_name(run_dir: Path, trace: Path) -> str:
    relative = trace.relative_to(run_dir).with_suffix("")
    return "__".join(relative.parts)


def cmd_report(args: argparse.Namespace) -> int:
    """Tidy per-run CSVs (one row per iteration) and a merged long-format CSV."""
    run_dir = Path(args.run_dir).expanduser()
    if not run_dir.is_dir():
        raise ConfigError(f"Run directory not found: {run_dir}")
    traces = sorted(run_dir.rglob("*trace.csv"))
    if not traces:
        raise ConfigError(f"No trace files (*trace.csv) under {run_dir}")
    out = Path(args.out).expanduser() if args.out else run_dir / "report"
    out.mkdir(parents=True, exist_ok=True)

    merged: List[List[Any]] = []
    for trace in traces:
        rows = [row for row in read_trace_csv(trace) if row["status"] != "declined_bounds"]
        name = _run_name(run_dir, trace)
        quantities = [c for c in rows[0] if c not in ("k", "status")] if rows else []
        tidy_path = out / f"{name}_tidy.csv"
        with open(tidy_path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["iteration", "status", *quantities])
            for row in rows:
                writer.writerow([row["k"], row["status"], *(_cell(row[q]) for q in quantities)])
                merged += [[name, row["k"], q, _cell(row[q])] for q in quantities]
        logger.info(f"Wrote {tidy_path} ({len(rows)} iterations)")
        print(tidy_path)

    if len(traces) > 1:
        merged_path = out / "merged_long.csv"
        with open(merged_path, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["run", "iteration", "quantity", "value"])
            writer.writerows(merged)
        print(merged_path)
    write_json(
        {"tool": TOOL_NAME, "version": __version__, "command": "report", "traces": len(traces)},
        out / "provenance.json",
    )
    return EXIT_OK


def _cell(value: Optional[float]) -> str:
    return "" if value is None or np.isnan(value) else repr(value)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main CLI entry point; returns the process exit code."""
    parser = create_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.log_file)

    try:
        code: int = args.handler(args)
        return code
    except BioinverseError as e:
        logger.debug(f"{args.command} failed", exc_info=True)
        print(f"Error ({type(e).__name__}): {e.message}", file=sys.stderr)
        return e.code
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_ERROR


def cli_entry() -> None:
    """Entry point for console script."""
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\nInterrupted by user")
        sys.exit(EXIT_INTERRUPTED)


if __name__ == "__main__":
    cli_entry()
