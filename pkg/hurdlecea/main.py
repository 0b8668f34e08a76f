"""
Command-line entry point: fit, econ, sens, simulate and summary subcommands.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import yaml
from pydantic import ValidationError

from hurdlecea.config import load_run_config, settings
from hurdlecea.exceptions import ConfigurationError, HurdleCEAError
from hurdlecea.schemas import CostFamily, TruthParams
from hurdlecea.synth import case_study_truth
from hurdlecea.workflow import run_econ, run_fit, run_sens, run_simulate, run_summary

logger = logging.getLogger(__name__)


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="Run configuration YAML.")
    common.add_argument("--data", type=Path, default=None, help="Trial CSV with columns arm,eff,cost[,x1..xJ].")
    common.add_argument("--out", type=Path, default=None, help=f"Output directory (default: {settings.OUTPUT_DIR}).")
    common.add_argument("--seed", type=int, default=None, help="Master random seed.")
    common.add_argument("--chains", type=int, default=None, help="Number of MCMC chains.")
    common.add_argument("--workers", type=int, default=None, help="Worker threads for chains and sensitivity cells.")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    p = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Bayesian hurdle models for cost-effectiveness data with structural zero costs.",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {settings.APP_VERSION}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("fit", parents=[common], help="Fit the hurdle model and write draws, summaries and diagnostics.")

    econ = sub.add_parser("econ", parents=[common], help="Post-process draws into EIB, CEAC, EVPI and the CE plane.")
    econ.add_argument("--draws", type=Path, default=None, help="Draws CSV (default: <out>/draws.csv).")

    sub.add_parser("sens", parents=[common], help="Refit over the W grid and write sens_W.csv and sens_W.svg.")

    simulate = sub.add_parser("simulate", parents=[common], help="Write a synthetic trial dataset.")
    simulate.add_argument("--truth", type=Path, default=None, help="YAML with per-arm truth values.")
    simulate.add_argument("--n", type=int, nargs="+", default=[1000], help="Subjects per arm (one or two values).")
    simulate.add_argument(
        "--cost-family",
        choices=[f.value for f in CostFamily],
        default=CostFamily.GAMMA.value,
        help="Cost family of the built-in case-study truth when --truth is not given.",
    )

    summary = sub.add_parser("summary", parents=[common], help="Rebuild the summary tables from a draws file.")
    summary.add_argument("--draws", type=Path, default=None, help="Draws CSV (default: <out>/draws.csv).")
    return p


def _load_truth(args: argparse.Namespace) -> TruthParams:
    if args.truth is None:
        return case_study_truth(CostFamily(args.cost_family))
    with open(args.truth, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    try:
        return TruthParams.model_validate(raw)
    except ValidationError as exc:
        raise ConfigurationError(f"{args.truth}: invalid truth parameters: {exc}") from exc


def run_command(args: argparse.Namespace) -> None:
    config = load_run_config(
        args.config,
        overrides={
            "data": {"path": args.data, "output_dir": args.out},
            "mcmc": {"seed": args.seed, "n_chains": args.chains},
        },
    )

    if args.command == "fit":
        state = run_fit(config, n_workers=args.workers)
    elif args.command == "econ":
        state = run_econ(config, draws_path=args.draws)
    elif args.command == "sens":
        state = run_sens(config, n_workers=args.workers)
    elif args.command == "summary":
        state = run_summary(config, draws_path=args.draws)
    else:
        if len(args.n) > 2:
            raise ConfigurationError("--n takes one or two values")
        n_per_arm = args.n[0] if len(args.n) == 1 else (args.n[0], args.n[1])
        if args.data is not None:
            path = args.data
        else:
            path = Path(config.data.output_dir or settings.OUTPUT_DIR) / "simulated.csv"
        run_simulate(_load_truth(args), n_per_arm, config.mcmc.seed, path)
        print(path)
        return

    for artifact in state.get("artifacts") or []:
        print(artifact)


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        run_command(args)
    except (HurdleCEAError, OSError) as exc:
        logger.debug("command failed", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
