"""
Report Stage - writes draws, summaries, diagnostics and the model card for a fit run.
"""
import logging
from pathlib import Path

import pandas as pd

from hurdlecea.stages.state import PipelineState, record_artifact
from hurdlecea.utils.csv_io import write_draws, write_table
from hurdlecea.utils.report import model_card, summary_markdown, summary_table

logger = logging.getLogger(__name__)


def draws_filename(index: int, label: str) -> str:
    """First model goes to draws.csv, any further model to draws_<family>.csv."""
    return "draws.csv" if index == 0 else f"draws_{label}.csv"


def write_summary_files(state: PipelineState, out: Path) -> None:
    summaries = state["summaries"]
    record_artifact(state, write_table(summary_table(summaries), out / "summary.csv"))

    md_path = out / "summary.md"
    md_path.write_text(summary_markdown(summaries, state.get("dic") or None), encoding="utf-8")
    record_artifact(state, md_path)

    tables = [table.assign(model=label) for label, table in (state.get("convergence") or {}).items()]
    if tables:
        diagnostics = pd.concat(tables, ignore_index=True)
        diagnostics = diagnostics[["model"] + [c for c in diagnostics.columns if c != "model"]]
        record_artifact(state, write_table(diagnostics, out / "diagnostics.csv"))


def report_stage(state: PipelineState) -> PipelineState:
    """Stage that writes every fit artifact to the output directory."""
    logger.info("Report Stage: Starting")

    try:
        out = Path(state["output_dir"])
        out.mkdir(parents=True, exist_ok=True)

        cards = []
        for i, (label, draws) in enumerate(state["fits"].items()):
            record_artifact(state, write_draws(draws, out / draws_filename(i, label)))
            cards.append(model_card(draws, state.get("data"), (state.get("dic") or {}).get(label)))

        write_summary_files(state, out)

        card_path = out / "model_card.txt"
        card_path.write_text("\n\n".join(cards), encoding="utf-8")
        record_artifact(state, card_path)

        logger.info(f"Report Stage: {len(state['artifacts'])} files written to {out}")
        state["current_step"] = "report"
        state["completed_steps"] = (state.get("completed_steps") or []) + ["report"]

    except Exception as e:
        logger.error(f"Report Stage error: {e}")
        state["errors"] = (state.get("errors") or []) + [f"Report error: {str(e)}"]

    return state


def summary_report_stage(state: PipelineState) -> PipelineState:
    """Stage that rebuilds summary.csv, summary.md and diagnostics.csv from loaded draws."""
    logger.info("Summary Report Stage: Starting")

    try:
        out = Path(state["output_dir"])
        out.mkdir(parents=True, exist_ok=True)
        write_summary_files(state, out)

        state["current_step"] = "summary_report"
        state["completed_steps"] = (state.get("completed_steps") or []) + ["summary_report"]

    except Exception as e:
        logger.error(f"Summary Report Stage error: {e}")
        state["errors"] = (state.get("errors") or []) + [f"Summary report error: {str(e)}"]

    return state
