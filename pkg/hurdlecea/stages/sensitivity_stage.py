"""
Sensitivity Stage - refits every model across the W grid and writes sens_W.csv and sens_W.svg.
"""
import logging
from pathlib import Path

from hurdlecea.econ import sensitivity_over_W
from hurdlecea.stages.state import PipelineState, record_artifact
from hurdlecea.utils.csv_io import write_table
from hurdlecea.utils.plots import sensitivity_svg

logger = logging.getLogger(__name__)


def sensitivity_stage(state: PipelineState) -> PipelineState:
    logger.info("Sensitivity Stage: Starting")

    try:
        config = state["config"]
        out = Path(state["output_dir"])
        table = sensitivity_over_W(
            state["data"],
            state["specs"],
            config.mcmc,
            config.sensitivity.W_grid,
            n_workers=state.get("n_workers"),
            with_dic=config.report.dic,
            ess_threshold=config.report.ess_threshold,
            rhat_threshold=config.report.rhat_threshold,
        )
        record_artifact(state, write_table(table, out / "sens_W.csv"))
        if config.report.svg:
            record_artifact(state, sensitivity_svg(table, out / "sens_W.svg"))

        flagged = int((~table["converged"].astype(bool)).sum())
        logger.info(f"Sensitivity Stage: {len(table)} rows, {flagged} flagged")
        state["sensitivity"] = table
        state["current_step"] = "sensitivity"
        state["completed_steps"] = (state.get("completed_steps") or []) + ["sensitivity"]

    except Exception as e:
        logger.error(f"Sensitivity Stage error: {e}")
        state["errors"] = (state.get("errors") or []) + [f"Sensitivity error: {str(e)}"]

    return state
