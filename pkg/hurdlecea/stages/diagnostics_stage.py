"""
Diagnostics Stage - summaries, convergence checks and DIC for every fitted model.
"""
import logging

from hurdlecea.diagnostics import check_convergence, convergence_table, dic, summarize
from hurdlecea.exceptions import HurdleCEAError
from hurdlecea.stages.state import PipelineState

logger = logging.getLogger(__name__)


def diagnostics_stage(state: PipelineState) -> PipelineState:
    """Stage that summarises the draws and checks convergence; warnings never fail the run."""
    logger.info("Diagnostics Stage: Starting")

    try:
        report = state["config"].report
        summaries, tables, converged, dics = {}, {}, {}, {}
        for label, draws in state["fits"].items():
            summaries[label] = summarize(draws)
            tables[label] = convergence_table(draws, split=report.split_rhat)
            converged[label] = check_convergence(tables[label], report.ess_threshold, report.rhat_threshold)
            if not converged[label]:
                logger.warning(f"Diagnostics Stage: {label} model shows convergence warnings")

            if report.dic and state.get("data") is not None and draws.spec is not None:
                try:
                    dics[label] = dic(draws, state["data"], draws.spec)
                    logger.info(f"Diagnostics Stage: {label} DIC={dics[label].DIC:.3f} (pD={dics[label].pD:.2f})")
                except HurdleCEAError as exc:
                    logger.warning(f"Diagnostics Stage: DIC unavailable for {label}: {exc}")

        state["summaries"] = summaries
        state["convergence"] = tables
        state["converged"] = converged
        state["dic"] = dics
        state["current_step"] = "diagnostics"
        state["completed_steps"] = (state.get("completed_steps") or []) + ["diagnostics"]

    except Exception as e:
        logger.error(f"Diagnostics Stage error: {e}")
        state["errors"] = (state.get("errors") or []) + [f"Diagnostics error: {str(e)}"]

    return state
