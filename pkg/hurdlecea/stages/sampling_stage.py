"""
Sampling Stage - fits every requested model on the same data and seed.
"""
import logging

from hurdlecea.sampler import fit
from hurdlecea.stages.state import PipelineState

logger = logging.getLogger(__name__)


def sampling_stage(state: PipelineState) -> PipelineState:
    """Stage that runs the MCMC sampler once per model specification."""
    logger.info("Sampling Stage: Starting")

    try:
        config = state["config"]
        fits = {}
        for spec in state["specs"]:
            draws = fit(state["data"], spec, config.mcmc, n_workers=state.get("n_workers"))
            fits[spec.cost_family.value] = draws
            logger.info(
                f"Sampling Stage: {spec.label()} done, {draws.n_chains}x{draws.n_draws} draws, "
                f"digest {draws.digest[:12]}"
            )

        state["fits"] = fits
        state["current_step"] = "sampling"
        state["completed_steps"] = (state.get("completed_steps") or []) + ["sampling"]

    except Exception as e:
        logger.error(f"Sampling Stage error: {e}")
        state["errors"] = (state.get("errors") or []) + [f"Sampling error: {str(e)}"]

    return state
