"""
Ingestion Stage - loads the trial dataset and expands the model section into specs.
"""
import logging
from pathlib import Path

from hurdlecea.config import settings
from hurdlecea.stages.state import PipelineState
from hurdlecea.synth import DEMO_ARM_SIZES, DEMO_SEED, case_study_truth, simulate_dataset
from hurdlecea.utils.csv_io import read_dataset, write_dataset

logger = logging.getLogger(__name__)


def resolve_data_path(state: PipelineState) -> str:
    config = state["config"]
    if state.get("data_path"):
        return str(state["data_path"])
    if config.data.path is not None:
        return str(config.data.path)
    return settings.DEFAULT_DATASET


def ensure_default_dataset() -> None:
    """Write the bundled synthetic trial if it is not on disk yet."""
    path = Path(settings.DEFAULT_DATASET)
    if path.exists():
        return
    logger.info(f"Ingestion Stage: seeding bundled dataset at {path}")
    write_dataset(simulate_dataset(case_study_truth(), DEMO_ARM_SIZES, DEMO_SEED), path)


def ingest_stage(state: PipelineState) -> PipelineState:
    """Stage that reads the dataset and builds one ModelSpec per requested cost family."""
    logger.info("Ingestion Stage: Starting")

    try:
        config = state["config"]
        specs = config.model.specs()
        path = resolve_data_path(state)
        if path == settings.DEFAULT_DATASET:
            ensure_default_dataset()
        data = read_dataset(path, effect_family=specs[0].effect_family)

        state["data_path"] = path
        state["data"] = data
        state["specs"] = specs

        logger.info(
            f"Ingestion Stage: {sum(a.n for a in data.arms)} records, "
            f"models={[s.label() for s in specs]}"
        )
        state["current_step"] = "ingest"
        state["completed_steps"] = (state.get("completed_steps") or []) + ["ingest"]

    except Exception as e:
        logger.error(f"Ingestion Stage error: {e}")
        state["errors"] = (state.get("errors") or []) + [f"Ingestion error: {str(e)}"]

    return state
