"""
Pipeline state shared by the stages of the fit, econ, sens and summary workflows.
"""
from typing import Any, Dict, List, Optional, TypedDict

import pandas as pd

from hurdlecea.core.data import TrialData
from hurdlecea.diagnostics import DicResult, SummaryRow
from hurdlecea.econ import BreakEven, IncrementDraws
from hurdlecea.posterior import PosteriorDraws
from hurdlecea.schemas import ModelSpec, RunConfig


class PipelineState(TypedDict):
    """Shared state across all stages in a workflow."""

    # Input
    config: RunConfig
    output_dir: str
    data_path: Optional[str]
    draws_path: Optional[str]
    n_workers: Optional[int]

    # Ingestion stage output
    data: Optional[TrialData]
    specs: Optional[List[ModelSpec]]

    # Sampling stage output, keyed by model label in fit order
    fits: Optional[Dict[str, PosteriorDraws]]

    # Diagnostics stage output
    summaries: Optional[Dict[str, List[SummaryRow]]]
    convergence: Optional[Dict[str, pd.DataFrame]]
    converged: Optional[Dict[str, bool]]
    dic: Optional[Dict[str, DicResult]]

    # Econ stage output
    increments: Optional[IncrementDraws]
    econ_table: Optional[pd.DataFrame]
    break_even: Optional[BreakEven]

    # Sensitivity stage output
    sensitivity: Optional[pd.DataFrame]

    # Files written
    artifacts: Optional[List[str]]

    # Workflow metadata
    errors: Optional[List[str]]
    current_step: Optional[str]
    completed_steps: Optional[List[str]]


def initial_state(config: RunConfig, output_dir: str, **inputs: Any) -> PipelineState:
    state: PipelineState = {
        "config": config,
        "output_dir": output_dir,
        "data_path": None,
        "draws_path": None,
        "n_workers": None,
        "data": None,
        "specs": None,
        "fits": None,
        "summaries": None,
        "convergence": None,
        "converged": None,
        "dic": None,
        "increments": None,
        "econ_table": None,
        "break_even": None,
        "sensitivity": None,
        "artifacts": [],
        "errors": [],
        "current_step": None,
        "completed_steps": [],
    }
    state.update(inputs)
    return state


def record_artifact(state: PipelineState, path) -> None:
    state["artifacts"] = (state.get("artifacts") or []) + [str(path)]
