"""
LangGraph Workflow Orchestrator - chains the stages of the fit, econ, sens and summary pipelines.
"""
import logging
from pathlib import Path
from typing import Optional, Tuple, Union

try:
    from langgraph.graph import StateGraph, END
except ImportError:
    try:
        from langgraph.graph import StateGraph
        from langgraph.graph.graph import END
    except ImportError:
        raise ImportError("langgraph is required. Install with: pip install langgraph")

from hurdlecea.config import settings
from hurdlecea.exceptions import PipelineError
from hurdlecea.schemas import RunConfig, TruthParams
from hurdlecea.stages.diagnostics_stage import diagnostics_stage
from hurdlecea.stages.econ_stage import econ_stage, load_draws_stage
from hurdlecea.stages.ingest_stage import ingest_stage
from hurdlecea.stages.report_stage import report_stage, summary_report_stage
from hurdlecea.stages.sampling_stage import sampling_stage
from hurdlecea.stages.sensitivity_stage import sensitivity_stage
from hurdlecea.stages.state import PipelineState, initial_state
from hurdlecea.synth import simulate_dataset
from hurdlecea.utils.csv_io import write_dataset

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _continue_or_stop(state: PipelineState) -> str:
    # later stages depend on earlier outputs
    return "stop" if state.get("errors") else "continue"


def _chain(nodes) -> StateGraph:
    """Linear graph over (name, stage) pairs that ends early once a stage records an error."""
    workflow = StateGraph(PipelineState)
    for name, stage in nodes:
        workflow.add_node(name, stage)

    workflow.set_entry_point(nodes[0][0])
    for (name, _), (next_name, _) in zip(nodes, nodes[1:]):
        workflow.add_conditional_edges(name, _continue_or_stop, {"continue": next_name, "stop": END})
    workflow.add_edge(nodes[-1][0], END)

    return workflow.compile()


def build_fit_graph():
    return _chain([
        ("ingest", ingest_stage),
        ("sampling", sampling_stage),
        ("diagnostics", diagnostics_stage),
        ("report", report_stage),
    ])


def build_econ_graph():
    return _chain([
        ("load_draws", load_draws_stage),
        ("econ", econ_stage),
    ])


def build_sens_graph():
    return _chain([
        ("ingest", ingest_stage),
        ("sensitivity", sensitivity_stage),
    ])


def build_summary_graph():
    return _chain([
        ("load_draws", load_draws_stage),
        ("diagnostics", diagnostics_stage),
        ("summary_report", summary_report_stage),
    ])


# Singleton compiled graphs
_graphs = {}

_BUILDERS = {
    "fit": build_fit_graph,
    "econ": build_econ_graph,
    "sens": build_sens_graph,
    "summary": build_summary_graph,
}


def get_graph(name: str):
    if name not in _graphs:
        _graphs[name] = _BUILDERS[name]()
    return _graphs[name]


def _output_dir(config: RunConfig, output_dir: Optional[PathLike]) -> str:
    if output_dir is not None:
        return str(output_dir)
    if config.data.output_dir is not None:
        return str(config.data.output_dir)
    return settings.OUTPUT_DIR


def _run(name: str, config: RunConfig, output_dir: Optional[PathLike], **inputs) -> PipelineState:
    state = initial_state(config, _output_dir(config, output_dir), **inputs)
    logger.info(f"Starting {name} workflow: output_dir={state['output_dir']}")

    final_state = get_graph(name).invoke(state)

    logger.info(
        f"{name} workflow finished. "
        f"Steps: {final_state.get('completed_steps')}, "
        f"artifacts: {len(final_state.get('artifacts') or [])}"
    )
    if final_state.get("errors"):
        raise PipelineError(final_state["errors"])
    return final_state


def run_fit(
    config: RunConfig,
    output_dir: Optional[PathLike] = None,
    data_path: Optional[PathLike] = None,
    n_workers: Optional[int] = None,
) -> PipelineState:
    """Fit every configured model and write draws, summaries, diagnostics and the model card."""
    return _run("fit", config, output_dir, data_path=data_path, n_workers=n_workers)


def run_econ(
    config: RunConfig,
    draws_path: Optional[PathLike] = None,
    output_dir: Optional[PathLike] = None,
) -> PipelineState:
    """Post-process a draws file into CE-plane, EIB, CEAC, EVPI and break-even outputs."""
    return _run("econ", config, output_dir, draws_path=draws_path)


def run_sens(
    config: RunConfig,
    output_dir: Optional[PathLike] = None,
    data_path: Optional[PathLike] = None,
    n_workers: Optional[int] = None,
) -> PipelineState:
    """Refit across the configured W grid and write sens_W.csv and sens_W.svg."""
    return _run("sens", config, output_dir, data_path=data_path, n_workers=n_workers)


def run_summary(
    config: RunConfig,
    draws_path: Optional[PathLike] = None,
    output_dir: Optional[PathLike] = None,
) -> PipelineState:
    """Rebuild summary.csv, summary.md and diagnostics.csv from an existing draws file."""
    return _run("summary", config, output_dir, draws_path=draws_path)


def run_simulate(
    truth: TruthParams,
    n_per_arm: Union[int, Tuple[int, int]],
    seed: int,
    path: PathLike,
) -> Path:
    data = simulate_dataset(truth, n_per_arm, seed)
    path = write_dataset(data, path)
    logger.info(f"Simulated dataset written to {path}")
    return path
