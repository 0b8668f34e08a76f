"""
Econ Stage - loads a draws file and turns it into increments, EIB, CEAC, EVPI and the break-even point.
"""
import logging
from pathlib import Path
from typing import Sequence

from hurdlecea.econ import INCREMENT_COLUMNS, break_even, ce_plane_export, econ_tables, increments
from hurdlecea.stages.state import PipelineState, record_artifact
from hurdlecea.utils.csv_io import read_draws, write_table
from hurdlecea.utils.plots import ce_plane_svg, ceac_svg

logger = logging.getLogger(__name__)


def draws_label(path: Path, default: str) -> str:
    """draws_<family>.csv is labelled <family>; anything else takes the first configured family."""
    stem = path.stem
    return stem[len("draws_"):] if stem.startswith("draws_") else default


def _load(state: PipelineState, required: Sequence[str]) -> PipelineState:
    config = state["config"]
    path = state.get("draws_path") or config.econ.draws
    if path is None:
        path = Path(state["output_dir"]) / "draws.csv"
    path = Path(path)

    specs = {spec.cost_family.value: spec for spec in config.model.specs()}
    label = draws_label(path, config.model.cost_families[0].value)
    draws = read_draws(path, spec=specs.get(label), required=required)

    state["draws_path"] = str(path)
    state["fits"] = {label: draws}
    logger.info(f"Load Draws Stage: {draws.n_chains}x{draws.n_draws} draws of {label} from {path}")
    return state


def load_draws_stage(state: PipelineState) -> PipelineState:
    """Stage that reads an existing draws file for post-processing."""
    logger.info("Load Draws Stage: Starting")

    try:
        state = _load(state, required=INCREMENT_COLUMNS)
        state["current_step"] = "load_draws"
        state["completed_steps"] = (state.get("completed_steps") or []) + ["load_draws"]

    except Exception as e:
        logger.error(f"Load Draws Stage error: {e}")
        state["errors"] = (state.get("errors") or []) + [f"Load draws error: {str(e)}"]

    return state


def econ_stage(state: PipelineState) -> PipelineState:
    """Stage that writes the decision-analytic outputs of one set of draws."""
    logger.info("Econ Stage: Starting")

    try:
        config = state["config"]
        out = Path(state["output_dir"])
        draws = next(iter(state["fits"].values()))

        inc = increments(draws)
        table = econ_tables(inc, config.econ.wtp)
        be = break_even(inc)

        record_artifact(state, write_table(ce_plane_export(inc), out / "ce_plane.csv"))
        record_artifact(state, write_table(table[["k", "eib"]], out / "eib.csv"))
        record_artifact(
            state, write_table(table[["k", "ceac"]].rename(columns={"ceac": "probability"}), out / "ceac.csv")
        )
        record_artifact(state, write_table(table[["k", "evpi"]], out / "evpi.csv"))

        be_path = out / "break_even.txt"
        be_path.write_text(be.describe() + "\n", encoding="utf-8")
        record_artifact(state, be_path)

        if config.report.svg:
            k_line = be.k_star if be.k_star else None
            record_artifact(state, ce_plane_svg(inc.delta_e, inc.delta_c, out / "ce_plane.svg", k=k_line))
            record_artifact(state, ceac_svg(table["k"].to_numpy(), table["ceac"].to_numpy(), out / "ceac.svg"))

        state["increments"] = inc
        state["econ_table"] = table
        state["break_even"] = be
        logger.info(f"Econ Stage: {inc.n} draws, {len(table)} grid points. {be.describe()}")
        state["current_step"] = "econ"
        state["completed_steps"] = (state.get("completed_steps") or []) + ["econ"]

    except Exception as e:
        logger.error(f"Econ Stage error: {e}")
        state["errors"] = (state.get("errors") or []) + [f"Econ error: {str(e)}"]

    return state
