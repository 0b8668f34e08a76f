"""
Health-economic post-processing of posterior draws: increments, expected
incremental benefit, acceptability curve, value of information,
break-even willingness to pay, CE-plane export and the W-sensitivity driver.
"""
import concurrent.futures
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from hurdlecea.config import settings
from hurdlecea.core.data import TrialData
from hurdlecea.diagnostics import check_convergence, convergence_table, dic
from hurdlecea.exceptions import ConfigurationError, DrawsSchemaError, HurdleCEAError
from hurdlecea.posterior import PosteriorDraws
from hurdlecea.sampler import fit
from hurdlecea.schemas import McmcConfig, ModelSpec, WtpGrid

logger = logging.getLogger(__name__)

INCREMENT_COLUMNS = ("mu_e_0", "mu_e_1", "mu_c_0", "mu_c_1")

SENSITIVITY_COLUMNS = ["model", "W", "arm", "mean", "q25", "q75", "q2_5", "q97_5", "dic", "max_rhat", "converged"]


@dataclass
class IncrementDraws:
    """Per-draw increments of arm 1 over arm 0, with the per-arm means they come from."""

    delta_e: np.ndarray
    delta_c: np.ndarray
    mu_e: np.ndarray   # (draws, 2)
    mu_c: np.ndarray   # (draws, 2)

    @property
    def n(self) -> int:
        return int(self.delta_e.shape[0])


def increments(draws: PosteriorDraws) -> IncrementDraws:
    """Delta e and delta c per retained draw, paired by (chain, draw index)."""
    missing = [c for c in INCREMENT_COLUMNS if not draws.has(c)]
    if missing:
        raise DrawsSchemaError(missing)
    mu_e = np.column_stack([draws.pooled("mu_e_0"), draws.pooled("mu_e_1")])
    mu_c = np.column_stack([draws.pooled("mu_c_0"), draws.pooled("mu_c_1")])
    return IncrementDraws(
        delta_e=mu_e[:, 1] - mu_e[:, 0],
        delta_c=mu_c[:, 1] - mu_c[:, 0],
        mu_e=mu_e,
        mu_c=mu_c,
    )


def eib(inc: IncrementDraws, k: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Expected incremental benefit k * E[delta e] - E[delta c]."""
    value = np.asarray(k, dtype=float) * np.mean(inc.delta_e) - np.mean(inc.delta_c)
    return float(value) if np.ndim(value) == 0 else value


@dataclass(frozen=True)
class BreakEven:
    """
    Willingness to pay at which EIB changes sign.

    ``direction`` is "above" when EIB > 0 for k > k_star and "below" when
    EIB > 0 for k < k_star. ``dominant`` marks a new arm that is cheaper and
    more effective (k_star clamped to 0); ``dominated`` the reverse.
    """

    k_star: Optional[float]
    direction: Optional[str] = None
    dominant: bool = False
    dominated: bool = False

    def describe(self) -> str:
        if self.k_star is None:
            return "No break-even willingness to pay: mean effectiveness increment is zero."
        if self.dominant:
            return "Intervention 1 is dominant: cost-effective at every willingness to pay (k* = 0)."
        if self.dominated:
            return "Intervention 1 is dominated: not cost-effective at any willingness to pay (k* = 0)."
        if self.direction == "above":
            return f"Break-even k* = {self.k_star:.17g}; EIB > 0 for k > k*."
        return f"Break-even k* = {self.k_star:.17g}; EIB > 0 for k < k*."


def break_even(inc: IncrementDraws) -> BreakEven:
    mean_e = float(np.mean(inc.delta_e))
    mean_c = float(np.mean(inc.delta_c))
    if mean_e == 0.0:
        return BreakEven(k_star=None)
    k_star = mean_c / mean_e
    if mean_e > 0:
        if k_star < 0:
            return BreakEven(k_star=0.0, direction="above", dominant=True)
        return BreakEven(k_star=k_star, direction="above")
    if k_star < 0:
        return BreakEven(k_star=0.0, direction="below", dominated=True)
    return BreakEven(k_star=k_star, direction="below")


def _grid_values(grid: Union[WtpGrid, Sequence[float], np.ndarray]) -> np.ndarray:
    if isinstance(grid, WtpGrid):
        return grid.as_array()
    values = np.asarray(grid, dtype=float).reshape(-1)
    if values.size == 0:
        raise ConfigurationError("willingness-to-pay grid is empty")
    return values


def ceac(inc: IncrementDraws, grid: Union[WtpGrid, Sequence[float]]) -> np.ndarray:
    """Pr(k * delta e - delta c > 0) at each k; ties count as not cost-effective."""
    k = _grid_values(grid)
    benefit = k[:, None] * inc.delta_e[None, :] - inc.delta_c[None, :]
    return np.mean(benefit > 0, axis=1)


def evpi(inc: IncrementDraws, grid: Union[WtpGrid, Sequence[float]]) -> np.ndarray:
    """Expected value of perfect information per k: E[max_t NB_t] - max_t E[NB_t]."""
    k = _grid_values(grid)
    nb = k[:, None, None] * inc.mu_e[None, :, :] - inc.mu_c[None, :, :]
    value = nb.max(axis=2).mean(axis=1) - nb.mean(axis=1).max(axis=1)
    return np.maximum(value, 0.0)


def ce_plane_export(inc: IncrementDraws) -> pd.DataFrame:
    return pd.DataFrame({
        "draw": np.arange(inc.n, dtype=int),
        "delta_e": inc.delta_e,
        "delta_c": inc.delta_c,
    })


def econ_tables(inc: IncrementDraws, grid: Union[WtpGrid, Sequence[float]]) -> pd.DataFrame:
    """EIB, CEAC and EVPI on one willingness-to-pay grid."""
    k = _grid_values(grid)
    return pd.DataFrame({
        "k": k,
        "eib": eib(inc, k),
        "ceac": ceac(inc, k),
        "evpi": evpi(inc, k),
    })


# ─── Sensitivity to W ───


def cell_seed(seed: int, index: int) -> int:
    """Seed of the ``index``-th sensitivity cell: the index-th child of the run seed."""
    child = np.random.SeedSequence(seed).spawn(index + 1)[index]
    return int(child.generate_state(1, dtype=np.uint64)[0])


@dataclass
class _Cell:
    spec: ModelSpec
    index: int
    W: float


def _run_cell(
    cell: _Cell,
    data: TrialData,
    cfg: McmcConfig,
    with_dic: bool,
    ess_threshold: Optional[float],
    rhat_threshold: Optional[float],
) -> List[dict]:
    spec = cell.spec.with_W(cell.W)
    label = spec.cost_family.value
    try:
        draws = fit(data, spec, cfg.with_seed(cell_seed(cfg.seed, cell.index)), n_workers=1)
        table = convergence_table(draws)
        converged = check_convergence(table, ess_threshold, rhat_threshold)
        max_rhat = float(np.nanmax(table["rhat"])) if table["rhat"].notna().any() else np.nan
        dic_value = np.nan
        if with_dic:
            try:
                dic_value = dic(draws, data, spec).DIC
            except HurdleCEAError as exc:
                logger.warning(f"W={cell.W:g} ({label}): DIC unavailable: {exc}")
    except HurdleCEAError as exc:
        logger.warning(f"W={cell.W:g} ({label}): fit failed and is flagged: {exc}")
        return [
            {"model": label, "W": cell.W, "arm": t, "mean": np.nan, "q25": np.nan, "q75": np.nan,
             "q2_5": np.nan, "q97_5": np.nan, "dic": np.nan, "max_rhat": np.nan, "converged": False}
            for t in (0, 1)
        ]

    if not converged:
        logger.warning(f"W={cell.W:g} ({label}): cell flagged as not converged")
    rows = []
    for t in (0, 1):
        mu_c = draws.pooled(f"mu_c_{t}")
        q2_5, q25, q75, q97_5 = np.quantile(mu_c, [0.025, 0.25, 0.75, 0.975])
        rows.append({
            "model": label, "W": cell.W, "arm": t, "mean": float(np.mean(mu_c)),
            "q25": float(q25), "q75": float(q75), "q2_5": float(q2_5), "q97_5": float(q97_5),
            "dic": dic_value, "max_rhat": max_rhat, "converged": bool(converged),
        })
    return rows


def sensitivity_over_W(
    data: TrialData,
    specs: Union[ModelSpec, Sequence[ModelSpec]],
    cfg: McmcConfig,
    W_grid: Sequence[float],
    n_workers: Optional[int] = None,
    with_dic: bool = True,
    ess_threshold: Optional[float] = None,
    rhat_threshold: Optional[float] = None,
) -> pd.DataFrame:
    """
    Refit the model once per W value and summarise the mean cost of each arm.

    Every cell gets its own seed derived from (cfg.seed, grid index). Cells may
    run in parallel; rows come back ordered by model, then grid index, then arm.
    A failing or non-converged cell is flagged in the table rather than raised.
    """
    specs = [specs] if isinstance(specs, ModelSpec) else list(specs)
    grid = [float(W) for W in W_grid]
    if not grid:
        raise ConfigurationError("W grid is empty")
    for spec in specs:
        too_small = [W for W in grid if not W > spec.w]
        if too_small:
            raise ConfigurationError(f"W grid values must exceed w={spec.w} (got {too_small})")

    cells = [_Cell(spec=spec, index=i, W=W) for spec in specs for i, W in enumerate(grid)]
    workers = max(1, n_workers or settings.N_WORKERS)
    logger.info(f"Sensitivity to W: {len(cells)} cells on {workers} worker(s)")

    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [
            executor.submit(_run_cell, cell, data, cfg, with_dic, ess_threshold, rhat_threshold)
            for cell in cells
        ]
        rows = [row for f in futures for row in f.result()]
    return pd.DataFrame(rows, columns=SENSITIVITY_COLUMNS)
