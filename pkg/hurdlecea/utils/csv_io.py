"""
CSV reading and writing for datasets, posterior draws and result tables.
"""
import logging
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from hurdlecea.core.data import TrialData
from hurdlecea.exceptions import DataValidationError, DrawsSchemaError
from hurdlecea.posterior import PosteriorDraws
from hurdlecea.schemas import EffectFamily, ModelSpec

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

REQUIRED_COLUMNS = ("arm", "eff", "cost")

# 17 significant digits round-trip every double.
FLOAT_FORMAT = "%.17g"


def read_dataset(path: PathLike, effect_family: EffectFamily = EffectFamily.BETA) -> TrialData:
    """Load ``arm,eff,cost[,x1..xJ]`` rows into a validated TrialData."""
    path = Path(path)
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, skip_blank_lines=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise DataValidationError(f"{path}: malformed CSV: {exc}") from exc
    raw.columns = [c.strip() for c in raw.columns]
    missing = [c for c in REQUIRED_COLUMNS if c not in raw.columns]
    if missing:
        raise DataValidationError(f"{path}: missing required columns: {', '.join(missing)}", line=1)
    covariates = [c for c in raw.columns if c not in REQUIRED_COLUMNS]

    # Blank lines are dropped but still counted; the header is line 1.
    raw = raw.fillna("")
    blank = (raw.apply(lambda col: col.str.strip()) == "").all(axis=1).to_numpy()
    lines = (np.arange(len(raw)) + 2)[~blank]
    raw = raw.loc[~blank].reset_index(drop=True)

    def _line(index: int) -> int:
        return int(lines[index])

    numeric = {}
    for column in list(REQUIRED_COLUMNS) + covariates:
        cells = raw[column].str.strip()
        empty = cells == ""
        if empty.any():
            i = int(np.flatnonzero(empty.to_numpy())[0])
            raise DataValidationError(f"{path}: line {_line(i)}: missing value in column '{column}'", row=i, line=_line(i))
        values = pd.to_numeric(cells, errors="coerce")
        bad = values.isna()
        if column in covariates:
            bad |= ~np.isfinite(values.fillna(0.0))
        if bad.any():
            i = int(np.flatnonzero(bad.to_numpy())[0])
            raise DataValidationError(
                f"{path}: line {_line(i)}: '{cells.iloc[i]}' in column '{column}' is not a finite number",
                row=i, line=_line(i),
            )
        numeric[column] = values.to_numpy(dtype=float)

    arm = numeric["arm"]
    bad_arm = (arm != 0) & (arm != 1)
    if np.any(bad_arm):
        i = int(np.flatnonzero(bad_arm)[0])
        raise DataValidationError(f"{path}: line {_line(i)}: arm must be 0 or 1", row=i, line=_line(i))

    X = np.column_stack([numeric[c] for c in covariates]) if covariates else None
    try:
        data = TrialData.from_arrays(
            arm=arm.astype(int),
            eff=numeric["eff"],
            cost=numeric["cost"],
            X=X,
            effect_family=effect_family,
            covariate_names=covariates,
            row_labels=[f"{path}: line {_line(i)}" for i in range(len(arm))],
        )
    except DataValidationError as exc:
        if exc.row is not None and exc.line is None:
            exc.line = _line(exc.row)
        raise
    logger.info(f"Loaded {len(arm)} records with {len(covariates)} covariate(s) from {path}")
    return data


def write_table(frame: pd.DataFrame, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_table(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(Path(path), float_precision="round_trip")


def write_dataset(data: TrialData, path: PathLike) -> Path:
    return write_table(data.to_frame(), path)


def write_draws(draws: PosteriorDraws, path: PathLike) -> Path:
    path = write_table(draws.to_frame(), path)
    logger.info(f"Wrote {draws.n_chains * draws.n_draws} draws to {path}")
    return path


def read_draws(
    path: PathLike,
    spec: Optional[ModelSpec] = None,
    required: Sequence[str] = (),
) -> PosteriorDraws:
    frame = read_table(path)
    try:
        return PosteriorDraws.from_frame(frame, spec=spec, required=required)
    except DrawsSchemaError as exc:
        raise DrawsSchemaError(exc.missing, source=str(path)) from exc
