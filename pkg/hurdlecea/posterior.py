"""
Posterior draws container: multi-chain matrix of retained parameter values
and derived quantities, with provenance.
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import expit

from hurdlecea.core.data import TrialData
from hurdlecea.core.params import ArmLayout, ParamState
from hurdlecea.exceptions import DimensionMismatchError, DrawsSchemaError, UnknownParameterError
from hurdlecea.schemas import McmcConfig, ModelSpec

logger = logging.getLogger(__name__)

DERIVED_NAMES = ("p", "mu_c", "mu_e")
INDEX_COLUMNS = ("chain", "iteration")


def draw_columns(layout: ArmLayout) -> List[str]:
    """Column order of a draw row: arm 0 then arm 1, free parameters before derived ones."""
    columns = []
    for t in (0, 1):
        columns += [f"{name}_{t}" for name in layout.names]
        columns += [f"{name}_{t}" for name in DERIVED_NAMES]
    return columns


@dataclass
class PosteriorDraws:
    values: np.ndarray                      # (chains, draws, columns)
    columns: List[str]
    spec: Optional[ModelSpec] = None
    config: Optional[McmcConfig] = None
    n_covariates: int = 0
    acceptance: Dict[str, float] = field(default_factory=dict)
    iterations: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 3 or self.values.shape[2] != len(self.columns):
            raise DimensionMismatchError(
                f"draw array of shape {self.values.shape} does not match {len(self.columns)} columns"
            )
        if self.iterations is None:
            self.iterations = np.arange(1, self.n_draws + 1)
        self._index = {name: i for i, name in enumerate(self.columns)}

    @property
    def n_chains(self) -> int:
        return self.values.shape[0]

    @property
    def n_draws(self) -> int:
        return self.values.shape[1]

    @property
    def seed(self) -> Optional[int]:
        return self.config.seed if self.config is not None else None

    @property
    def digest(self) -> str:
        payload = {
            "spec": self.spec.model_dump(mode="json") if self.spec is not None else None,
            "mcmc": self.config.model_dump(mode="json") if self.config is not None else None,
        }
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()

    def has(self, name: str) -> bool:
        return name in self._index

    def get(self, name: str) -> np.ndarray:
        """(chains, draws) array of one column."""
        if name not in self._index:
            raise UnknownParameterError(name, self.columns)
        return self.values[:, :, self._index[name]]

    def pooled(self, name: str) -> np.ndarray:
        return self.get(name).reshape(-1)

    def layout(self) -> ArmLayout:
        if self.spec is None:
            raise DrawsSchemaError(["model specification"], source="posterior draws")
        return ArmLayout(self.n_covariates, self.spec)

    def arm_block(self, t: int) -> np.ndarray:
        """(chains, draws, free parameters) values of arm ``t`` in layout order."""
        names = [f"{name}_{t}" for name in self.layout().names]
        missing = [n for n in names if n not in self._index]
        if missing:
            raise DrawsSchemaError(missing)
        return self.values[:, :, [self._index[n] for n in names]]

    def state_at(self, chain: int, draw: int) -> ParamState:
        layout = self.layout()
        return ParamState(arms=tuple(layout.unpack(self.arm_block(t)[chain, draw]) for t in (0, 1)))

    def to_frame(self) -> pd.DataFrame:
        """Wide table: chain, iteration, then one column per parameter and derived quantity."""
        chains = np.repeat(np.arange(self.n_chains), self.n_draws)
        iterations = np.tile(self.iterations, self.n_chains)
        frame = pd.DataFrame(self.values.reshape(-1, len(self.columns)), columns=self.columns)
        frame.insert(0, "iteration", iterations.astype(int))
        frame.insert(0, "chain", chains.astype(int))
        return frame

    @classmethod
    def from_frame(
        cls,
        frame: pd.DataFrame,
        spec: Optional[ModelSpec] = None,
        n_covariates: Optional[int] = None,
        required: Sequence[str] = (),
    ) -> "PosteriorDraws":
        missing = [c for c in list(INDEX_COLUMNS) + list(required) if c not in frame.columns]
        if missing:
            raise DrawsSchemaError(missing)
        if frame.empty:
            raise DimensionMismatchError("draws table has no rows")
        columns = [c for c in frame.columns if c not in INDEX_COLUMNS]
        frame = frame.sort_values(["chain", "iteration"], kind="stable")
        groups = [g for _, g in frame.groupby("chain", sort=True)]
        lengths = {len(g) for g in groups}
        if len(lengths) != 1:
            raise DimensionMismatchError(f"chains in draws file have unequal lengths: {sorted(lengths)}")
        values = np.stack([g[columns].to_numpy(dtype=float) for g in groups])
        if n_covariates is None:
            n_covariates = sum(1 for c in columns if c.startswith("beta") and c.endswith("_0")) - 1
            n_covariates = max(n_covariates, 0)
        return cls(
            values=values,
            columns=columns,
            spec=spec,
            n_covariates=n_covariates,
            iterations=groups[0]["iteration"].to_numpy(dtype=int),
        )


def subgroup_zero_prob(draws: PosteriorDraws, data: TrialData, arm: int, x_raw: Sequence[float]) -> np.ndarray:
    """Posterior draws of the null-cost probability for a raw covariate profile in ``arm``."""
    x_raw = np.asarray(x_raw, dtype=float).reshape(-1)
    if x_raw.shape[0] != draws.n_covariates:
        raise DimensionMismatchError(f"profile has {x_raw.shape[0]} covariates, model has {draws.n_covariates}")
    z = x_raw - data.arms[arm].x_mean
    eta = draws.pooled(f"beta0_{arm}").copy()
    for j in range(draws.n_covariates):
        eta += draws.pooled(f"beta{j + 1}_{arm}") * z[j]
    return expit(eta)
