"""
Validated configuration models: model specification, MCMC settings,
willingness-to-pay grid, simulation truth and the full run configuration.
"""
import logging
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

logger = logging.getLogger(__name__)


class CostFamily(str, Enum):
    GAMMA = "gamma"
    LOGNORMAL = "lognormal"
    NORMAL = "normal"


class EffectFamily(str, Enum):
    BETA = "beta"
    BERNOULLI = "bernoulli"
    GAMMA = "gamma"
    NORMAL = "normal"


class Link(str, Enum):
    LOGIT = "logit"
    LOG = "log"
    IDENTITY = "identity"


class SelectionPrior(str, Enum):
    AUTO = "auto"
    NORMAL = "normal"
    CAUCHY = "cauchy"


class NullLikelihoodMode(str, Enum):
    POINT_MASS = "point-mass"
    DEGENERATE_DENSITY = "degenerate-density"


EFFECT_LINKS: Dict[EffectFamily, Link] = {
    EffectFamily.BETA: Link.LOGIT,
    EffectFamily.BERNOULLI: Link.LOGIT,
    EffectFamily.GAMMA: Link.LOG,
    EffectFamily.NORMAL: Link.IDENTITY,
}

# Case-study values: W=10000 for Gamma, W=50 for log-Normal.
DEFAULT_W: Dict[CostFamily, float] = {
    CostFamily.GAMMA: 10000.0,
    CostFamily.LOGNORMAL: 50.0,
    CostFamily.NORMAL: 10000.0,
}

MIN_RETAINED_DRAWS = 100


class ModelSpec(BaseModel):
    """Cost family, effect family, link and every prior hyperparameter."""

    model_config = ConfigDict(frozen=True)

    cost_family: CostFamily = CostFamily.GAMMA
    effect_family: EffectFamily = EffectFamily.BETA
    link: Link = Link.LOGIT
    w: float = Field(1.0, gt=0)
    W: float = Field(10000.0, gt=0)
    H_psi: float = Field(1000.0, gt=0)
    H_zeta: float = Field(300.0, gt=0)
    selection_prior: SelectionPrior = SelectionPrior.AUTO
    selection_prior_sd: float = Field(100.0, gt=0)
    cauchy_scale: float = Field(2.5, gt=0)
    effect_prior_sd: float = Field(100.0, gt=0)
    null_likelihood_mode: NullLikelihoodMode = NullLikelihoodMode.POINT_MASS

    @model_validator(mode="before")
    @classmethod
    def _fill_family_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = dict(data)
        effect = EffectFamily(data.get("effect_family") or EffectFamily.BETA)
        cost = CostFamily(data.get("cost_family") or CostFamily.GAMMA)
        if data.get("link") is None:
            data["link"] = EFFECT_LINKS[effect]
        if data.get("W") is None:
            data["W"] = DEFAULT_W[cost]
        return data

    @model_validator(mode="after")
    def _check_invariants(self) -> "ModelSpec":
        expected = EFFECT_LINKS[self.effect_family]
        if self.link != expected:
            raise ValueError(
                f"link '{self.link.value}' is incompatible with effect family "
                f"'{self.effect_family.value}' (expected '{expected.value}')"
            )
        if not self.w < self.W:
            raise ValueError(f"w must be smaller than W (got w={self.w}, W={self.W})")
        return self

    @property
    def has_dispersion(self) -> bool:
        """Whether the effect family carries the dispersion parameter tau."""
        return self.effect_family != EffectFamily.BERNOULLI

    def resolved_selection_prior(self, n_covariates: int) -> SelectionPrior:
        if self.selection_prior != SelectionPrior.AUTO:
            return self.selection_prior
        return SelectionPrior.CAUCHY if n_covariates == 0 else SelectionPrior.NORMAL

    def with_W(self, W: float) -> "ModelSpec":
        return ModelSpec(**{**self.model_dump(), "W": W})

    def label(self) -> str:
        return f"{self.cost_family.value}/{self.effect_family.value}"


class McmcConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_iter: int = Field(10000, gt=0)
    n_burnin: int = Field(5000, ge=0)
    thin: int = Field(10, ge=1)
    n_chains: int = Field(2, ge=1)
    seed: int = Field(20140101, ge=0, lt=2 ** 64)
    adapt_window: int = Field(50, ge=1)
    target_accept: float = Field(0.44, gt=0, lt=1)

    @model_validator(mode="after")
    def _check_lengths(self) -> "McmcConfig":
        if self.n_burnin >= self.n_iter:
            raise ValueError(f"n_burnin ({self.n_burnin}) must be smaller than n_iter ({self.n_iter})")
        if self.n_keep < MIN_RETAINED_DRAWS:
            logger.warning(
                f"Only {self.n_keep} draws per chain will be retained "
                f"(fewer than {MIN_RETAINED_DRAWS}); summaries will be noisy"
            )
        return self

    @property
    def n_keep(self) -> int:
        return (self.n_iter - self.n_burnin) // self.thin

    def with_seed(self, seed: int) -> "McmcConfig":
        return McmcConfig(**{**self.model_dump(), "seed": seed})


class WtpGrid(BaseModel):
    """Willingness-to-pay values, currency per unit of effectiveness."""

    start: float = Field(0.0, ge=0)
    stop: float = Field(50000.0, ge=0)
    step: float = Field(100.0, gt=0)
    values: Optional[List[float]] = None

    @field_validator("values")
    @classmethod
    def _check_values(cls, values: Optional[List[float]]) -> Optional[List[float]]:
        if values is None:
            return values
        if len(values) == 0:
            raise ValueError("willingness-to-pay grid is empty")
        arr = np.asarray(values, dtype=float)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("willingness-to-pay values must be finite and nonnegative")
        if np.any(np.diff(arr) <= 0):
            raise ValueError("willingness-to-pay values must be strictly increasing")
        return values

    @model_validator(mode="after")
    def _check_range(self) -> "WtpGrid":
        if self.values is None and self.stop < self.start:
            raise ValueError("willingness-to-pay grid is empty (stop < start)")
        return self

    def as_array(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(n, dtype=float)


class ArmTruth(BaseModel):
    p: float = Field(..., ge=0, le=1)
    psi0: float = Field(..., gt=0)
    zeta0: float = Field(..., gt=0)
    xi: float = 0.0
    gamma: float = 0.0
    tau: float = Field(20.0, gt=0)


class TruthParams(BaseModel):
    """Data-generating values for both arms."""

    arms: Tuple[ArmTruth, ArmTruth]
    cost_family: CostFamily = CostFamily.GAMMA
    effect_family: EffectFamily = EffectFamily.BETA

    @property
    def link(self) -> Link:
        return EFFECT_LINKS[self.effect_family]


# ─────────────────────────────── Run configuration ───────────────────────────────


class DataSection(BaseModel):
    path: Optional[Path] = None
    output_dir: Optional[Path] = None


class ModelSection(BaseModel):
    """Model choices as written in the config file; expands into one ModelSpec per cost family."""

    cost_families: List[CostFamily] = Field(default_factory=lambda: [CostFamily.GAMMA])
    effect_family: EffectFamily = EffectFamily.BETA
    link: Optional[Link] = None
    w: Optional[float] = None
    W: Optional[float] = None
    H_psi: Optional[float] = None
    H_zeta: Optional[float] = None
    selection_prior: Optional[SelectionPrior] = None
    selection_prior_sd: Optional[float] = None
    cauchy_scale: Optional[float] = None
    effect_prior_sd: Optional[float] = None
    null_likelihood_mode: Optional[NullLikelihoodMode] = None

    @field_validator("cost_families")
    @classmethod
    def _check_families(cls, families: List[CostFamily]) -> List[CostFamily]:
        if not 1 <= len(families) <= 2:
            raise ValueError("cost_families must list one or two families")
        if len(set(families)) != len(families):
            raise ValueError("cost_families must not repeat a family")
        return families

    @model_validator(mode="after")
    def _check_specs(self) -> "ModelSection":
        self.specs()
        return self

    def specs(self) -> List[ModelSpec]:
        fields = self.model_dump(exclude={"cost_families"}, exclude_none=True)
        return [ModelSpec(cost_family=family, **fields) for family in self.cost_families]


class EconSection(BaseModel):
    wtp: WtpGrid = Field(default_factory=WtpGrid)
    draws: Optional[Path] = None


class SensitivitySection(BaseModel):
    W_grid: List[float] = Field(default_factory=lambda: [10.0, 100.0, 1000.0, 10000.0, 100000.0])

    @field_validator("W_grid")
    @classmethod
    def _check_grid(cls, grid: List[float]) -> List[float]:
        if not grid:
            raise ValueError("W grid is empty")
        return grid


class ReportSection(BaseModel):
    svg: bool = True
    dic: bool = True
    split_rhat: bool = False
    ess_threshold: Optional[float] = None
    rhat_threshold: Optional[float] = None


class RunConfig(BaseModel):
    data: DataSection = Field(default_factory=DataSection)
    model: ModelSection = Field(default_factory=ModelSection)
    mcmc: McmcConfig = Field(default_factory=McmcConfig)
    econ: EconSection = Field(default_factory=EconSection)
    sensitivity: SensitivitySection = Field(default_factory=SensitivitySection)
    report: ReportSection = Field(default_factory=ReportSection)
