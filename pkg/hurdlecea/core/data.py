"""
Trial data: per-subject records, zero-cost indicators and arm-centred covariates.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from hurdlecea.exceptions import DataValidationError, DimensionMismatchError
from hurdlecea.schemas import EffectFamily

logger = logging.getLogger(__name__)

ARMS = (0, 1)

# Beta effects equal to 0 or 1 are moved this far inside the unit interval.
BETA_CLAMP_EPS = 1e-6


@dataclass(frozen=True)
class TrialRecord:
    arm: int
    eff: float
    cost: float
    covariates: Tuple[float, ...] = ()


def derive_zero_indicators(costs: Sequence[float], row_labels: Optional[Sequence[str]] = None) -> np.ndarray:
    """1 where the observed cost is exactly zero, 0 otherwise."""
    costs = np.asarray(costs, dtype=float).reshape(-1)
    bad = ~np.isfinite(costs) | (costs < 0)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        where = row_labels[i] if row_labels is not None else f"row {i}"
        raise DataValidationError(f"{where}: cost must be finite and >= 0 (got {costs[i]})", row=i)
    return (costs == 0.0).astype(np.int8)


def center_covariates(X: np.ndarray, arms: Sequence[int]) -> Tuple[np.ndarray, Dict[int, np.ndarray]]:
    """Subtract each arm's column means; returns the centred matrix and the per-arm means."""
    arms = np.asarray(arms, dtype=int).reshape(-1)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(len(arms), -1) if X.size else np.empty((len(arms), 0))
    if X.shape[0] != len(arms):
        raise DimensionMismatchError(f"covariate matrix has {X.shape[0]} rows but {len(arms)} arm labels")
    if not np.all(np.isfinite(X)):
        i = int(np.flatnonzero(~np.isfinite(X).all(axis=1))[0])
        raise DataValidationError(f"row {i}: covariates must be finite", row=i)

    Z = np.empty_like(X)
    means: Dict[int, np.ndarray] = {}
    for t in np.unique(arms):
        rows = arms == t
        block = X[rows]
        mean = block.mean(axis=0) if block.shape[0] else np.zeros(X.shape[1])
        # sum of deviations from a float mean can drift; recentre once more
        centred = block - mean
        centred -= centred.mean(axis=0) if block.shape[0] else 0.0
        Z[rows] = centred
        means[int(t)] = mean
        for j in range(X.shape[1]):
            if block.shape[0] and np.ptp(block[:, j]) == 0:
                logger.warning(f"Covariate {j} is constant in arm {t}; its slope is not identifiable")
    return Z, means


def validate_effects(
    eff: np.ndarray,
    family: EffectFamily,
    row_labels: Sequence[str],
) -> np.ndarray:
    """Check effect values against the support of ``family``; Beta boundary values are clamped."""
    eff = np.asarray(eff, dtype=float).copy()
    if not np.all(np.isfinite(eff)):
        i = int(np.flatnonzero(~np.isfinite(eff))[0])
        raise DataValidationError(f"{row_labels[i]}: effectiveness must be finite", row=i)

    if family == EffectFamily.BETA:
        outside = (eff < 0) | (eff > 1)
        if np.any(outside):
            i = int(np.flatnonzero(outside)[0])
            raise DataValidationError(f"{row_labels[i]}: Beta effectiveness must lie in [0, 1] (got {eff[i]})", row=i)
        for i in np.flatnonzero((eff == 0) | (eff == 1)):
            clamped = min(max(eff[i], BETA_CLAMP_EPS), 1.0 - BETA_CLAMP_EPS)
            logger.warning(f"{row_labels[i]}: effectiveness {eff[i]} clamped to {clamped} for the Beta family")
            eff[i] = clamped
    elif family == EffectFamily.BERNOULLI:
        outside = (eff != 0) & (eff != 1)
        if np.any(outside):
            i = int(np.flatnonzero(outside)[0])
            raise DataValidationError(f"{row_labels[i]}: Bernoulli effectiveness must be 0 or 1 (got {eff[i]})", row=i)
    elif family == EffectFamily.GAMMA:
        outside = eff <= 0
        if np.any(outside):
            i = int(np.flatnonzero(outside)[0])
            raise DataValidationError(f"{row_labels[i]}: Gamma effectiveness must be > 0 (got {eff[i]})", row=i)
    return eff


@dataclass
class ArmData:
    """Observations for one arm, with precomputed transforms used by the likelihood."""

    arm: int
    eff: np.ndarray
    cost: np.ndarray
    d: np.ndarray
    Z: np.ndarray
    x_mean: np.ndarray
    rows: np.ndarray

    @property
    def n(self) -> int:
        return int(self.cost.shape[0])

    @property
    def n_null(self) -> int:
        return int(self.d.sum())

    @property
    def n_pos(self) -> int:
        return self.n - self.n_null

    @cached_property
    def positive_cost(self) -> np.ndarray:
        return self.cost[self.d == 0]

    @cached_property
    def log_positive_cost(self) -> np.ndarray:
        return np.log(self.positive_cost)

    @cached_property
    def log_eff(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.eff)

    @cached_property
    def log1m_eff(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log1p(-self.eff)


@dataclass
class TrialData:
    """Two-arm dataset partitioned by arm and by zero/positive cost."""

    arms: Tuple[ArmData, ArmData]
    effect_family: EffectFamily
    covariate_names: Tuple[str, ...] = ()
    records: List[TrialRecord] = field(default_factory=list)

    @property
    def n_covariates(self) -> int:
        return len(self.covariate_names)

    def arm(self, t: int) -> ArmData:
        return self.arms[t]

    @classmethod
    def from_arrays(
        cls,
        arm: Sequence[int],
        eff: Sequence[float],
        cost: Sequence[float],
        X: Optional[np.ndarray] = None,
        effect_family: EffectFamily = EffectFamily.BETA,
        covariate_names: Optional[Sequence[str]] = None,
        row_labels: Optional[Sequence[str]] = None,
    ) -> "TrialData":
        arm = np.asarray(arm).reshape(-1)
        n = arm.shape[0]
        eff = np.asarray(eff, dtype=float).reshape(-1)
        cost = np.asarray(cost, dtype=float).reshape(-1)
        if eff.shape[0] != n or cost.shape[0] != n:
            raise DimensionMismatchError("arm, eff and cost must have the same length")
        labels = list(row_labels) if row_labels is not None else [f"row {i}" for i in range(n)]

        bad_arm = ~np.isin(arm, ARMS)
        if np.any(bad_arm):
            i = int(np.flatnonzero(bad_arm)[0])
            raise DataValidationError(f"{labels[i]}: arm must be 0 or 1 (got {arm[i]})", row=i)
        arm = arm.astype(int)

        X = np.empty((n, 0)) if X is None else np.asarray(X, dtype=float).reshape(n, -1)
        names = tuple(covariate_names) if covariate_names is not None else tuple(
            f"x{j + 1}" for j in range(X.shape[1])
        )
        if len(names) != X.shape[1]:
            raise DimensionMismatchError(f"{len(names)} covariate names for {X.shape[1]} columns")

        d = derive_zero_indicators(cost, labels)
        eff = validate_effects(eff, effect_family, labels)
        Z, means = center_covariates(X, arm)

        arm_data = []
        for t in ARMS:
            rows = np.flatnonzero(arm == t)
            if rows.size == 0:
                raise DataValidationError(f"arm {t} has no records")
            arm_data.append(ArmData(
                arm=t,
                eff=eff[rows],
                cost=cost[rows],
                d=d[rows],
                Z=Z[rows],
                x_mean=means[t],
                rows=rows,
            ))

        records = [
            TrialRecord(arm=int(arm[i]), eff=float(eff[i]), cost=float(cost[i]), covariates=tuple(X[i].tolist()))
            for i in range(n)
        ]
        data = cls(arms=(arm_data[0], arm_data[1]), effect_family=effect_family,
                   covariate_names=names, records=records)
        for a in data.arms:
            logger.info(f"Arm {a.arm}: n={a.n}, positive={a.n_pos}, null={a.n_null}")
        return data

    @classmethod
    def from_records(cls, records: Sequence[TrialRecord], effect_family: EffectFamily = EffectFamily.BETA) -> "TrialData":
        J = len(records[0].covariates) if records else 0
        X = np.array([r.covariates for r in records], dtype=float).reshape(len(records), J)
        return cls.from_arrays(
            arm=[r.arm for r in records],
            eff=[r.eff for r in records],
            cost=[r.cost for r in records],
            X=X,
            effect_family=effect_family,
        )

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            "arm": [r.arm for r in self.records],
            "eff": [r.eff for r in self.records],
            "cost": [r.cost for r in self.records],
        })
        for j, name in enumerate(self.covariate_names):
            frame[name] = [r.covariates[j] for r in self.records]
        return frame
