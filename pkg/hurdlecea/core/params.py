"""
Parameter containers for the three-module hurdle model, the fixed null-cost
component, derived quantities and the constrained/unconstrained layout used
by the sampler.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, log_expit, logit

from hurdlecea.core.data import ArmData, TrialData
from hurdlecea.core.moments import gamma_moments, inverse_link, lognormal_moments, mixture_mean
from hurdlecea.exceptions import DimensionMismatchError
from hurdlecea.schemas import CostFamily, ModelSpec, NullLikelihoodMode

logger = logging.getLogger(__name__)


@dataclass
class ArmParams:
    """Free parameters of one arm. ``tau`` is unused for the Bernoulli effect family."""

    beta: np.ndarray
    psi0: float
    zeta0: float
    xi: float
    gamma: float = 0.0
    tau: float = 1.0

    def __post_init__(self):
        self.beta = np.atleast_1d(np.asarray(self.beta, dtype=float))

    @property
    def n_covariates(self) -> int:
        return int(self.beta.shape[0]) - 1

    def copy(self) -> "ArmParams":
        return replace(self, beta=self.beta.copy())


@dataclass
class ParamState:
    arms: Tuple[ArmParams, ArmParams]

    def arm(self, t: int) -> ArmParams:
        return self.arms[t]

    def copy(self) -> "ParamState":
        return ParamState(arms=(self.arms[0].copy(), self.arms[1].copy()))


@dataclass(frozen=True)
class NullComponent:
    """Fixed parameters of the null-cost component and the moments that enter the mixture mean."""

    eta: float
    lam: float
    psi: float
    zeta: float
    point_mass: bool


def null_component(spec: ModelSpec) -> NullComponent:
    """
    Native parameters implied by (w, W) for the configured cost family.

    Gamma uses shape w and rate W, log-Normal uses log-mean -W and log-sd w,
    Normal uses mean 0 and sd w/W. In point-mass mode the component is an
    exact mass at zero, so its moments are 0.
    """
    if spec.cost_family == CostFamily.GAMMA:
        eta, lam = spec.w, spec.W
        psi, zeta = gamma_moments(eta, lam)
    elif spec.cost_family == CostFamily.LOGNORMAL:
        eta, lam = -spec.W, spec.w
        psi, zeta = lognormal_moments(eta, lam)
    else:
        eta, lam = 0.0, spec.w / spec.W
        psi, zeta = 0.0, lam

    if spec.null_likelihood_mode == NullLikelihoodMode.POINT_MASS:
        return NullComponent(eta=float(eta), lam=float(lam), psi=0.0, zeta=0.0, point_mass=True)
    return NullComponent(eta=float(eta), lam=float(lam), psi=float(psi), zeta=float(zeta), point_mass=False)


def predict_zero_prob(beta: Sequence[float], z: Sequence[float]) -> float:
    """Probability of a null cost for a centred covariate profile ``z``."""
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.shape[0] != beta.shape[0] - 1:
        raise DimensionMismatchError(
            f"covariate profile has length {z.shape[0]}, expected {beta.shape[0] - 1}"
        )
    return float(expit(beta[0] + z @ beta[1:]))


@dataclass
class DerivedQuantities:
    p: float
    mu_c: float
    mu_e: float
    pi: Optional[np.ndarray] = None
    phi: Optional[np.ndarray] = None


def arm_derived(
    arm: ArmParams,
    spec: ModelSpec,
    data: Optional[ArmData] = None,
    per_subject: bool = False,
) -> DerivedQuantities:
    null = null_component(spec)
    p = float(expit(arm.beta[0]))
    mu_c = float(mixture_mean(p, arm.psi0, null.psi))
    mu_e = float(inverse_link(arm.xi, spec.link))
    out = DerivedQuantities(p=p, mu_c=mu_c, mu_e=mu_e)
    if per_subject and data is not None:
        out.pi = expit(arm.beta[0] + data.Z @ arm.beta[1:])
        out.phi = inverse_link(arm.xi + arm.gamma * (data.cost - mu_c), spec.link)
    return out


def derived_quantities(
    state: ParamState,
    spec: ModelSpec,
    data: Optional[TrialData] = None,
    per_subject: bool = False,
) -> Tuple[DerivedQuantities, DerivedQuantities]:
    """p, mu_c and mu_e per arm; per-subject pi and phi as well when data is given."""
    return tuple(
        arm_derived(state.arms[t], spec, data.arms[t] if data is not None else None, per_subject)
        for t in range(2)
    )


# ─── Sampler layout ───


@dataclass
class ArmLayout:
    """
    Ordering of one arm's free parameters and the maps between the natural
    scale and the unconstrained scale the random-walk updates act on.

    psi0 and zeta0 live on (0, H) and are updated as logit(value / H);
    tau is updated as log(tau), which is the scale its prior is stated on.
    """

    n_covariates: int
    spec: ModelSpec
    names: List[str] = field(init=False)

    def __post_init__(self):
        self.names = [f"beta{j}" for j in range(self.n_covariates + 1)]
        self.names += ["psi0", "zeta0", "xi", "gamma"]
        if self.spec.has_dispersion:
            self.names.append("tau")

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def psi_index(self) -> int:
        return self.n_covariates + 1

    def pack(self, arm: ArmParams) -> np.ndarray:
        values = list(arm.beta) + [arm.psi0, arm.zeta0, arm.xi, arm.gamma]
        if self.spec.has_dispersion:
            values.append(arm.tau)
        return np.asarray(values, dtype=float)

    def unpack(self, theta: np.ndarray) -> ArmParams:
        k = self.psi_index
        return ArmParams(
            beta=np.array(theta[:k], dtype=float),
            psi0=float(theta[k]),
            zeta0=float(theta[k + 1]),
            xi=float(theta[k + 2]),
            gamma=float(theta[k + 3]),
            tau=float(theta[k + 4]) if self.spec.has_dispersion else 1.0,
        )

    def to_unconstrained(self, arm: ArmParams) -> np.ndarray:
        u = self.pack(arm)
        k = self.psi_index
        u[k] = logit(arm.psi0 / self.spec.H_psi)
        u[k + 1] = logit(arm.zeta0 / self.spec.H_zeta)
        if self.spec.has_dispersion:
            u[k + 4] = np.log(arm.tau)
        return u

    def from_unconstrained(self, u: np.ndarray) -> ArmParams:
        theta = np.array(u, dtype=float)
        k = self.psi_index
        theta[k] = self.spec.H_psi * expit(u[k])
        theta[k + 1] = self.spec.H_zeta * expit(u[k + 1])
        if self.spec.has_dispersion:
            theta[k + 4] = np.exp(u[k + 4])
        return self.unpack(theta)

    def log_jacobian(self, u: np.ndarray) -> float:
        """log |d theta / d u| for the bounded coordinates; log(tau) carries its own prior."""
        k = self.psi_index
        total = 0.0
        for idx, bound in ((k, self.spec.H_psi), (k + 1, self.spec.H_zeta)):
            total += np.log(bound) + log_expit(u[idx]) + log_expit(-u[idx])
        return float(total)
