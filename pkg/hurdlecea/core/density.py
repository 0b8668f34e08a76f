"""
Log prior, log likelihood and log posterior of the hurdle model.

All densities are written in closed form on numpy arrays; ``-inf`` signals a
state outside the support.
"""
import logging
from typing import NamedTuple

import numpy as np
from scipy.special import betaln, expit, gammaln, log_expit

from hurdlecea.core.data import ArmData, TrialData
from hurdlecea.core.moments import family_from_moments, inverse_link, mixture_mean
from hurdlecea.core.params import ArmParams, NullComponent, ParamState, null_component
from hurdlecea.schemas import CostFamily, EffectFamily, ModelSpec, SelectionPrior

logger = logging.getLogger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))

# Null costs are evaluated here in degenerate-density mode.
NULL_COST_FLOOR = 1e-8


# ─── Elementary log densities ───


def normal_logpdf(x, mean: float, sd: float):
    z = (np.asarray(x, dtype=float) - mean) / sd
    return -0.5 * LOG_2PI - np.log(sd) - 0.5 * z * z


def cauchy_logpdf(x, scale: float):
    z = np.asarray(x, dtype=float) / scale
    return -np.log(np.pi * scale) - np.log1p(z * z)


def cost_log_density(family: CostFamily, c: np.ndarray, a: float, b: float, log_c: np.ndarray = None) -> np.ndarray:
    """
    Log density of costs ``c`` under the family's native parameters:
    Gamma(shape a, rate b), log-Normal(log-mean a, log-sd b), Normal(mean a, sd b).
    """
    c = np.asarray(c, dtype=float)
    if family == CostFamily.GAMMA:
        if log_c is None:
            log_c = np.log(c)
        return a * np.log(b) - gammaln(a) + (a - 1.0) * log_c - b * c
    if family == CostFamily.LOGNORMAL:
        if log_c is None:
            log_c = np.log(c)
        z = (log_c - a) / b
        return -log_c - np.log(b) - 0.5 * LOG_2PI - 0.5 * z * z
    return normal_logpdf(c, a, b)


def effect_log_density(arm: ArmParams, data: ArmData, spec: ModelSpec, mu_c: float) -> np.ndarray:
    """Per-record log density of effectiveness given cost, centred on the arm's mixture mean cost."""
    eta = arm.xi + arm.gamma * (data.cost - mu_c)
    family = spec.effect_family
    e = data.eff
    if family == EffectFamily.BERNOULLI:
        return e * log_expit(eta) + (1.0 - e) * log_expit(-eta)

    phi = inverse_link(eta, spec.link)
    tau = arm.tau
    if family == EffectFamily.BETA:
        a = phi * tau
        b = (1.0 - phi) * tau
        return (a - 1.0) * data.log_eff + (b - 1.0) * data.log1m_eff - betaln(a, b)
    if family == EffectFamily.GAMMA:
        rate = tau / phi
        return tau * np.log(rate) - gammaln(tau) + (tau - 1.0) * data.log_eff - rate * e
    return 0.5 * np.log(tau) - 0.5 * LOG_2PI - 0.5 * tau * (e - phi) ** 2


# ─── Prior ───


def arm_log_prior(arm: ArmParams, spec: ModelSpec) -> float:
    if not (0.0 < arm.psi0 < spec.H_psi and 0.0 < arm.zeta0 < spec.H_zeta):
        return -np.inf
    if spec.has_dispersion and not (arm.tau > 0.0 and np.isfinite(arm.tau)):
        return -np.inf

    if spec.resolved_selection_prior(arm.n_covariates) == SelectionPrior.CAUCHY:
        total = float(np.sum(cauchy_logpdf(arm.beta, spec.cauchy_scale)))
    else:
        total = float(np.sum(normal_logpdf(arm.beta, 0.0, spec.selection_prior_sd)))

    total -= np.log(spec.H_psi) + np.log(spec.H_zeta)
    total += float(normal_logpdf(arm.xi, 0.0, spec.effect_prior_sd))
    total += float(normal_logpdf(arm.gamma, 0.0, spec.effect_prior_sd))
    if spec.has_dispersion:
        total += float(normal_logpdf(np.log(arm.tau), 0.0, spec.effect_prior_sd))
    return total


def log_prior(state: ParamState, spec: ModelSpec) -> float:
    """Sum of the independent prior log densities of both arms."""
    return sum(arm_log_prior(arm, spec) for arm in state.arms)


# ─── Likelihood ───


class LikelihoodTerms(NamedTuple):
    selection: float
    cost_pos: float
    cost_null: float
    effect: float

    @property
    def total(self) -> float:
        return self.selection + self.cost_pos + self.cost_null + self.effect


def arm_log_likelihood_terms(
    arm: ArmParams,
    data: ArmData,
    spec: ModelSpec,
    null: NullComponent = None,
) -> LikelihoodTerms:
    if null is None:
        null = null_component(spec)

    eta_sel = arm.beta[0] + data.Z @ arm.beta[1:]
    selection = float(np.sum(data.d * log_expit(eta_sel) + (1 - data.d) * log_expit(-eta_sel)))

    if arm.psi0 <= 0.0 or arm.zeta0 <= 0.0:
        return LikelihoodTerms(selection, -np.inf, 0.0, 0.0)
    a, b = family_from_moments(spec.cost_family, arm.psi0, arm.zeta0)
    with np.errstate(over="ignore", invalid="ignore"):
        pos = cost_log_density(spec.cost_family, data.positive_cost, float(a), float(b), data.log_positive_cost)
    cost_pos = float(np.sum(pos))

    cost_null = 0.0
    if not null.point_mass and data.n_null:
        c_null = np.maximum(data.cost[data.d == 1], NULL_COST_FLOOR)
        cost_null = float(np.sum(cost_log_density(spec.cost_family, c_null, null.eta, null.lam)))

    p = float(expit(arm.beta[0]))
    mu_c = mixture_mean(p, arm.psi0, null.psi)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        eff = effect_log_density(arm, data, spec, mu_c)
    effect = float(np.sum(eff))

    terms = [selection, cost_pos, cost_null, effect]
    terms = [t if not np.isnan(t) else -np.inf for t in terms]
    return LikelihoodTerms(*terms)


def arm_log_likelihood(arm: ArmParams, data: ArmData, spec: ModelSpec, null: NullComponent = None) -> float:
    return arm_log_likelihood_terms(arm, data, spec, null).total


def log_likelihood(state: ParamState, data: TrialData, spec: ModelSpec) -> float:
    """Selection, positive-cost, null-cost and effect log likelihood summed over both arms."""
    null = null_component(spec)
    return sum(arm_log_likelihood(state.arms[t], data.arms[t], spec, null) for t in range(2))


def arm_log_posterior(arm: ArmParams, data: ArmData, spec: ModelSpec, null: NullComponent = None) -> float:
    lp = arm_log_prior(arm, spec)
    if lp == -np.inf:
        return lp
    return lp + arm_log_likelihood(arm, data, spec, null)


def log_posterior(state: ParamState, data: TrialData, spec: ModelSpec) -> float:
    lp = log_prior(state, spec)
    if lp == -np.inf:
        return lp
    return lp + log_likelihood(state, data, spec)
