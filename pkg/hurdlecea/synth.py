"""
Synthetic trial generation from the hurdle model's generative process, and
slow independent oracles (conjugate closed form, grid quadrature) used to
validate the sampler.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple, Union

import numpy as np
from scipy import stats
from scipy.special import logit, logsumexp

from hurdlecea.core.data import TrialData
from hurdlecea.core.moments import family_from_moments, inverse_link, mixture_mean
from hurdlecea.exceptions import ModelDomainError
from hurdlecea.schemas import ArmTruth, CostFamily, EffectFamily, ModelSpec, TruthParams

logger = logging.getLogger(__name__)

GRID_RESOLUTION = 400

# Bundled demo dataset: case-study arm sizes and a fixed seed.
DEMO_ARM_SIZES = (119, 136)
DEMO_SEED = 20140101


# ─── Simulation ───


def _draw_costs(family: CostFamily, psi: float, zeta: float, size: int, rng: np.random.Generator) -> np.ndarray:
    a, b = family_from_moments(family, psi, zeta)
    a, b = float(a), float(b)
    if family == CostFamily.GAMMA:
        return rng.gamma(shape=a, scale=1.0 / b, size=size)
    if family == CostFamily.LOGNORMAL:
        return rng.lognormal(mean=a, sigma=b, size=size)
    costs = rng.normal(a, b, size=size)
    # negative Normal draws are redrawn until every cost is positive
    bad = costs <= 0
    while np.any(bad):
        costs[bad] = rng.normal(a, b, size=int(bad.sum()))
        bad = costs <= 0
    return costs


def _draw_effects(
    family: EffectFamily,
    phi: np.ndarray,
    tau: float,
    rng: np.random.Generator,
) -> np.ndarray:
    if family == EffectFamily.BETA:
        return rng.beta(phi * tau, (1.0 - phi) * tau)
    if family == EffectFamily.BERNOULLI:
        return (rng.random(phi.shape[0]) < phi).astype(float)
    if family == EffectFamily.GAMMA:
        return rng.gamma(shape=tau, scale=phi / tau)
    return rng.normal(phi, 1.0 / np.sqrt(tau))


def simulate_dataset(
    truth: TruthParams,
    n_per_arm: Union[int, Tuple[int, int]],
    seed: int,
) -> TrialData:
    """
    Draw a two-arm trial: zero indicator, cost given the indicator, then
    effectiveness given cost with mean g^-1(xi + gamma * (c - mu_c)).
    """
    sizes = (n_per_arm, n_per_arm) if isinstance(n_per_arm, int) else tuple(n_per_arm)
    if len(sizes) != 2 or min(sizes) < 1:
        raise ModelDomainError(f"n per arm must be positive (got {n_per_arm})")
    rng = np.random.default_rng(seed)

    arm_col, eff_col, cost_col = [], [], []
    for t, (arm, n) in enumerate(zip(truth.arms, sizes)):
        d = rng.random(n) < arm.p
        cost = np.zeros(n)
        n_pos = int((~d).sum())
        if n_pos:
            cost[~d] = _draw_costs(truth.cost_family, arm.psi0, arm.zeta0, n_pos, rng)
        mu_c = mixture_mean(arm.p, arm.psi0, 0.0)
        phi = inverse_link(arm.xi + arm.gamma * (cost - mu_c), truth.link)
        eff = _draw_effects(truth.effect_family, np.asarray(phi, dtype=float), arm.tau, rng)
        if truth.effect_family == EffectFamily.BETA:
            # keep draws strictly inside (0, 1) so no record needs clamping
            eff = np.clip(eff, 1e-6, 1.0 - 1e-6)
        arm_col.append(np.full(n, t))
        eff_col.append(eff)
        cost_col.append(cost)

    data = TrialData.from_arrays(
        arm=np.concatenate(arm_col),
        eff=np.concatenate(eff_col),
        cost=np.concatenate(cost_col),
        effect_family=truth.effect_family,
    )
    logger.info(f"Simulated {sum(sizes)} records ({truth.cost_family.value} costs, seed {seed})")
    return data


def case_study_truth(cost_family: CostFamily = CostFamily.GAMMA) -> TruthParams:
    """Truth close to the posterior means reported for the acupuncture trial, Beta effects."""
    return TruthParams(
        arms=(
            ArmTruth(p=0.039, psi0=227.0, zeta0=150.0, xi=float(logit(0.710)), gamma=0.0, tau=20.0),
            ArmTruth(p=0.011, psi0=408.0, zeta0=200.0, xi=float(logit(0.729)), gamma=0.0, tau=20.0),
        ),
        cost_family=cost_family,
        effect_family=EffectFamily.BETA,
    )


# ─── Oracles ───


@dataclass(frozen=True)
class ConjugateZeroPosterior:
    mean: float
    quantile: Callable[[Union[float, np.ndarray]], Union[float, np.ndarray]]
    cdf: Callable[[Union[float, np.ndarray]], Union[float, np.ndarray]]


def conjugate_zero_posterior(y: int, n: int) -> ConjugateZeroPosterior:
    """Beta(y, n - y) posterior of the zero probability under a flat prior on the logit intercept."""
    if not 0 < y < n:
        raise ModelDomainError(
            f"zero count must satisfy 0 < y < n (got y={y}, n={n}); the posterior is improper otherwise"
        )
    dist = stats.beta(y, n - y)
    return ConjugateZeroPosterior(mean=y / n, quantile=dist.ppf, cdf=dist.cdf)


def grid_posterior_cost(
    costs: Sequence[float],
    spec: ModelSpec,
    resolution: int = GRID_RESOLUTION,
) -> Tuple[float, float]:
    """
    Posterior means of (psi0, zeta0) for positive costs under Uniform(0, H)
    priors, by midpoint quadrature on a resolution x resolution grid.
    """
    costs = np.asarray(costs, dtype=float).reshape(-1)
    if costs.size < 2 or np.any(costs <= 0):
        raise ModelDomainError("grid oracle needs at least 2 positive costs")

    psi = (np.arange(resolution) + 0.5) * spec.H_psi / resolution
    zeta = (np.arange(resolution) + 0.5) * spec.H_zeta / resolution
    P, Z = np.meshgrid(psi, zeta, indexing="ij")
    a, b = family_from_moments(spec.cost_family, P, Z)

    if spec.cost_family == CostFamily.GAMMA:
        dist = stats.gamma(a[..., None], scale=1.0 / b[..., None])
    elif spec.cost_family == CostFamily.LOGNORMAL:
        dist = stats.lognorm(s=b[..., None], scale=np.exp(a[..., None]))
    else:
        dist = stats.norm(loc=a[..., None], scale=b[..., None])
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        log_post = dist.logpdf(costs).sum(axis=-1)

    finite = np.isfinite(log_post)
    if not np.any(finite):
        raise ModelDomainError(
            "likelihood underflows on the whole grid; evaluate in log space with max-subtraction"
        )
    log_post = np.where(finite, log_post, -np.inf)
    weights = np.exp(log_post - logsumexp(log_post))
    return float(np.sum(weights * P)), float(np.sum(weights * Z))
