"""
Multi-chain adaptive Metropolis-within-Gibbs sampler for the hurdle model.

Each free parameter is updated in turn by a random-walk proposal on its
unconstrained scale. Proposal scales adapt during burn-in only.
"""
import concurrent.futures
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import logit
from tenacity import RetryError, Retrying, retry_if_exception_type, stop_after_attempt
from tqdm import trange

from hurdlecea.config import settings
from hurdlecea.core.data import ArmData, TrialData
from hurdlecea.core.density import arm_log_likelihood, arm_log_prior, log_posterior
from hurdlecea.core.moments import apply_link
from hurdlecea.core.params import ArmLayout, ArmParams, ParamState, arm_derived, null_component
from hurdlecea.exceptions import InitializationError, UnsupportedDataError
from hurdlecea.posterior import PosteriorDraws, draw_columns
from hurdlecea.schemas import EffectFamily, McmcConfig, ModelSpec

logger = logging.getLogger(__name__)

MAX_INIT_ATTEMPTS = 100

# Starting points are kept this far inside the (0, H) supports.
_EDGE = 1e-6

# Single-site random-walk scale relative to the approximate posterior sd.
_RW_FACTOR = 2.4


class _NonFiniteStart(Exception):
    pass


# ─── Initialization ───


def _clamped_mean_effect(data: ArmData, spec: ModelSpec) -> float:
    mean = float(np.mean(data.eff))
    if spec.effect_family in (EffectFamily.BETA, EffectFamily.BERNOULLI):
        mean = min(max(mean, 0.01), 0.99)
    elif spec.effect_family == EffectFamily.GAMMA:
        mean = max(mean, 1e-6)
    return float(apply_link(mean, spec.link))


def _draw_start(data: TrialData, spec: ModelSpec, rng: np.random.Generator) -> ParamState:
    arms = []
    for a in data.arms:
        pos = a.positive_cost
        mean_pos = float(np.mean(pos))
        sd_pos = float(np.std(pos, ddof=1)) if pos.size > 1 else 0.5 * mean_pos
        if sd_pos <= 0:
            sd_pos = 0.5 * mean_pos

        psi0 = np.clip(mean_pos * rng.uniform(0.5, 2.0), spec.H_psi * _EDGE, spec.H_psi * (1 - _EDGE))
        zeta0 = np.clip(sd_pos * rng.uniform(0.5, 2.0), spec.H_zeta * _EDGE, spec.H_zeta * (1 - _EDGE))
        beta = np.zeros(data.n_covariates + 1)
        beta[0] = logit((a.n_null + 0.5) / (a.n + 1.0)) + rng.standard_normal()
        log_tau = rng.standard_normal()

        arms.append(ArmParams(
            beta=beta,
            psi0=float(psi0),
            zeta0=float(zeta0),
            xi=_clamped_mean_effect(a, spec),
            gamma=0.0,
            tau=float(np.exp(log_tau)) if spec.has_dispersion else 1.0,
        ))
    return ParamState(arms=(arms[0], arms[1]))


def initialize_chains(data: TrialData, spec: ModelSpec, n_chains: int, seed: int) -> List[ParamState]:
    """
    Overdispersed starting states, one per chain, deterministic given ``seed``.

    A start with a non-finite log posterior is redrawn from a fresh stream,
    up to MAX_INIT_ATTEMPTS times per chain.
    """
    for a in data.arms:
        if a.n_pos == 0:
            raise UnsupportedDataError(
                f"arm {a.arm} has no positive costs; the mean positive cost is not identifiable"
            )

    starts = []
    for chain in range(n_chains):
        try:
            for attempt in Retrying(
                stop=stop_after_attempt(MAX_INIT_ATTEMPTS),
                retry=retry_if_exception_type(_NonFiniteStart),
            ):
                with attempt:
                    number = attempt.retry_state.attempt_number - 1
                    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chain, 0, number)))
                    state = _draw_start(data, spec, rng)
                    if not np.isfinite(log_posterior(state, data, spec)):
                        raise _NonFiniteStart()
        except RetryError as exc:
            raise InitializationError(
                f"chain {chain}: no finite starting point after {MAX_INIT_ATTEMPTS} attempts"
            ) from exc
        if number:
            logger.info(f"Chain {chain}: start found after {number + 1} attempts")
        starts.append(state)
    return starts


# ─── Proposal scales ───


def _initial_scales(data: ArmData, layout: ArmLayout) -> np.ndarray:
    """Approximate posterior sds on the unconstrained scale, from the data alone."""
    spec = layout.spec
    n = data.n
    p_hat = (data.n_null + 0.5) / (n + 1.0)
    sd_beta0 = 1.0 / np.sqrt(n * p_hat * (1.0 - p_hat))

    pos = data.positive_cost
    mean_pos = float(np.clip(np.mean(pos), spec.H_psi * 0.01, spec.H_psi * 0.99))
    sd_pos = float(np.std(pos, ddof=1)) if pos.size > 1 else 0.5 * mean_pos
    sd_pos = float(np.clip(sd_pos, spec.H_zeta * 0.01, spec.H_zeta * 0.99))
    n_pos = max(data.n_pos, 1)

    def logit_scale(value: float, bound: float, sd: float) -> float:
        return sd * (1.0 / value + 1.0 / (bound - value))

    scales = [sd_beta0]
    for j in range(layout.n_covariates):
        spread = float(np.std(data.Z[:, j])) if n > 1 else 0.0
        scales.append(sd_beta0 / spread if spread > 0 else 1.0)
    scales.append(logit_scale(mean_pos, spec.H_psi, sd_pos / np.sqrt(n_pos)))
    scales.append(logit_scale(sd_pos, spec.H_zeta, sd_pos / np.sqrt(2.0 * n_pos)))
    sd_xi = 2.0 / np.sqrt(n)
    scales.append(sd_xi)
    spread_c = float(np.std(data.cost))
    scales.append(sd_xi / spread_c if spread_c > 0 else sd_xi)
    if spec.has_dispersion:
        scales.append(np.sqrt(2.0 / n))
    return _RW_FACTOR * np.asarray(scales, dtype=float)


# ─── Chains ───


class _ArmTarget:
    """Log density of one arm's free parameters on the unconstrained scale."""

    def __init__(self, data: ArmData, layout: ArmLayout, prior_only: bool = False):
        self.data = data
        self.layout = layout
        self.spec = layout.spec
        self.null = null_component(layout.spec)
        self.prior_only = prior_only

    def __call__(self, u: np.ndarray) -> float:
        arm = self.layout.from_unconstrained(u)
        value = arm_log_prior(arm, self.spec)
        if value == -np.inf:
            return value
        if not self.prior_only:
            value += arm_log_likelihood(arm, self.data, self.spec, self.null)
        value += self.layout.log_jacobian(u)
        return value if np.isfinite(value) else -np.inf


def _run_chain(
    chain: int,
    start: ParamState,
    data: TrialData,
    spec: ModelSpec,
    cfg: McmcConfig,
    layout: ArmLayout,
    prior_only: bool,
) -> Tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(chain, 1)))
    targets = [_ArmTarget(data.arms[t], layout, prior_only) for t in (0, 1)]
    u = [layout.to_unconstrained(start.arms[t]) for t in (0, 1)]
    current = [targets[t](u[t]) for t in (0, 1)]
    log_scale = [np.log(_initial_scales(data.arms[t], layout)) for t in (0, 1)]

    size = layout.size
    window_accepts = np.zeros((2, size))
    kept_accepts = np.zeros((2, size))
    rows = np.empty((cfg.n_keep, 2 * (size + 3)))
    kept = 0

    iterations = trange(1, cfg.n_iter + 1, desc=f"chain {chain}", position=chain,
                        leave=False, disable=not settings.SHOW_PROGRESS)
    for it in iterations:
        for t in (0, 1):
            for k in range(size):
                proposal = u[t].copy()
                proposal[k] += np.exp(log_scale[t][k]) * rng.standard_normal()
                log_u = np.log(rng.random())
                value = targets[t](proposal)
                if log_u < value - current[t]:
                    u[t] = proposal
                    current[t] = value
                    if it <= cfg.n_burnin:
                        window_accepts[t, k] += 1
                    else:
                        kept_accepts[t, k] += 1

        if it <= cfg.n_burnin and it % cfg.adapt_window == 0:
            batch = it // cfg.adapt_window
            rate = window_accepts / cfg.adapt_window
            for t in (0, 1):
                log_scale[t] += (rate[t] - cfg.target_accept) / np.sqrt(batch)
            window_accepts[:] = 0

        if it > cfg.n_burnin and (it - cfg.n_burnin) % cfg.thin == 0 and kept < cfg.n_keep:
            row = []
            for t in (0, 1):
                arm = layout.from_unconstrained(u[t])
                derived = arm_derived(arm, spec)
                row.extend(layout.pack(arm))
                row.extend([derived.p, derived.mu_c, derived.mu_e])
            rows[kept] = row
            kept += 1

    acceptance = kept_accepts / (cfg.n_iter - cfg.n_burnin)
    return rows, acceptance


def fit(
    data: TrialData,
    spec: ModelSpec,
    cfg: McmcConfig,
    n_workers: Optional[int] = None,
    prior_only: bool = False,
) -> PosteriorDraws:
    """
    Run ``cfg.n_chains`` chains and collect the retained draws.

    Chains run on a thread pool of ``n_workers`` (default ``settings.N_WORKERS``);
    every chain owns a stream derived from (seed, chain index), so the result
    does not depend on the number of workers. ``prior_only`` drops the
    likelihood and samples the prior.
    """
    layout = ArmLayout(data.n_covariates, spec)
    starts = initialize_chains(data, spec, cfg.n_chains, cfg.seed)
    workers = max(1, n_workers or settings.N_WORKERS)
    logger.info(
        f"Sampling {spec.label()} model: {cfg.n_chains} chains x {cfg.n_iter} iterations "
        f"(burn-in {cfg.n_burnin}, thin {cfg.thin}) on {workers} worker(s)"
    )

    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [
            executor.submit(_run_chain, chain, starts[chain], data, spec, cfg, layout, prior_only)
            for chain in range(cfg.n_chains)
        ]
        results = [f.result() for f in futures]

    values = np.stack([rows for rows, _ in results])
    acceptance = np.mean([acc for _, acc in results], axis=0)
    columns = draw_columns(layout)
    rates = {}
    for t in (0, 1):
        for k, name in enumerate(layout.names):
            rates[f"{name}_{t}"] = float(acceptance[t, k])

    iterations = cfg.n_burnin + cfg.thin * np.arange(1, cfg.n_keep + 1)
    draws = PosteriorDraws(
        values=values,
        columns=columns,
        spec=spec,
        config=cfg,
        n_covariates=data.n_covariates,
        acceptance=rates,
        iterations=iterations,
    )
    logger.info(
        f"Sampling complete: {draws.n_chains} x {draws.n_draws} draws retained, "
        f"acceptance {min(rates.values()):.2f}-{max(rates.values()):.2f}"
    )
    return draws
