"""
Convergence diagnostics, DIC and posterior summaries.
"""
import logging
from dataclasses import asdict, dataclass, replace
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.special import logit

from hurdlecea.config import settings
from hurdlecea.core.data import TrialData
from hurdlecea.core.density import log_likelihood
from hurdlecea.core.params import ParamState
from hurdlecea.exceptions import DegenerateConfigurationError, DiagnosticError
from hurdlecea.posterior import PosteriorDraws
from hurdlecea.schemas import ModelSpec

logger = logging.getLogger(__name__)

# Rows of the posterior summary table, in order.
TABLE_PARAMETERS = ("p", "psi0", "mu_c", "mu_e")

MIN_ESS_LENGTH = 10


# ─── Convergence ───


def _split_chains(chains: np.ndarray) -> np.ndarray:
    n = chains.shape[1] // 2
    return np.concatenate([chains[:, :n], chains[:, -n:]], axis=0)


def rhat(chains: Sequence[Sequence[float]], split: bool = False) -> float:
    """
    Potential scale reduction factor of Gelman and Rubin.

    Uses the classic (non-rank-normalized) form; with ``split`` every chain
    is cut in two halves first, which also makes a single chain usable.
    """
    chains = np.atleast_2d(np.asarray(chains, dtype=float))
    if split:
        chains = _split_chains(chains)
    m, n = chains.shape
    if m < 2:
        raise DiagnosticError("potential scale reduction needs at least 2 chains")
    if n < 2:
        raise DiagnosticError("potential scale reduction needs chains of length >= 2")

    within = chains.var(axis=1, ddof=1)
    if np.any(within == 0):
        raise DiagnosticError("potential scale reduction is undefined for a chain with zero variance")
    W = within.mean()
    B = n * chains.mean(axis=1).var(ddof=1)
    var_plus = (n - 1) / n * W + B / n
    return float(np.sqrt(var_plus / W))


def autocorrelation(chain: np.ndarray) -> np.ndarray:
    """Sample autocorrelations at all lags, computed by FFT."""
    x = np.asarray(chain, dtype=float) - np.mean(chain)
    n = x.shape[0]
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, n=size)
    acov = np.fft.irfft(f * np.conjugate(f), n=size)[:n] / n
    return acov / acov[0]


def ess(chain: Sequence[float]) -> float:
    """Effective sample size with Geyer's initial monotone sequence truncation."""
    chain = np.asarray(chain, dtype=float).reshape(-1)
    n = chain.shape[0]
    if n < MIN_ESS_LENGTH:
        raise DiagnosticError(f"effective sample size needs at least {MIN_ESS_LENGTH} draws (got {n})")
    if np.var(chain) == 0:
        raise DiagnosticError("effective sample size is undefined for a constant chain")

    rho = autocorrelation(chain)
    n_pairs = n // 2
    pairs = rho[0:2 * n_pairs:2] + rho[1:2 * n_pairs:2]
    nonpositive = np.flatnonzero(pairs <= 0)
    stop = nonpositive[0] if nonpositive.size else n_pairs
    pairs = np.minimum.accumulate(pairs[:stop])
    tau = -1.0 + 2.0 * np.sum(pairs)
    tau = max(tau, 1.0 / np.log10(n))
    return float(n / tau)


def multichain_ess(chains: np.ndarray) -> float:
    return float(sum(ess(c) for c in np.atleast_2d(chains)))


def convergence_table(draws: PosteriorDraws, split: bool = False) -> pd.DataFrame:
    """R-hat, ESS and post-adaptation acceptance rate for every stored column."""
    records = []
    for name in draws.columns:
        chains = draws.get(name)
        try:
            r = rhat(chains, split=split or draws.n_chains < 2)
        except DiagnosticError:
            r = np.nan
        try:
            e = multichain_ess(chains)
        except DiagnosticError:
            e = np.nan
        records.append({
            "parameter": name,
            "rhat": r,
            "ess": e,
            "acceptance": draws.acceptance.get(name, np.nan),
        })
    return pd.DataFrame.from_records(records, columns=["parameter", "rhat", "ess", "acceptance"])


def check_convergence(
    table: pd.DataFrame,
    ess_threshold: Optional[float] = None,
    rhat_threshold: Optional[float] = None,
) -> bool:
    """Log a warning per column failing a threshold; True when none does."""
    ess_threshold = settings.ESS_WARN_THRESHOLD if ess_threshold is None else ess_threshold
    rhat_threshold = settings.RHAT_WARN_THRESHOLD if rhat_threshold is None else rhat_threshold
    converged = True
    for row in table.itertuples(index=False):
        if np.isfinite(row.rhat) and row.rhat > rhat_threshold:
            logger.warning(f"{row.parameter}: R-hat {row.rhat:.3f} above {rhat_threshold}")
            converged = False
        if np.isfinite(row.ess) and row.ess < ess_threshold:
            logger.warning(f"{row.parameter}: ESS {row.ess:.0f} below {ess_threshold:g}")
            converged = False
    return converged


# ─── Model fit ───


@dataclass(frozen=True)
class DicResult:
    Dbar: float
    Dhat: float
    pD: float
    DIC: float


def posterior_mean_state(draws: PosteriorDraws) -> ParamState:
    """Componentwise posterior mean, averaged on the unconstrained scale and mapped back."""
    layout = draws.layout()
    spec = layout.spec
    k = layout.psi_index
    arms = []
    for t in (0, 1):
        block = draws.arm_block(t).reshape(-1, layout.size).copy()
        block[:, k] = logit(block[:, k] / spec.H_psi)
        block[:, k + 1] = logit(block[:, k + 1] / spec.H_zeta)
        if spec.has_dispersion:
            block[:, k + 4] = np.log(block[:, k + 4])
        arms.append(layout.from_unconstrained(block.mean(axis=0)))
    return ParamState(arms=(arms[0], arms[1]))


def deviance_draws(draws: PosteriorDraws, data: TrialData, spec: ModelSpec) -> np.ndarray:
    layout = draws.layout()
    blocks = [draws.arm_block(t) for t in (0, 1)]
    out = np.empty((draws.n_chains, draws.n_draws))
    for c in range(draws.n_chains):
        for i in range(draws.n_draws):
            state = ParamState(arms=(layout.unpack(blocks[0][c, i]), layout.unpack(blocks[1][c, i])))
            out[c, i] = -2.0 * log_likelihood(state, data, spec)
    return out


def dic(draws: PosteriorDraws, data: TrialData, spec: Optional[ModelSpec] = None) -> DicResult:
    """Deviance information criterion with the plug-in deviance at the posterior mean."""
    spec = spec or draws.spec
    if draws.spec is None:
        draws = replace(draws, spec=spec)
    if draws.n_chains * draws.n_draws < 2:
        raise DiagnosticError("DIC needs at least 2 retained draws")

    Dbar = float(np.mean(deviance_draws(draws, data, spec)))
    loglik_hat = log_likelihood(posterior_mean_state(draws), data, spec)
    if not np.isfinite(loglik_hat):
        raise DegenerateConfigurationError(
            "log likelihood at the posterior mean is -inf; the model configuration is degenerate "
            "for these data (check the cost family and null likelihood mode)"
        )
    Dhat = -2.0 * loglik_hat
    pD = Dbar - Dhat
    if pD < -1e-6 * max(1.0, abs(Dbar)):
        logger.warning(f"Negative effective number of parameters (pD={pD:.3f}); DIC may be unreliable")
    return DicResult(Dbar=Dbar, Dhat=Dhat, pD=pD, DIC=Dbar + pD)


# ─── Summaries ───


@dataclass(frozen=True)
class SummaryRow:
    name: str
    mean: float
    sd: float
    q025: float
    q975: float


def default_parameters() -> List[str]:
    return [f"{name}_{t}" for name in TABLE_PARAMETERS for t in (0, 1)]


def summarize(draws: PosteriorDraws, names: Optional[Sequence[str]] = None) -> List[SummaryRow]:
    """Posterior mean, sd and 95% equal-tail interval of each parameter, pooled over chains."""
    names = list(names) if names is not None else default_parameters()
    rows = []
    for name in names:
        x = draws.pooled(name)
        if x.shape[0] < 2:
            raise DiagnosticError("summaries need at least 2 draws")
        q025, q975 = np.quantile(x, [0.025, 0.975])
        rows.append(SummaryRow(
            name=name,
            mean=float(np.mean(x)),
            sd=float(np.std(x, ddof=1)),
            q025=float(q025),
            q975=float(q975),
        ))
    return rows


def summary_frame(rows: Sequence[SummaryRow], model: Optional[str] = None) -> pd.DataFrame:
    frame = pd.DataFrame([asdict(row) for row in rows], columns=["name", "mean", "sd", "q025", "q975"])
    frame = frame.rename(columns={"name": "parameter"})
    if model is not None:
        frame.insert(0, "model", model)
    return frame
