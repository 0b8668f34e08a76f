"""
Moment conversions between natural-scale (mean, sd) and family parameters,
the mixture mean of the hurdle cost model, and link functions.
"""
import logging
from typing import Tuple, Union

import numpy as np
from scipy.special import expit, logit

from hurdlecea.exceptions import ModelDomainError
from hurdlecea.schemas import CostFamily, Link

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]

# Largest argument for which exp() stays finite in double precision.
_EXP_MAX = 709.0
_TINY = np.finfo(float).tiny
_ONE_MINUS = np.nextafter(1.0, 0.0)


def _require_positive(name: str, value: ArrayLike) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise ModelDomainError(f"{name} must be finite and > 0 (got {value})")
    return arr


def gamma_moments(eta: ArrayLike, lam: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Mean and sd of a Gamma with shape ``eta`` and rate ``lam``."""
    eta = _require_positive("shape", eta)
    lam = _require_positive("rate", lam)
    return eta / lam, np.sqrt(eta) / lam


def gamma_from_moments(psi: ArrayLike, zeta: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Shape and rate of the Gamma with mean ``psi`` and sd ``zeta``."""
    psi = _require_positive("mean", psi)
    zeta = _require_positive("sd", zeta)
    lam = psi / zeta ** 2
    return psi * lam, lam


def lognormal_moments(eta: ArrayLike, lam: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Natural-scale mean and sd of a log-Normal with log-mean ``eta`` and log-sd ``lam``."""
    eta = np.asarray(eta, dtype=float)
    lam = _require_positive("log-sd", lam)
    if not np.all(np.isfinite(eta)):
        raise ModelDomainError(f"log-mean must be finite (got {eta})")
    with np.errstate(over="ignore", invalid="ignore"):
        psi = np.exp(eta + lam ** 2 / 2.0)
        zeta = np.sqrt(np.expm1(lam ** 2) * np.exp(2.0 * eta + lam ** 2))
    if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(zeta))):
        raise ModelDomainError(
            f"log-Normal parameters (eta={eta}, lambda={lam}) imply non-representable moments"
        )
    return psi, zeta


def lognormal_from_moments(psi: ArrayLike, zeta: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Log-mean and log-sd of the log-Normal with natural-scale mean ``psi`` and sd ``zeta``."""
    psi = _require_positive("mean", psi)
    zeta = _require_positive("sd", zeta)
    log_cv2 = np.log1p((zeta / psi) ** 2)
    return np.log(psi) - log_cv2 / 2.0, np.sqrt(log_cv2)


def family_from_moments(family: CostFamily, psi: ArrayLike, zeta: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Native parameters of ``family`` from natural-scale mean and sd."""
    if family == CostFamily.GAMMA:
        return gamma_from_moments(psi, zeta)
    if family == CostFamily.LOGNORMAL:
        return lognormal_from_moments(psi, zeta)
    return _require_positive("mean", psi), _require_positive("sd", zeta)


def mixture_mean(p: ArrayLike, psi0: ArrayLike, psi1: ArrayLike) -> ArrayLike:
    """Population mean cost (1 - p) * psi0 + p * psi1."""
    p_arr = np.asarray(p, dtype=float)
    if np.any(~(p_arr >= 0.0) | ~(p_arr <= 1.0)):
        raise ModelDomainError(f"probability must lie in [0, 1] (got {p})")
    return (1.0 - p) * psi0 + p * psi1


def apply_link(x: ArrayLike, link: Link) -> ArrayLike:
    """g(x) for the configured link."""
    if link == Link.LOGIT:
        return logit(x)
    if link == Link.LOG:
        return np.log(x)
    return x


def inverse_link(x: ArrayLike, link: Link) -> ArrayLike:
    """g^-1(x); saturates at the support boundaries instead of overflowing."""
    if link == Link.LOGIT:
        return np.clip(expit(x), _TINY, _ONE_MINUS)
    if link == Link.LOG:
        return np.exp(np.minimum(x, _EXP_MAX))
    return x
