"""Statistical checks used by the verification experiments."""

from __future__ import annotations

import logging
import math
import warnings
from typing import Callable, Sequence

import numpy as np
from scipy import stats
from scipy.special import kolmogorov

from .errors import (
    ERR_DEGENERATE,
    ERR_INSUFFICIENT_DATA,
    DegenerateEnsembleError,
    DegenerateEnsembleWarning,
    InsufficientDataError,
)

logger = logging.getLogger(__name__)

KS_MIN_SAMPLES = 20
MIN_REPLICATIONS = 30
BOOTSTRAP_RESAMPLES = 200


def ks_exp1(samples: Sequence[float]) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov test against Exp(1).

    Returns ``(D, p)`` with the p-value from the asymptotic Kolmogorov law
    after Stephens' small-sample correction.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.size < KS_MIN_SAMPLES:
        raise InsufficientDataError(
            f"KS test needs at least {KS_MIN_SAMPLES} samples (got {arr.size})",
            code=ERR_INSUFFICIENT_DATA,
        )
    d = float(stats.kstest(arr, "expon").statistic)
    root = math.sqrt(arr.size)
    p = min(max(float(kolmogorov(d * (root + 0.12 + 0.11 / root))), 0.0), 1.0)
    logger.debug("KS against Exp(1): %d samples, D=%.4g, p=%.4g", arr.size, d, p)
    return d, p


def zscore(estimate: float, se: float, target: float) -> float:
    """Standardised distance between an estimate and its target."""
    if not se > 0:
        raise DegenerateEnsembleError(
            f"standard error {se} is not positive", code=ERR_DEGENERATE, details={"estimate": estimate}
        )
    return (estimate - target) / se


def sample_cov_with_se(a: np.ndarray, b: np.ndarray) -> tuple[float, float]:
    """Unbiased sample covariance of paired draws and its jackknife standard error."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    R = a.size
    if R < MIN_REPLICATIONS:
        raise InsufficientDataError(
            f"covariance estimate needs at least {MIN_REPLICATIONS} replications (got {R})",
            code=ERR_INSUFFICIENT_DATA,
        )
    sa, sb, sab = a.sum(), b.sum(), float(np.dot(a, b))
    estimate = (sab - sa * sb / R) / (R - 1)
    # leave-one-out covariances in closed form
    ra, rb = sa - a, sb - b
    loo = (sab - a * b - ra * rb / (R - 1)) / (R - 2)
    se = math.sqrt((R - 1) / R * float(np.sum((loo - loo.mean()) ** 2)))
    if se == 0.0:
        warnings.warn(
            f"covariance ensemble of {R} draws is degenerate (zero spread)",
            DegenerateEnsembleWarning,
            stacklevel=2,
        )
    logger.debug("jackknife covariance over %d draws: %.6g (se %.3g)", R, estimate, se)
    return float(estimate), se


def bootstrap_se(
    rows: np.ndarray,
    statistic: Callable[[np.ndarray], float],
    rng: np.random.Generator,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> float:
    """Standard deviation of ``statistic`` over row resamples with replacement."""
    R = len(rows)
    values = np.array([statistic(rows[rng.integers(R, size=R)]) for _ in range(resamples)])
    se = float(np.std(values, ddof=1))
    logger.debug("bootstrap se over %d resamples of %d rows: %.3g", resamples, R, se)
    return se
