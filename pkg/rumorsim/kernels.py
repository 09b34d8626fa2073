"""Proportion kernels and the window integrals they are built from.

Every kernel is a single integral against a delay law ``dF``::

    psi(t) = beta * integral over [0, t] of G^c(t - u | u) dF(u)
    phi(t) = beta * integral over [0, t] of G(t - u | u) dF(u)

The density part is integrated with composite Gauss-Legendre, panels split
at every point where the integrand jumps; atoms of ``F`` enter as exact terms.
"""

from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Any, Callable, Iterable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ERR_OUT_OF_RANGE, ERR_QUADRATURE, NumericalError, RangeError
from .laws import ConditionalDelayLaw, DelayLaw, ModelLaws

logger = logging.getLogger(__name__)

QUADRATURE_TOL = 1e-9
_GL_ORDER = 10
_MAX_DOUBLINGS = 14
_GL_NODES, _GL_WEIGHTS = leggauss(_GL_ORDER)


class KernelKind(str, Enum):
    PHI0 = "phi0"
    PHI0_BETA = "phi0_beta"
    PSI0 = "psi0"
    PSI0_BETA = "psi0_beta"
    PHI = "phi"
    PHI_BETA = "phi_beta"
    PSI = "psi"
    PSI_BETA = "psi_beta"


# --- Laws ---


def cdf(law: DelayLaw, x: Any) -> Any:
    """Distribution function of ``law``; 0 on the negative half-line."""
    return law.cdf(x)


def sample_pair(
    F: DelayLaw, cond: ConditionalDelayLaw, rng: np.random.Generator
) -> tuple[float, float]:
    """Draw a passive delay from ``F`` and the secondary delay given it."""
    eta = F.sample(rng)
    return eta, cond.sample(eta, rng)


def secondary_complement(F: DelayLaw, cond: ConditionalDelayLaw, a: Any) -> Any:
    """Marginal survival of the secondary delay, the mixture of ``cond^c(a | x)`` over ``dF(x)``.

    Slices are constant in ``x``, so the mixture weights are slice masses of ``F``.
    """
    if cond.is_independent:
        return cond.laws[0].complement(a)
    edges = [-math.inf, *cond.boundaries, math.inf]
    total: Any = 0.0
    for k, law in enumerate(cond.laws):
        lo = 0.0 if k == 0 else F.cdf_left(edges[k])
        hi = 1.0 if k == len(cond.laws) - 1 else F.cdf_left(edges[k + 1])
        if hi > lo:
            total = total + (hi - lo) * law.complement(a)
    return total


# --- Quadrature ---


def _composite(fn: Callable[[np.ndarray], np.ndarray], edges: np.ndarray, panels: int) -> float:
    steps = np.arange(panels + 1) / panels
    cuts = (edges[:-1, None] + np.outer(np.diff(edges), steps)).ravel()
    left = cuts.reshape(len(edges) - 1, panels + 1)[:, :-1].ravel()
    right = cuts.reshape(len(edges) - 1, panels + 1)[:, 1:].ravel()
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    values = fn(nodes.ravel()).reshape(nodes.shape)
    return float(np.sum(values * (half[:, None] * _GL_WEIGHTS[None, :])))


def _converge(fn: Callable[[np.ndarray], np.ndarray], edges: np.ndarray, tol: float) -> float:
    panels = 1
    prev = _composite(fn, edges, panels)
    change = math.inf
    for _ in range(_MAX_DOUBLINGS):
        panels *= 2
        cur = _composite(fn, edges, panels)
        change = abs(cur - prev)
        if change <= tol:
            return cur
        prev = cur
    raise NumericalError(
        f"quadrature did not reach tolerance {tol:g} (last change {change:.3e})",
        code=ERR_QUADRATURE,
        details={"estimate": prev, "change": change, "panels": panels, "edges": edges.tolist()},
    )


def integrate_against(
    law: DelayLaw,
    fn: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    breaks: Iterable[float] = (),
    *,
    tol: float = QUADRATURE_TOL,
) -> float:
    """Integral of ``fn`` over ``(lo, hi]`` with respect to ``law``.

    ``breaks`` lists points where ``fn`` jumps or kinks. Densities that blow up
    at 0 are integrated in probability space instead of on the time axis.
    """
    total = 0.0
    for at, mass in law.atoms:
        if lo < at <= hi:
            total += mass * float(np.asarray(fn(np.array([at])))[0])
    weight = law.continuous_weight
    a, b = max(lo, 0.0), hi
    if weight == 0.0 or not b > a:
        return total

    pts = {a, b}
    pts.update(p for p in (*breaks, *law.breakpoints) if a < p < b)
    edges = np.array(sorted(pts))

    if law.density_singular_at_zero:
        p_edges = np.unique(np.asarray(law.continuous_cdf(edges), dtype=float))
        if len(p_edges) < 2:
            return total

        def integrand(p: np.ndarray) -> np.ndarray:
            return np.asarray(fn(law.continuous_ppf(p)), dtype=float)

        return total + weight * _converge(integrand, p_edges, tol / weight)

    def weighted(u: np.ndarray) -> np.ndarray:
        return np.asarray(fn(u), dtype=float) * law.continuous_pdf(u)

    return total + weight * _converge(weighted, edges, tol / weight)


def _window_breaks(cond: ConditionalDelayLaw, horizon: float) -> list[float]:
    pts = [horizon - lag for lag in cond.lag_breakpoints]
    pts.extend(cond.boundaries)
    return pts


def window_mass(
    F: DelayLaw,
    cond: ConditionalDelayLaw,
    lo: float,
    hi: float,
    horizon: float,
    *,
    tol: float = QUADRATURE_TOL,
) -> float:
    """Integral of ``cond^c(horizon - u | u)`` over ``u`` in ``(lo, hi]`` against ``dF``.

    Pass ``lo = -inf`` to include an atom of ``F`` at 0.
    """

    def survival(u: np.ndarray) -> np.ndarray:
        return cond.complement(horizon - u, u)

    return integrate_against(F, survival, lo, hi, _window_breaks(cond, horizon), tol=tol)


# --- Kernels ---


def _kernel_parts(
    kind: KernelKind, laws: ModelLaws
) -> tuple[float, DelayLaw, ConditionalDelayLaw, bool]:
    """Return (coefficient, passive law, secondary law, still-in-class flag)."""
    spreader = kind in (KernelKind.PHI0, KernelKind.PSI0, KernelKind.PHI, KernelKind.PSI)
    coef = laws.beta if spreader else 1.0 - laws.beta
    surviving = kind in (KernelKind.PSI0, KernelKind.PSI0_BETA, KernelKind.PSI, KernelKind.PSI_BETA)
    if kind in (KernelKind.PHI0, KernelKind.PHI0_BETA, KernelKind.PSI0, KernelKind.PSI0_BETA):
        cond = ConditionalDelayLaw.independent(laws.G0 if spreader else laws.H0)
        return coef, laws.F0, cond, surviving
    return coef, laws.F, laws.G if spreader else laws.H, surviving


def kernel_eval(kind: KernelKind | str, laws: ModelLaws, t: float) -> float:
    """Evaluate one of the eight proportion kernels at ``t >= 0``."""
    kind = KernelKind(kind)
    if t < 0:
        raise RangeError(f"kernel argument {t} < 0", code=ERR_OUT_OF_RANGE)
    coef, law, cond, surviving = _kernel_parts(kind, laws)
    if coef == 0.0:
        return 0.0
    if surviving:
        mass = window_mass(law, cond, -math.inf, t, t)
    else:

        def forgotten(u: np.ndarray) -> np.ndarray:
            return 1.0 - cond.complement(t - u, u)

        mass = integrate_against(law, forgotten, -math.inf, t, _window_breaks(cond, t))
    return min(max(coef * mass, 0.0), 1.0)


def kernel_on_grid(kind: KernelKind | str, laws: ModelLaws, lags: np.ndarray) -> np.ndarray:
    """``kernel_eval`` over an array of lags."""
    kind = KernelKind(kind)
    out = np.array([kernel_eval(kind, laws, float(t)) for t in np.asarray(lags, dtype=float)])
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug("evaluated %s on %d lags", kind.value, len(out))
    return out
