"""Deterministic fluid limits of both rumor models.

The contestant limit is a Volterra system in which every memory term is a
convolution ``integral of K(t - s) g(s) ds``. On a uniform grid these are
discretised by product integration: ``g`` is interpolated linearly and the
kernel moments on each lag cell are taken by Simpson's rule, with cells split
at kernel discontinuities. The newest node enters implicitly and is resolved
by Picard iteration.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .errors import ERR_OUT_OF_RANGE, ERR_PICARD, ERR_STEP_REJECTED, ConfigurationError, NumericalError
from .kernels import KernelKind, kernel_on_grid, secondary_complement
from .laws import DelayLaw, LmrLaws, ModelLaws
from .types import Grid

logger = logging.getLogger(__name__)

PICARD_TOL = 1e-10
PICARD_MAX_ITER = 100
PROPORTION_BOUNDS = (-1e-6, 1.0 + 1e-6)

KernelFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FllnSolution:
    """Fluid-limit proportions at grid nodes. For ``model == "lmr"`` ``w`` holds Ū."""

    grid: Grid
    x: np.ndarray
    w: np.ndarray
    y: np.ndarray
    z: np.ndarray
    init: tuple[float, float, float]
    model: str = "contestant"

    @property
    def columns(self) -> tuple[str, ...]:
        return ("t", "x", "u" if self.model == "lmr" else "w", "y", "z")

    def rows(self) -> Iterable[tuple[float, ...]]:
        for k, t in enumerate(self.grid.nodes):
            yield (float(t), float(self.x[k]), float(self.w[k]), float(self.y[k]), float(self.z[k]))

    def at(self, t: Any) -> np.ndarray:
        """Linear interpolation of (x, w, y, z) at ``t``; shape (..., 4)."""
        nodes = self.grid.nodes
        return np.stack([np.interp(t, nodes, f) for f in (self.x, self.w, self.y, self.z)], axis=-1)

    def max_conservation_error(self) -> float:
        return float(np.max(np.abs(self.x + self.w + self.y + self.z - 1.0)))


# --- Product integration ---


def _left_limit(v: float) -> float:
    return v - 1e-12 * max(1.0, abs(v))


def lag_breakpoints(*laws: DelayLaw, lags: Sequence[float] = ()) -> list[float]:
    """Lags where kernels built from these laws may jump, including pairwise sums."""
    base = sorted({p for law in laws for p in law.breakpoints} | set(lags))
    sums = {a + b for a in base for b in base}
    return sorted(set(base) | sums)


@dataclass(frozen=True)
class ConvolutionWeights:
    """Product-trapezoid weights for ``integral over [0, t_k] of K(t_k - s) g(s) ds``.

    ``earlier[m]`` and ``later[m]`` weight the two nodes of lag cell ``m``
    (lags ``[(m - 1) step, m step]``) for ``m = 1..steps``; the earlier node sits
    at the larger lag.
    """

    earlier: np.ndarray
    later: np.ndarray

    @property
    def newest(self) -> float:
        """Weight on the node at the current time."""
        return float(self.later[1])

    def history(self, g: np.ndarray, k: int) -> float:
        """Contribution of nodes ``0..k-1`` at step ``k``."""
        if k == 0:
            return 0.0
        total = self.earlier[k] * g[0]
        if k > 1:
            combined = self.earlier[1:k] + self.later[2 : k + 1]
            total += float(np.dot(combined[::-1], g[1:k]))
        return float(total)

    def apply(self, g: np.ndarray, k: int) -> float:
        return self.history(g, k) + (self.newest * g[k] if k > 0 else 0.0)

    @classmethod
    def build(cls, kernel: KernelFn, grid: Grid, breaks: Iterable[float] = ()) -> ConvolutionWeights:
        h = grid.step
        K = grid.steps
        at_nodes = np.asarray(kernel(np.arange(K + 1) * h), dtype=float)
        k_mid = np.asarray(kernel((np.arange(K) + 0.5) * h), dtype=float)
        k_lo, k_hi = at_nodes[:-1], at_nodes[1:].copy()
        # the earlier node of a cell carries weight (v - a)/h, the later one (b - v)/h
        earlier = h / 6.0 * (2.0 * k_mid + k_hi)
        later = h / 6.0 * (k_lo + 2.0 * k_mid)

        jumps = sorted(b for b in set(breaks) if 0.0 < b < grid.horizon)
        split: set[int] = set()
        for b in jumps:
            m = min(int(b // h), K - 1)
            a = m * h
            if abs(b - a) <= 1e-12 * max(1.0, b):
                if m >= 1 and m - 1 not in split:
                    k_left = float(np.asarray(kernel(np.array([_left_limit(b)])))[0])
                    earlier[m - 1] += h / 6.0 * (k_left - k_hi[m - 1])
                continue
            earlier[m], later[m] = _split_cell(kernel, a, a + h, [p for p in jumps if a < p < a + h])
            split.add(m)
        return cls(np.concatenate(([0.0], earlier)), np.concatenate(([0.0], later, [0.0])))


def _split_cell(kernel: KernelFn, a: float, b: float, inner: list[float]) -> tuple[float, float]:
    h = b - a
    edges = [a, *sorted(inner), b]
    w_earlier = 0.0
    w_later = 0.0
    for p, q in zip(edges, edges[1:]):
        kv = np.asarray(kernel(np.array([p, 0.5 * (p + q), _left_limit(q)])), dtype=float)
        v = np.array([p, 0.5 * (p + q), q])
        simpson = np.array([1.0, 4.0, 1.0]) * (q - p) / 6.0
        w_earlier += float(np.sum(simpson * kv * (v - a) / h))
        w_later += float(np.sum(simpson * kv * (b - v) / h))
    return w_earlier, w_later


# --- Contestant model ---


def _check_init(init: Sequence[float], names: tuple[str, str, str]) -> tuple[float, float, float]:
    if len(init) != 3:
        raise ConfigurationError(f"initial condition needs three values ({', '.join(names)})")
    a, b, c = (float(v) for v in init)
    if min(a, b, c) < 0 or a + b + c > 1:
        raise ConfigurationError(f"initial proportions {init} must be >= 0 and sum to at most 1")
    return a, b, c


class ContestantSystem:
    """Discretised fluid-limit equations of the contestant model on one grid."""

    def __init__(self, laws: ModelLaws, init: Sequence[float], grid: Grid) -> None:
        self.laws = laws
        self.grid = grid
        self.w0, self.y0, self.z0 = _check_init(init, ("W(0)", "Y(0)", "Z(0)"))
        t = grid.nodes
        self.lam = np.asarray(laws.lam.value(t), dtype=float)
        self.alpha = np.asarray(laws.alpha.value(t), dtype=float)

        cond_breaks = [*laws.G.lag_breakpoints, *laws.H.lag_breakpoints]
        self.f0c = np.asarray(laws.F0.complement(t), dtype=float)
        self.g0c = np.asarray(laws.G0.complement(t), dtype=float)
        self.h0c = np.asarray(laws.H0.complement(t), dtype=float)
        self.psi0 = kernel_on_grid(KernelKind.PSI0, laws, t)
        self.psi0_beta = kernel_on_grid(KernelKind.PSI0_BETA, laws, t)
        self.base_w = self.w0 * self.f0c
        self.base_y = self.w0 * self.psi0 + self.y0 * self.g0c
        self.base_z = self.w0 * self.psi0_beta + self.z0 * self.h0c

        self.k_passive = ConvolutionWeights.build(
            lambda v: laws.F.complement(v), grid, laws.F.breakpoints
        )
        self.k_spreading = ConvolutionWeights.build(
            lambda v: kernel_on_grid(KernelKind.PSI, laws, v), grid, lag_breakpoints(laws.F, lags=cond_breaks)
        )
        self.k_contesting = ConvolutionWeights.build(
            lambda v: kernel_on_grid(KernelKind.PSI_BETA, laws, v), grid, lag_breakpoints(laws.F, lags=cond_breaks)
        )
        self.k_converted = ConvolutionWeights.build(
            lambda v: np.asarray(secondary_complement(laws.F, laws.H, v), dtype=float),
            grid,
            laws.H.lag_breakpoints,
        )
        # a converted spreader leaves Y only while its own forgetting clock would still run
        self.k_removed = ConvolutionWeights.build(
            lambda v: np.asarray(secondary_complement(laws.F, laws.G, v), dtype=float),
            grid,
            laws.G.lag_breakpoints,
        )
        self.removal_at_mids = np.asarray(
            secondary_complement(laws.F, laws.G, (np.arange(grid.steps) + 0.5) * grid.step), dtype=float
        )

    def fluxes(self, w: np.ndarray, y: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = 1.0 - w - y - z
        return self.lam * x * y, self.alpha * y * z

    def rhs_at(self, k: int, contact: np.ndarray, convert: np.ndarray) -> tuple[float, float, float]:
        w = self.base_w[k] + self.k_passive.apply(contact, k)
        y = self.base_y[k] + self.k_spreading.apply(contact, k) - self.k_removed.apply(convert, k)
        z = self.base_z[k] + self.k_contesting.apply(contact, k) + self.k_converted.apply(convert, k)
        return w, y, z

    def solve(self) -> FllnSolution:
        K = self.grid.steps
        w = np.zeros(K + 1)
        y = np.zeros(K + 1)
        z = np.zeros(K + 1)
        contact = np.zeros(K + 1)
        convert = np.zeros(K + 1)
        w[0], y[0], z[0] = self.base_w[0], self.base_y[0], self.base_z[0]
        self._check_bounds(0, w[0], y[0], z[0])
        contact[0], convert[0] = self._flux_at(0, w[0], y[0], z[0])
        worst = 0
        for k in range(1, K + 1):
            hist_w = self.base_w[k] + self.k_passive.history(contact, k)
            hist_y = self.base_y[k] + self.k_spreading.history(contact, k) - self.k_removed.history(convert, k)
            hist_z = self.base_z[k] + self.k_contesting.history(contact, k) + self.k_converted.history(convert, k)
            wk, yk, zk = w[k - 1], y[k - 1], z[k - 1]
            for it in range(1, PICARD_MAX_ITER + 1):
                a, b = self._flux_at(k, wk, yk, zk)
                nw = hist_w + self.k_passive.newest * a
                ny = hist_y + self.k_spreading.newest * a - self.k_removed.newest * b
                nz = hist_z + self.k_contesting.newest * a + self.k_converted.newest * b
                change = max(abs(nw - wk), abs(ny - yk), abs(nz - zk))
                wk, yk, zk = nw, ny, nz
                if change <= PICARD_TOL:
                    break
            else:
                raise NumericalError(
                    f"Picard iteration did not converge at t={self.grid.nodes[k]:.6g}; use a smaller step",
                    code=ERR_PICARD,
                    details={"step": self.grid.step, "node": k, "change": change},
                )
            worst = max(worst, it)
            self._check_bounds(k, wk, yk, zk)
            w[k], y[k], z[k] = wk, yk, zk
            contact[k], convert[k] = self._flux_at(k, wk, yk, zk)
        logger.debug("contestant limit solved on %d steps, at most %d Picard iterations", K, worst)
        return FllnSolution(self.grid, 1.0 - w - y - z, w, y, z, (self.w0, self.y0, self.z0))

    def _check_bounds(self, k: int, w: float, y: float, z: float) -> None:
        lo, hi = PROPORTION_BOUNDS
        state = (1.0 - w - y - z, w, y, z)
        if all(lo <= v <= hi for v in state):
            return
        raise NumericalError(
            f"contestant limit at t={self.grid.nodes[k]:.6g} left [{lo}, {hi}]; use a smaller step",
            code=ERR_OUT_OF_RANGE,
            details={"state": list(state), "step": self.grid.step, "node": k},
        )

    def _flux_at(self, k: int, w: float, y: float, z: float) -> tuple[float, float]:
        x = 1.0 - w - y - z
        return float(self.lam[k] * x * y), float(self.alpha[k] * y * z)

    def residual(self, solution: FllnSolution) -> float:
        contact, convert = self.fluxes(solution.w, solution.y, solution.z)
        worst = 0.0
        for k in range(self.grid.steps + 1):
            w, y, z = self.rhs_at(k, contact, convert)
            worst = max(worst, abs(w - solution.w[k]), abs(y - solution.y[k]), abs(z - solution.z[k]))
        closure = solution.max_conservation_error()
        return max(worst, closure)


def solve_contestant(laws: ModelLaws, init: Sequence[float], grid: Grid) -> FllnSolution:
    """Fluid limit (X, W, Y, Z) of the contestant model on ``grid``."""
    return ContestantSystem(laws, init, grid).solve()


def residual(solution: FllnSolution, laws: ModelLaws | LmrLaws) -> float:
    """Largest defect of ``solution`` in the discretised limit equations."""
    if solution.model == "lmr":
        assert isinstance(laws, LmrLaws)
        return _lmr_residual(solution, laws)
    assert isinstance(laws, ModelLaws)
    return ContestantSystem(laws, solution.init, solution.grid).residual(solution)


# --- LMR model ---


def _lmr_field(laws: LmrLaws, t: float, state: np.ndarray) -> np.ndarray:
    u, y, z = state
    x = 1.0 - u - y - z
    lam, theta, gamma = laws.lam.value(t), laws.theta.value(t), laws.gamma.value(t)
    contact = lam * x * y
    stifle = theta * (2.0 - laws.beta) * y * y
    meet = gamma * (u + z) * y
    return np.array([(1.0 - laws.delta) * contact, laws.delta * contact - stifle - meet, stifle + meet])


def solve_lmr(laws: LmrLaws, init: Sequence[float], grid: Grid) -> FllnSolution:
    """Classical RK4 integration of the LMR fluid limit (U, Y, Z)."""
    state = np.array(_check_init(init, ("U(0)", "Y(0)", "Z(0)")))
    h = grid.step
    out = np.empty((grid.steps + 1, 3))
    out[0] = state
    lo, hi = PROPORTION_BOUNDS
    for k in range(grid.steps):
        t = k * h
        k1 = _lmr_field(laws, t, state)
        k2 = _lmr_field(laws, t + h / 2, state + h / 2 * k1)
        k3 = _lmr_field(laws, t + h / 2, state + h / 2 * k2)
        k4 = _lmr_field(laws, t + h, state + h * k3)
        state = state + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        x = 1.0 - state.sum()
        if np.any(state < lo) or np.any(state > hi) or not lo <= x <= hi:
            raise NumericalError(
                f"LMR step at t={t + h:.6g} left [{lo}, {hi}]; use a smaller step",
                code=ERR_STEP_REJECTED,
                details={"state": state.tolist(), "step": h},
            )
        out[k + 1] = state
    u, y, z = out[:, 0], out[:, 1], out[:, 2]
    return FllnSolution(grid, 1.0 - u - y - z, u, y, z, tuple(float(v) for v in out[0]), model="lmr")


def _lmr_residual(solution: FllnSolution, laws: LmrLaws) -> float:
    """Defect of one RK4 step from every node, so solver output scores ~0."""
    h = solution.grid.step
    states = np.stack([solution.w, solution.y, solution.z], axis=1)
    worst = solution.max_conservation_error()
    for k in range(solution.grid.steps):
        t = k * h
        s = states[k]
        k1 = _lmr_field(laws, t, s)
        k2 = _lmr_field(laws, t + h / 2, s + h / 2 * k1)
        k3 = _lmr_field(laws, t + h / 2, s + h / 2 * k2)
        k4 = _lmr_field(laws, t + h, s + h * k3)
        nxt = s + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        worst = max(worst, float(np.max(np.abs(nxt - states[k + 1]))))
    return worst
