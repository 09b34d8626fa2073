"""Fluctuations of the contestant model around its fluid limit.

Ten noise processes drive the fluctuation equations: five from the delays
drawn at t = 0 (``w0, y01, y02, z01, z02``), three from contacts
(``w1, y1, z1``) and two from conversions (``y2, z2``). This module extracts
them from simulated trajectories, gives their limiting covariances, samples
the Gaussian limit and solves the linear Volterra system they drive.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import partial
from typing import Any, Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import (
    ERR_EMPTY_ENSEMBLE,
    ERR_INDEFINITE,
    ERR_MISSING_MARKS,
    ERR_OUT_OF_RANGE,
    ERR_UNKNOWN_PAIR,
    ConfigurationError,
    DomainError,
    InsufficientDataError,
    NumericalError,
    RangeError,
)
from .flln import ContestantSystem, FllnSolution, KernelFn, solve_contestant
from .kernels import (
    KernelKind,
    integrate_against,
    kernel_eval,
    kernel_on_grid,
    secondary_complement,
    window_mass,
)
from .laws import ConditionalDelayLaw, ModelLaws
from .simulator import compensator, intensity_pieces
from .stats import bootstrap_se, sample_cov_with_se
from .types import EventKind, Grid, Process, Side, Trajectory

logger = logging.getLogger(__name__)

INDEFINITE_TOL = 1e-8
LAG_TABLE_POINTS = 4096


class NoiseName(str, Enum):
    W0 = "w0"
    W1 = "w1"
    Y01 = "y01"
    Y02 = "y02"
    Y1 = "y1"
    Y2 = "y2"
    Z01 = "z01"
    Z02 = "z02"
    Z1 = "z1"
    Z2 = "z2"


NOISE_NAMES: tuple[str, ...] = tuple(n.value for n in NoiseName)

PairId = Union[str, Sequence[Any]]


def parse_pair(pair: PairId, names: Sequence[str] = NOISE_NAMES) -> tuple[str, str]:
    """Normalise ``"a:b"`` or ``(a, b)`` to a pair of known noise names."""
    parts = pair.split(":") if isinstance(pair, str) else list(pair)
    if len(parts) != 2:
        raise DomainError(f"pair {pair!r} is not of the form 'a:b'", code=ERR_UNKNOWN_PAIR)
    a, b = (str(getattr(p, "value", p)).strip().lower() for p in parts)
    for name in (a, b):
        if name not in names:
            raise DomainError(
                f"unknown noise {name!r} in pair {pair!r}",
                code=ERR_UNKNOWN_PAIR,
                details={"known": list(names)},
            )
    return a, b


def _order(t: float, r: float) -> tuple[float, float]:
    return (t, r) if t <= r else (r, t)


# --- Noise paths ---


@dataclass(frozen=True)
class NoisePath:
    """Named noise processes sampled at the nodes of ``grid``."""

    grid: Grid
    paths: dict[str, np.ndarray]
    model: str = "contestant"

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.paths)

    def __getitem__(self, name: Any) -> np.ndarray:
        key = str(getattr(name, "value", name))
        if key not in self.paths:
            raise DomainError(f"no noise named {key!r}", code=ERR_UNKNOWN_PAIR, details={"known": list(self.paths)})
        return self.paths[key]

    def value(self, name: Any, t: float) -> float:
        return float(np.interp(t, self.grid.nodes, self[name]))

    def on(self, grid: Grid) -> NoisePath:
        """The same paths linearly interpolated onto ``grid``."""
        if grid == self.grid:
            return self
        nodes = grid.nodes
        return NoisePath(grid, {k: np.interp(nodes, self.grid.nodes, v) for k, v in self.paths.items()}, self.model)

    def scaled(self, factor: float) -> NoisePath:
        return NoisePath(self.grid, {k: factor * v for k, v in self.paths.items()}, self.model)

    @classmethod
    def zeros(cls, grid: Grid, names: Sequence[str] = NOISE_NAMES, model: str = "contestant") -> NoisePath:
        return cls(grid, {name: np.zeros(grid.steps + 1) for name in names}, model)


class CumulativeKernel:
    """Running integral ``I(v)`` of a kernel over ``[0, v]``, tabulated on a fine lag grid."""

    def __init__(self, kernel: KernelFn, horizon: float, points: int = LAG_TABLE_POINTS) -> None:
        self.lags = np.linspace(0.0, horizon, points + 1)
        values = np.asarray(kernel(self.lags), dtype=float)
        self.values = cumulative_trapezoid(values, self.lags, initial=0.0)

    def __call__(self, v: Any) -> np.ndarray:
        return np.interp(np.clip(v, 0.0, None), self.lags, self.values)


def _convolved(pieces: tuple[np.ndarray, np.ndarray, np.ndarray], table: CumulativeKernel, nodes: np.ndarray) -> np.ndarray:
    """``integral over [0, t] of K(t - s) dLambda(s)`` for a piecewise-constant intensity."""
    start, end, level = pieces
    out = np.zeros(len(nodes))
    for k, t in enumerate(nodes):
        live = start < t
        if np.any(live):
            out[k] = float(np.dot(level[live], table(t - start[live]) - table(t - end[live])))
    return out


def _reached(points: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    """Number of ``points <= t`` for every node ``t``."""
    return np.searchsorted(np.sort(points), nodes, side="right").astype(float)


def _alive(ends: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    return len(ends) - _reached(ends, nodes)


class NoiseExtractor:
    """Computes the ten noise paths of contestant trajectories on a fixed grid.

    The kernel tables are built once, so one extractor serves a whole ensemble.
    """

    def __init__(self, laws: ModelLaws, grid: Grid) -> None:
        self.laws = laws
        self.grid = grid
        t = grid.nodes
        self.f0c = np.asarray(laws.F0.complement(t), dtype=float)
        self.g0c = np.asarray(laws.G0.complement(t), dtype=float)
        self.h0c = np.asarray(laws.H0.complement(t), dtype=float)
        self.psi0 = kernel_on_grid(KernelKind.PSI0, laws, t)
        self.psi0_beta = kernel_on_grid(KernelKind.PSI0_BETA, laws, t)
        horizon = grid.horizon
        self.passive = CumulativeKernel(lambda v: laws.F.complement(v), horizon)
        self.spreading = CumulativeKernel(lambda v: kernel_on_grid(KernelKind.PSI, laws, v), horizon)
        self.contesting = CumulativeKernel(lambda v: kernel_on_grid(KernelKind.PSI_BETA, laws, v), horizon)
        self.converted = CumulativeKernel(lambda v: secondary_complement(laws.F, laws.H, v), horizon)

    def extract(self, traj: Trajectory) -> NoisePath:
        if traj.model != "contestant":
            raise ConfigurationError(f"expected a contestant trajectory, got model {traj.model!r}")
        if not traj.has_marks or traj.initial_marks is None:
            raise ConfigurationError(
                "noise extraction needs a trajectory simulated with retain_marks=True",
                code=ERR_MISSING_MARKS,
            )
        if self.grid.horizon > traj.horizon * (1.0 + 1e-12):
            raise RangeError(
                f"grid horizon {self.grid.horizon} exceeds trajectory horizon {traj.horizon}",
                code=ERR_OUT_OF_RANGE,
            )
        t = np.minimum(self.grid.nodes, traj.horizon)
        root = math.sqrt(traj.n)
        marks = traj.initial_marks
        paths: dict[str, np.ndarray] = {}

        # --- initial noises ---
        w0 = len(marks.eta0)
        sp = np.asarray(marks.spreader_side, dtype=bool)
        activated = marks.eta0 + marks.secondary0
        paths["w0"] = (_alive(marks.eta0, t) - w0 * self.f0c) / root
        paths["y01"] = (_reached(marks.eta0[sp], t) - _reached(activated[sp], t) - w0 * self.psi0) / root
        paths["z01"] = (_reached(marks.eta0[~sp], t) - _reached(activated[~sp], t) - w0 * self.psi0_beta) / root
        paths["y02"] = (_alive(marks.theta0, t) - len(marks.theta0) * self.g0c) / root
        paths["z02"] = (_alive(marks.zeta0, t) - len(marks.zeta0) * self.h0c) / root

        # --- contact noises ---
        contacts = [e for e in traj.events if e.kind is EventKind.A_CONTACT]
        tau = np.array([e.time for e in contacts], dtype=float)
        eta = np.array([e.eta for e in contacts], dtype=float)
        secondary = np.array([e.secondary for e in contacts], dtype=float)
        side = np.array([e.side is Side.SPREADER for e in contacts], dtype=bool)
        activation = tau + eta
        pieces = intensity_pieces(traj, Process.A)
        paths["w1"] = (_reached(tau, t) - _reached(activation, t) - _convolved(pieces, self.passive, t)) / root
        paths["y1"] = (
            _reached(activation[side], t)
            - _reached(activation[side] + secondary[side], t)
            - _convolved(pieces, self.spreading, t)
        ) / root
        paths["z1"] = (
            _reached(activation[~side], t)
            - _reached(activation[~side] + secondary[~side], t)
            - _convolved(pieces, self.contesting, t)
        ) / root

        # --- conversion noises ---
        conversions = [e for e in traj.events if e.kind is EventKind.B_CONVERSION]
        xi = np.array([e.time for e in conversions], dtype=float)
        zeta = np.array([e.zeta for e in conversions], dtype=float)
        paths["y2"] = (_reached(xi, t) - np.asarray(compensator(traj, Process.B, t), dtype=float)) / root
        paths["z2"] = (
            _reached(xi, t) - _reached(xi + zeta, t) - _convolved(intensity_pieces(traj, Process.B), self.converted, t)
        ) / root

        return NoisePath(self.grid, {name: paths[name] for name in NOISE_NAMES})

    def extract_all(self, trajs: Iterable[Trajectory]) -> list[NoisePath]:
        return [self.extract(traj) for traj in trajs]


def extract_noise(traj: Trajectory, laws: ModelLaws, grid: Grid) -> NoisePath:
    """Noise paths of one mark-retaining trajectory, scaled by ``1/sqrt(n)``."""
    return NoiseExtractor(laws, grid).extract(traj)


# --- Limit covariances ---


class CovarianceForm(str, Enum):
    """``table``: closed-form covariance rows. ``marked``: second moments of the marked point processes."""

    TABLE = "table"
    MARKED = "marked"


QbFn = Callable[[float, float], float]


class CovarianceModel:
    """Covariances of the limit noises along a fluid-limit solution.

    ``table`` rows integrate over time by the composite trapezoid rule on the
    fluid-limit nodes. The ``marked`` form uses the midpoint rule on the same
    cells, one measure shared by every pair, so it assembles into a positive
    semi-definite matrix.
    """

    def __init__(
        self,
        solution: FllnSolution,
        laws: ModelLaws,
        *,
        form: CovarianceForm | str = CovarianceForm.TABLE,
        qb: Optional[QbFn] = None,
    ) -> None:
        if solution.model != "contestant":
            raise ConfigurationError("covariance model needs a contestant fluid limit")
        self.solution = solution
        self.laws = laws
        self.form = CovarianceForm(form)
        self.qb = qb
        self.w0, self.y0, self.z0 = solution.init
        grid = solution.grid
        self._nodes = grid.nodes
        self._mids = (np.arange(grid.steps) + 0.5) * grid.step
        self._step = grid.step
        contact = np.asarray(laws.lam.value(self._nodes), dtype=float) * solution.x * solution.y
        convert = np.asarray(laws.alpha.value(self._nodes), dtype=float) * solution.y * solution.z
        self._contact = contact
        self._convert = convert
        self._kernels: dict[KernelKind, np.ndarray] = {}
        self._windows: dict[tuple[Side, bool, float], np.ndarray] = {}
        self._warned = False
        self._rows = self._build_rows()

    def with_qb(self, qb: Optional[QbFn]) -> CovarianceModel:
        return CovarianceModel(self.solution, self.laws, form=self.form, qb=qb)

    @property
    def horizon(self) -> float:
        return self.solution.grid.horizon

    # --- public lookups ---

    def cov(self, pair: PairId, t: float, r: float) -> float:
        a, b = parse_pair(pair)
        self._check_time(t)
        self._check_time(r)
        if (a, b) == ("y2", "y2"):
            if self.form is CovarianceForm.TABLE:
                raise DomainError(
                    "the y2 variance has no closed form; estimate it with estimate_QB",
                    code=ERR_UNKNOWN_PAIR,
                )
            return 0.0 if t == 0 or r == 0 else self._y2_y2(t, r)
        return self._lookup(a, t, b, r)

    def entry(self, a: str, t: float, b: str, r: float) -> float:
        """Covariance used when assembling matrices; fills the y2 variance."""
        if (a, b) != ("y2", "y2"):
            return self._lookup(a, t, b, r)
        if t == 0 or r == 0:
            return 0.0
        if self.form is CovarianceForm.TABLE:
            if self.qb is not None:
                return float(self.qb(t, r))
            if not self._warned:
                logger.warning("no y2 variance estimate attached; using the conversion compensator variance")
                self._warned = True
        return self._y2_y2(t, r)

    def _check_time(self, t: float) -> None:
        if not 0.0 <= t <= self.horizon * (1.0 + 1e-12):
            raise RangeError(f"time {t} outside [0, {self.horizon}]", code=ERR_OUT_OF_RANGE)

    def _lookup(self, a: str, t: float, b: str, r: float) -> float:
        if t == 0 or r == 0:
            return 0.0
        fn = self._rows.get((a, b))
        if fn is not None:
            return float(fn(t, r))
        fn = self._rows.get((b, a))
        if fn is not None:
            return float(fn(r, t))
        return 0.0

    def _build_rows(self) -> dict[tuple[str, str], Callable[[float, float], float]]:
        S, C = Side.SPREADER, Side.CONTESTANT
        rows: dict[tuple[str, str], Callable[[float, float], float]] = {
            ("w0", "w0"): self._w0_w0,
            ("y02", "y02"): partial(self._settled, S),
            ("z02", "z02"): partial(self._settled, C),
            ("w0", "y01"): partial(self._w0_initial, S),
            ("w0", "z01"): partial(self._w0_initial, C),
        }
        if self.form is CovarianceForm.TABLE:
            rows.update(
                {
                    ("y01", "y01"): partial(self._initial_table, S),
                    ("z01", "z01"): partial(self._initial_table, C),
                    ("w1", "w1"): self._w1_w1_table,
                    ("y1", "y1"): partial(self._active_table, S),
                    ("z1", "z1"): partial(self._active_table, C),
                    ("w1", "y1"): partial(self._w1_active_table, S),
                    ("w1", "z1"): partial(self._w1_active_table, C),
                    ("y1", "z1"): self._y1_z1_table,
                    ("z2", "z2"): self._z2_z2_table,
                    ("y2", "z2"): self._y2_z2_table,
                }
            )
        else:
            rows.update(
                {
                    ("y01", "y01"): partial(self._initial_marked, S),
                    ("z01", "z01"): partial(self._initial_marked, C),
                    ("y01", "z01"): self._y01_z01,
                    ("w1", "w1"): self._w1_w1_marked,
                    ("y1", "y1"): partial(self._active_marked, S),
                    ("z1", "z1"): partial(self._active_marked, C),
                    ("w1", "y1"): partial(self._w1_active_marked, S),
                    ("w1", "z1"): partial(self._w1_active_marked, C),
                    ("z2", "z2"): self._z2_z2_marked,
                    ("y2", "z2"): self._y2_z2_marked,
                }
            )
        return rows

    # --- building blocks ---

    def _coef(self, side: Side) -> float:
        return self.laws.beta if side is Side.SPREADER else 1.0 - self.laws.beta

    def _cond(self, side: Side) -> ConditionalDelayLaw:
        return self.laws.G if side is Side.SPREADER else self.laws.H

    def _initial_cond(self, side: Side) -> ConditionalDelayLaw:
        return ConditionalDelayLaw.independent(self.laws.G0 if side is Side.SPREADER else self.laws.H0)

    def _psi0(self, side: Side, t: float) -> float:
        return kernel_eval(KernelKind.PSI0 if side is Side.SPREADER else KernelKind.PSI0_BETA, self.laws, t)

    def _kernel(self, kind: KernelKind, lags: np.ndarray) -> np.ndarray:
        table = self._kernels.get(kind)
        if table is None:
            table = kernel_on_grid(kind, self.laws, self._nodes)
            self._kernels[kind] = table
        lags = np.asarray(lags, dtype=float)
        return np.where(lags < 0, 0.0, np.interp(lags, self._nodes, table))

    def _window(self, side: Side, closed: bool, gap: float, a: np.ndarray) -> np.ndarray:
        """Window masses on the midpoint lattice, interpolated at ``a``.

        ``closed``: mass over ``[0, a]`` surviving to ``a + gap``.
        Otherwise: mass over ``(a, a + gap]`` surviving to ``a + gap``.
        """
        key = (side, closed, round(gap, 12))
        table = self._windows.get(key)
        if table is None:
            F, cond = self.laws.F, self._cond(side)
            if closed:
                table = np.array([window_mass(F, cond, -math.inf, u, u + gap) for u in self._mids])
            else:
                table = np.array([window_mass(F, cond, u, u + gap, u + gap) for u in self._mids])
            self._windows[key] = table
        return np.interp(a, self._mids, table)

    def _time_integral(self, upper: float, density: np.ndarray, integrand: Callable[[np.ndarray], np.ndarray]) -> float:
        """``integral over [0, upper] of density(s) * integrand(s) ds`` with ``density`` given at the nodes."""
        if upper <= 0.0:
            return 0.0
        if self.form is CovarianceForm.MARKED:
            live = self._mids < upper
            s = self._mids[live]
            mid_density = 0.5 * (density[:-1] + density[1:])[live]
            return float(self._step * np.sum(mid_density * np.asarray(integrand(s), dtype=float)))
        s = np.append(self._nodes[self._nodes < upper], upper)
        values = np.interp(s, self._nodes, density) * np.asarray(integrand(s), dtype=float)
        return float(trapezoid(values, s))

    # --- initial rows ---

    def _w0_w0(self, t: float, r: float) -> float:
        m, M = _order(t, r)
        return self.w0 * float(self.laws.F0.cdf(m)) * float(self.laws.F0.complement(M))

    def _settled(self, side: Side, t: float, r: float) -> float:
        m, M = _order(t, r)
        law, count = (self.laws.G0, self.y0) if side is Side.SPREADER else (self.laws.H0, self.z0)
        return count * float(law.cdf(m)) * float(law.complement(M))

    def _w0_initial(self, side: Side, t: float, r: float) -> float:
        value = -float(self.laws.F0.complement(t)) * self._psi0(side, r)
        if t < r:
            value += self._coef(side) * window_mass(self.laws.F0, self._initial_cond(side), t, r, r)
        return self.w0 * value

    def _initial_table(self, side: Side, t: float, r: float) -> float:
        m, M = _order(t, r)
        return self.w0 * self._psi0(side, m) * (1.0 - self._psi0(side, M))

    def _initial_marked(self, side: Side, t: float, r: float) -> float:
        m, M = _order(t, r)
        joint = self._coef(side) * window_mass(self.laws.F0, self._initial_cond(side), -math.inf, m, M)
        return self.w0 * (joint - self._psi0(side, t) * self._psi0(side, r))

    def _y01_z01(self, t: float, r: float) -> float:
        return -self.w0 * self._psi0(Side.SPREADER, t) * self._psi0(Side.CONTESTANT, r)

    # --- contact rows ---

    def _w1_w1_table(self, t: float, r: float) -> float:
        m, M = _order(t, r)
        F = self.laws.F
        return self._time_integral(m, self._contact, lambda s: F.complement(M - s) * F.cdf(m - s))

    def _w1_w1_marked(self, t: float, r: float) -> float:
        m, M = _order(t, r)
        return self._time_integral(m, self._contact, lambda s: self.laws.F.complement(M - s))

    def _active_table(self, side: Side, t: float, r: float) -> float:
        m, M = _order(t, r)
        F, cond = self.laws.F, self._cond(side)
        kind = KernelKind.PSI if side is Side.SPREADER else KernelKind.PSI_BETA

        def forgotten_by_m(u: np.ndarray) -> np.ndarray:
            return cond.complement(np.full_like(u, M), u)

        # activated by m and forgotten within (M - u, M]
        level = self._coef(side) * (
            window_mass(F, cond, -math.inf, m, M)
            - integrate_against(F, forgotten_by_m, -math.inf, m, cond.boundaries)
        )
        return self._time_integral(
            m, self._contact, lambda s: level - self._kernel(kind, t - s) * self._kernel(kind, r - s)
        )

    def _active_marked(self, side: Side, t: float, r: float) -> float:
        m, M = _order(t, r)
        coef = self._coef(side)
        return self._time_integral(m, self._contact, lambda s: coef * self._window(side, True, M - m, m - s))

    def _w1_active_table(self, side: Side, t: float, r: float) -> float:
        F = self.laws.F
        kind = KernelKind.PSI if side is Side.SPREADER else KernelKind.PSI_BETA
        coef = self._coef(side)

        def integrand(s: np.ndarray) -> np.ndarray:
            value = F.cdf(t - s) * self._kernel(kind, r - s)
            if r > t:
                value = value - coef * self._window(side, True, r - t, t - s)
            return value

        return self._time_integral(t, self._contact, integrand)

    def _w1_active_marked(self, side: Side, t: float, r: float) -> float:
        if t >= r:
            return 0.0
        coef = self._coef(side)
        return self._time_integral(t, self._contact, lambda s: coef * self._window(side, False, r - t, t - s))

    def _y1_z1_table(self, t: float, r: float) -> float:
        m, _ = _order(t, r)
        return -self._time_integral(
            m,
            self._contact,
            lambda s: self._kernel(KernelKind.PSI, t - s) * self._kernel(KernelKind.PSI_BETA, r - s),
        )

    # --- conversion rows ---

    def _converted(self, lags: np.ndarray) -> np.ndarray:
        return np.asarray(secondary_complement(self.laws.F, self.laws.H, lags), dtype=float)

    def _y2_y2(self, t: float, r: float) -> float:
        m, _ = _order(t, r)
        return self._time_integral(m, self._convert, np.ones_like)

    def _z2_z2_table(self, t: float, r: float) -> float:
        m, M = _order(t, r)
        return self._time_integral(m, self._convert, lambda s: self._converted(m - s) * (1.0 - self._converted(M - s)))

    def _z2_z2_marked(self, t: float, r: float) -> float:
        m, M = _order(t, r)
        return self._time_integral(m, self._convert, lambda s: self._converted(M - s))

    def _y2_z2_table(self, t: float, r: float) -> float:
        if r <= t:
            return 0.0
        return self._time_integral(t, self._convert, lambda s: self._converted(r - s))

    def _y2_z2_marked(self, t: float, r: float) -> float:
        m, _ = _order(t, r)
        return self._time_integral(m, self._convert, lambda s: self._converted(r - s))


def cov_table(pair: PairId, t: float, r: float, model: CovarianceModel) -> float:
    """Limit covariance ``Cov(a(t), b(r))`` for ``pair = "a:b"``."""
    return model.cov(pair, t, r)


# --- Epoch-frequency estimators ---


def _epoch_rows(trajs: Sequence[Trajectory], process: Process) -> tuple[np.ndarray, int, float]:
    if len(trajs) == 0:
        raise DomainError("ensemble is empty", code=ERR_EMPTY_ENSEMBLE)
    if len(trajs) < 2:
        raise InsufficientDataError("epoch frequencies need at least two trajectories")
    sizes = {traj.n for traj in trajs}
    if len(sizes) != 1:
        raise DomainError(f"trajectories mix population sizes {sorted(sizes)}")
    epochs = [traj.epochs(process) for traj in trajs]
    width = max(1, max(len(e) for e in epochs))
    rows = np.full((len(trajs), width), np.inf)
    for k, e in enumerate(epochs):
        rows[k, : len(e)] = e
    return rows, sizes.pop(), min(traj.horizon for traj in trajs)


def epoch_product(
    trajs: Sequence[Trajectory],
    process: Process,
    t: float,
    r: float,
    *,
    before_first: bool,
    seed: int = 0,
) -> tuple[float, float]:
    """``(1/n) * sum over i of p1_i * p2_i`` from per-epoch frequencies across the ensemble.

    With ``before_first`` the factors are P(epoch_i <= t^r) and P(epoch_i > t v r);
    otherwise P(epoch_i > t^r) and P(epoch_i <= t v r). Missing epochs count as
    infinite. The standard error is a bootstrap over trajectories.
    """
    rows, n, horizon = _epoch_rows(trajs, process)
    for v in (t, r):
        if not 0.0 <= v <= horizon:
            raise RangeError(f"time {v} outside [0, {horizon}]", code=ERR_OUT_OF_RANGE)
    m, M = _order(t, r)

    def statistic(sample: np.ndarray) -> float:
        if before_first:
            p1 = np.mean(sample <= m, axis=0)
            p2 = np.mean(sample > M, axis=0)
        else:
            p1 = np.mean(sample > m, axis=0)
            p2 = np.mean(sample <= M, axis=0)
        return float(np.sum(p1 * p2)) / n

    estimate = statistic(rows)
    se = bootstrap_se(rows, statistic, np.random.default_rng(seed))
    return estimate, se


def estimate_QB(trajs: Sequence[Trajectory], t: float, r: float, *, seed: int = 0) -> tuple[float, float]:
    """Ensemble estimate of the conversion-noise variance term and its standard error."""
    return epoch_product(trajs, Process.B, t, r, before_first=True, seed=seed)


def qb_table(trajs: Sequence[Trajectory], *, seed: int = 0) -> QbFn:
    """``estimate_QB`` bound to an ensemble, for attaching to a covariance model."""
    cache: dict[tuple[float, float], float] = {}

    def qb(t: float, r: float) -> float:
        key = _order(t, r)
        if key not in cache:
            cache[key] = estimate_QB(trajs, t, r, seed=seed)[0]
        return cache[key]

    return qb


# --- Gaussian limit ---


class LimitNoiseSampler:
    """Draws the Gaussian limit noises on a grid through an eigen square root of their covariance."""

    def __init__(
        self,
        model: CovarianceModel,
        grid: Grid,
        names: Sequence[str] = NOISE_NAMES,
        *,
        tol: float = INDEFINITE_TOL,
    ) -> None:
        self.grid = grid
        self.names = tuple(names)
        nodes = grid.nodes
        labels = [(name, k) for name in self.names for k in range(len(nodes))]
        size = len(labels)
        cov = np.zeros((size, size))
        for i, (a, ka) in enumerate(labels):
            if nodes[ka] == 0:
                continue
            for j in range(i, size):
                b, kb = labels[j]
                if nodes[kb] == 0:
                    continue
                cov[i, j] = cov[j, i] = model.entry(a, float(nodes[ka]), b, float(nodes[kb]))
        if np.any(np.diag(cov) < -tol):
            raise NumericalError("negative variance in limit covariance", code=ERR_INDEFINITE)
        vals, vecs = np.linalg.eigh(cov)
        scale = max(1.0, float(np.max(np.abs(vals))))
        smallest = float(vals.min())
        if smallest < -tol * scale:
            raise NumericalError(
                f"limit covariance is indefinite (smallest eigenvalue {smallest:.3e})",
                code=ERR_INDEFINITE,
                details={"eigenvalue": smallest, "form": model.form.value},
            )
        if smallest < 0:
            logger.warning("clipping eigenvalue %.3e of the limit covariance to 0", smallest)
        self.cov = cov
        self._root = vecs * np.sqrt(np.clip(vals, 0.0, None))

    def draws(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Array of shape (size, len(names), nodes)."""
        normals = rng.standard_normal((self._root.shape[1], size))
        flat = (self._root @ normals).T
        return flat.reshape(size, len(self.names), self.grid.steps + 1)

    def draw(self, rng: np.random.Generator) -> NoisePath:
        values = self.draws(rng, 1)[0]
        return NoisePath(self.grid, {name: values[k] for k, name in enumerate(self.names)})


def sample_limit_noise(model: CovarianceModel, grid: Grid, rng: np.random.Generator) -> NoisePath:
    """One draw of the ten centred Gaussian limit noises on ``grid``."""
    return LimitNoiseSampler(model, grid).draw(rng)


# --- Linear fluctuation equations ---


@dataclass(frozen=True)
class LimitFluctuation:
    """Solution (X, W, Y, Z) of the linear fluctuation equations at grid nodes."""

    grid: Grid
    x: np.ndarray
    w: np.ndarray
    y: np.ndarray
    z: np.ndarray

    columns = ("t", "x", "w", "y", "z")

    def rows(self) -> Iterable[tuple[float, ...]]:
        for k, t in enumerate(self.grid.nodes):
            yield (float(t), float(self.x[k]), float(self.w[k]), float(self.y[k]), float(self.z[k]))


def _filtered(path: np.ndarray, kernel_at_mids: np.ndarray) -> np.ndarray:
    """Stieltjes sum of ``integral over [0, t_k] of K(t_k - s) d path(s)``, kernel taken at cell midpoints."""
    out = np.zeros_like(path, dtype=float)
    steps = len(path) - 1
    if steps > 0:
        out[1:] = np.convolve(np.diff(path), kernel_at_mids)[:steps]
    return out


def solve_linear_svie(
    noise: NoisePath,
    init_fluct: Sequence[float],
    model: CovarianceModel,
    grid: Optional[Grid] = None,
) -> LimitFluctuation:
    """Solve the fluctuation equations driven by ``noise`` around the fluid limit of ``model``.

    On a grid other than the fluid-limit grid the limit is re-solved there.
    The equations are linear in the unknowns, so the implicit newest-node
    system is a 3 x 3 linear solve at each step.
    """
    if len(init_fluct) != 3:
        raise ConfigurationError("initial fluctuation needs three values (W, Y, Z)")
    w_init, y_init, z_init = (float(v) for v in init_fluct)
    laws = model.laws
    solution = model.solution
    if grid is not None and grid != solution.grid:
        solution = solve_contestant(laws, solution.init, grid)
    grid = solution.grid
    system = ContestantSystem(laws, solution.init, grid)
    nz = noise.on(grid)
    removed_noise = _filtered(nz["y2"], system.removal_at_mids)
    base_w = w_init * system.f0c + nz["w0"] + nz["w1"]
    base_y = w_init * system.psi0 + y_init * system.g0c + nz["y01"] + nz["y02"] + nz["y1"] - removed_noise
    base_z = w_init * system.psi0_beta + z_init * system.h0c + nz["z01"] + nz["z02"] + nz["z1"] + nz["z2"]
    xb, yb, zb = solution.x, solution.y, solution.z

    K = grid.steps
    w = np.zeros(K + 1)
    y = np.zeros(K + 1)
    z = np.zeros(K + 1)
    contact = np.zeros(K + 1)
    convert = np.zeros(K + 1)
    into = np.array([system.k_passive.newest, system.k_spreading.newest, system.k_contesting.newest])
    out = np.array([0.0, -system.k_removed.newest, system.k_converted.newest])
    for k in range(K + 1):
        hist = np.array(
            [
                base_w[k] + system.k_passive.history(contact, k),
                base_y[k] + system.k_spreading.history(contact, k) - system.k_removed.history(convert, k),
                base_z[k] + system.k_contesting.history(contact, k) + system.k_converted.history(convert, k),
            ]
        )
        c_row = system.lam[k] * np.array([-yb[k], xb[k] - yb[k], -yb[k]])
        b_row = system.alpha[k] * np.array([0.0, zb[k], yb[k]])
        if k == 0:
            v = hist
        else:
            v = np.linalg.solve(np.eye(3) - np.outer(into, c_row) - np.outer(out, b_row), hist)
        w[k], y[k], z[k] = v
        contact[k] = float(c_row @ v)
        convert[k] = float(b_row @ v)
    logger.debug("fluctuation equations solved on %d steps", K)
    return LimitFluctuation(grid, -(w + y + z), w, y, z)


# --- Ensemble statistics ---


def empirical_cov(paths: Sequence[NoisePath], pair: PairId, t: float, r: float) -> tuple[float, float]:
    """Sample covariance of ``a(t)`` and ``b(r)`` across noise paths, with its jackknife standard error."""
    if len(paths) == 0:
        raise DomainError("ensemble is empty", code=ERR_EMPTY_ENSEMBLE)
    names = paths[0].names
    a, b = parse_pair(pair, names)
    left = np.array([p.value(a, t) for p in paths])
    right = np.array([p.value(b, r) for p in paths])
    return sample_cov_with_se(left, right)
