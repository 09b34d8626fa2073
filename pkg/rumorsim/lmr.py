"""The LMR rumor model: ignorants, uninterested, spreaders and stiflers.

A contact between an ignorant and a spreader makes the ignorant a spreader
with probability ``delta`` and uninterested otherwise. Two spreaders who meet
stifle one of them, or both with probability ``1 - beta``. A spreader who
meets an uninterested individual or a stifler becomes a stifler.
"""

from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from .errors import (
    ERR_CONSERVATION,
    ERR_EVENT_ORDER,
    ERR_MISSING_MARKS,
    ERR_OUT_OF_RANGE,
    ERR_UNKNOWN_PAIR,
    ConfigurationError,
    DomainError,
    InvariantViolation,
    RangeError,
)
from .fclt import NoisePath, PairId, epoch_product, parse_pair
from .flln import FllnSolution
from .laws import LmrLaws
from .simulator import compensator
from .types import EventKind, EventRecord, Grid, LmrSimConfig, LmrState, Process, Trajectory

logger = logging.getLogger(__name__)

LMR_NOISE_NAMES: tuple[str, ...] = ("u1", "y1", "y2", "y3", "z1", "z2")


def simulate_lmr(config: LmrSimConfig) -> Trajectory:
    """Run one replication of the LMR chain up to ``config.horizon``."""
    laws = config.laws
    rng = config.rng()
    n, horizon = config.n, config.horizon
    x, u, y, z = config.initial.x, config.u0, config.y0, config.z0
    events: list[EventRecord] = []
    cap = n / 4.0
    t = 0.0

    while True:
        fa = x * y / n
        fb = max(y - 1, 0) * y / n
        fc = (u + z) * y / n
        if fa > cap or fc > cap:
            raise InvariantViolation(f"count factor above n/4 at t={t}", code=ERR_CONSERVATION)
        ta = laws.lam.next_epoch(t, fa, rng, method=config.sampler, limit=horizon)
        tb = laws.theta.next_epoch(t, fb, rng, method=config.sampler, limit=horizon)
        tc = laws.gamma.next_epoch(t, fc, rng, method=config.sampler, limit=horizon)
        t_next = min(ta, tb, tc)
        if t_next > horizon:
            break
        if t_next < t:
            raise InvariantViolation(f"event at {t_next} precedes clock {t}", code=ERR_EVENT_ORDER)
        t = t_next

        removed, degenerate = 1, False
        if ta <= tb and ta <= tc:
            x -= 1
            if rng.random() < laws.delta:
                y += 1
                kind = EventKind.A_SPREAD
            else:
                u += 1
                kind = EventKind.A_UNINTERESTED
        elif tb <= tc:
            kind = EventKind.B_STIFLE
            y -= 1
            z += 1
            if rng.random() >= laws.beta:
                if y >= 1:
                    y -= 1
                    z += 1
                    removed = 2
                else:
                    degenerate = True
        else:
            kind = EventKind.C_STIFLE
            y -= 1
            z += 1

        record = EventRecord(t, kind, -1, LmrState(x, u, y, z, n), removed=removed, degenerate=degenerate)
        if not record.counts_after.conserved:
            raise InvariantViolation(f"counts {record.counts_after} at t={t}", code=ERR_CONSERVATION)
        events.append(record)

    if logger.isEnabledFor(logging.DEBUG):
        logger.debug("LMR replication %d: %d events", config.replication, len(events))
    return Trajectory(config, tuple(events), None, model="lmr")


# --- Noises ---


def _count_until(times: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    return np.searchsorted(times, nodes, side="right").astype(float)


def extract_lmr_noise(traj: Trajectory, laws: LmrLaws, grid: Grid) -> NoisePath:
    """The six LMR noises of one trajectory, scaled by ``1/sqrt(n)``."""
    if traj.model != "lmr":
        raise ConfigurationError(f"expected an LMR trajectory, got model {traj.model!r}")
    if not traj.has_marks:
        raise ConfigurationError(
            "noise extraction needs a trajectory simulated with retain_marks=True", code=ERR_MISSING_MARKS
        )
    if grid.horizon > traj.horizon * (1.0 + 1e-12):
        raise RangeError(
            f"grid horizon {grid.horizon} exceeds trajectory horizon {traj.horizon}", code=ERR_OUT_OF_RANGE
        )
    t = np.minimum(grid.nodes, traj.horizon)
    root = math.sqrt(traj.n)

    def times_of(*kinds: EventKind, double: bool = False) -> np.ndarray:
        return np.array(
            [e.time for e in traj.events if e.kind in kinds and (not double or e.removed == 2 or e.degenerate)],
            dtype=float,
        )

    contacts = _count_until(times_of(EventKind.A_SPREAD, EventKind.A_UNINTERESTED), t)
    uninterested = _count_until(times_of(EventKind.A_UNINTERESTED), t)
    stifles = _count_until(times_of(EventKind.B_STIFLE), t)
    doubles = _count_until(times_of(EventKind.B_STIFLE, double=True), t)
    meetings = _count_until(times_of(EventKind.C_STIFLE), t)

    u1 = (uninterested - (1.0 - laws.delta) * contacts) / root
    split = (doubles - (1.0 - laws.beta) * stifles) / root
    paths = {
        "u1": u1,
        "y1": -u1,
        "y2": -split,
        "y3": (stifles - np.asarray(compensator(traj, Process.B, t), dtype=float)) / root,
        "z1": split,
        "z2": (meetings - np.asarray(compensator(traj, Process.C, t), dtype=float)) / root,
    }
    return NoisePath(grid, paths, model="lmr")


# --- Covariances ---


class LmrCovarianceModel:
    """Closed-form covariances of the LMR noises along a fluid-limit solution."""

    def __init__(self, solution: FllnSolution, laws: LmrLaws) -> None:
        if solution.model != "lmr":
            raise ConfigurationError("LMR covariances need an LMR fluid limit")
        self.solution = solution
        self.laws = laws
        grid = solution.grid
        nodes = grid.nodes
        self._step = grid.step
        self._mids = (np.arange(grid.steps) + 0.5) * grid.step
        choice = laws.delta * (1.0 - laws.delta) * np.asarray(laws.lam.value(nodes)) * solution.x * solution.y
        split = laws.beta * (1.0 - laws.beta) * np.asarray(laws.theta.value(nodes)) * solution.y**2
        self._choice = np.interp(self._mids, nodes, choice)
        self._split = np.interp(self._mids, nodes, split)

    @property
    def horizon(self) -> float:
        return self.solution.grid.horizon

    def _integral(self, density: np.ndarray, upper: float) -> float:
        live = self._mids < upper
        return float(self._step * np.sum(density[live]))

    def cov(self, pair: PairId, t: float, r: float) -> float:
        a, b = parse_pair(pair, LMR_NOISE_NAMES)
        for v in (t, r):
            if not 0.0 <= v <= self.horizon * (1.0 + 1e-12):
                raise RangeError(f"time {v} outside [0, {self.horizon}]", code=ERR_OUT_OF_RANGE)
        key = frozenset((a, b))
        if key in (frozenset(("y3",)), frozenset(("z2",))):
            estimator = "estimate_QB" if a == "y3" else "estimate_QC"
            raise DomainError(f"the {a} variance has no closed form; estimate it with {estimator}", code=ERR_UNKNOWN_PAIR)
        m = min(t, r)
        if key in (frozenset(("u1",)), frozenset(("y1",))):
            return self._integral(self._choice, m)
        if key == frozenset(("u1", "y1")):
            return -self._integral(self._choice, m)
        if key in (frozenset(("y2",)), frozenset(("z1",))):
            return self._integral(self._split, m)
        if key == frozenset(("y2", "z1")):
            return -self._integral(self._split, m)
        return 0.0


def lmr_cov_table(pair: PairId, t: float, r: float, solution: FllnSolution, laws: LmrLaws) -> float:
    """Limit covariance of two LMR noises along ``solution``."""
    return LmrCovarianceModel(solution, laws).cov(pair, t, r)


def estimate_QC(trajs: Sequence[Trajectory], t: float, r: float, *, seed: int = 0) -> tuple[float, float]:
    """Ensemble estimate of the meeting-noise variance term and its standard error."""
    return epoch_product(trajs, Process.C, t, r, before_first=False, seed=seed)
