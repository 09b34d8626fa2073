"""Exact event-driven simulation of the rumor model with contestants.

Scheduled individual transitions sit in a binary heap. Between two state
changes the interaction intensities are a piecewise-constant rate times a
constant count factor, so the next A and B epochs are drawn exactly from
fresh exponential clocks after every event.
"""

from __future__ import annotations

import heapq
import logging
import math
from typing import Any, Union

import numpy as np

from .errors import (
    ERR_CONSERVATION,
    ERR_EVENT_ORDER,
    ERR_OUT_OF_RANGE,
    InvariantViolation,
    RangeError,
)
from .kernels import sample_pair
from .types import (
    EventKind,
    EventRecord,
    InitialMarks,
    Process,
    Side,
    SimConfig,
    StateCounts,
    Trajectory,
)

logger = logging.getLogger(__name__)

# heap priority; interaction events rank after every scheduled transition at equal times
_SCHEDULED = 0


class _SpreaderSet:
    """Ids of current spreaders with O(1) insert, removal and uniform choice."""

    def __init__(self) -> None:
        self._ids: list[int] = []
        self._pos: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._ids)

    def add(self, i: int) -> None:
        self._pos[i] = len(self._ids)
        self._ids.append(i)

    def remove(self, i: int) -> None:
        k = self._pos.pop(i)
        last = self._ids.pop()
        if last != i:
            self._ids[k] = last
            self._pos[last] = k

    def pick(self, rng: np.random.Generator) -> int:
        return self._ids[int(rng.integers(len(self._ids)))]


class _EventQueue:
    """Min-heap of scheduled transitions keyed by (time, priority, insertion order).

    Cancelled entries stay in the heap and are skipped when their token is stale.
    """

    def __init__(self, n: int) -> None:
        self._heap: list[tuple[float, int, int, EventKind, int, int]] = []
        self._seq = 0
        self._tokens = np.zeros(n, dtype=np.int64)

    def push(self, time: float, kind: EventKind, i: int) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (time, _SCHEDULED, self._seq, kind, i, int(self._tokens[i])))

    def cancel(self, i: int) -> None:
        self._tokens[i] += 1

    def _drop_stale(self) -> None:
        while self._heap and self._heap[0][5] != self._tokens[self._heap[0][4]]:
            heapq.heappop(self._heap)

    def peek_time(self) -> float:
        self._drop_stale()
        return self._heap[0][0] if self._heap else math.inf

    def pop(self) -> tuple[float, EventKind, int]:
        self._drop_stale()
        time, _, _, kind, i, _ = heapq.heappop(self._heap)
        return time, kind, i


def simulate(config: SimConfig) -> Trajectory:
    """Run one replication of the contestant model up to ``config.horizon``."""
    laws = config.laws
    rng = config.rng()
    n, horizon = config.n, config.horizon
    keep = config.retain_marks
    queue = _EventQueue(n)
    spreaders = _SpreaderSet()
    side_of: dict[int, Side] = {}
    secondary_of: dict[int, float] = {}

    x, w, y, z = config.initial.x, config.w0, config.y0, config.z0

    # --- t = 0 schedule ---
    eta0 = np.empty(config.w0)
    spreader_side = np.empty(config.w0, dtype=bool)
    secondary0 = np.empty(config.w0)
    for k in range(config.w0):
        eta0[k] = laws.F0.sample(rng)
        spreader_side[k] = rng.random() <= laws.beta
        secondary0[k] = (laws.G0 if spreader_side[k] else laws.H0).sample(rng)
        side_of[k] = Side.SPREADER if spreader_side[k] else Side.CONTESTANT
        secondary_of[k] = float(secondary0[k])
        queue.push(float(eta0[k]), EventKind.PASSIVE_ACTIVATES, k)
    theta0 = np.empty(config.y0)
    for k in range(config.y0):
        i = config.w0 + k
        theta0[k] = laws.G0.sample(rng)
        spreaders.add(i)
        queue.push(float(theta0[k]), EventKind.SPREADER_FORGETS, i)
    zeta0 = np.empty(config.z0)
    for k in range(config.z0):
        i = config.w0 + config.y0 + k
        zeta0[k] = laws.H0.sample(rng)
        queue.push(float(zeta0[k]), EventKind.CONTESTANT_FORGETS, i)
    inactive = list(range(n - 1, config.w0 + config.y0 + config.z0 - 1, -1))

    marks = InitialMarks(eta0, spreader_side, secondary0, theta0, zeta0) if keep else None
    events: list[EventRecord] = []
    cap = n / 4.0
    t = 0.0

    while True:
        fa = x * y / n
        fb = y * z / n
        if fa > cap or fb > cap:
            raise InvariantViolation(f"count factor above n/4 at t={t}", code=ERR_CONSERVATION)
        ta = laws.lam.next_epoch(t, fa, rng, method=config.sampler, limit=horizon)
        tb = laws.alpha.next_epoch(t, fb, rng, method=config.sampler, limit=horizon)
        ts = queue.peek_time()
        t_next = min(ts, ta, tb)
        if t_next > horizon:
            break
        if t_next < t:
            raise InvariantViolation(f"event at {t_next} precedes clock {t}", code=ERR_EVENT_ORDER)
        t = t_next

        if ts <= ta and ts <= tb:
            _, kind, i = queue.pop()
            if kind is EventKind.PASSIVE_ACTIVATES:
                w -= 1
                side = side_of.pop(i)
                delay = secondary_of.pop(i)
                if side is Side.SPREADER:
                    y += 1
                    spreaders.add(i)
                    queue.push(t + delay, EventKind.SPREADER_FORGETS, i)
                else:
                    z += 1
                    queue.push(t + delay, EventKind.CONTESTANT_FORGETS, i)
            elif kind is EventKind.SPREADER_FORGETS:
                y -= 1
                x += 1
                spreaders.remove(i)
                inactive.append(i)
            else:
                z -= 1
                x += 1
                inactive.append(i)
            record = EventRecord(t, kind, i, StateCounts(x, w, y, z, n))
        elif ta <= tb:
            i = inactive.pop()
            x -= 1
            w += 1
            spreader = rng.random() <= laws.beta
            side = Side.SPREADER if spreader else Side.CONTESTANT
            eta, secondary = sample_pair(laws.F, laws.G if spreader else laws.H, rng)
            side_of[i] = side
            secondary_of[i] = secondary
            queue.push(t + eta, EventKind.PASSIVE_ACTIVATES, i)
            record = EventRecord(
                t,
                EventKind.A_CONTACT,
                i,
                StateCounts(x, w, y, z, n),
                eta=eta if keep else None,
                side=side if keep else None,
                secondary=secondary if keep else None,
            )
        else:
            i = spreaders.pick(rng)
            spreaders.remove(i)
            queue.cancel(i)
            y -= 1
            z += 1
            _, zeta = sample_pair(laws.F, laws.H, rng)
            queue.push(t + zeta, EventKind.CONTESTANT_FORGETS, i)
            record = EventRecord(
                t, EventKind.B_CONVERSION, i, StateCounts(x, w, y, z, n), zeta=zeta if keep else None
            )

        if not record.counts_after.conserved:
            raise InvariantViolation(f"counts {record.counts_after} at t={t}", code=ERR_CONSERVATION)
        events.append(record)

    if logger.isEnabledFor(logging.DEBUG):
        logger.debug("replication %d: %d events", config.replication, len(events))
    return Trajectory(config, tuple(events), marks)


# --- Log queries ---


def _check_time(traj: Trajectory, t: Any) -> np.ndarray:
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > traj.horizon):
        raise RangeError(f"time outside [0, {traj.horizon}]", code=ERR_OUT_OF_RANGE)
    return t_arr


def counts_at(traj: Trajectory, t: float) -> StateCounts:
    """Right-continuous state at time ``t``."""
    _check_time(traj, t)
    k = int(np.searchsorted(traj.times, t, side="right")) - 1
    row = traj.counts[k]
    cls = type(traj.initial)
    return cls(int(row[0]), int(row[1]), int(row[2]), int(row[3]), traj.n)


def counts_on_grid(traj: Trajectory, nodes: np.ndarray) -> np.ndarray:
    """(len(nodes), 4) array of counts at each node."""
    idx = np.searchsorted(traj.times, _check_time(traj, nodes), side="right") - 1
    return traj.counts[idx]


def compensator(traj: Trajectory, process: Union[Process, str], t: Any) -> Any:
    """Exact integral of the stochastic intensity of ``process`` over [0, t]."""
    t_arr = _check_time(traj, t)
    rate = traj.rate(process)
    factors = traj.intensity_factors(process)
    at_changes = rate.cumulative(traj.times)
    pieces = factors[:-1] * np.diff(at_changes)
    cum = np.concatenate(([0.0], np.cumsum(pieces)))
    k = np.searchsorted(traj.times, t_arr, side="right") - 1
    out = cum[k] + factors[k] * (rate.cumulative(t_arr) - at_changes[k])
    return float(out) if np.ndim(out) == 0 else out


def time_rescaled_interarrivals(traj: Trajectory, process: Union[Process, str]) -> list[float]:
    """Compensator increments between consecutive epochs; i.i.d. Exp(1) when the intensity is right."""
    epochs = traj.epochs(process)
    if len(epochs) < 2:
        return []
    return list(np.diff(np.asarray(compensator(traj, process, epochs), dtype=float)))


def intensity_pieces(traj: Trajectory, process: Union[Process, str]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split [0, horizon] into cells of constant intensity.

    Returns ``(start, end, level)`` where ``level`` is the intensity of
    ``process`` on ``[start, end)``.
    """
    rate = traj.rate(process)
    factors = traj.intensity_factors(process)
    cuts = np.union1d(traj.times, rate.breakpoints)
    cuts = np.append(cuts[cuts < traj.horizon], traj.horizon)
    start, end = cuts[:-1], cuts[1:]
    k = np.searchsorted(traj.times, start, side="right") - 1
    level = np.asarray(rate.value(start), dtype=float) * factors[k]
    return start, end, level
