"""rumorsim records, configurations and result types."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Optional, Union

import numpy as np

from .errors import (
    ERR_CONFIG_INVALID,
    ERR_HORIZON,
    ConfigurationError,
)
from .laws import LmrLaws, ModelLaws, RateFunction


# --- Grid ---


@dataclass(frozen=True)
class Grid:
    """Uniform time grid with ``steps`` cells of width ``step``."""

    step: float
    steps: int

    def __post_init__(self) -> None:
        if not self.step > 0 or self.steps < 1:
            raise ConfigurationError(
                f"grid needs step > 0 and steps >= 1 (got {self.step}, {self.steps})",
                code=ERR_CONFIG_INVALID,
            )

    @classmethod
    def over(cls, horizon: float, step: float) -> Grid:
        """Grid covering [0, horizon] with the given step (rounded to a whole count)."""
        if not horizon > 0:
            raise ConfigurationError(f"horizon must be > 0 (got {horizon})", code=ERR_HORIZON)
        steps = max(1, int(round(horizon / step)))
        return cls(horizon / steps, steps)

    @property
    def horizon(self) -> float:
        return self.step * self.steps

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.step

    def to_dict(self) -> dict[str, Any]:
        return {"step": self.step, "steps": self.steps}


# --- Counts and events ---


@dataclass(frozen=True)
class StateCounts:
    """Class sizes of a finite population: inactive, passive, spreader, contestant."""

    x: int
    w: int
    y: int
    z: int
    n: int

    @property
    def conserved(self) -> bool:
        return self.x + self.w + self.y + self.z == self.n and min(self.x, self.w, self.y, self.z) >= 0

    def to_dict(self) -> dict[str, int]:
        return {"x": self.x, "w": self.w, "y": self.y, "z": self.z}


@dataclass(frozen=True)
class LmrState(StateCounts):
    """LMR class sizes; the second slot holds the uninterested count."""

    @property
    def u(self) -> int:
        return self.w

    def to_dict(self) -> dict[str, int]:
        return {"x": self.x, "u": self.w, "y": self.y, "z": self.z}


class Side(str, Enum):
    SPREADER = "spreader"
    CONTESTANT = "contestant"


class EventKind(str, Enum):
    A_CONTACT = "a-contact"
    B_CONVERSION = "b-conversion"
    PASSIVE_ACTIVATES = "passive-activates"
    SPREADER_FORGETS = "spreader-forgets"
    CONTESTANT_FORGETS = "contestant-forgets"
    # LMR
    A_SPREAD = "a-spread"
    A_UNINTERESTED = "a-uninterested"
    B_STIFLE = "b-stifle"
    C_STIFLE = "c-stifle"


class Process(str, Enum):
    A = "A"
    B = "B"
    C = "C"


_PROCESS_OF: dict[EventKind, Process] = {
    EventKind.A_CONTACT: Process.A,
    EventKind.B_CONVERSION: Process.B,
    EventKind.A_SPREAD: Process.A,
    EventKind.A_UNINTERESTED: Process.A,
    EventKind.B_STIFLE: Process.B,
    EventKind.C_STIFLE: Process.C,
}


@dataclass(frozen=True)
class EventRecord:
    """One state change. Mark fields are None unless the simulation retains marks."""

    time: float
    kind: EventKind
    i: int
    counts_after: StateCounts
    eta: Optional[float] = None
    side: Optional[Side] = None
    secondary: Optional[float] = None
    zeta: Optional[float] = None
    removed: int = 1
    degenerate: bool = False

    @property
    def process(self) -> Optional[Process]:
        return _PROCESS_OF.get(self.kind)

    def to_dict(self) -> dict[str, Any]:
        c = self.counts_after
        return {"t": self.time, "kind": self.kind.value, "i": self.i, "x": c.x, "w": c.w, "y": c.y, "z": c.z}


@dataclass(frozen=True)
class InitialMarks:
    """Delays drawn at t = 0 for the initially passive, spreading and contesting."""

    eta0: np.ndarray
    spreader_side: np.ndarray
    secondary0: np.ndarray
    theta0: np.ndarray
    zeta0: np.ndarray


# --- Configurations ---


def _check_counts(n: int, horizon: float, initial: tuple[int, int, int]) -> None:
    if n < 1:
        raise ConfigurationError(f"population size must be >= 1 (got {n})")
    if not horizon > 0 or not math.isfinite(horizon):
        raise ConfigurationError(f"horizon must be a finite positive time (got {horizon})", code=ERR_HORIZON)
    if min(initial) < 0 or sum(initial) > n:
        raise ConfigurationError(f"initial counts {initial} must be >= 0 and sum to at most n={n}")


@dataclass(frozen=True)
class SimConfig:
    """One contestant-model simulation: population, horizon, initial counts, seed and laws."""

    n: int
    horizon: float
    w0: int
    y0: int
    z0: int
    seed: int
    laws: ModelLaws
    replication: int = 0
    sampler: str = "inversion"
    retain_marks: bool = True

    def __post_init__(self) -> None:
        _check_counts(self.n, self.horizon, (self.w0, self.y0, self.z0))
        if self.sampler not in ("inversion", "thinning"):
            raise ConfigurationError(f"unknown sampler {self.sampler!r}")

    @property
    def initial(self) -> StateCounts:
        x0 = self.n - self.w0 - self.y0 - self.z0
        return StateCounts(x0, self.w0, self.y0, self.z0, self.n)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.replication])


@dataclass(frozen=True)
class LmrSimConfig:
    """One LMR simulation."""

    n: int
    horizon: float
    u0: int
    y0: int
    z0: int
    seed: int
    laws: LmrLaws
    replication: int = 0
    sampler: str = "inversion"
    retain_marks: bool = True

    def __post_init__(self) -> None:
        _check_counts(self.n, self.horizon, (self.u0, self.y0, self.z0))
        if self.sampler not in ("inversion", "thinning"):
            raise ConfigurationError(f"unknown sampler {self.sampler!r}")

    @property
    def initial(self) -> LmrState:
        x0 = self.n - self.u0 - self.y0 - self.z0
        return LmrState(x0, self.u0, self.y0, self.z0, self.n)

    def rng(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.replication])


AnySimConfig = Union[SimConfig, LmrSimConfig]


# --- Trajectory ---


@dataclass(frozen=True)
class Trajectory:
    """Event log of one finite-n run plus the step-function views derived from it."""

    config: AnySimConfig
    events: tuple[EventRecord, ...]
    initial_marks: Optional[InitialMarks] = None
    model: str = "contestant"

    @property
    def n(self) -> int:
        return self.config.n

    @property
    def horizon(self) -> float:
        return self.config.horizon

    @property
    def initial(self) -> StateCounts:
        return self.config.initial

    @property
    def final(self) -> StateCounts:
        return self.events[-1].counts_after if self.events else self.initial

    @property
    def has_marks(self) -> bool:
        return self.config.retain_marks

    @cached_property
    def times(self) -> np.ndarray:
        """State-change times, led by 0 for the initial state."""
        return np.array([0.0] + [e.time for e in self.events])

    @cached_property
    def counts(self) -> np.ndarray:
        """(K + 1, 4) array of (x, w, y, z) after each state change."""
        rows = [self.initial] + [e.counts_after for e in self.events]
        return np.array([(c.x, c.w, c.y, c.z) for c in rows], dtype=np.int64)

    def epochs(self, process: Process | str) -> np.ndarray:
        process = Process(process)
        return np.array([e.time for e in self.events if e.process is process])

    def rate(self, process: Process | str) -> RateFunction:
        process = Process(process)
        laws = self.config.laws
        if self.model == "lmr":
            assert isinstance(laws, LmrLaws)
            return {Process.A: laws.lam, Process.B: laws.theta, Process.C: laws.gamma}[process]
        assert isinstance(laws, ModelLaws)
        if process is Process.C:
            raise ConfigurationError("the contestant model has no C process")
        return laws.lam if process is Process.A else laws.alpha

    def intensity_factors(self, process: Process | str) -> np.ndarray:
        """Count factor multiplying the rate on each constant-state segment."""
        process = Process(process)
        c = self.counts.astype(float)
        x, w, y, z = c[:, 0], c[:, 1], c[:, 2], c[:, 3]
        if process is Process.A:
            return x * y / self.n
        if self.model == "lmr":
            if process is Process.B:
                return np.maximum(y - 1.0, 0.0) * y / self.n
            return (w + z) * y / self.n
        if process is Process.C:
            raise ConfigurationError("the contestant model has no C process")
        return y * z / self.n

    def jsonl_lines(self) -> list[str]:
        """Event log as JSON lines with fixed field order."""
        return [json.dumps(e.to_dict(), separators=(",", ":")) for e in self.events]
