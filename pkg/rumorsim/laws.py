"""Rate functions, delay laws and the law bundles of both rumor models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Any, Optional, Sequence

import numpy as np
from scipy import stats

from .errors import ERR_LAW_INVALID, ConfigurationError

# --- Rates ---


@dataclass(frozen=True)
class RateFunction:
    """Right-continuous piecewise-constant rate with a declared global bound.

    ``segments`` holds ``(breakpoint, value)`` pairs; the first breakpoint is 0
    and the last value extends to infinity.
    """

    segments: tuple[tuple[float, float], ...]
    bound: float = -1.0

    def __post_init__(self) -> None:
        if not self.segments:
            raise ConfigurationError("rate needs at least one segment", code=ERR_LAW_INVALID)
        segs = tuple((float(t), float(v)) for t, v in self.segments)
        object.__setattr__(self, "segments", segs)
        if segs[0][0] != 0.0:
            raise ConfigurationError("first rate breakpoint must be 0", code=ERR_LAW_INVALID)
        for (t0, _), (t1, _) in zip(segs, segs[1:]):
            if not t1 > t0:
                raise ConfigurationError(
                    "rate breakpoints must be strictly increasing", code=ERR_LAW_INVALID
                )
        peak = max(v for _, v in segs)
        if any(v < 0 or not math.isfinite(v) for _, v in segs):
            raise ConfigurationError("rate values must be finite and >= 0", code=ERR_LAW_INVALID)
        if self.bound < 0:
            object.__setattr__(self, "bound", peak)
        elif peak > self.bound:
            raise ConfigurationError(
                f"rate value {peak} exceeds declared bound {self.bound}", code=ERR_LAW_INVALID
            )

    @classmethod
    def constant(cls, value: float) -> RateFunction:
        return cls(((0.0, value),))

    @cached_property
    def _breaks(self) -> np.ndarray:
        return np.array([t for t, _ in self.segments])

    @cached_property
    def _values(self) -> np.ndarray:
        return np.array([v for _, v in self.segments])

    @cached_property
    def _cumulative(self) -> np.ndarray:
        widths = np.diff(self._breaks)
        return np.concatenate(([0.0], np.cumsum(self._values[:-1] * widths)))

    @property
    def is_zero(self) -> bool:
        return self.bound == 0.0

    @property
    def breakpoints(self) -> np.ndarray:
        return self._breaks

    def value(self, t: Any) -> Any:
        """Rate at time ``t`` (scalar or array)."""
        idx = np.searchsorted(self._breaks, t, side="right") - 1
        out = self._values[np.clip(idx, 0, None)]
        return float(out) if np.ndim(out) == 0 else out

    def cumulative(self, t: Any) -> Any:
        """Exact integral of the rate over [0, t]."""
        t_arr = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(self._breaks, t_arr, side="right") - 1, 0, None)
        out = self._cumulative[idx] + self._values[idx] * (t_arr - self._breaks[idx])
        return float(out) if out.ndim == 0 else out

    def integral(self, a: float, b: float) -> float:
        return float(self.cumulative(b) - self.cumulative(a))

    def inverse_cumulative(self, level: float) -> float:
        """Smallest t with cumulative(t) >= level, or +inf if never reached."""
        if level <= 0.0:
            return 0.0
        cum = self._cumulative
        i = int(np.searchsorted(cum, level, side="left")) - 1
        i = max(i, 0)
        rate = self._values[i]
        if i == len(cum) - 1 and rate == 0.0:
            return math.inf
        return float(self._breaks[i] + (level - cum[i]) / rate)

    def next_epoch(
        self,
        t0: float,
        factor: float,
        rng: np.random.Generator,
        *,
        method: str = "inversion",
        limit: float = math.inf,
    ) -> float:
        """Next epoch after ``t0`` of a point process with intensity ``factor * rate(t)``.

        Both methods are exact for piecewise-constant rates; ``thinning``
        proposes at ``bound * factor`` and accepts with ``rate(t) / bound``.
        Returns +inf when no epoch occurs before ``limit``.
        """
        if factor <= 0.0 or self.is_zero:
            return math.inf
        if method == "inversion":
            level = float(self.cumulative(t0)) + rng.standard_exponential() / factor
            t = self.inverse_cumulative(level)
            return t if t <= limit else math.inf
        if method != "thinning":
            raise ConfigurationError(f"unknown sampler {method!r}", code=ERR_LAW_INVALID)
        majorant = self.bound * factor
        t = t0
        while True:
            t += rng.standard_exponential() / majorant
            if t > limit:
                return math.inf
            if rng.random() * self.bound <= self.value(t):
                return t

    def to_dict(self) -> dict[str, Any]:
        return {"segments": [list(s) for s in self.segments], "bound": self.bound}

    @classmethod
    def from_dict(cls, data: Any, path: str = "rate") -> RateFunction:
        if isinstance(data, (int, float)):
            return cls.constant(float(data))
        if not isinstance(data, dict):
            raise ConfigurationError.at(path, "expected a number or a table", code=ERR_LAW_INVALID)
        try:
            if "value" in data:
                segments: Sequence[Sequence[float]] = [[0.0, float(data["value"])]]
            else:
                segments = data["segments"]
            return cls(
                tuple((float(t), float(v)) for t, v in segments),
                float(data.get("bound", -1.0)),
            )
        except ConfigurationError as exc:
            raise ConfigurationError.at(path, exc.message, code=exc.code) from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError.at(path, f"malformed rate: {exc}", code=ERR_LAW_INVALID) from exc


# --- Delay laws ---


class LawKind(str, Enum):
    EXPONENTIAL = "exponential"
    GAMMA = "gamma"
    WEIBULL = "weibull"
    LOGNORMAL = "lognormal"
    ATOM = "atom"
    UNIFORM = "uniform"
    EMPIRICAL = "empirical"


_REQUIRED: dict[LawKind, tuple[str, ...]] = {
    LawKind.EXPONENTIAL: ("rate",),
    LawKind.GAMMA: ("shape", "rate"),
    LawKind.WEIBULL: ("shape", "scale"),
    LawKind.LOGNORMAL: ("mu", "sigma"),
    LawKind.ATOM: ("at",),
    LawKind.UNIFORM: ("low", "high"),
    LawKind.EMPIRICAL: ("points",),
}


def _positive(value: Any) -> bool:
    try:
        return float(value) > 0
    except (TypeError, ValueError):
        return False


@dataclass(frozen=True)
class DelayLaw:
    """A delay distribution on [0, inf), optionally mixed with one atom."""

    kind: LawKind
    params: dict[str, Any] = field(default_factory=dict)
    atom_at: Optional[float] = None
    atom_weight: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", LawKind(self.kind))
        missing = [p for p in _REQUIRED[self.kind] if p not in self.params]
        if missing:
            raise ConfigurationError(
                f"{self.kind.value} law missing parameter(s): {', '.join(missing)}",
                code=ERR_LAW_INVALID,
            )
        p = self.params
        positive = {"rate", "shape", "scale", "sigma"}
        for name in positive & set(p):
            if not float(p[name]) > 0:
                raise ConfigurationError(f"{name} must be > 0", code=ERR_LAW_INVALID)
        if self.kind is LawKind.ATOM and float(p["at"]) < 0:
            raise ConfigurationError("atom must sit at a point >= 0", code=ERR_LAW_INVALID)
        if self.kind is LawKind.UNIFORM and not 0 <= float(p["low"]) < float(p["high"]):
            raise ConfigurationError("uniform needs 0 <= low < high", code=ERR_LAW_INVALID)
        if self.kind is LawKind.EMPIRICAL:
            self._validate_table()
        if self.atom_at is not None:
            if self.kind is LawKind.ATOM:
                raise ConfigurationError("a pure atom cannot carry a second atom", code=ERR_LAW_INVALID)
            if self.atom_at < 0 or not 0.0 <= self.atom_weight <= 1.0:
                raise ConfigurationError("atom_at >= 0 and atom_weight in [0, 1] required", code=ERR_LAW_INVALID)

    def _validate_table(self) -> None:
        try:
            xs = np.array([float(x) for x, _ in self.params["points"]])
            ps = np.array([float(q) for _, q in self.params["points"]])
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed empirical table: {exc}", code=ERR_LAW_INVALID) from exc
        if len(xs) < 2:
            raise ConfigurationError("empirical table needs >= 2 points", code=ERR_LAW_INVALID)
        if xs[0] < 0 or np.any(np.diff(xs) <= 0):
            raise ConfigurationError("empirical x values must be >= 0 and strictly increasing", code=ERR_LAW_INVALID)
        if ps[0] != 0.0 or ps[-1] != 1.0 or np.any(np.diff(ps) < 0):
            raise ConfigurationError(
                "empirical probabilities must rise from 0 to 1 monotonically", code=ERR_LAW_INVALID
            )

    # --- constructors ---

    @classmethod
    def exponential(cls, rate: float) -> DelayLaw:
        return cls(LawKind.EXPONENTIAL, {"rate": rate})

    @classmethod
    def gamma(cls, shape: float, rate: float) -> DelayLaw:
        return cls(LawKind.GAMMA, {"shape": shape, "rate": rate})

    @classmethod
    def weibull(cls, shape: float, scale: float) -> DelayLaw:
        return cls(LawKind.WEIBULL, {"shape": shape, "scale": scale})

    @classmethod
    def lognormal(cls, mu: float, sigma: float) -> DelayLaw:
        return cls(LawKind.LOGNORMAL, {"mu": mu, "sigma": sigma})

    @classmethod
    def atom(cls, at: float) -> DelayLaw:
        return cls(LawKind.ATOM, {"at": at})

    @classmethod
    def uniform(cls, low: float, high: float) -> DelayLaw:
        return cls(LawKind.UNIFORM, {"low": low, "high": high})

    @classmethod
    def empirical(cls, points: Sequence[tuple[float, float]]) -> DelayLaw:
        return cls(LawKind.EMPIRICAL, {"points": [tuple(pt) for pt in points]})

    # --- structure ---

    @cached_property
    def _frozen(self) -> Any:
        p = self.params
        if self.kind is LawKind.EXPONENTIAL:
            return stats.expon(scale=1.0 / float(p["rate"]))
        if self.kind is LawKind.GAMMA:
            return stats.gamma(a=float(p["shape"]), scale=1.0 / float(p["rate"]))
        if self.kind is LawKind.WEIBULL:
            return stats.weibull_min(c=float(p["shape"]), scale=float(p["scale"]))
        if self.kind is LawKind.LOGNORMAL:
            return stats.lognorm(s=float(p["sigma"]), scale=math.exp(float(p["mu"])))
        if self.kind is LawKind.UNIFORM:
            low, high = float(p["low"]), float(p["high"])
            return stats.uniform(loc=low, scale=high - low)
        return None

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray]:
        pts = self.params["points"]
        return (
            np.array([float(x) for x, _ in pts]),
            np.array([float(q) for _, q in pts]),
        )

    @property
    def continuous_weight(self) -> float:
        """Mass carried by the density part."""
        if self.kind is LawKind.ATOM:
            return 0.0
        return 1.0 - (self.atom_weight if self.atom_at is not None else 0.0)

    @property
    def atoms(self) -> tuple[tuple[float, float], ...]:
        """``(location, mass)`` for every atom of the law."""
        if self.kind is LawKind.ATOM:
            return ((float(self.params["at"]), 1.0),)
        if self.atom_at is not None and self.atom_weight > 0:
            return ((float(self.atom_at), float(self.atom_weight)),)
        return ()

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Points where the cdf is discontinuous or its density is not smooth."""
        pts = [a for a, _ in self.atoms]
        if self.kind is LawKind.UNIFORM:
            pts += [float(self.params["low"]), float(self.params["high"])]
        elif self.kind is LawKind.EMPIRICAL:
            pts += list(self._table[0])
        return tuple(sorted(set(pts)))

    # --- distribution functions ---

    def continuous_cdf(self, x: np.ndarray) -> np.ndarray:
        if self.kind is LawKind.EMPIRICAL:
            xs, ps = self._table
            return np.interp(x, xs, ps, left=0.0, right=1.0)
        return self._frozen.cdf(x)

    def continuous_ppf(self, q: Any) -> np.ndarray:
        """Quantile function of the density part alone."""
        q = np.asarray(q, dtype=float)
        if self.kind is LawKind.EMPIRICAL:
            xs, ps = self._table
            return np.interp(q, ps, xs)
        return self._frozen.ppf(q)

    def continuous_pdf(self, x: Any) -> np.ndarray:
        """Density of the continuous part, normalised to total mass 1."""
        x = np.asarray(x, dtype=float)
        if self.kind is LawKind.EMPIRICAL:
            xs, ps = self._table
            slopes = np.diff(ps) / np.diff(xs)
            idx = np.searchsorted(xs, x, side="right") - 1
            inside = (idx >= 0) & (idx < len(slopes))
            return np.where(inside, slopes[np.clip(idx, 0, len(slopes) - 1)], 0.0)
        return self._frozen.pdf(x)

    @property
    def density_singular_at_zero(self) -> bool:
        """True when the density is unbounded at 0 (shape < 1 families)."""
        if self.kind in (LawKind.GAMMA, LawKind.WEIBULL):
            return float(self.params["shape"]) < 1.0
        return False

    def cdf(self, x: Any) -> Any:
        x_arr = np.asarray(x, dtype=float)
        out = np.zeros_like(x_arr)
        cw = self.continuous_weight
        if cw > 0:
            out = out + cw * self.continuous_cdf(np.maximum(x_arr, 0.0))
        for at, mass in self.atoms:
            out = out + mass * (x_arr >= at)
        out = np.where(x_arr < 0, 0.0, np.clip(out, 0.0, 1.0))
        return float(out) if out.ndim == 0 else out

    def complement(self, x: Any) -> Any:
        c = self.cdf(x)
        return 1.0 - c

    def cdf_left(self, x: float) -> float:
        """P(delay < x)."""
        jump = sum(mass for at, mass in self.atoms if at == x)
        return float(self.cdf(x)) - jump

    def sample(self, rng: np.random.Generator) -> float:
        """One draw by inversion; consumes exactly one or two uniforms."""
        atoms = self.atoms
        if self.kind is LawKind.ATOM:
            return atoms[0][0]
        if atoms and rng.random() < atoms[0][1]:
            return atoms[0][0]
        return float(self.continuous_ppf(rng.random()))

    def sample_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        if self.kind is LawKind.ATOM:
            return np.full(size, float(self.params["at"]))
        draws = self.continuous_ppf(rng.random(size))
        if self.atoms:
            at, mass = self.atoms[0]
            draws = np.where(rng.random(size) < mass, at, draws)
        return np.asarray(draws, dtype=float)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind.value}
        for key, val in self.params.items():
            d[key] = [list(pt) for pt in val] if key == "points" else val
        if self.atom_at is not None:
            d["atom_at"] = self.atom_at
            d["atom_weight"] = self.atom_weight
        return d

    @classmethod
    def from_dict(cls, data: Any, path: str = "law") -> DelayLaw:
        if not isinstance(data, dict) or "kind" not in data:
            raise ConfigurationError.at(path, "expected a table with a 'kind' key", code=ERR_LAW_INVALID)
        try:
            kind = LawKind(data["kind"])
        except ValueError as exc:
            raise ConfigurationError.at(f"{path}.kind", f"unknown law kind {data['kind']!r}", code=ERR_LAW_INVALID) from exc
        params = {k: v for k, v in data.items() if k not in ("kind", "atom_at", "atom_weight")}
        for key in _REQUIRED[kind]:
            if key not in params:
                raise ConfigurationError.at(f"{path}.{key}", "missing parameter", code=ERR_LAW_INVALID)
        for key in ("rate", "shape", "scale", "sigma"):
            if key in params and not _positive(params[key]):
                raise ConfigurationError.at(f"{path}.{key}", f"must be > 0 (got {params[key]!r})", code=ERR_LAW_INVALID)
        try:
            return cls(
                kind,
                params,
                atom_at=float(data["atom_at"]) if "atom_at" in data else None,
                atom_weight=float(data.get("atom_weight", 0.0)),
            )
        except ConfigurationError as exc:
            raise ConfigurationError.at(path, exc.message, code=exc.code) from exc
        except (TypeError, ValueError) as exc:
            raise ConfigurationError.at(path, f"malformed law: {exc}", code=ERR_LAW_INVALID) from exc


class ConditionalMode(str, Enum):
    INDEPENDENT = "independent"
    PARAMETER_MAP = "parameter-map"


@dataclass(frozen=True)
class ConditionalDelayLaw:
    """Law of a secondary delay given the passive delay ``x``.

    In parameter-map mode, ``laws[k]`` applies on ``boundaries[k-1] <= x < boundaries[k]``
    and the last law covers ``x >= boundaries[-1]``.
    """

    laws: tuple[DelayLaw, ...]
    boundaries: tuple[float, ...] = ()
    mode: ConditionalMode = ConditionalMode.INDEPENDENT

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", ConditionalMode(self.mode))
        object.__setattr__(self, "laws", tuple(self.laws))
        object.__setattr__(self, "boundaries", tuple(float(b) for b in self.boundaries))
        if self.mode is ConditionalMode.INDEPENDENT:
            if len(self.laws) != 1 or self.boundaries:
                raise ConfigurationError("independent mode takes exactly one law", code=ERR_LAW_INVALID)
            return
        if len(self.laws) != len(self.boundaries) + 1:
            raise ConfigurationError("parameter-map needs one more law than boundaries", code=ERR_LAW_INVALID)
        b = np.array(self.boundaries)
        if not np.all(np.isfinite(b)) or np.any(np.diff(b) <= 0):
            raise ConfigurationError("slice boundaries must be finite and increasing", code=ERR_LAW_INVALID)

    @classmethod
    def independent(cls, law: DelayLaw) -> ConditionalDelayLaw:
        return cls((law,))

    @classmethod
    def parameter_map(
        cls, boundaries: Sequence[float], laws: Sequence[DelayLaw]
    ) -> ConditionalDelayLaw:
        return cls(tuple(laws), tuple(boundaries), ConditionalMode.PARAMETER_MAP)

    @property
    def is_independent(self) -> bool:
        return self.mode is ConditionalMode.INDEPENDENT

    def slice_index(self, x: Any) -> Any:
        return np.searchsorted(np.array(self.boundaries), x, side="right")

    def slice_for(self, x: float) -> DelayLaw:
        if self.is_independent:
            return self.laws[0]
        return self.laws[int(self.slice_index(x))]

    def complement(self, a: Any, x: Any) -> np.ndarray:
        """P(secondary > a | passive delay = x), broadcast over ``a`` and ``x``."""
        a_arr, x_arr = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
        if self.is_independent:
            return np.asarray(self.laws[0].complement(a_arr), dtype=float)
        idx = self.slice_index(x_arr)
        out = np.empty(a_arr.shape)
        for k, law in enumerate(self.laws):
            mask = idx == k
            if np.any(mask):
                out[mask] = law.complement(a_arr[mask])
        return out

    @property
    def lag_breakpoints(self) -> tuple[float, ...]:
        """Secondary-delay values at which some slice complement jumps or kinks."""
        pts: set[float] = set()
        for law in self.laws:
            pts.update(law.breakpoints)
        return tuple(sorted(pts))

    def sample(self, x: float, rng: np.random.Generator) -> float:
        return self.slice_for(x).sample(rng)

    def to_dict(self) -> dict[str, Any]:
        if self.is_independent:
            return {"mode": self.mode.value, "law": self.laws[0].to_dict()}
        slices: list[dict[str, Any]] = []
        for k, law in enumerate(self.laws):
            entry: dict[str, Any] = {"law": law.to_dict()}
            if k < len(self.boundaries):
                entry["upto"] = self.boundaries[k]
            slices.append(entry)
        return {"mode": self.mode.value, "slices": slices}

    @classmethod
    def from_dict(cls, data: Any, path: str = "cond") -> ConditionalDelayLaw:
        if not isinstance(data, dict):
            raise ConfigurationError.at(path, "expected a table", code=ERR_LAW_INVALID)
        mode = data.get("mode", "independent" if "kind" in data or "law" in data else "")
        if mode == "independent":
            law_data = data.get("law", {k: v for k, v in data.items() if k != "mode"})
            return cls.independent(DelayLaw.from_dict(law_data, f"{path}.law" if "law" in data else path))
        if mode != "parameter-map":
            raise ConfigurationError.at(f"{path}.mode", f"unknown conditional mode {mode!r}", code=ERR_LAW_INVALID)
        slices = data.get("slices")
        if not isinstance(slices, list) or not slices:
            raise ConfigurationError.at(f"{path}.slices", "parameter-map needs a non-empty slices list", code=ERR_LAW_INVALID)
        laws = [DelayLaw.from_dict(s.get("law"), f"{path}.slices[{k}].law") for k, s in enumerate(slices)]
        try:
            bounds = [float(s["upto"]) for s in slices[:-1]]
            return cls.parameter_map(bounds, laws)
        except KeyError as exc:
            raise ConfigurationError.at(f"{path}.slices", "every slice but the last needs 'upto'", code=ERR_LAW_INVALID) from exc
        except ConfigurationError as exc:
            raise ConfigurationError.at(f"{path}.slices", exc.message, code=exc.code) from exc


# --- Law bundles ---


def _probability(value: Any, path: str) -> float:
    try:
        p = float(value)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError.at(path, "expected a number", code=ERR_LAW_INVALID) from exc
    if not 0.0 <= p <= 1.0:
        raise ConfigurationError.at(path, f"probability {p} outside [0, 1]", code=ERR_LAW_INVALID)
    return p


@dataclass(frozen=True)
class ModelLaws:
    """All rates, probabilities and delay laws of the contestant model."""

    lam: RateFunction
    alpha: RateFunction
    beta: float
    F0: DelayLaw
    G0: DelayLaw
    H0: DelayLaw
    F: DelayLaw
    G: ConditionalDelayLaw
    H: ConditionalDelayLaw

    def __post_init__(self) -> None:
        _probability(self.beta, "beta")

    def with_rates(self, lam: RateFunction, alpha: RateFunction) -> ModelLaws:
        return ModelLaws(lam, alpha, self.beta, self.F0, self.G0, self.H0, self.F, self.G, self.H)

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam.to_dict(),
            "alpha": self.alpha.to_dict(),
            "beta": self.beta,
            "F0": self.F0.to_dict(),
            "G0": self.G0.to_dict(),
            "H0": self.H0.to_dict(),
            "F": self.F.to_dict(),
            "G": self.G.to_dict(),
            "H": self.H.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], path: str = "laws") -> ModelLaws:
        missing = [k for k in ("lambda", "alpha", "beta", "F0", "G0", "H0", "F", "G", "H") if k not in data]
        if missing:
            raise ConfigurationError.at(path, f"missing law(s): {', '.join(missing)}")
        return cls(
            lam=RateFunction.from_dict(data["lambda"], f"{path}.lambda"),
            alpha=RateFunction.from_dict(data["alpha"], f"{path}.alpha"),
            beta=_probability(data["beta"], f"{path}.beta"),
            F0=DelayLaw.from_dict(data["F0"], f"{path}.F0"),
            G0=DelayLaw.from_dict(data["G0"], f"{path}.G0"),
            H0=DelayLaw.from_dict(data["H0"], f"{path}.H0"),
            F=DelayLaw.from_dict(data["F"], f"{path}.F"),
            G=ConditionalDelayLaw.from_dict(data["G"], f"{path}.G"),
            H=ConditionalDelayLaw.from_dict(data["H"], f"{path}.H"),
        )


@dataclass(frozen=True)
class LmrLaws:
    """Rates and branching probabilities of the non-Markovian LMR model."""

    lam: RateFunction
    theta: RateFunction
    gamma: RateFunction
    delta: float
    beta: float

    def __post_init__(self) -> None:
        _probability(self.delta, "delta")
        _probability(self.beta, "beta")

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda": self.lam.to_dict(),
            "theta": self.theta.to_dict(),
            "gamma": self.gamma.to_dict(),
            "delta": self.delta,
            "beta": self.beta,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any], path: str = "laws") -> LmrLaws:
        missing = [k for k in ("lambda", "theta", "gamma", "delta", "beta") if k not in data]
        if missing:
            raise ConfigurationError.at(path, f"missing law(s): {', '.join(missing)}")
        return cls(
            lam=RateFunction.from_dict(data["lambda"], f"{path}.lambda"),
            theta=RateFunction.from_dict(data["theta"], f"{path}.theta"),
            gamma=RateFunction.from_dict(data["gamma"], f"{path}.gamma"),
            delta=_probability(data["delta"], f"{path}.delta"),
            beta=_probability(data["beta"], f"{path}.beta"),
        )
