"""rumorsim experiment configuration."""

from __future__ import annotations

import math
import os
import sys
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .errors import ERR_CONFIG_INVALID, ERR_HORIZON, ConfigurationError
from .fclt import CovarianceForm
from .laws import ConditionalDelayLaw, DelayLaw, LmrLaws, ModelLaws, RateFunction
from .types import AnySimConfig, LmrSimConfig, SimConfig


class Model(str, Enum):
    CONTESTANT = "contestant"
    LMR = "lmr"


class Experiment(str, Enum):
    SIMULATE = "simulate"
    FLLN = "flln"
    FCLT_COV = "fclt-cov"
    VERIFY_THINNING = "verify-thinning"
    VERIFY_FLLN = "verify-flln"
    VERIFY_FCLT = "verify-fclt"
    ESTIMATE_QB = "estimate-qb"
    ESTIMATE_QC = "estimate-qc"


def default_contestant_laws() -> ModelLaws:
    """Bounded rates with a gamma passive delay, so the model is genuinely non-Markovian."""
    exp1 = DelayLaw.exponential(1.0)
    return ModelLaws(
        lam=RateFunction.constant(0.8),
        alpha=RateFunction.constant(0.4),
        beta=0.6,
        F0=exp1,
        G0=exp1,
        H0=exp1,
        F=DelayLaw.gamma(2.0, 2.0),
        G=ConditionalDelayLaw.independent(exp1),
        H=ConditionalDelayLaw.independent(exp1),
    )


def default_lmr_laws() -> LmrLaws:
    return LmrLaws(
        lam=RateFunction.constant(0.8),
        theta=RateFunction.constant(0.4),
        gamma=RateFunction.constant(0.2),
        delta=0.7,
        beta=0.5,
    )


DEFAULT_INIT = {Model.CONTESTANT: (0.1, 0.05, 0.05), Model.LMR: (0.0, 0.05, 0.0)}

ENV_OVERRIDES = {
    "RUMORSIM_SEED": "seed",
    "RUMORSIM_OUT": "out",
    "RUMORSIM_THREADS": "threads",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: model, laws, population sizes, replications, grid and outputs.

    ``init`` holds initial proportions: (W, Y, Z) for the contestant model and
    (U, Y, Z) for LMR.
    """

    laws: Union[ModelLaws, LmrLaws] = field(default_factory=default_contestant_laws)
    model: Model = Model.CONTESTANT
    experiment: Experiment = Experiment.FLLN
    n: tuple[int, ...] = (1000,)
    replications: int = 1
    horizon: float = 10.0
    step: float = 0.01
    seed: int = 0
    out: str = "out"
    threads: int = 1
    init: tuple[float, float, float] = DEFAULT_INIT[Model.CONTESTANT]
    sampler: str = "inversion"
    cov_form: CovarianceForm = CovarianceForm.MARKED
    cov_times: tuple[float, ...] = (2.0, 5.0, 8.0)
    noise_step: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "model", Model(self.model))
        object.__setattr__(self, "experiment", Experiment(self.experiment))
        object.__setattr__(self, "cov_form", CovarianceForm(self.cov_form))
        object.__setattr__(self, "n", tuple(int(v) for v in self.n))
        object.__setattr__(self, "init", tuple(float(v) for v in self.init))
        object.__setattr__(self, "cov_times", tuple(float(v) for v in self.cov_times))
        self.validate()

    def validate(self) -> None:
        expected = LmrLaws if self.model is Model.LMR else ModelLaws
        if not isinstance(self.laws, expected):
            raise ConfigurationError.at("laws", f"{self.model.value} model needs {expected.__name__}")
        if not self.n or min(self.n) < 2:
            raise ConfigurationError.at("n", f"population sizes must be >= 2 (got {list(self.n)})")
        if self.replications < 1:
            raise ConfigurationError.at("replications", f"must be >= 1 (got {self.replications})")
        if not self.horizon > 0 or not math.isfinite(self.horizon):
            raise ConfigurationError.at("horizon", f"must be a finite time > 0 (got {self.horizon})", code=ERR_HORIZON)
        if not self.step > 0 or self.step > self.horizon:
            raise ConfigurationError.at("step", f"must lie in (0, horizon] (got {self.step})")
        if self.threads < 1:
            raise ConfigurationError.at("threads", f"must be >= 1 (got {self.threads})")
        if len(self.init) != 3 or min(self.init) < 0 or sum(self.init) > 1:
            raise ConfigurationError.at("init", f"needs three proportions >= 0 summing to at most 1 (got {list(self.init)})")
        if self.sampler not in ("inversion", "thinning"):
            raise ConfigurationError.at("sampler", f"unknown sampler {self.sampler!r}")
        if not 0 < self.noise_step <= self.horizon:
            raise ConfigurationError.at("noise_step", f"must lie in (0, horizon] (got {self.noise_step})")
        if any(not 0 < t <= self.horizon for t in self.cov_times):
            raise ConfigurationError.at("cov_times", f"times must lie in (0, horizon] (got {list(self.cov_times)})")
        if self.experiment is Experiment.ESTIMATE_QC and self.model is not Model.LMR:
            raise ConfigurationError.at("experiment", "estimate-qc applies to the LMR model only")

    # --- construction ---

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ExperimentConfig:
        """Build a config from a parsed TOML document."""
        try:
            model = Model(data.get("model", Model.CONTESTANT.value))
        except ValueError as exc:
            raise ConfigurationError.at("model", f"unknown model {data.get('model')!r}") from exc
        if "laws" in data:
            laws_data = data["laws"]
            if not isinstance(laws_data, dict):
                raise ConfigurationError.at("laws", "expected a table")
            laws: Union[ModelLaws, LmrLaws] = (
                LmrLaws.from_dict(laws_data) if model is Model.LMR else ModelLaws.from_dict(laws_data)
            )
        else:
            laws = default_lmr_laws() if model is Model.LMR else default_contestant_laws()

        kwargs: dict[str, Any] = {"laws": laws, "model": model, "init": DEFAULT_INIT[model]}
        for key, convert in (
            ("experiment", Experiment),
            ("replications", int),
            ("horizon", float),
            ("step", float),
            ("seed", int),
            ("out", str),
            ("threads", int),
            ("sampler", str),
            ("cov_form", CovarianceForm),
            ("noise_step", float),
        ):
            if key in data:
                try:
                    kwargs[key] = convert(data[key])
                except (TypeError, ValueError) as exc:
                    raise ConfigurationError.at(key, f"invalid value {data[key]!r}") from exc
        for key in ("n", "init", "cov_times"):
            if key in data:
                value = data[key]
                items = value if isinstance(value, list) else [value]
                try:
                    kwargs[key] = tuple(int(v) if key == "n" else float(v) for v in items)
                except (TypeError, ValueError) as exc:
                    raise ConfigurationError.at(key, f"invalid value {value!r}") from exc
        unknown = set(data) - set(kwargs) - {"laws", "model"}
        if unknown:
            raise ConfigurationError.at(sorted(unknown)[0], "unknown configuration key")
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> ExperimentConfig:
        """Load a TOML experiment file."""
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}", code=ERR_CONFIG_INVALID) from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationError(f"malformed TOML in {path}: {exc}", code=ERR_CONFIG_INVALID) from exc
        return cls.from_dict(data)

    def from_env(self, environ: Optional[Mapping[str, str]] = None) -> ExperimentConfig:
        """Apply overrides from environment variables.

        Recognised variables:
            RUMORSIM_SEED: base seed (integer)
            RUMORSIM_OUT: output directory
            RUMORSIM_THREADS: worker threads (integer)

        Raises:
            ConfigurationError: If any integer variable does not parse.
        """
        env = os.environ if environ is None else environ
        values: dict[str, Any] = {}
        invalid: list[str] = []

        for env_name, field_name in ENV_OVERRIDES.items():
            val = env.get(env_name, "")
            if not val:
                continue
            if field_name == "out":
                values[field_name] = val
                continue
            try:
                values[field_name] = int(val)
            except ValueError:
                invalid.append(env_name)

        if invalid:
            raise ConfigurationError(
                f"Environment variable(s) not an integer: {', '.join(invalid)}",
                code=ERR_CONFIG_INVALID,
                details={"variables": invalid},
            )

        return replace(self, **values) if values else self

    def with_overrides(
        self, *, seed: Optional[int] = None, out: Optional[str] = None, threads: Optional[int] = None
    ) -> ExperimentConfig:
        values = {k: v for k, v in (("seed", seed), ("out", out), ("threads", threads)) if v is not None}
        return replace(self, **values) if values else self

    # --- derived ---

    def initial_counts(self, n: int) -> tuple[int, int, int]:
        a, b, c = (int(round(p * n)) for p in self.init)
        return a, b, c

    def sim_config(self, n: int, replication: int, *, retain_marks: bool = False) -> AnySimConfig:
        a, b, c = self.initial_counts(n)
        if self.model is Model.LMR:
            assert isinstance(self.laws, LmrLaws)
            return LmrSimConfig(
                n, self.horizon, a, b, c, self.seed, self.laws, replication, self.sampler, retain_marks
            )
        assert isinstance(self.laws, ModelLaws)
        return SimConfig(n, self.horizon, a, b, c, self.seed, self.laws, replication, self.sampler, retain_marks)

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": self.model.value,
            "experiment": self.experiment.value,
            "n": list(self.n),
            "replications": self.replications,
            "horizon": self.horizon,
            "step": self.step,
            "seed": self.seed,
            "out": self.out,
            "threads": self.threads,
            "init": list(self.init),
            "sampler": self.sampler,
            "cov_form": self.cov_form.value,
            "cov_times": list(self.cov_times),
            "noise_step": self.noise_step,
            "laws": self.laws.to_dict(),
        }
