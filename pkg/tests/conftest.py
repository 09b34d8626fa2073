"""Common fixtures for rumorsim tests."""

from __future__ import annotations

from typing import Any, Optional

import numpy as np
import pytest

from rumorsim import (
    ConditionalDelayLaw,
    DelayLaw,
    Grid,
    LmrLaws,
    LmrSimConfig,
    ModelLaws,
    RateFunction,
    SimConfig,
)


def make_exponential_laws(
    *,
    lam: float = 0.8,
    alpha: float = 0.4,
    beta: float = 0.6,
    rate: float = 1.0,
) -> ModelLaws:
    """Build contestant laws with every delay exponential(rate): the Markovian case."""
    exp = DelayLaw.exponential(rate)
    return ModelLaws(
        lam=RateFunction.constant(lam),
        alpha=RateFunction.constant(alpha),
        beta=beta,
        F0=exp,
        G0=exp,
        H0=exp,
        F=exp,
        G=ConditionalDelayLaw.independent(exp),
        H=ConditionalDelayLaw.independent(exp),
    )


def make_model_laws(**overrides: Any) -> ModelLaws:
    """Build non-Markovian contestant laws: gamma passive delay, sliced spreader delay."""
    exp1 = DelayLaw.exponential(1.0)
    values: dict[str, Any] = {
        "lam": RateFunction(((0.0, 0.8), (3.0, 1.2)), bound=1.5),
        "alpha": RateFunction.constant(0.4),
        "beta": 0.6,
        "F0": exp1,
        "G0": exp1,
        "H0": DelayLaw.uniform(0.0, 2.0),
        "F": DelayLaw.gamma(2.0, 2.0),
        "G": ConditionalDelayLaw.parameter_map(
            [1.0], [DelayLaw.exponential(2.0), DelayLaw.weibull(1.5, 1.0)]
        ),
        "H": ConditionalDelayLaw.independent(exp1),
    }
    values.update(overrides)
    return ModelLaws(**values)


def make_lmr_laws(
    *,
    lam: float = 0.8,
    theta: float = 0.4,
    gamma: float = 0.2,
    delta: float = 0.7,
    beta: float = 0.5,
) -> LmrLaws:
    """Build LMR laws with constant rates."""
    return LmrLaws(
        lam=RateFunction.constant(lam),
        theta=RateFunction.constant(theta),
        gamma=RateFunction.constant(gamma),
        delta=delta,
        beta=beta,
    )


def make_sim_config(
    *,
    n: int = 200,
    horizon: float = 5.0,
    w0: int = 20,
    y0: int = 10,
    z0: int = 10,
    seed: int = 1,
    laws: Optional[ModelLaws] = None,
    replication: int = 0,
    sampler: str = "inversion",
    retain_marks: bool = True,
) -> SimConfig:
    """Build a contestant SimConfig with sensible defaults."""
    return SimConfig(
        n, horizon, w0, y0, z0, seed, laws or make_model_laws(), replication, sampler, retain_marks
    )


def make_lmr_sim_config(
    *,
    n: int = 200,
    horizon: float = 5.0,
    u0: int = 0,
    y0: int = 10,
    z0: int = 0,
    seed: int = 1,
    laws: Optional[LmrLaws] = None,
    replication: int = 0,
    sampler: str = "inversion",
    retain_marks: bool = True,
) -> LmrSimConfig:
    """Build an LmrSimConfig with sensible defaults."""
    return LmrSimConfig(n, horizon, u0, y0, z0, seed, laws or make_lmr_laws(), replication, sampler, retain_marks)


@pytest.fixture
def exponential_laws() -> ModelLaws:
    """Return Markovian contestant laws."""
    return make_exponential_laws()


@pytest.fixture
def model_laws() -> ModelLaws:
    """Return non-Markovian contestant laws."""
    return make_model_laws()


@pytest.fixture
def lmr_laws() -> LmrLaws:
    """Return LMR laws."""
    return make_lmr_laws()


@pytest.fixture
def coarse_grid() -> Grid:
    """Return a grid on [0, 4] with step 0.05."""
    return Grid.over(4.0, 0.05)


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a seeded generator."""
    return np.random.default_rng(12345)
