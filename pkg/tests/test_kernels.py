"""Tests for kernel quadrature."""

from __future__ import annotations

import math

import numpy as np
import pytest

from rumorsim import ConditionalDelayLaw, DelayLaw, KernelKind, ModelLaws, RangeError, kernel_eval, kernel_on_grid
from rumorsim.kernels import cdf, integrate_against, sample_pair, secondary_complement, window_mass

from .conftest import make_exponential_laws, make_model_laws

EXP1 = DelayLaw.exponential(1.0)


class TestWindowMass:
    """Tests for window_mass() and integrate_against()."""

    def test_closed_window_exponential(self) -> None:
        """Mass activated by t and still held at t is t e^-t for exponential(1) pairs."""
        cond = ConditionalDelayLaw.independent(EXP1)

        for t in (0.5, 1.0, 3.0):
            assert window_mass(EXP1, cond, -math.inf, t, t) == pytest.approx(t * math.exp(-t), abs=1e-9)

    def test_open_window_exponential(self) -> None:
        """Over (lo, hi] the survivors to H weigh (hi - lo) e^-H."""
        cond = ConditionalDelayLaw.independent(EXP1)

        assert window_mass(EXP1, cond, 1.0, 2.0, 3.0) == pytest.approx(math.exp(-3.0), abs=1e-9)

    def test_atom_enters_exactly(self) -> None:
        """An atom of the passive law contributes its mass times the survival."""
        cond = ConditionalDelayLaw.independent(EXP1)

        assert window_mass(DelayLaw.atom(1.0), cond, -math.inf, 2.0, 3.0) == pytest.approx(math.exp(-2.0))
        assert window_mass(DelayLaw.atom(1.0), cond, 1.0, 2.0, 3.0) == 0.0

    def test_singular_density(self) -> None:
        """Gamma laws with shape < 1 integrate in probability space."""
        law = DelayLaw.gamma(0.5, 1.0)

        total = integrate_against(law, np.ones_like, -math.inf, 5.0)

        assert total == pytest.approx(float(law.cdf(5.0)), abs=1e-9)

    def test_empty_interval(self) -> None:
        """An empty window has no mass."""
        assert integrate_against(EXP1, np.ones_like, 2.0, 1.0) == 0.0


class TestSecondaryComplement:
    """Tests for the marginal survival of secondary delays."""

    def test_independent(self) -> None:
        """Independent mode is the law's own survival."""
        cond = ConditionalDelayLaw.independent(DelayLaw.exponential(2.0))

        assert secondary_complement(EXP1, cond, 1.0) == pytest.approx(math.exp(-2.0))

    def test_parameter_map_mixes_slice_masses(self) -> None:
        """Slices are weighted by the passive-delay mass they cover."""
        fast, slow = DelayLaw.exponential(2.0), DelayLaw.exponential(0.5)
        cond = ConditionalDelayLaw.parameter_map([1.0], [fast, slow])
        p = 1.0 - math.exp(-1.0)

        expected = p * math.exp(-2.0 * 1.5) + (1.0 - p) * math.exp(-0.5 * 1.5)

        assert secondary_complement(EXP1, cond, 1.5) == pytest.approx(expected)


class TestKernels:
    """Tests for kernel_eval() and kernel_on_grid()."""

    def test_psi_closed_form(self) -> None:
        """With exponential(1) delays and beta = 1, psi(1) = e^-1."""
        laws = make_exponential_laws(beta=1.0)

        assert kernel_eval(KernelKind.PSI, laws, 1.0) == pytest.approx(math.exp(-1.0), abs=1e-9)

    @pytest.mark.parametrize("t", [0.25, 1.0, 2.5])
    def test_exponential_kernels(self, t: float) -> None:
        """All eight kernels match their closed forms in the Markovian case."""
        laws = make_exponential_laws(beta=0.6)
        held = t * math.exp(-t)
        done = 1.0 - math.exp(-t) - held

        for kind in (KernelKind.PSI, KernelKind.PSI0):
            assert kernel_eval(kind, laws, t) == pytest.approx(0.6 * held, abs=1e-9)
        for kind in (KernelKind.PSI_BETA, KernelKind.PSI0_BETA):
            assert kernel_eval(kind, laws, t) == pytest.approx(0.4 * held, abs=1e-9)
        for kind in (KernelKind.PHI, KernelKind.PHI0):
            assert kernel_eval(kind, laws, t) == pytest.approx(0.6 * done, abs=1e-9)
        for kind in (KernelKind.PHI_BETA, KernelKind.PHI0_BETA):
            assert kernel_eval(kind, laws, t) == pytest.approx(0.4 * done, abs=1e-9)

    def test_split_of_activated_mass(self) -> None:
        """phi + psi is the activated spreader mass beta F(t) for any laws."""
        laws = make_model_laws()

        for t in (0.7, 1.0, 2.0):
            total = kernel_eval("phi", laws, t) + kernel_eval("psi", laws, t)
            assert total == pytest.approx(laws.beta * float(laws.F.cdf(t)), abs=1e-8)

    def test_zero_lag(self) -> None:
        """Nothing is activated at lag 0 for continuous passive laws."""
        assert kernel_eval(KernelKind.PSI, make_model_laws(), 0.0) == 0.0

    def test_negative_lag(self) -> None:
        """Negative lags are out of range."""
        with pytest.raises(RangeError):
            kernel_eval(KernelKind.PSI, make_model_laws(), -0.1)

    def test_on_grid(self) -> None:
        """kernel_on_grid() evaluates pointwise."""
        laws = make_exponential_laws(beta=1.0)
        lags = np.array([0.0, 0.5, 1.0])

        values = kernel_on_grid("psi", laws, lags)

        np.testing.assert_allclose(values, lags * np.exp(-lags), atol=1e-9)


class TestSampling:
    """Tests for cdf() and sample_pair()."""

    def test_cdf_delegates(self) -> None:
        """cdf() is the law's distribution function."""
        assert cdf(EXP1, 1.0) == pytest.approx(1.0 - math.exp(-1.0))

    def test_sample_pair_uses_condition(self, rng: np.random.Generator) -> None:
        """The secondary delay comes from the slice the passive delay falls in."""
        cond = ConditionalDelayLaw.parameter_map([1.0], [DelayLaw.atom(2.0), DelayLaw.atom(5.0)])

        assert sample_pair(DelayLaw.atom(0.5), cond, rng) == (0.5, 2.0)
        assert sample_pair(DelayLaw.atom(1.5), cond, rng) == (1.5, 5.0)


def riemann_kernel(kind: KernelKind, laws: ModelLaws, t: float, cells: int = 200) -> float:
    """Double Riemann sum of a kernel over (passive delay, secondary delay) cells of [0, t]^2."""
    spreader = kind in (KernelKind.PHI0, KernelKind.PSI0, KernelKind.PHI, KernelKind.PSI)
    initial = kind in (KernelKind.PHI0, KernelKind.PHI0_BETA, KernelKind.PSI0, KernelKind.PSI0_BETA)
    surviving = kind in (KernelKind.PSI0, KernelKind.PSI0_BETA, KernelKind.PSI, KernelKind.PSI_BETA)
    coef = laws.beta if spreader else 1.0 - laws.beta
    if initial:
        passive = laws.F0
        cond = ConditionalDelayLaw.independent(laws.G0 if spreader else laws.H0)
    else:
        passive, cond = laws.F, laws.G if spreader else laws.H

    edges = np.linspace(0.0, t, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    p_passive = np.diff(np.concatenate(([0.0], np.asarray(passive.cdf(edges[1:]), dtype=float))))
    secondary_cdf = 1.0 - cond.complement(edges[None, :], mids[:, None])
    p_secondary = np.diff(secondary_cdf, axis=1)
    i, j = np.indices((cells, cells))
    # cells cut in half by the line u + v = t count half
    done = (i + j < cells - 1) + 0.5 * (i + j == cells - 1)
    forgotten = float(np.sum(p_passive[:, None] * p_secondary * done))
    activated = float(np.sum(p_passive))
    return coef * (activated - forgotten if surviving else forgotten)


FAMILIES = {
    "exponential": DelayLaw.exponential(1.5),
    "gamma": DelayLaw.gamma(2.0, 2.0),
    "weibull": DelayLaw.weibull(1.5, 1.0),
    "lognormal": DelayLaw.lognormal(0.0, 0.5),
    "uniform": DelayLaw.uniform(0.0, 2.0),
}

KERNEL_PAIRS = [
    (KernelKind.PHI, KernelKind.PSI),
    (KernelKind.PHI_BETA, KernelKind.PSI_BETA),
    (KernelKind.PHI0, KernelKind.PSI0),
    (KernelKind.PHI0_BETA, KernelKind.PSI0_BETA),
]


class TestKernelRiemannSums:
    """Kernels agree with a 200 x 200 Riemann sum for several delay families."""

    @pytest.mark.parametrize("family", sorted(FAMILIES))
    @pytest.mark.parametrize("pair", KERNEL_PAIRS, ids=lambda p: f"{p[0].value}-{p[1].value}")
    def test_against_double_sum(self, family: str, pair: tuple[KernelKind, KernelKind]) -> None:
        """Quadrature and the double sum agree to 1e-3 at several lags."""
        law = FAMILIES[family]
        laws = make_model_laws(
            F0=law,
            G0=law,
            H0=EXP1,
            F=law,
            G=ConditionalDelayLaw.independent(law),
            H=ConditionalDelayLaw.independent(EXP1),
        )

        for t in (0.5, 1.3, 2.5):
            for kind in pair:
                assert kernel_eval(kind, laws, t) == pytest.approx(riemann_kernel(kind, laws, t), abs=1e-3)
