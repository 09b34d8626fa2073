"""Tests for the LMR model: simulation, noises and covariances."""

from __future__ import annotations

import math

import numpy as np
import pytest

from rumorsim import (
    ERR_MISSING_MARKS,
    LMR_NOISE_NAMES,
    ConfigurationError,
    DomainError,
    EventKind,
    Grid,
    LmrCovarianceModel,
    RangeError,
    empirical_cov,
    estimate_QC,
    extract_lmr_noise,
    lmr_cov_table,
    simulate,
    simulate_lmr,
    solve_contestant,
    solve_lmr,
    zscore,
)

from .conftest import make_exponential_laws, make_lmr_laws, make_lmr_sim_config, make_sim_config

LMR_KINDS = {EventKind.A_SPREAD, EventKind.A_UNINTERESTED, EventKind.B_STIFLE, EventKind.C_STIFLE}


class TestSimulateLmr:
    """Tests for simulate_lmr()."""

    def test_reproducible(self) -> None:
        """The same seed and replication give the same log."""
        a = simulate_lmr(make_lmr_sim_config(seed=3))
        b = simulate_lmr(make_lmr_sim_config(seed=3))

        assert a.jsonl_lines() == b.jsonl_lines()
        assert a.model == "lmr"

    def test_conservation_and_kinds(self) -> None:
        """Counts always sum to n and only LMR events occur."""
        traj = simulate_lmr(make_lmr_sim_config(n=300, y0=15))

        assert len(traj.events) > 0
        np.testing.assert_array_equal(traj.counts.sum(axis=1), 300)
        assert {e.kind for e in traj.events} <= LMR_KINDS
        assert np.all(np.diff(traj.times) >= 0)
        assert np.all(np.diff(traj.counts[:, 1]) >= 0)
        assert np.all(np.diff(traj.counts[:, 3]) >= 0)

    def test_transitions(self) -> None:
        """Each event kind moves the counts it names."""
        traj = simulate_lmr(make_lmr_sim_config(n=300, y0=15, u0=5, z0=5))
        deltas = np.diff(traj.counts, axis=0)

        for event, (dx, du, dy, dz) in zip(traj.events, deltas):
            if event.kind is EventKind.A_SPREAD:
                assert (dx, du, dy, dz) == (-1, 0, 1, 0)
            elif event.kind is EventKind.A_UNINTERESTED:
                assert (dx, du, dy, dz) == (-1, 1, 0, 0)
            elif event.kind is EventKind.B_STIFLE:
                k = event.removed
                assert (dx, du, dy, dz) == (0, 0, -k, k)
            else:
                assert (dx, du, dy, dz) == (0, 0, -1, 1)

    def test_always_interested(self) -> None:
        """With delta = 1 every contact makes a spreader."""
        traj = simulate_lmr(make_lmr_sim_config(laws=make_lmr_laws(delta=1.0)))

        assert EventKind.A_UNINTERESTED not in {e.kind for e in traj.events}

    def test_single_stifling(self) -> None:
        """With beta = 1 a spreader meeting removes exactly one spreader."""
        traj = simulate_lmr(make_lmr_sim_config(laws=make_lmr_laws(beta=1.0)))

        assert all(e.removed == 1 for e in traj.events)

    def test_no_spreaders(self) -> None:
        """Without spreaders nothing happens."""
        traj = simulate_lmr(make_lmr_sim_config(y0=0, u0=5, z0=5))

        assert traj.events == ()
        assert traj.final.to_dict() == {"x": 190, "u": 5, "y": 0, "z": 5}

    def test_zero_rates(self) -> None:
        laws = make_lmr_laws(lam=0.0, theta=0.0, gamma=0.0)

        assert simulate_lmr(make_lmr_sim_config(laws=laws)).events == ()

    def test_single_spreader_cannot_stifle(self) -> None:
        """With one spreader the B intensity vanishes."""
        laws = make_lmr_laws(lam=0.0, gamma=0.0, theta=5.0)

        assert simulate_lmr(make_lmr_sim_config(y0=1, laws=laws)).events == ()

    def test_thinning(self) -> None:
        """The thinning sampler conserves counts too."""
        traj = simulate_lmr(make_lmr_sim_config(sampler="thinning"))

        np.testing.assert_array_equal(traj.counts.sum(axis=1), 200)

    def test_bad_initial_counts(self) -> None:
        """Initial classes larger than the population are rejected."""
        with pytest.raises(ConfigurationError):
            make_lmr_sim_config(n=10, y0=8, u0=5)


class TestExtractLmrNoise:
    """Tests for extract_lmr_noise()."""

    def test_identities(self) -> None:
        """Y1 = -U1 and Z1 = -Y2; all start at 0."""
        traj = simulate_lmr(make_lmr_sim_config(n=400, y0=20))
        noise = extract_lmr_noise(traj, traj.config.laws, Grid.over(5.0, 0.5))

        assert noise.names == LMR_NOISE_NAMES
        np.testing.assert_array_equal(noise["y1"], -noise["u1"])
        np.testing.assert_array_equal(noise["z1"], -noise["y2"])
        for name in LMR_NOISE_NAMES:
            assert noise[name][0] == pytest.approx(0.0, abs=1e-12)

    def test_always_interested(self) -> None:
        """With delta = 1 the choice noise vanishes."""
        traj = simulate_lmr(make_lmr_sim_config(laws=make_lmr_laws(delta=1.0)))

        noise = extract_lmr_noise(traj, traj.config.laws, Grid.over(5.0, 0.5))

        np.testing.assert_array_equal(noise["u1"], 0.0)

    def test_wrong_model(self) -> None:
        """Contestant trajectories are refused."""
        traj = simulate(make_sim_config(laws=make_exponential_laws()))

        with pytest.raises(ConfigurationError):
            extract_lmr_noise(traj, make_lmr_laws(), Grid.over(1.0, 0.5))

    def test_missing_marks(self) -> None:
        """Runs without marks cannot be decomposed."""
        traj = simulate_lmr(make_lmr_sim_config(retain_marks=False))

        with pytest.raises(ConfigurationError) as exc_info:
            extract_lmr_noise(traj, traj.config.laws, Grid.over(1.0, 0.5))

        assert exc_info.value.code == ERR_MISSING_MARKS

    def test_grid_beyond_horizon(self) -> None:
        """The grid must fit inside the run."""
        traj = simulate_lmr(make_lmr_sim_config(horizon=2.0))

        with pytest.raises(RangeError):
            extract_lmr_noise(traj, traj.config.laws, Grid.over(3.0, 0.5))


class TestLmrCovariance:
    """Tests for LmrCovarianceModel and lmr_cov_table()."""

    @pytest.fixture
    def model(self) -> LmrCovarianceModel:
        laws = make_lmr_laws()
        return LmrCovarianceModel(solve_lmr(laws, (0.0, 0.05, 0.0), Grid.over(4.0, 0.01)), laws)

    def test_choice_block(self, model: LmrCovarianceModel) -> None:
        """U1 and Y1 are perfectly anti-correlated."""
        var = model.cov("u1:u1", 2.0, 3.0)

        assert var > 0.0
        assert model.cov("y1:y1", 2.0, 3.0) == pytest.approx(var)
        assert model.cov("u1:y1", 3.0, 2.0) == pytest.approx(-var)

    def test_split_block(self, model: LmrCovarianceModel) -> None:
        """Y2 and Z1 are perfectly anti-correlated."""
        var = model.cov("y2:y2", 1.0, 1.0)

        assert var > 0.0
        assert model.cov("z1:z1", 1.0, 1.0) == pytest.approx(var)
        assert model.cov("y2:z1", 1.0, 1.0) == pytest.approx(-var)

    def test_unrelated_pairs(self, model: LmrCovarianceModel) -> None:
        """Noises driven by different processes are uncorrelated."""
        assert model.cov("u1:y2", 1.0, 2.0) == 0.0
        assert model.cov("y3:z2", 1.0, 2.0) == 0.0

    @pytest.mark.parametrize("pair", ["y3:y3", "z2:z2"])
    def test_estimated_variances(self, model: LmrCovarianceModel, pair: str) -> None:
        """The Y3 and Z2 variances are left to ensemble estimates."""
        with pytest.raises(DomainError):
            model.cov(pair, 1.0, 1.0)

    def test_errors(self, model: LmrCovarianceModel) -> None:
        """Unknown names and times beyond the horizon are rejected."""
        with pytest.raises(DomainError):
            model.cov("w0:u1", 1.0, 1.0)
        with pytest.raises(RangeError):
            model.cov("u1:u1", 1.0, 5.0)

    @pytest.mark.parametrize("delta", [0.0, 1.0])
    def test_degenerate_choice(self, delta: float) -> None:
        laws = make_lmr_laws(delta=delta)
        model = LmrCovarianceModel(solve_lmr(laws, (0.0, 0.05, 0.0), Grid.over(2.0, 0.01)), laws)

        assert model.cov("u1:u1", 1.0, 2.0) == 0.0
        assert model.cov("u1:y1", 1.0, 2.0) == 0.0

    def test_wrong_solution(self) -> None:
        """A contestant fluid limit is refused."""
        solution = solve_contestant(make_exponential_laws(), (0.1, 0.1, 0.1), Grid.over(1.0, 0.1))

        with pytest.raises(ConfigurationError):
            LmrCovarianceModel(solution, make_lmr_laws())

    def test_table_function(self, model: LmrCovarianceModel) -> None:
        """lmr_cov_table() agrees with the model."""
        assert lmr_cov_table("u1:u1", 2.0, 2.0, model.solution, model.laws) == model.cov("u1:u1", 2.0, 2.0)

    def test_matches_simulation(self) -> None:
        """The U1 variance of simulated runs matches the limit."""
        laws = make_lmr_laws()
        grid = Grid.over(2.0, 0.5)
        n = 400
        paths = [
            extract_lmr_noise(simulate_lmr(make_lmr_sim_config(n=n, horizon=2.0, y0=20, laws=laws, replication=k)), laws, grid)
            for k in range(200)
        ]
        model = LmrCovarianceModel(solve_lmr(laws, (0.0, 0.05, 0.0), Grid.over(2.0, 0.005)), laws)

        estimate, se = empirical_cov(paths, "u1:u1", 2.0, 2.0)

        assert abs(zscore(estimate, se, model.cov("u1:u1", 2.0, 2.0))) <= 4.0


class TestEstimateQC:
    """Tests for estimate_QC()."""

    def test_values(self) -> None:
        """Zero before any meeting; positive once meetings have started."""
        trajs = [simulate_lmr(make_lmr_sim_config(n=300, y0=20, replication=k)) for k in range(20)]

        assert estimate_QC(trajs, 0.0, 0.0)[0] == 0.0
        estimate, se = estimate_QC(trajs, 1.0, 4.0)
        assert estimate > 0.0
        assert se >= 0.0
        assert math.isfinite(estimate)

    def test_empty(self) -> None:
        """An empty ensemble is a domain error."""
        with pytest.raises(DomainError):
            estimate_QC([], 1.0, 1.0)
