import numpy as np
import pytest

from cognite.kinetics._api.nonlinear import collision_moments, slab_norm_series
from cognite.kinetics.data_classes import (
    ConsistencyReport,
    HomogeneousState,
    ModeState,
    PicardResult,
    PositivityTrajectoryList,
    RelaxationSeries,
    SlabField,
)
from cognite.kinetics.exceptions import DataTooLargeError, InvalidArgument

SLAB = dict(n_line=2, dk=0.5)


class TestSlab:
    def test_initial_data(self, client, grid, mu):
        slab = client.nonlinear.slab_initial(grid, mu, amplitude=0.01, **SLAB)
        assert isinstance(slab, SlabField)
        assert (5, grid.n_nodes) == slab.values.shape
        np.testing.assert_allclose([-1.0, -0.5, 0.0, 0.5, 1.0], slab.freq_line)
        assert 0.0 == slab.hermitian_defect()

    def test_even_line_rejected(self, grid):
        with pytest.raises(InvalidArgument):
            SlabField(dk=0.5, values=np.zeros((4, grid.n_nodes)))

    def test_norm_series(self, grid):
        values = np.zeros((2, 3, grid.n_nodes))
        values[1, 1] = 2.0
        np.testing.assert_allclose([0.0, 2.0 * np.sqrt(0.5)], slab_norm_series(grid, values, 0.5, 0.0, 1.0))


class TestPicardIterate:
    def test_zero_data(self, client, grid, mu, matrices):
        slab = client.nonlinear.slab_initial(grid, mu, amplitude=0.0, **SLAB)
        result = client.nonlinear.picard_iterate(matrices, slab, 0.5, 2, dt=0.1)
        assert isinstance(result, PicardResult)
        assert not np.any(result.solution)
        assert result.report.contracting
        assert 0.0 == result.report.data_norm

    @pytest.fixture(scope="class")
    def small(self, client, grid, mu, matrices):
        slab = client.nonlinear.slab_initial(grid, mu, amplitude=1e-3, **SLAB)
        return slab, client.nonlinear.picard_iterate(matrices, slab, 1.0, 3, dt=0.1)

    def test_small_data_contracts(self, small):
        slab, result = small
        report = result.report
        assert report.contracting
        assert 2 == len(report.ratios)
        assert 3 == len(report.increments)
        assert 4 == len(result.iterates)
        assert 0 < report.data_norm < report.threshold
        assert (11, slab.n_freqs, slab.values.shape[1]) == result.solution.shape
        np.testing.assert_allclose(np.linspace(0.0, 1.0, 11), result.times)

    def test_first_iterate_is_the_linear_flow(self, client, matrices, small):
        slab, result = small
        state = ModeState(freq=(0.5, 0.0, 0.0), values=slab.values[3])
        linear = client.modes.evolve_mode(matrices, state, 1.0, 0.1, method="expm")
        scale = np.max(np.abs(slab.values))
        np.testing.assert_allclose(linear.values[-1], result.iterates[0][-1, 3], atol=1e-10 * scale)

    def test_hermitian_symmetry_is_kept(self, small):
        slab, result = small
        solution = result.solution
        defect = np.max(np.abs(solution[:, ::-1] - np.conj(solution)))
        assert defect <= 1e-12 * np.max(np.abs(solution))

    def test_large_data(self, client, grid, mu, matrices):
        slab = client.nonlinear.slab_initial(grid, mu, amplitude=1e3, **SLAB)
        with pytest.raises(DataTooLargeError) as e:
            client.nonlinear.picard_iterate(matrices, slab, 1.0, 3, dt=0.25)
        assert e.value.value >= 1.0
        assert 0.1 == e.value.threshold
        result = client.nonlinear.picard_iterate(matrices, slab, 1.0, 3, dt=0.25, raise_on_failure=False)
        assert not result.report.contracting

    @pytest.mark.parametrize("horizon, n_iters", [(1.0, 1), (0.0, 3)])
    def test_invalid(self, client, grid, mu, matrices, horizon, n_iters):
        slab = client.nonlinear.slab_initial(grid, mu, amplitude=1e-3, **SLAB)
        with pytest.raises(InvalidArgument):
            client.nonlinear.picard_iterate(matrices, slab, horizon, n_iters)

    def test_calibrated_amplitude_contracts(self, client, mu, matrices):
        amplitude, result = client.nonlinear.calibrate_amplitude(
            matrices, mu, 1, 0.5, 0.5, 2, amplitude_max=1e3, n_bisect=4, dt=0.25
        )
        assert 0 <= amplitude < 1e3
        assert result.report.contracting


class TestPositivity:
    def test_equilibrium_is_stationary(self, client, grid, matrices):
        trajectories = client.nonlinear.positivity_iterate(matrices, grid.j_values, 0.1, 1.0, n_outer=2)
        assert isinstance(trajectories, PositivityTrajectoryList)
        for trajectory in trajectories:
            np.testing.assert_allclose(grid.j_values, trajectory.values[-1], rtol=0, atol=1e-10)

    @pytest.mark.parametrize("cadence, n_trajectories", [("outer", 4), ("stepwise", 1)])
    def test_nonnegative(self, client, grid, matrices, cadence, n_trajectories):
        rng = np.random.default_rng(11)
        F0 = grid.j_values * rng.uniform(0.0, 2.0, grid.n_nodes)
        F0[::7] = 0.0
        trajectories = client.nonlinear.positivity_iterate(
            matrices.tables, F0, 0.1, 2.0, n_outer=3, cadence=cadence, n_inner=2
        )
        assert n_trajectories == len(trajectories)
        assert list(range(1, n_trajectories + 1)) == [t.iterate for t in trajectories]
        for trajectory in trajectories:
            assert trajectory.min_value >= 0
            assert 21 == trajectory.n_snapshots
        assert n_trajectories - 1 == len(trajectories.sup_differences())

    def test_one_step_is_the_integrating_factor(self, client, grid, matrices):
        F0 = grid.j_values * np.linspace(0.5, 1.5, grid.n_nodes)
        (_, trajectory) = client.nonlinear.positivity_iterate(matrices, F0, 0.25, 0.25, n_outer=1)
        split = client.kernels.apply_gain_loss(matrices, F0, F0)
        rate = split.r_of_g
        factor = np.divide(-np.expm1(-0.25 * rate), rate, out=np.full_like(rate, 0.25), where=rate > 0)
        expected = np.exp(-0.25 * rate) * F0 + factor * split.q_plus
        np.testing.assert_allclose(expected, trajectory.values[1], rtol=1e-12, atol=0)

    def test_negative_data(self, client, grid, matrices):
        F0 = grid.j_values.copy()
        F0[0] = -1e-3
        with pytest.raises(InvalidArgument, match="negative"):
            client.nonlinear.positivity_iterate(matrices, F0, 0.1, 1.0)

    def test_unknown_cadence(self, client, grid, matrices):
        with pytest.raises(InvalidArgument):
            client.nonlinear.positivity_iterate(matrices, grid.j_values, 0.1, 1.0, cadence="inner")


class TestEntropy:
    def test_entropy_of_zero(self, client, grid):
        assert 0.0 == client.nonlinear.entropy(grid, np.zeros(grid.n_nodes))

    def test_moment_match(self, client, grid):
        rng = np.random.default_rng(5)
        F = grid.j_values * rng.uniform(0.2, 1.8, grid.n_nodes)
        matched = client.nonlinear.moment_match(grid, F)
        assert np.all(matched > 0)
        np.testing.assert_allclose(
            collision_moments(grid, grid.j_values), collision_moments(grid, matched), rtol=1e-10, atol=1e-12
        )

    def test_moment_match_of_zero(self, client, grid):
        with pytest.raises(InvalidArgument):
            client.nonlinear.moment_match(grid, np.zeros(grid.n_nodes))

    def test_equilibrium_maximizes_entropy(self, client, grid):
        gaps = client.nonlinear.entropy_trials(grid, 8, seed=1)
        assert 8 == len(gaps)
        assert np.all(gaps >= -1e-12)

    def test_trials_are_seeded(self, client, grid):
        np.testing.assert_array_equal(
            client.nonlinear.entropy_trials(grid, 3, seed=2), client.nonlinear.entropy_trials(grid, 3, seed=2)
        )


class TestHomogeneousRelaxation:
    @pytest.fixture(scope="class")
    def series(self, client, grid, matrices):
        rng = np.random.default_rng(8)
        F0 = client.nonlinear.moment_match(grid, grid.j_values * rng.uniform(0.5, 1.5, grid.n_nodes))
        return client.nonlinear.homogeneous_relax(matrices, HomogeneousState(F=F0), 0.1, 10)

    def test_series(self, series, grid):
        assert isinstance(series, RelaxationSeries)
        assert 10 == series.n_steps
        assert (11, 5) == series.moments.shape
        assert (11, grid.n_nodes) == series.values.shape
        assert series.min_value >= 0
        assert series.entropy_drop >= 0

    def test_relaxed_state(self, client, series):
        state = client.nonlinear.relaxed_state(series)
        assert 1.0 == pytest.approx(state.t)
        np.testing.assert_array_equal(series.values[-1], state.F)

    def test_consistency_gap_is_linear_in_the_amplitude(self, client, matrices, profile):
        small = client.nonlinear.consistency_check(matrices, profile, 1e-3, 0.2, 0.01)
        double = client.nonlinear.consistency_check(matrices, profile, 2e-3, 0.2, 0.01)
        assert isinstance(small, ConsistencyReport)
        assert 0 < small.max_difference < 1e-3
        assert 2.0 == pytest.approx(double.max_difference / small.max_difference, rel=0.05)

    def test_consistency_rejects_negative_data(self, client, matrices, profile):
        with pytest.raises(InvalidArgument):
            client.nonlinear.consistency_check(matrices, profile, 1e6, 0.2, 0.01)
