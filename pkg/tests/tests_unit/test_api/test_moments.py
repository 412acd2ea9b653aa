import numpy as np
import pytest

from cognite.kinetics import KineticsClient
from cognite.kinetics.data_classes import BalanceReport, MacroCoefficients, ModeState, ModeTrajectory, MomentSet
from cognite.kinetics.exceptions import BalanceLawError, InvalidArgument
from tests.utils import invariants


class TestMuConstants:
    def test_identities(self, mu):
        checks = mu.checks()
        assert checks["variance"] > 0
        assert 0.0 == pytest.approx(checks["alpha1_residual"], abs=1e-12)
        assert 0.0 == pytest.approx(checks["beta_bracket"], abs=1e-12)
        assert checks["lambda_coercivity"] > 0

    def test_cached_per_grid(self, client, grid, mu):
        assert mu is client.moments.compute_mu_constants(grid)

    def test_isotropy_on_fine_grid(self, client):
        grid = client.discretization.build_grid(p_max=10.0, n_per_axis=21)
        mu = client.moments.compute_mu_constants(grid)
        assert 3.0 == pytest.approx(mu.checks()["isotropy_ratio"], rel=1e-2)
        assert mu.mu0 > 1.0


class TestProjection:
    def test_equilibrium(self, client, grid, mu):
        coefficients, ph, micro = client.moments.project_P(grid, mu, grid.sqrt_j)
        assert isinstance(coefficients, MacroCoefficients)
        assert 1.0 == pytest.approx(coefficients.a)
        assert 0.0 == pytest.approx(coefficients.c, abs=1e-12)
        np.testing.assert_allclose(np.zeros(3), coefficients.b, atol=1e-12)
        np.testing.assert_allclose(np.zeros(grid.n_nodes), micro, atol=1e-12)

    def test_recovers_coefficients(self, client, grid, mu):
        h = (0.3 + np.array([0.1, -0.2, 0.5]) @ grid.nodes.T - 0.7 * grid.energies) * grid.sqrt_j
        coefficients, ph, _ = client.moments.project_P(grid, mu, h)
        assert 0.3 == pytest.approx(coefficients.a)
        assert -0.7 == pytest.approx(coefficients.c)
        np.testing.assert_allclose([0.1, -0.2, 0.5], coefficients.b)
        np.testing.assert_allclose(h, ph, atol=1e-12)

    def test_idempotent_and_orthogonal(self, client, grid, mu, profile):
        _, ph, micro = client.moments.project_P(grid, mu, profile)
        _, pph, _ = client.moments.project_P(grid, mu, ph)
        np.testing.assert_allclose(ph, pph, atol=1e-12)
        inner = (grid.quad_weights * micro) @ invariants(grid)
        np.testing.assert_allclose(np.zeros(5), inner, atol=1e-12)

    def test_complex_values(self, client, grid, mu, profile):
        coefficients, _, _ = client.moments.project_P(grid, mu, 1j * profile)
        real, _, _ = client.moments.project_P(grid, mu, profile)
        assert isinstance(coefficients.a, complex)
        assert 1j * real.a == pytest.approx(coefficients.a)

    def test_wrong_length(self, client, grid, mu):
        with pytest.raises(InvalidArgument):
            client.moments.project_P(grid, mu, np.ones(4))


class TestMomentFunctionals:
    def test_shapes(self, client, grid, mu, profile):
        moments = client.moments.moment_functionals(grid, mu, profile)
        assert isinstance(moments, MomentSet)
        assert (3, 3) == moments.theta.shape
        assert (3,) == moments.lambda_.shape
        np.testing.assert_allclose(moments.theta, moments.theta.T)

    def test_equilibrium_lambda_vanishes(self, client, grid, mu):
        # Λ is odd in p
        moments = client.moments.moment_functionals(grid, mu, grid.sqrt_j)
        np.testing.assert_allclose(np.zeros(3), moments.lambda_, atol=1e-14)


class TestBalanceLaws:
    @pytest.fixture(scope="class")
    def trajectory(self, client, matrices, profile):
        state = ModeState(freq=(0.5, 0.0, 0.0), values=profile)
        return client.modes.evolve_mode(matrices, state, 2.0, 0.01, method="rk4", snapshot_every=5)

    def test_residuals_within_budget(self, client, matrices, mu, trajectory):
        report = client.moments.balance_residuals(matrices, mu, trajectory)
        assert isinstance(report, BalanceReport)
        assert report.passed
        for law in ["3.7", "3.8", "3.9", "3.9-0", "3.9-2", "3.11", "3.12", "3.13", "dt_a", "dt_c"]:
            assert law in report.residuals
        assert report.worst_law in report.residuals
        assert 0.05 == pytest.approx(report.dt)

    def test_tight_budget_raises(self, matrices, mu, trajectory):
        strict = KineticsClient(max_workers=1, tolerances={"balance_constant": 1e-12})
        with pytest.raises(BalanceLawError) as e:
            strict.moments.balance_residuals(matrices, mu, trajectory)
        assert e.value.law in e.value.report["residuals"]

    def test_report_without_raising(self, matrices, mu, trajectory):
        strict = KineticsClient(max_workers=1, tolerances={"balance_constant": 1e-12})
        report = strict.moments.balance_residuals(matrices, mu, trajectory, raise_on_failure=False)
        assert not report.passed

    def test_too_few_snapshots(self, client, matrices, mu, grid):
        short = ModeTrajectory(freq=(1.0, 0, 0), times=np.arange(3.0), values=np.zeros((3, grid.n_nodes)))
        with pytest.raises(InvalidArgument):
            client.moments.balance_residuals(matrices, mu, short)
