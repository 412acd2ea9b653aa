import math

import numpy as np
import pytest

from cognite.kinetics import KineticsClient
from cognite.kinetics._api.kernels import truncated_convolution
from cognite.kinetics.data_classes import CollisionTables, GainLoss, KernelModel, NullSpaceReport, OperatorMatrices
from cognite.kinetics.exceptions import AssemblyAccuracyError, InvalidArgument
from tests.utils import invariants, weighted_norm


class TestKernelModel:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(kind="soft", b_exponent=1.0),
            dict(kind="soft", b_exponent=3.5, angular_exponent=0.5),
            dict(kind="hard", b_exponent=0.0, a_exponent=2.0),
            dict(kind="hard", b_exponent=1.0, a_exponent=1.0, angular_exponent=-1.0),
        ],
    )
    def test_valid(self, kwargs):
        KernelModel(**kwargs)

    @pytest.mark.parametrize(
        "kwargs, argument",
        [
            (dict(kind="medium"), "kind"),
            (dict(kind="soft", b_exponent=0.0), "b_exponent"),
            (dict(kind="soft", b_exponent=4.0), "b_exponent"),
            (dict(kind="soft", b_exponent=2.5, angular_exponent=-1.5), "b_exponent"),
            (dict(kind="soft", angular_exponent=-2.0), "angular_exponent"),
            (dict(kind="hard", b_exponent=0.0, a_exponent=2.5), "a_exponent"),
            (dict(kind="soft", chi_epsilon=0.0), "chi_epsilon"),
        ],
    )
    def test_invalid(self, kwargs, argument):
        with pytest.raises(InvalidArgument) as e:
            KernelModel(**kwargs)
        assert argument == e.value.argument

    def test_zeta(self):
        assert 0.5 == KernelModel(kind="soft", b_exponent=1.0).zeta
        assert 0.125 == KernelModel(kind="soft", b_exponent=3.5).zeta

    def test_chi_ramp(self):
        model = KernelModel(chi_epsilon=0.1)
        np.testing.assert_allclose([0.0, 0.0, 0.5, 1.0, 1.0], model.chi([0.0, 0.1, 0.15, 0.2, 5.0]))


class TestSigma:
    def test_soft(self, client):
        assert 0.5 == pytest.approx(client.kernels.sigma_eval(KernelModel(kind="soft", b_exponent=1.0), 2.0, 0.3))

    def test_hard(self, client):
        model = KernelModel(kind="hard", b_exponent=1.0, a_exponent=2.0)
        assert 4.5 == pytest.approx(client.kernels.sigma_eval(model, 2.0, 0.0))

    def test_angular_factor(self, client):
        model = KernelModel(kind="soft", b_exponent=1.0, angular_exponent=2.0)
        assert 0.5 * 0.75 == pytest.approx(client.kernels.sigma_eval(model, 2.0, 0.5))

    @pytest.mark.parametrize("g, cos_theta", [(-1.0, 0.0), (np.nan, 0.0), (1.0, 1.5), (0.0, 0.0)])
    def test_invalid(self, client, soft_model, g, cos_theta):
        with pytest.raises(InvalidArgument):
            client.kernels.sigma_eval(soft_model, g, cos_theta)


class TestCollisionFrequency:
    def test_positive_and_banded(self, client, soft_model, grid, matrices):
        assert np.all(matrices.nu_diag > 0)
        radii = np.linspace(0.0, 5.0, 6)
        points = np.column_stack([radii, np.zeros(6), np.zeros(6)])
        nu = client.kernels.collision_frequencies(soft_model, grid, points)
        scaled = nu * np.sqrt(1.0 + radii ** 2) ** (soft_model.b_exponent / 2.0)
        assert np.max(scaled) / np.min(scaled) <= 10.0

    def test_single_point_matches_assembly(self, client, soft_model, grid, matrices):
        center = int(grid.flat_index(2, 2, 2))
        assert matrices.nu_diag[center] == pytest.approx(client.kernels.collision_frequency(soft_model, grid, [0, 0, 0]))

    def test_chi_part_is_smaller(self, client, soft_model, grid):
        points = grid.nodes[:10]
        full = client.kernels.collision_frequencies(soft_model, grid, points)
        chi = client.kernels.collision_frequencies(soft_model, grid, points, split="chi")
        assert np.all(chi <= full + 1e-15)

    def test_outside_hull(self, client, soft_model, grid):
        with pytest.raises(InvalidArgument):
            client.kernels.collision_frequency(soft_model, grid, [7.0, 0.0, 0.0])

    def test_unknown_split(self, client, soft_model, grid):
        with pytest.raises(InvalidArgument):
            client.kernels.collision_frequencies(soft_model, grid, grid.nodes[:2], split="half")


class TestSingularAngularFactor:
    @pytest.fixture(scope="class")
    def models(self):
        return (
            KernelModel(kind="soft", b_exponent=0.5, angular_exponent=0.0),
            KernelModel(kind="soft", b_exponent=0.5, angular_exponent=-1.0),
        )

    def test_sigma_is_infinite_along_the_axis(self, client, models):
        _, singular = models
        assert np.isinf(client.kernels.sigma_eval(singular, 2.0, 1.0))
        assert np.isinf(client.kernels.sigma_eval(singular, 2.0, -1.0))

    def test_frequency_ratio_is_the_angular_integral(self, client, grid, models):
        # ∫ sin^{-1}θ dω / ∫ dω = 2π² / 4π
        regular, singular = models
        ratio = client.kernels.collision_frequencies(singular, grid, grid.nodes) / client.kernels.collision_frequencies(
            regular, grid, grid.nodes
        )
        np.testing.assert_allclose(math.pi / 2.0, ratio, rtol=1e-10)

    def test_frequency_band(self, client, grid, models):
        _, singular = models
        radii = np.linspace(0.0, 5.0, 6)
        points = np.column_stack([np.zeros(6), radii, np.zeros(6)])
        nu = client.kernels.collision_frequencies(singular, grid, points)
        scaled = nu * np.sqrt(1.0 + radii ** 2) ** (singular.b_exponent / 2.0)
        assert np.all(np.isfinite(nu))
        assert np.max(scaled) / np.min(scaled) <= 10.0

    def test_assembled_operator_is_bounded(self, client, grid, models):
        regular, singular = models
        ratio = (
            client.kernels.assemble_operator_matrices(singular, grid).nu_diag
            / client.kernels.assemble_operator_matrices(regular, grid).nu_diag
        )
        np.testing.assert_allclose(math.pi / 2.0, ratio, rtol=1e-10)

    def test_explicit_rule_is_rebuilt_for_the_model(self, client, grid, models):
        _, singular = models
        legendre = client.discretization.sphere_rule(5)
        np.testing.assert_allclose(
            client.kernels.collision_frequencies(singular, grid, grid.nodes[:8]),
            client.kernels.collision_frequencies(singular, grid, grid.nodes[:8], sphere=legendre),
            rtol=1e-14,
        )


class TestAssembly:
    def test_types_and_diagnostics(self, matrices, grid):
        assert isinstance(matrices, OperatorMatrices)
        assert isinstance(matrices.tables, CollisionTables)
        assert grid.n_nodes == matrices.n_nodes
        assert matrices.diagnostics["symmetry_defect"] <= 1e-10
        keys = ["n_triples", "n_dropped", "leakage_max", "leakage_weighted", "tail", "sphere_order", "assembly_defect"]
        for key in keys:
            assert key in matrices.diagnostics
        assert 0.0 <= matrices.diagnostics["leakage_weighted"] <= 1.0

    def test_weak_form_matches_the_strong_linearization(self, matrices, grid, client):
        defect = matrices.diagnostics["assembly_defect"]
        assert 0.0 < defect <= 1.0
        assert defect == client.kernels.null_space_report(matrices).assembly_defect

    def test_assembly_gap_over_budget(self, soft_model, grid):
        strict = KineticsClient(max_workers=1, tolerances={"assembly_defect": 1e-12})
        with pytest.raises(AssemblyAccuracyError) as e:
            strict.kernels.assemble_operator_matrices(soft_model, grid)
        assert "weak/strong assembly gap" == e.value.check
        assert e.value.value > 1e-12

    def test_self_adjoint(self, matrices, grid):
        weighted = grid.quad_weights[:, None] * matrices.L_matrix
        np.testing.assert_allclose(weighted, weighted.T, atol=1e-14 * np.max(np.abs(weighted)))
        np.testing.assert_allclose(matrices.symmetric_form, matrices.symmetric_form.T, rtol=1e-13, atol=0)

    def test_invariants_in_null_space(self, matrices, grid):
        for chi in invariants(grid).T:
            assert weighted_norm(grid, matrices.L_matrix @ chi) <= 1e-8 * weighted_norm(grid, matrices.nu_diag * chi)

    def test_null_space_report(self, client, matrices):
        report = client.kernels.null_space_report(matrices)
        assert isinstance(report, NullSpaceReport)
        assert 5 == report.n_below
        assert max(report.relative_residuals) <= 1e-8
        assert report.min_eigenvalue >= -1e-10 * np.max(matrices.nu_diag)
        assert report.sixth_eigenvalue > report.eps_grid

    def test_coercivity(self, client, matrices):
        assert client.kernels.coercivity_constant(matrices) > 0

    def test_k_split(self, client, matrices, profile):
        full = client.kernels.apply_K(matrices, profile)
        parts = client.kernels.apply_K(matrices, profile, "chi") + client.kernels.apply_K(matrices, profile, "one_minus_chi")
        np.testing.assert_allclose(full, parts, atol=1e-12 * np.max(np.abs(full)))
        np.testing.assert_allclose(
            matrices.nu_diag * profile - client.kernels.apply_L(matrices, profile), full, atol=1e-12 * np.max(np.abs(full))
        )

    def test_wrong_shape(self, client, matrices):
        with pytest.raises(InvalidArgument):
            client.kernels.apply_L(matrices, np.ones(3))

    def test_same_result_for_any_thread_count(self, soft_model):
        results = []
        for workers in (1, 3):
            c = KineticsClient(max_workers=workers)
            grid = c.discretization.build_grid(p_max=5.0, n_per_axis=5)
            results.append(c.kernels.assemble_operator_matrices(soft_model, grid, c.discretization.sphere_rule(3)))
        np.testing.assert_array_equal(results[0].L_matrix, results[1].L_matrix)
        np.testing.assert_array_equal(results[0].nu_diag, results[1].nu_diag)

    def test_zero_kernel(self, matrices):
        damped = matrices.with_zero_kernel()
        np.testing.assert_array_equal(np.zeros_like(damped.K_matrix), damped.K_matrix)
        assert damped.diagnostics["zero_kernel"]


class TestGainLoss:
    def test_equilibrium_is_annihilated(self, client, matrices, grid):
        J = grid.j_values
        split = client.kernels.apply_gain_loss(matrices, J, J)
        assert isinstance(split, GainLoss)
        assert np.max(np.abs(split.q) / (matrices.nu_diag * J)) <= 1e-4

    def test_nonnegative_inputs_give_nonnegative_parts(self, client, matrices, grid):
        rng = np.random.default_rng(4)
        F = grid.j_values * rng.uniform(0.0, 2.0, grid.n_nodes)
        G = grid.j_values * rng.uniform(0.0, 2.0, grid.n_nodes)
        split = client.kernels.apply_gain_loss(matrices, F, G)
        assert np.all(split.q_plus >= 0)
        assert np.all(split.r_of_g >= 0)
        np.testing.assert_allclose(F * split.r_of_g, split.q_minus)

    def test_bilinear(self, client, matrices, grid):
        F, G = grid.j_values, grid.j_values * (1.0 + 0.1 * grid.nodes[:, 0])
        one = client.kernels.apply_gain_loss(matrices, 2.0 * F, G).q
        two = 2.0 * client.kernels.apply_gain_loss(matrices, F, G).q
        np.testing.assert_allclose(one, two, atol=1e-14 * np.max(np.abs(two)))

    def test_uncached_tables_give_same_result(self, soft_model):
        cached = KineticsClient(max_workers=2)
        regenerated = KineticsClient(max_workers=2, table_cache_bytes=1)
        grid = cached.discretization.build_grid(p_max=5.0, n_per_axis=5)
        sphere = cached.discretization.sphere_rule(3)
        a = cached.kernels.collision_tables(soft_model, grid, sphere)
        b = regenerated.kernels.collision_tables(soft_model, grid, sphere)
        assert a.cached and not b.cached
        F = grid.j_values * (1.0 + 0.2 * np.cos(grid.nodes[:, 1]))
        np.testing.assert_array_equal(
            cached.kernels.apply_gain_loss(a, F, F).q, regenerated.kernels.apply_gain_loss(b, F, F).q
        )

    def test_rejects_other_operators(self, client, grid):
        with pytest.raises(InvalidArgument):
            client.kernels.apply_gain_loss(np.eye(grid.n_nodes), grid.j_values, grid.j_values)


class TestGamma:
    def test_equilibrium(self, client, matrices, grid):
        gamma = client.kernels.apply_Gamma(matrices, grid.sqrt_j, grid.sqrt_j)
        assert np.max(np.abs(gamma)) <= 1e-12 * np.max(matrices.nu_diag * grid.sqrt_j)

    def test_single_frequency_convolution(self, client, matrices, profile, grid):
        other = grid.sqrt_j * np.sin(grid.nodes[:, 2])
        direct = client.kernels.apply_Gamma(matrices, profile, other)
        line = client.kernels.gamma_convolution(matrices, profile[None, :], other[None, :])
        np.testing.assert_allclose(direct, line[0], atol=1e-14)

    def test_loss_part_is_h1_times_a_collision_rate(self, client, matrices, profile, grid):
        other = grid.sqrt_j * np.cos(grid.nodes[:, 0])
        gain, loss = client.kernels.gamma_gain_loss(matrices, profile, other)
        _, unit_loss = client.kernels.gamma_gain_loss(matrices, np.ones(grid.n_nodes), other)
        np.testing.assert_allclose(loss, profile * unit_loss, rtol=1e-12, atol=1e-15)
        np.testing.assert_allclose(gain - loss, client.kernels.apply_Gamma(matrices, profile, other), atol=1e-14)

    def test_even_line_rejected(self, client, matrices, grid):
        with pytest.raises(InvalidArgument):
            client.kernels.gamma_convolution(matrices, np.ones((2, grid.n_nodes)), np.ones((2, grid.n_nodes)))

    def test_linearization(self, client, matrices, profile):
        report = client.kernels.linearization_check(matrices, profile)
        assert report.expansion_defect <= 1e-6
        assert report.remainders[0] > report.remainders[-1]

    def test_weight_estimate(self, client, matrices, profile):
        report = client.kernels.gamma_weight_estimate(matrices, profile, profile, ell=0.0)
        assert 1.0 == pytest.approx(report.weight_ratio_max)
        assert 0 < report.constant < np.inf
        assert matrices.tables.n_triples == report.n_sampled


class TestTruncatedConvolution:
    def test_delta_at_zero_is_identity(self):
        delta = np.array([0.0, 1.0, 0.0])
        y = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(y, truncated_convolution(delta, y))

    def test_terms_off_the_line_are_dropped(self):
        x = np.array([0.0, 0.0, 1.0])
        y = np.array([0.0, 0.0, 1.0])
        np.testing.assert_array_equal([0.0, 0.0, 0.0], truncated_convolution(x, y))

    def test_single_frequency_is_product(self):
        np.testing.assert_array_equal([6.0], truncated_convolution(np.array([2.0]), np.array([3.0])))
