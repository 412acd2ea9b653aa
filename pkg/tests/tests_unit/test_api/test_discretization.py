import math

import numpy as np
import pytest

from cognite.kinetics import KineticsClient
from cognite.kinetics.data_classes import MomentumGrid, SphereRule
from cognite.kinetics.exceptions import InvalidArgument

DISCRETIZATION_API = KineticsClient(max_workers=1).discretization


class TestBuildGrid:
    @pytest.mark.parametrize("rule", ["trapezoid", "gauss"])
    def test_nodes_and_weights(self, rule):
        grid = DISCRETIZATION_API.build_grid(p_max=4.0, n_per_axis=7, rule=rule)
        assert isinstance(grid, MomentumGrid)
        assert 343 == grid.n_nodes
        assert (343, 3) == grid.nodes.shape
        assert 8.0 ** 3 == pytest.approx(np.sum(grid.quad_weights))
        assert np.all(grid.quad_weights > 0)

    @pytest.mark.parametrize("rule", ["trapezoid", "gauss"])
    def test_discrete_mass_of_equilibrium(self, rule):
        grid = DISCRETIZATION_API.build_grid(p_max=8.0, n_per_axis=9, rule=rule)
        assert 1.0 == pytest.approx(DISCRETIZATION_API.integrate(grid, grid.j_values), abs=1e-14)
        assert grid.tol_grid >= 0

    def test_trapezoid_contains_origin(self):
        grid = DISCRETIZATION_API.build_grid(p_max=6.0, n_per_axis=5)
        center = grid.flat_index(2, 2, 2)
        np.testing.assert_array_equal([0.0, 0.0, 0.0], grid.nodes[center])
        assert 1.0 == grid.energies[center]

    def test_mirror_index(self):
        grid = DISCRETIZATION_API.build_grid(p_max=6.0, n_per_axis=5, rule="gauss")
        np.testing.assert_allclose(-grid.nodes, grid.nodes[grid.mirror_index()], atol=1e-15)

    @pytest.mark.parametrize("n_per_axis", [3, 4, 8, 5.0])
    def test_invalid_node_count(self, n_per_axis):
        with pytest.raises(InvalidArgument):
            DISCRETIZATION_API.build_grid(p_max=6.0, n_per_axis=n_per_axis)

    @pytest.mark.parametrize("p_max", [0.0, -1.0, np.inf])
    def test_invalid_cutoff(self, p_max):
        with pytest.raises(InvalidArgument):
            DISCRETIZATION_API.build_grid(p_max=p_max, n_per_axis=5)

    def test_unknown_rule(self):
        with pytest.raises(InvalidArgument):
            DISCRETIZATION_API.build_grid(p_max=6.0, n_per_axis=5, rule="simpson")

    def test_convergence_in_resolution(self):
        coarse = DISCRETIZATION_API.build_grid(p_max=10.0, n_per_axis=9)
        fine = DISCRETIZATION_API.build_grid(p_max=10.0, n_per_axis=21)
        assert fine.tol_grid < coarse.tol_grid


class TestIntegrate:
    def test_batch_axes(self):
        grid = DISCRETIZATION_API.build_grid(p_max=6.0, n_per_axis=5)
        values = np.stack([grid.j_values, 2.0 * grid.j_values])
        np.testing.assert_allclose([1.0, 2.0], DISCRETIZATION_API.integrate(grid, values))

    def test_odd_moments_vanish(self):
        grid = DISCRETIZATION_API.build_grid(p_max=6.0, n_per_axis=7)
        for axis in range(3):
            assert 0.0 == pytest.approx(DISCRETIZATION_API.integrate(grid, grid.nodes[:, axis] * grid.j_values), abs=1e-15)

    def test_complex_values(self):
        grid = DISCRETIZATION_API.build_grid(p_max=6.0, n_per_axis=5)
        assert 1.0 + 1.0j == pytest.approx(DISCRETIZATION_API.integrate(grid, (1 + 1j) * grid.j_values))

    def test_wrong_length(self):
        grid = DISCRETIZATION_API.build_grid(p_max=6.0, n_per_axis=5)
        with pytest.raises(InvalidArgument):
            DISCRETIZATION_API.integrate(grid, np.ones(10))


class TestConservativeStencil:
    def test_reproduces_invariants(self):
        grid = DISCRETIZATION_API.build_grid(p_max=4.0, n_per_axis=7)
        rng = np.random.default_rng(1)
        points = rng.uniform(-3.9, 3.9, size=(200, 3))
        corners, weights, inside = grid.conservative(points)
        assert np.all(inside)
        np.testing.assert_allclose(1.0, weights.sum(axis=1), atol=1e-12)
        np.testing.assert_allclose(points, np.einsum("tc,tci->ti", weights, grid.nodes[corners]), atol=1e-12)
        energy = np.sqrt(1.0 + np.sum(points ** 2, axis=1))
        np.testing.assert_allclose(energy, np.einsum("tc,tc->t", weights, grid.energies[corners]), atol=1e-12)

    def test_trilinear_is_nonnegative(self):
        grid = DISCRETIZATION_API.build_grid(p_max=4.0, n_per_axis=7)
        points = np.random.default_rng(2).uniform(-4.0, 4.0, size=(100, 3))
        _, weights, _ = grid.trilinear(points)
        assert np.all(weights >= 0)
        np.testing.assert_allclose(1.0, weights.sum(axis=1))

    def test_outside_points_are_flagged(self):
        grid = DISCRETIZATION_API.build_grid(p_max=4.0, n_per_axis=7)
        _, _, inside = grid.trilinear(np.array([[0.0, 0.0, 0.0], [4.5, 0.0, 0.0]]))
        np.testing.assert_array_equal([True, False], inside)


class TestSphereRule:
    @pytest.mark.parametrize("order", [1, 5, 11, 41])
    def test_total_area(self, order):
        rule = DISCRETIZATION_API.sphere_rule(order)
        assert isinstance(rule, SphereRule)
        assert 4.0 * math.pi == pytest.approx(DISCRETIZATION_API.sphere_integrate(rule, np.ones(rule.n_nodes)))
        np.testing.assert_allclose(1.0, np.linalg.norm(rule.nodes, axis=1))

    @pytest.mark.parametrize("order", [4, 5, 9])
    def test_exact_for_polynomials(self, order):
        rule = DISCRETIZATION_API.sphere_rule(order)
        x, y, z = rule.nodes.T
        assert 4.0 * math.pi / 3.0 == pytest.approx(DISCRETIZATION_API.sphere_integrate(rule, z ** 2))
        assert 4.0 * math.pi / 15.0 == pytest.approx(DISCRETIZATION_API.sphere_integrate(rule, x ** 2 * y ** 2))
        assert 0.0 == pytest.approx(DISCRETIZATION_API.sphere_integrate(rule, x * y * z), abs=1e-14)

    @pytest.mark.parametrize("order", [0, 42, 2.5])
    def test_unsupported_order(self, order):
        with pytest.raises(InvalidArgument):
            DISCRETIZATION_API.sphere_rule(order)

    def test_jacobi_weight_absorbs_the_angular_factor(self):
        rule = DISCRETIZATION_API.sphere_rule(5, angular_exponent=-1.0)
        assert -1.0 == rule.angular_exponent
        assert np.all(np.abs(rule.nodes[:, 2]) < 1.0)
        # ∫ sin^{-1}θ dω = 2π², ∫ sin^{-1}θ cos²θ dω = π²
        assert 2.0 * math.pi ** 2 == pytest.approx(DISCRETIZATION_API.sphere_integrate(rule, np.ones(rule.n_nodes)))
        assert math.pi ** 2 == pytest.approx(DISCRETIZATION_API.sphere_integrate(rule, rule.nodes[:, 2] ** 2))

    @pytest.mark.parametrize("angular_exponent", [-2.0, -3.0, np.nan])
    def test_unsupported_angular_exponent(self, angular_exponent):
        with pytest.raises(InvalidArgument):
            DISCRETIZATION_API.sphere_rule(5, angular_exponent=angular_exponent)


class TestTailBound:
    def test_tail_shrinks_with_cutoff(self):
        small = DISCRETIZATION_API.tail_bound(DISCRETIZATION_API.build_grid(p_max=4.0, n_per_axis=5))
        large = DISCRETIZATION_API.tail_bound(DISCRETIZATION_API.build_grid(p_max=10.0, n_per_axis=5))
        assert large["juttner_tail"] < small["juttner_tail"] < 1.0
        assert large["half_weight_tail"] < small["half_weight_tail"] < 1.0
        assert large["juttner_tail"] < 1e-2
