import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from cognite.kinetics import KineticsClient
from cognite.kinetics._api.kinematics import collision_frame, post_collision_arrays
from cognite.kinetics.data_classes import CollisionInvariants, Momentum3, PostCollision, WeightSpec
from cognite.kinetics.exceptions import InvalidArgument

KINEMATICS_API = KineticsClient(max_workers=1).kinematics

components = st.floats(min_value=-20.0, max_value=20.0, allow_nan=False, allow_infinity=False)
momenta = st.tuples(components, components, components)
directions = st.tuples(*[st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)] * 3).filter(
    lambda v: np.linalg.norm(v) > 1e-3
)


def unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


class TestEnergy:
    def test_energy_at_rest(self):
        assert 1.0 == KINEMATICS_API.energy([0, 0, 0])

    def test_energy(self):
        assert math.sqrt(1 + 9 + 16) == pytest.approx(KINEMATICS_API.energy(Momentum3([3.0, 4.0, 0.0])))

    def test_energies_batch(self):
        p = np.array([[0.0, 0.0, 0.0], [3.0, 4.0, 0.0]])
        np.testing.assert_allclose([1.0, math.sqrt(26.0)], KINEMATICS_API.energies(p))

    @pytest.mark.parametrize("bad", [[1.0, 2.0], [np.nan, 0.0, 0.0], [np.inf, 0.0, 0.0]])
    def test_invalid_momentum(self, bad):
        with pytest.raises(InvalidArgument):
            KINEMATICS_API.energy(bad)

    def test_velocity_below_light_speed(self):
        assert np.linalg.norm(Momentum3([1e6, 0.0, 0.0]).velocity) < 1.0


class TestRelativeInvariants:
    def test_equal_momenta(self):
        inv = KINEMATICS_API.relative_invariants([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert isinstance(inv, CollisionInvariants)
        assert 0.0 == pytest.approx(inv.g, abs=1e-6)
        assert 4.0 == pytest.approx(inv.s)
        assert 0.0 == pytest.approx(inv.moller, abs=1e-6)

    def test_one_at_rest(self):
        q = np.array([0.0, 0.0, 0.0])
        p = np.array([0.0, 0.0, 2.0])
        inv = KINEMATICS_API.relative_invariants(p, q)
        # g² = 2(p⁰ − 1) when q is at rest
        assert 2.0 * (math.sqrt(5.0) - 1.0) == pytest.approx(inv.g ** 2)
        assert inv.g ** 2 + 4.0 == pytest.approx(inv.s)
        assert inv.moller < 1.0

    @given(momenta, momenta)
    def test_symmetric_in_the_pair(self, p, q):
        a = KINEMATICS_API.relative_invariants(p, q)
        b = KINEMATICS_API.relative_invariants(q, p)
        assert a.g == pytest.approx(b.g, rel=1e-12, abs=1e-12)
        assert a.gamma_lorentz >= 1.0 - 1e-12


class TestPostCollision:
    @settings(max_examples=200)
    @given(momenta, momenta, directions)
    def test_conservation(self, p, q, omega):
        out = KINEMATICS_API.post_collision(p, q, unit(omega))
        assert isinstance(out, PostCollision)
        p, q = np.asarray(p), np.asarray(q)
        total = p + q
        np.testing.assert_allclose(total, out.p_out.components + out.q_out.components, rtol=0, atol=1e-10)
        energy = KINEMATICS_API.energy(p) + KINEMATICS_API.energy(q)
        assert energy == pytest.approx(out.p_out.energy + out.q_out.energy, rel=1e-12)
        s_in = KINEMATICS_API.relative_invariants(p, q).s
        s_out = KINEMATICS_API.relative_invariants(out.p_out, out.q_out).s
        assert abs(s_in - s_out) <= 1e-11 * energy ** 2
        assert -1.0 <= out.cos_theta <= 1.0

    def test_batch_matches_single(self):
        rng = np.random.default_rng(3)
        p, q = rng.normal(scale=2.0, size=(10, 3)), rng.normal(scale=2.0, size=(10, 3))
        omega = rng.normal(size=(10, 3))
        omega /= np.linalg.norm(omega, axis=1, keepdims=True)
        p_out, q_out, cos_theta = KINEMATICS_API.post_collision_batch(p, q, omega)
        for i in range(10):
            single = KINEMATICS_API.post_collision(p[i], q[i], omega[i])
            np.testing.assert_allclose(single.p_out.components, p_out[i])
            np.testing.assert_allclose(single.q_out.components, q_out[i])
            assert single.cos_theta == pytest.approx(cos_theta[i])

    def test_non_unit_omega(self):
        with pytest.raises(InvalidArgument, match="unit"):
            KINEMATICS_API.post_collision([0, 0, 1], [0, 1, 0], [1.0, 1.0, 0.0])

    def test_non_unit_omega_batch(self):
        with pytest.raises(InvalidArgument):
            KINEMATICS_API.post_collision_batch(np.zeros((2, 3)), np.ones((2, 3)), np.ones((2, 3)))


class TestCollisionFrame:
    @pytest.fixture(scope="class")
    def pairs(self):
        rng = np.random.default_rng(17)
        p, q = rng.normal(scale=3.0, size=(200, 3)), rng.normal(scale=3.0, size=(200, 3))
        keep = KINEMATICS_API.relative_invariants_batch(p, q)[0] > 0.5
        return p[keep], q[keep]

    def test_orthonormal(self, pairs):
        frames = collision_frame(*pairs)
        products = np.einsum("kij,klj->kil", frames, frames)
        np.testing.assert_allclose(np.broadcast_to(np.eye(3), products.shape), products, rtol=0, atol=1e-12)

    def test_axis_is_the_identity_collision(self, pairs):
        p, q = pairs
        p_out, q_out, cos_theta, _ = post_collision_arrays(p, q, collision_frame(p, q)[:, 2])
        np.testing.assert_allclose(p, p_out, rtol=0, atol=1e-9)
        np.testing.assert_allclose(q, q_out, rtol=0, atol=1e-9)
        np.testing.assert_allclose(1.0, cos_theta, rtol=0, atol=1e-9)

    @pytest.mark.parametrize("local", [[0.0, 0.0, -1.0], [0.6, 0.0, 0.8], [0.0, -0.28, 0.96], [0.48, 0.6, -0.64]])
    def test_polar_coordinate_is_the_scattering_cosine(self, pairs, local):
        p, q = pairs
        omega = np.einsum("a,kab->kb", np.asarray(local), collision_frame(p, q))
        _, _, cos_theta, _ = post_collision_arrays(p, q, omega)
        np.testing.assert_allclose(local[2], cos_theta, rtol=0, atol=1e-9)


class TestJuttner:
    def test_normalization(self):
        # ∫e^{-p⁰}dp = 4π K₂(1)
        assert 4.0 * math.pi * special.kn(2, 1.0) == pytest.approx(KINEMATICS_API.juttner_normalization(), rel=1e-10)

    def test_modes(self):
        z = KINEMATICS_API.juttner_normalization()
        assert math.exp(-1.0) / z == pytest.approx(KINEMATICS_API.juttner([0, 0, 0]))
        assert math.exp(-1.0) / (4 * math.pi) == pytest.approx(KINEMATICS_API.juttner([0, 0, 0], mode="four_pi"))

    def test_unknown_mode(self):
        with pytest.raises(InvalidArgument):
            KINEMATICS_API.juttner([0, 0, 0], mode="other")


class TestWeights:
    def test_weights(self):
        spec = WeightSpec(ell=2.0, b_exponent=1.0, decay_order=1.5)
        w_p, w_t = KINEMATICS_API.weights(spec, [3.0, 4.0, 0.0], 3.0)
        assert math.sqrt(26.0) == pytest.approx(w_p)
        assert 8.0 == pytest.approx(w_t)

    def test_negative_time(self):
        with pytest.raises(InvalidArgument):
            KINEMATICS_API.weights(WeightSpec(), [0, 0, 0], -1.0)

    def test_negative_decay_order(self):
        with pytest.raises(InvalidArgument):
            WeightSpec(decay_order=-1.0)
