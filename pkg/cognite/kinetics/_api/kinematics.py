import logging
import math
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from scipy import integrate
from typing_extensions import Literal

from cognite.kinetics._api_client import APIClient
from cognite.kinetics.data_classes import CollisionInvariants, Momentum3, PostCollision, WeightSpec
from cognite.kinetics.exceptions import InvalidArgument, NumericalInconsistency
from cognite.kinetics.utils import finite_array

logger = logging.getLogger(__name__)

EPS_PQ = 1e-14

JuttnerMode = Literal["four_pi", "normalized"]


def energies(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return np.sqrt(1.0 + np.einsum("...i,...i->...", p, p))


def invariants_arrays(p: np.ndarray, q: np.ndarray, radicand_tol: float = 1e-12):
    """g, s, Møller velocity and Lorentz factor of each pair, rows of `p` and `q`."""
    p0 = energies(p)
    q0 = energies(q)
    radicand = 2.0 * (p0 * q0 - np.einsum("...i,...i->...", p, q) - 1.0)
    worst = np.min(radicand / (p0 * q0)) if radicand.size else 0.0
    if worst < -radicand_tol:
        raise NumericalInconsistency("g^2", float(worst), "relative momentum radicand is negative")
    g2 = np.maximum(radicand, 0.0)
    g = np.sqrt(g2)
    s = g2 + 4.0
    sqrt_s = np.sqrt(s)
    moller = g * sqrt_s / (p0 * q0)
    gamma = (p0 + q0) / sqrt_s
    return g, s, moller, gamma


def post_collision_arrays(
    p: np.ndarray, q: np.ndarray, omega: np.ndarray, radicand_tol: float = 1e-12
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Center-of-momentum post-collision map for arrays of triples.

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]: p', q', cos θ and g, one row per triple."""
    g, s, _, gamma = invariants_arrays(p, q, radicand_tol)
    total = p + q
    n2 = np.einsum("...i,...i->...", total, total)
    proj = np.einsum("...i,...i->...", total, omega)
    coef = np.divide((gamma - 1.0) * proj, n2, out=np.zeros_like(n2), where=n2 > EPS_PQ)
    direction = omega + coef[..., None] * total
    half_g = 0.5 * g[..., None]
    p_out = 0.5 * total + half_g * direction
    q_out = 0.5 * total - half_g * direction
    cos_theta = scattering_cosine(p, q, p_out, q_out, g)
    return p_out, q_out, cos_theta, g


def collision_frame(p: np.ndarray, q: np.ndarray, radicand_tol: float = 1e-12) -> np.ndarray:
    """Orthonormal frames (e₁, e₂, û) per pair, û the center-of-momentum direction of p, shape (..., 3, 3).

    ω = û leaves the pair unchanged, so the scattering angle θ is the polar angle about û."""
    g, _, _, gamma = invariants_arrays(p, q, radicand_tol)
    total = p + q
    n2 = np.einsum("...i,...i->...", total, total)
    d = np.divide(p - q, g[..., None], out=np.zeros_like(p, dtype=float), where=g[..., None] > 0)
    along = np.divide(np.einsum("...i,...i->...", d, total), n2, out=np.zeros_like(n2), where=n2 > EPS_PQ)
    axis = d - ((1.0 - 1.0 / gamma) * along)[..., None] * total
    axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
    helper = np.zeros_like(axis)
    use_x = np.abs(axis[..., 0]) < 0.9
    helper[use_x, 0] = 1.0
    helper[~use_x, 1] = 1.0
    e1 = helper - np.einsum("...i,...i->...", helper, axis)[..., None] * axis
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(axis, e1)
    return np.stack([e1, e2, axis], axis=-2)


def scattering_cosine(p, q, p_out, q_out, g) -> np.ndarray:
    """cos θ from the Minkowski product of the relative four-momenta before and after the collision."""
    rel = np.einsum("...i,...i->...", p - q, p_out - q_out)
    rel0 = (energies(p) - energies(q)) * (energies(p_out) - energies(q_out))
    g2 = np.square(g)
    cos = np.divide(rel - rel0, g2, out=np.ones_like(g2), where=g2 > 0)
    return np.clip(cos, -1.0, 1.0)


@lru_cache(maxsize=None)
def juttner_normalization() -> float:
    """Z = ∫ e^{-p⁰} dp = 4π ∫₀^∞ r² e^{-√(1+r²)} dr."""
    value, _ = integrate.quad(
        lambda r: r * r * math.exp(-math.sqrt(1.0 + r * r)), 0.0, np.inf, epsabs=1e-13, epsrel=1e-12
    )
    return 4.0 * math.pi * value


def _as_momentum(p, name="p") -> Momentum3:
    if isinstance(p, Momentum3):
        return p
    try:
        return Momentum3(p)
    except InvalidArgument as e:
        raise InvalidArgument(name, e.message)


class KinematicsAPI(APIClient):
    def energy(self, p: Union[Momentum3, np.ndarray]) -> float:
        """Energy p⁰ = √(1+|p|²).

        Args:
            p (Union[Momentum3, np.ndarray]): Momentum.

        Returns:
            float: p⁰ ≥ 1.

        Examples:

            >>> from cognite.kinetics import KineticsClient
            >>> c = KineticsClient()
            >>> c.kinematics.energy([0, 0, 0])
            1.0
        """
        return _as_momentum(p).energy

    def energies(self, p: np.ndarray) -> np.ndarray:
        return energies(finite_array(p, "p"))

    def relative_invariants(self, p, q) -> CollisionInvariants:
        """Lorentz invariants of a pair: g, s = g² + 4, the Møller velocity and the Lorentz factor (p⁰+q⁰)/√s.

        Args:
            p (Union[Momentum3, np.ndarray]): First momentum.
            q (Union[Momentum3, np.ndarray]): Second momentum.

        Returns:
            CollisionInvariants: The invariants.
        """
        p, q = _as_momentum(p, "p"), _as_momentum(q, "q")
        g, s, moller, gamma = invariants_arrays(p.components, q.components, self._tolerances["radicand"])
        return CollisionInvariants(g=float(g), s=float(s), moller=float(moller), gamma_lorentz=float(gamma))

    def relative_invariants_batch(self, p: np.ndarray, q: np.ndarray):
        return invariants_arrays(finite_array(p, "p"), finite_array(q, "q"), self._tolerances["radicand"])

    def post_collision(self, p, q, omega) -> PostCollision:
        """Post-collision momenta in the center-of-momentum parametrization.

        Args:
            p (Union[Momentum3, np.ndarray]): Incoming momentum.
            q (Union[Momentum3, np.ndarray]): Incoming partner momentum.
            omega (np.ndarray): Unit vector.

        Returns:
            PostCollision: p', q' and the invariant scattering angle cosine.
        """
        p, q = _as_momentum(p, "p"), _as_momentum(q, "q")
        omega = finite_array(omega, "omega")
        if omega.shape != (3,) or abs(np.linalg.norm(omega) - 1.0) > 1e-12:
            raise InvalidArgument("omega", "must be a unit 3-vector")
        p_out, q_out, cos_theta, _ = post_collision_arrays(
            p.components, q.components, omega, self._tolerances["radicand"]
        )
        return PostCollision(p_out=Momentum3(p_out), q_out=Momentum3(q_out), cos_theta=float(cos_theta))

    def post_collision_batch(self, p: np.ndarray, q: np.ndarray, omega: np.ndarray):
        """Vectorized post-collision map; rows of `omega` must be unit vectors.

        Returns:
            Tuple[np.ndarray, np.ndarray, np.ndarray]: p', q', cos θ."""
        omega = finite_array(omega, "omega")
        if np.max(np.abs(np.linalg.norm(omega, axis=-1) - 1.0), initial=0.0) > 1e-12:
            raise InvalidArgument("omega", "rows must be unit 3-vectors")
        p_out, q_out, cos_theta, _ = post_collision_arrays(
            finite_array(p, "p"), finite_array(q, "q"), omega, self._tolerances["radicand"]
        )
        return p_out, q_out, cos_theta

    def juttner(self, p, mode: JuttnerMode = "normalized") -> float:
        """Jüttner equilibrium at p.

        Args:
            p (Union[Momentum3, np.ndarray]): Momentum.
            mode (str): "four_pi" gives e^{-p⁰}/(4π); "normalized" gives e^{-p⁰}/Z with ∫J dp = 1.

        Returns:
            float: J(p).
        """
        energy = _as_momentum(p).energy
        if mode == "four_pi":
            return math.exp(-energy) / (4.0 * math.pi)
        if mode == "normalized":
            return math.exp(-energy) / juttner_normalization()
        raise InvalidArgument("mode", f"must be 'four_pi' or 'normalized', got {mode!r}")

    def juttner_normalization(self) -> float:
        return juttner_normalization()

    def weights(self, spec: WeightSpec, p, t: float) -> Tuple[float, float]:
        """Momentum weight w_ℓ(p) = (p⁰)^{ℓb/2} and temporal weight ϖ_k(t) = (1+t)^k."""
        if t < 0:
            raise InvalidArgument("t", f"must be non-negative, got {t}")
        return float(spec.momentum_weight(_as_momentum(p).energy)), float(spec.time_weight(t))
