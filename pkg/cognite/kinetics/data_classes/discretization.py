import itertools
from typing import Tuple

import numpy as np

from cognite.kinetics.data_classes._base import KineticsResource

_CORNERS = np.array(list(itertools.product((0, 1), repeat=3)), dtype=np.int64)


class MomentumGrid(KineticsResource):
    """Truncated tensor grid over [-p_max, p_max]³ with product quadrature weights.

    Nodes are stored in C order, node (i, j, k) has flat index (i * n + j) * n + k. The Jüttner values carried by
    the grid are normalized by the discrete mass, so that the quadrature of J over the grid is exactly one; the
    deviation of that discrete mass from the continuum normalization is kept in `tol_grid`.

    Args:
        p_max (float): Cutoff per axis.
        n_per_axis (int): Odd number of nodes per axis.
        rule (str): "trapezoid" or "gauss".
        axis (np.ndarray): One-dimensional node coordinates.
        axis_weights (np.ndarray): One-dimensional quadrature weights.
        juttner_z (float): Continuum normalization Z = ∫e^{-p⁰}dp.
    """

    _SUMMARY_FIELDS = ["p_max", "n_per_axis", "rule", "n_nodes", "tol_grid"]

    def __init__(self, p_max=None, n_per_axis=None, rule="trapezoid", axis=None, axis_weights=None, juttner_z=None):
        self.p_max = p_max
        self.n_per_axis = n_per_axis
        self.rule = rule
        self.axis = axis
        self.axis_weights = axis_weights
        self.juttner_z = juttner_z
        self.n_nodes = None
        self.tol_grid = None
        self._energy_directions = None
        self._cache = {}
        if axis is not None:
            self._build()

    def _build(self):
        n = self.n_per_axis
        x, y, z = np.meshgrid(self.axis, self.axis, self.axis, indexing="ij")
        wx, wy, wz = np.meshgrid(self.axis_weights, self.axis_weights, self.axis_weights, indexing="ij")
        self._nodes = np.stack([x.ravel(), y.ravel(), z.ravel()], axis=1)
        self._weights = (wx * wy * wz).ravel()
        self._energies = np.sqrt(1.0 + np.einsum("ij,ij->i", self._nodes, self._nodes))
        boltzmann = np.exp(-self._energies)
        grid_mass = np.sum(self._weights * boltzmann) / self.juttner_z
        self._j = boltzmann / (self.juttner_z * grid_mass)
        self.n_nodes = n ** 3
        self.tol_grid = abs(grid_mass - 1.0)

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def quad_weights(self) -> np.ndarray:
        return self._weights

    @property
    def energies(self) -> np.ndarray:
        return self._energies

    @property
    def velocities(self) -> np.ndarray:
        return self._nodes / self._energies[:, None]

    @property
    def j_values(self) -> np.ndarray:
        return self._j

    @property
    def sqrt_j(self) -> np.ndarray:
        return np.sqrt(self._j)

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.axis)))

    def flat_index(self, i, j, k):
        n = self.n_per_axis
        return (np.asarray(i) * n + np.asarray(j)) * n + np.asarray(k)

    def mirror_index(self) -> np.ndarray:
        """Index of the node -p for every node p."""
        n = self.n_per_axis
        idx = np.arange(self.n_nodes).reshape(n, n, n)
        return idx[::-1, ::-1, ::-1].ravel()

    def contains(self, points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
        lo, hi = self.axis[0] - tol, self.axis[-1] + tol
        return np.all((points >= lo) & (points <= hi), axis=-1)

    def locate(self, points: np.ndarray, tol: float = 1e-12) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cell containing each point.

        Returns:
            Tuple[np.ndarray, np.ndarray, np.ndarray]: Lower cell corner indices (T, 3), fractional coordinates in the
            cell (T, 3), and a mask of the points inside the grid hull."""
        axis = self.axis
        n = self.n_per_axis
        inside = self.contains(points, tol)
        base = np.clip(np.searchsorted(axis, points, side="right") - 1, 0, n - 2)
        lower = axis[base]
        frac = np.clip((points - lower) / (axis[base + 1] - lower), 0.0, 1.0)
        return base, frac, inside

    def trilinear(self, points: np.ndarray):
        """Trilinear stencil of off-grid points: corner node indices (T, 8), non-negative weights (T, 8), and the
        inside-hull mask (T,)."""
        base, frac, inside = self.locate(points)
        corners = self.flat_index(
            base[:, 0, None] + _CORNERS[None, :, 0],
            base[:, 1, None] + _CORNERS[None, :, 1],
            base[:, 2, None] + _CORNERS[None, :, 2],
        )
        factors = np.where(_CORNERS[None, :, :] == 1, frac[:, None, :], 1.0 - frac[:, None, :])
        return corners, np.prod(factors, axis=2), inside

    def conservative(self, points: np.ndarray):
        """Stencil that reproduces 1, p and p⁰ exactly at every point.

        The trilinear weights reproduce the affine functions; the energy error is removed with the minimal-norm
        correction that leaves the affine moments untouched. Weights may be negative."""
        corners, weights, inside = self.trilinear(points)
        base, _, _ = self.locate(points)
        n = self.n_per_axis
        cell = (base[:, 0] * (n - 1) + base[:, 1]) * (n - 1) + base[:, 2]
        energy = np.sqrt(1.0 + np.einsum("ij,ij->i", points, points))
        error = energy - np.einsum("ij,ij->i", weights, self._energies[corners])
        return corners, weights + error[:, None] * self._cell_energy_directions()[cell], inside

    def _cell_energy_directions(self) -> np.ndarray:
        if self._energy_directions is None:
            n = self.n_per_axis
            cells = np.array(list(itertools.product(range(n - 1), repeat=3)), dtype=np.int64)
            corner_idx = self.flat_index(
                cells[:, 0, None] + _CORNERS[None, :, 0],
                cells[:, 1, None] + _CORNERS[None, :, 1],
                cells[:, 2, None] + _CORNERS[None, :, 2],
            )
            coords = self._nodes[corner_idx] - self._nodes[corner_idx[:, 0]][:, None, :]
            affine = np.concatenate([np.ones(coords.shape[:2] + (1,)), coords], axis=2)
            energy = self._energies[corner_idx]
            gram = np.einsum("cki,ckj->cij", affine, affine)
            coef = np.linalg.solve(gram, np.einsum("cki,ck->ci", affine, energy)[..., None])[..., 0]
            perp = energy - np.einsum("cki,ci->ck", affine, coef)
            norm2 = np.einsum("ck,ck->c", perp, perp)
            scale = np.einsum("ck,ck->c", energy, energy)
            degenerate = norm2 <= 1e-24 * scale
            norm2[degenerate] = 1.0
            directions = perp / norm2[:, None]
            directions[degenerate] = 0.0
            self._energy_directions = directions
        return self._energy_directions


class SphereRule(KineticsResource):
    """Product quadrature on the unit sphere: Gauss–Jacobi in the polar cosine times uniform azimuth.

    With `angular_exponent` γ = 0 the polar rule is Gauss–Legendre and the weights sum to 4π. Otherwise the weights
    carry the factor sin^γθ about the third axis, so that ∫ sin^γθ f dω ≈ Σ w f; every polar node is interior.

    Args:
        order (int): Degree of exactness for spherical polynomials.
        nodes (np.ndarray): Unit vectors, shape (M, 3).
        weights (np.ndarray): Positive weights.
        angular_exponent (float): Exponent γ absorbed into the weights.
    """

    _SUMMARY_FIELDS = ["order", "n_nodes", "angular_exponent"]

    def __init__(self, order=None, nodes=None, weights=None, angular_exponent=0.0):
        self.order = order
        self.nodes = nodes
        self.weights = weights
        self.angular_exponent = angular_exponent

    @property
    def n_nodes(self) -> int:
        return 0 if self.nodes is None else len(self.nodes)
