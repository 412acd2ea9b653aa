import logging
import math
from functools import lru_cache
from typing import Dict

import numpy as np
from scipy import integrate, special

from cognite.kinetics._api.kinematics import juttner_normalization
from cognite.kinetics._api_client import APIClient
from cognite.kinetics.data_classes import MomentumGrid, SphereRule
from cognite.kinetics.exceptions import InvalidArgument
from cognite.kinetics.utils import finite_array

logger = logging.getLogger(__name__)

MAX_SPHERE_ORDER = 41


def _symmetrize(nodes: np.ndarray, weights: np.ndarray):
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


def _axis_rule(p_max: float, n: int, rule: str):
    if rule == "trapezoid":
        h = 2.0 * p_max / (n - 1)
        nodes = (np.arange(n) - (n - 1) / 2) * h
        weights = np.full(n, h)
        weights[[0, -1]] = 0.5 * h
        return nodes, weights
    if rule == "gauss":
        x, w = np.polynomial.legendre.leggauss(n)
        return _symmetrize(p_max * x, p_max * w)
    raise InvalidArgument("rule", f"must be 'trapezoid' or 'gauss', got {rule!r}")


@lru_cache(maxsize=None)
def product_sphere_rule(order: int, angular_exponent: float = 0.0) -> SphereRule:
    n_polar = int(math.ceil((order + 1) / 2))
    n_azimuth = order + 1
    if angular_exponent == 0:
        cos_polar, w_polar = np.polynomial.legendre.leggauss(n_polar)
    else:
        half = 0.5 * angular_exponent
        cos_polar, w_polar = special.roots_jacobi(n_polar, half, half)
    cos_polar, w_polar = _symmetrize(cos_polar, w_polar)
    phi = 2.0 * np.pi * (np.arange(n_azimuth) + 0.5) / n_azimuth
    sin_polar = np.sqrt(1.0 - cos_polar ** 2)
    nodes = np.stack(
        [
            np.outer(sin_polar, np.cos(phi)).ravel(),
            np.outer(sin_polar, np.sin(phi)).ravel(),
            np.repeat(cos_polar, n_azimuth),
        ],
        axis=1,
    )
    nodes /= np.linalg.norm(nodes, axis=1)[:, None]
    weights = np.repeat(w_polar, n_azimuth) * (2.0 * np.pi / n_azimuth)
    return SphereRule(order=order, nodes=nodes, weights=weights, angular_exponent=float(angular_exponent))


def _radial_tail(fn, r0: float) -> float:
    value, _ = integrate.quad(lambda r: r * r * fn(math.sqrt(1.0 + r * r)), r0, np.inf, epsabs=1e-14, limit=200)
    return 4.0 * math.pi * value


class DiscretizationAPI(APIClient):
    def build_grid(self, p_max: float, n_per_axis: int, rule: str = "trapezoid") -> MomentumGrid:
        """Build the truncated tensor grid over [-p_max, p_max]³.

        Args:
            p_max (float): Cutoff per axis.
            n_per_axis (int): Odd number of nodes per axis, at least 5.
            rule (str): "trapezoid" (uniform nodes) or "gauss" (scaled Gauss-Legendre nodes).

        Returns:
            MomentumGrid: The grid, with J normalized by its discrete mass.

        Examples:

            >>> from cognite.kinetics import KineticsClient
            >>> c = KineticsClient()
            >>> grid = c.discretization.build_grid(p_max=8, n_per_axis=5)
            >>> grid.n_nodes
            125
        """
        if not (isinstance(n_per_axis, (int, np.integer)) and n_per_axis >= 5 and n_per_axis % 2 == 1):
            raise InvalidArgument("n_per_axis", f"must be an odd integer >= 5, got {n_per_axis}")
        if not (np.isfinite(p_max) and p_max > 0):
            raise InvalidArgument("p_max", f"must be positive, got {p_max}")
        axis, axis_weights = _axis_rule(float(p_max), int(n_per_axis), rule)
        grid = MomentumGrid(
            p_max=float(p_max),
            n_per_axis=int(n_per_axis),
            rule=rule,
            axis=axis,
            axis_weights=axis_weights,
            juttner_z=juttner_normalization(),
        )
        logger.debug("Built %s grid with %d nodes, tol_grid=%.3e", rule, grid.n_nodes, grid.tol_grid)
        return grid

    def integrate(self, grid: MomentumGrid, values):
        """Quadrature Σ wᵢ vᵢ over the grid, summed in a fixed order. Leading axes of `values` are batch axes.

        Args:
            grid (MomentumGrid): The grid.
            values (np.ndarray): Nodal values, real or complex, last axis of length n_nodes.

        Returns:
            Union[float, complex, np.ndarray]: The integral.
        """
        values = np.asarray(values)
        if values.shape[-1:] != (grid.n_nodes,):
            raise InvalidArgument("values", f"expected {grid.n_nodes} nodal values, got shape {values.shape}")
        result = np.sum(values * grid.quad_weights, axis=-1)
        return result.item() if result.ndim == 0 else result

    def sphere_rule(self, order: int, angular_exponent: float = 0.0) -> SphereRule:
        """Product rule on S²: Gauss-Jacobi in cos θ times uniform azimuth, exact up to degree `order`.

        Args:
            order (int): Degree of exactness, 1 ≤ order ≤ 41.
            angular_exponent (float): γ > -2; the weights carry sin^γθ about the third axis. 0 gives Gauss-Legendre.

        Returns:
            SphereRule: Nodes and weights, weights summing to 4π when γ = 0.
        """
        if not (isinstance(order, (int, np.integer)) and 1 <= order <= MAX_SPHERE_ORDER):
            raise InvalidArgument("order", f"supported orders are 1..{MAX_SPHERE_ORDER}, got {order}")
        if not (np.isfinite(angular_exponent) and angular_exponent > -2):
            raise InvalidArgument("angular_exponent", f"must be > -2, got {angular_exponent}")
        return product_sphere_rule(int(order), float(angular_exponent))

    def sphere_integrate(self, rule: SphereRule, values) -> float:
        values = finite_array(values, "values")
        if values.shape[-1:] != (rule.n_nodes,):
            raise InvalidArgument("values", f"expected {rule.n_nodes} values, got shape {values.shape}")
        return np.sum(values * rule.weights, axis=-1)

    def tail_bound(self, grid: MomentumGrid) -> Dict[str, float]:
        """Mass outside the ball |p| ≤ p_max, which bounds the mass outside the box.

        Returns:
            Dict[str, float]: Tail of J, and the relative tail of e^{-p⁰/2}.
        """
        z = juttner_normalization()
        half_total = _radial_tail(lambda e: math.exp(-0.5 * e), 0.0)
        return {
            "juttner_tail": _radial_tail(lambda e: math.exp(-e), grid.p_max) / z,
            "half_weight_tail": _radial_tail(lambda e: math.exp(-0.5 * e), grid.p_max) / half_total,
            "tol_grid": grid.tol_grid,
        }
