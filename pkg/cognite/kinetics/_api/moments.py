import logging
from typing import Dict, Tuple

import numpy as np

from cognite.kinetics._api_client import APIClient
from cognite.kinetics.data_classes import (
    BalanceReport,
    MacroCoefficients,
    ModeTrajectory,
    MomentSet,
    MomentumGrid,
    MuConstants,
    OperatorMatrices,
)
from cognite.kinetics.exceptions import BalanceLawError, GridTooCoarseError, InvalidArgument

logger = logging.getLogger(__name__)


def mu_constants(grid: MomentumGrid) -> MuConstants:
    if "mu" not in grid._cache:
        w, j, p, p0 = grid.quad_weights, grid.j_values, grid.nodes, grid.energies
        p1, p2 = p[:, 0], p[:, 1]

        def moment(values):
            return float(np.sum(w * values * j))

        grid._cache["mu"] = MuConstants.from_moments(
            mu0=moment(p0),
            mu00=moment(p0 ** 2),
            mu11=moment(p1 ** 2),
            mu11_0=moment(p1 ** 2 / p0),
            mu1122_00=moment(p1 ** 2 * p2 ** 2 / p0 ** 2),
            mu1111_00=moment(p1 ** 4 / p0 ** 2),
            mu11_00=moment(p1 ** 2 / p0 ** 2),
        )
    return grid._cache["mu"]


def macro_arrays(grid: MomentumGrid, mu: MuConstants, values: np.ndarray):
    """(a, b, c) of every row of `values`, shapes (S,), (S, 3), (S,)."""
    weighted = values * (grid.quad_weights * grid.sqrt_j)
    mass = weighted.sum(axis=-1)
    c = (weighted @ grid.energies - mu.mu0 * mass) / mu.variance
    a = mass - mu.mu0 * c
    b = (weighted @ grid.nodes) / mu.mu11
    return a, b, c


def reconstruct(grid: MomentumGrid, a, b, c) -> np.ndarray:
    """(a + b·p + c p⁰)√J for every row of the coefficients."""
    a, c = np.asarray(a)[..., None], np.asarray(c)[..., None]
    return (a + np.asarray(b) @ grid.nodes.T + c * grid.energies) * grid.sqrt_j


def micro_part(grid: MomentumGrid, mu: MuConstants, values: np.ndarray) -> np.ndarray:
    return values - reconstruct(grid, *macro_arrays(grid, mu, values))


def moment_arrays(grid: MomentumGrid, mu: MuConstants, values: np.ndarray):
    """Θ (S, 3, 3), Λ (S, 3) and A (S,) of every row of `values`."""
    weighted = values * (grid.quad_weights * grid.sqrt_j)
    p, p0 = grid.nodes, grid.energies
    second = np.einsum("nm,nj->nmj", p, p) / p0[:, None, None] - mu.alpha1
    theta = np.einsum("sn,nmj->smj", weighted, second)
    lam = weighted @ (p * (1.0 / p0 - mu.alpha2)[:, None])
    a_func = weighted @ (1.0 / p0)
    return theta, lam, a_func


class MacroMomentsAPI(APIClient):
    def compute_mu_constants(self, grid: MomentumGrid) -> MuConstants:
        """The seven J-moments of the grid and α₁, α₂, β, computed once per grid.

        Args:
            grid (MomentumGrid): Grid with the normalized Jüttner values.

        Returns:
            MuConstants: Moments and derived constants.

        Raises:
            GridTooCoarseError: If μ⁰⁰ ≤ (μ⁰)², so that P is not defined on the grid.
        """
        mu = mu_constants(grid)
        if mu.variance <= 0:
            raise GridTooCoarseError("mu00 - mu0^2", mu.variance, "energy variance is not positive on this grid")
        checks = mu.checks()
        if abs(checks["isotropy_ratio"] - 3.0) > 1e-2:
            logger.warning("mu1111_00 / mu1122_00 = %.6g, far from 3; the grid is too coarse", checks["isotropy_ratio"])
        return mu

    def _values(self, grid, h):
        h = np.asarray(h)
        if h.shape[-1:] != (grid.n_nodes,):
            raise InvalidArgument("h", f"expected {grid.n_nodes} nodal values, got shape {h.shape}")
        return h

    def project_P(self, grid: MomentumGrid, mu: MuConstants, h) -> Tuple[MacroCoefficients, np.ndarray, np.ndarray]:
        """Orthogonal projection onto span{√J, p√J, p⁰√J}.

        Args:
            grid (MomentumGrid): Grid.
            mu (MuConstants): Moments of the grid.
            h (np.ndarray): Nodal values, real or complex.

        Returns:
            Tuple[MacroCoefficients, np.ndarray, np.ndarray]: (a, b, c), Ph and (I-P)h.

        Examples:

            >>> coefficients, ph, micro = c.moments.project_P(grid, mu, grid.sqrt_j)
            >>> round(coefficients.a, 12)
            1.0
        """
        h = self._values(grid, h)
        a, b, c = macro_arrays(grid, mu, h[None, :])
        ph = reconstruct(grid, a, b, c)[0]
        scalar = float if not np.iscomplexobj(h) else complex
        return MacroCoefficients(a=scalar(a[0]), b=b[0], c=scalar(c[0])), ph, h - ph

    def moment_functionals(self, grid: MomentumGrid, mu: MuConstants, h) -> MomentSet:
        """Θ_{mj}(h) = ∫(p_m p_j/p⁰ − α₁)√J h, Λ_m(h) = ∫p_m(1/p⁰ − α₂)√J h and A(h) = ∫√J h/p⁰."""
        h = self._values(grid, h)
        theta, lam, a_func = moment_arrays(grid, mu, h[None, :])
        return MomentSet(theta=theta[0], lambda_=lam[0], a_func=a_func[0])

    def balance_residuals(
        self, matrices: OperatorMatrices, mu: MuConstants, trajectory: ModeTrajectory, raise_on_failure: bool = True
    ) -> BalanceReport:
        """Residuals of the balance laws of the macroscopic coefficients along a mode trajectory.

        Spatial derivatives become multiplication by i·k. Time derivatives of the stored snapshots are taken by
        second order finite differences, so every residual is measured relative to the largest term of its law
        (or to the initial norm, when the trajectory is stationary) and compared with
        `balance_constant`·Δt², Δt the snapshot spacing.

        Laws reported: "3.7" energy, "3.9-0" mass, "3.9", "3.8" momentum, "3.9-2", the Fourier forms "dt_a" and
        "dt_c", and the high order relations "3.11" (Θ_jj), "3.12" (Θ_mj, m ≠ j) and "3.13" (Λ_m).

        Args:
            matrices (OperatorMatrices): Operators the trajectory was computed with.
            mu (MuConstants): Moments of the grid.
            trajectory (ModeTrajectory): Snapshots of f̂ at one frequency, at least five.
            raise_on_failure (bool): Raise BalanceLawError naming the worst law when a residual exceeds the budget.

        Returns:
            BalanceReport: Residual per law.
        """
        if trajectory.n_snapshots < 5:
            raise InvalidArgument("trajectory", "need at least five snapshots for the time derivatives")
        grid = matrices.grid
        times, values = np.asarray(trajectory.times), np.asarray(trajectory.values)
        k = np.asarray(trajectory.freq, dtype=float)
        ik = 1j * k

        def dt(x):
            return np.gradient(x, times, axis=0, edge_order=2)

        a, b, c = macro_arrays(grid, mu, values)
        micro = values - reconstruct(grid, a, b, c)
        theta, lam, a_func = moment_arrays(grid, mu, micro)
        remainder = -(micro @ matrices.L_matrix.T) - 1j * (grid.velocities @ k) * micro
        theta_r, lam_r, _ = moment_arrays(grid, mu, remainder)
        div_b = b @ ik
        div_lam = lam @ ik
        da, db, dc = dt(a), dt(b), dt(c)
        dtheta, dlam = dt(theta), dt(lam)
        m0, m00, m11, m11_0 = mu.mu0, mu.mu00, mu.mu11, mu.mu11_0
        alpha1, alpha2 = mu.alpha1, mu.alpha2
        gamma_c = m00 / m0 * (m11_0 - alpha1) - m11 + alpha1 * m0

        laws: Dict[str, list] = {
            "3.7": [da * m0, dc * m00, div_b * m11],
            "3.9-0": [da, dc * m0, div_b * m11_0, div_lam],
            "3.9": [da * (1 - m0 ** 2 / m00), div_b * (m11_0 - m11 * m0 / m00), div_lam],
            "3.8": [
                db * m11,
                ik[None, :] * (a * m11_0 + c * m11)[:, None],
                np.einsum("m,smj->sj", ik, theta),
            ],
            "3.9-2": [dc * (m0 - m00 / m0), div_b * (m11_0 - m11 / m0), div_lam],
            "dt_a": [
                da,
                div_b * (m11_0 * m00 - m11 * m0) / (m00 - m0 ** 2),
                div_lam * m00 / (m00 - m0 ** 2),
            ],
            "dt_c": [
                dc,
                div_b * (m11_0 * m0 - m11) / (m0 ** 2 - m00),
                div_lam * m0 / (m0 ** 2 - m00),
            ],
            "3.11": [
                np.einsum("sjj->sj", dtheta),
                -np.einsum("sjj->sj", theta_r),
                -dc[:, None] * gamma_c,
                -(ik[None, :] * b) * (mu.mu1122_00 - mu.mu1111_00),
            ],
            "3.13": [dlam, -lam_r, ik[None, :] * a[:, None] * (mu.mu11_00 - alpha2 * m11_0)],
        }
        off = ~np.eye(3, dtype=bool)
        symmetric_b = ik[None, :, None] * b[:, None, :] + ik[None, None, :] * b[:, :, None]
        laws["3.12"] = [
            dtheta[:, off],
            -theta_r[:, off],
            symmetric_b[:, off] * mu.mu1122_00,
            np.repeat((alpha1 * div_lam)[:, None], 6, axis=1),
        ]

        floor = float(np.sqrt(np.sum(grid.quad_weights * np.abs(values[0]) ** 2)))
        spacing = float(np.min(np.diff(times)))
        budget = self._tolerances["balance_constant"] * spacing ** 2
        residuals, constants = {}, {}
        for law, terms in laws.items():
            total = np.abs(sum(terms))
            scale = max(max(float(np.max(np.abs(term))) for term in terms), floor, np.finfo(float).tiny)
            residuals[law] = float(np.max(total)) / scale
            constants[law] = residuals[law] / spacing ** 2
        report = BalanceReport(residuals=residuals, dt=spacing, budget=budget, constants=constants, freq=k)
        logger.debug(
            "Balance residuals at |k|=%.4g: worst %s = %.3e",
            trajectory.freq_norm,
            report.worst_law,
            residuals[report.worst_law],
        )
        if raise_on_failure and not report.passed:
            law = report.worst_law
            raise BalanceLawError(law, residuals[law], budget, report.dump())
        return report
