"""Quadratic functionals of single Fourier modes of the linearized equation."""
from typing import Dict

import numpy as np
from scipy import linalg

from cognite.kinetics._api.moments import macro_arrays, micro_part, moment_arrays, reconstruct
from cognite.kinetics.data_classes import LyapunovConstants, MomentumGrid, MuConstants, OperatorMatrices, WeightSpec
from cognite.kinetics.exceptions import InvalidArgument


def frequency_vector(freq) -> np.ndarray:
    """A 3-vector frequency; a scalar |k| is placed along e₁."""
    freq = np.asarray(freq, dtype=float)
    if freq.ndim == 0:
        return np.array([float(freq), 0.0, 0.0])
    if freq.shape != (3,):
        raise InvalidArgument("freq", f"expected a 3-vector or a scalar, got shape {freq.shape}")
    return freq


def mode_generator(matrices: OperatorMatrices, freq) -> np.ndarray:
    k = frequency_vector(freq)
    return -(np.diag(1j * (matrices.grid.velocities @ k)) + matrices.L_matrix)


def spectral_bound(matrices: OperatorMatrices, freq) -> float:
    """Bound on the spectral radius of the generator: the numerical range of L lies in [0, λ_max(L)] and the
    transport part is skew-adjoint, both in the quadrature inner product."""
    if "l_max" not in matrices.diagnostics:
        n = matrices.n_nodes
        top = linalg.eigvalsh(matrices.symmetric_form, subset_by_index=[n - 1, n - 1])
        matrices.diagnostics["l_max"] = float(top[0])
    k = frequency_vector(freq)
    transport = float(np.max(np.abs(matrices.grid.velocities @ k)))
    return float(np.hypot(matrices.diagnostics["l_max"], transport))


def free_energy_components(grid: MomentumGrid, mu: MuConstants, k: np.ndarray, values: np.ndarray):
    """Linear functionals X_c, Y_c of the rows of `values` with E_free = Σ_c κ_c X_c conj(Y_c).

    Components 0..11 carry κ₁, components 12..14 the unweighted momentum-energy coupling."""
    q = 1.0 / (1.0 + k @ k)
    ik = 1j * k
    a, b, c = macro_arrays(grid, mu, values)
    theta, lam, a_func = moment_arrays(grid, mu, values - reconstruct(grid, a, b, c))
    beta = mu.beta
    x = np.concatenate(
        [
            -q * np.einsum("j,sjm->sm", ik, theta),
            -q * beta * ik[None, :] * np.einsum("smm->sm", theta),
            -q * (beta + 1.0) / 3.0 * ik[None, :] * a_func[:, None],
            lam,
            b,
        ],
        axis=1,
    )
    y = np.concatenate(
        [b, b, b, q * ik[None, :] * a[:, None], q * ik[None, :] * (mu.mu11_0 * a + mu.mu11 * c)[:, None]],
        axis=1,
    )
    return x, y


def component_weights(kappa1: float) -> np.ndarray:
    return np.concatenate([np.full(12, kappa1), np.ones(3)])


class ModeEnergetics:
    """Quadratic functionals of the mode solutions at one frequency and their exact time derivatives.

    All functionals are evaluated through linear maps of the nodal values, so d/dt Q(f̂) = 2Re B(f̂, Gf̂) is exact
    for the semi-discrete flow f̂' = Gf̂.

    Args:
        matrices (OperatorMatrices): Assembled operators.
        mu (MuConstants): Moments of the grid.
        freq (np.ndarray): Frequency.
        ell (float): Momentum weight order.
        radius (float): Radius of the low-momentum indicator 1_{|p| ≤ R}.
    """

    def __init__(self, matrices: OperatorMatrices, mu: MuConstants, freq, ell: float = 0.0, radius: float = None):
        self.matrices = matrices
        self.mu = mu
        self.freq = frequency_vector(freq)
        self.freq_norm = float(np.linalg.norm(self.freq))
        self.ell = float(ell)
        grid = matrices.grid
        self.grid = grid
        self.generator = mode_generator(matrices, self.freq)
        self.w_ell = WeightSpec(ell=ell, b_exponent=matrices.model.b_exponent).momentum_weight(grid.energies)
        radius = grid.p_max / 2.0 if radius is None else radius
        self.radius = float(radius)
        self.inner = np.linalg.norm(grid.nodes, axis=1) <= self.radius
        identity = np.eye(grid.n_nodes)
        self._x_map, self._y_map = free_energy_components(grid, mu, self.freq, identity)

    def _pair(self, u, v, weight):
        w = self.grid.quad_weights * weight
        return np.sum(w * u * np.conj(v), axis=-1)

    def terms(self, values: np.ndarray) -> Dict[str, np.ndarray]:
        """Every functional the Lyapunov analysis needs, per row of `values`, with its time derivative."""
        values = np.atleast_2d(values)
        grid, mu = self.grid, self.mu
        nu = self.matrices.nu_diag
        dvalues = values @ self.generator.T
        a, b, c = macro_arrays(grid, mu, values)
        micro = values - reconstruct(grid, a, b, c)
        dmicro = micro_part(grid, mu, dvalues)
        w2 = self.w_ell ** 2
        x, y = values @ self._x_map, values @ self._y_map
        dx, dy = dvalues @ self._x_map, dvalues @ self._y_map
        products = x * np.conj(y)
        dproducts = dx * np.conj(y) + x * np.conj(dy)
        return {
            "norm2": self._pair(values, values, 1.0).real,
            "dnorm2": 2.0 * self._pair(dvalues, values, 1.0).real,
            "free_kappa": products[:, :12].sum(axis=1),
            "free_base": products[:, 12:].sum(axis=1),
            "dfree_kappa": dproducts[:, :12].sum(axis=1).real,
            "dfree_base": dproducts[:, 12:].sum(axis=1).real,
            "macro2": np.abs(a) ** 2 + np.sum(np.abs(b) ** 2, axis=1) + np.abs(c) ** 2,
            "micro_dissipation": self._pair(micro, micro, nu).real,
            "wmicro2": self._pair(micro, micro, w2).real,
            "dwmicro2": 2.0 * self._pair(dmicro, micro, w2).real,
            "wnorm2": self._pair(values, values, w2).real,
            "dwnorm2": 2.0 * self._pair(dvalues, values, w2).real,
            "weighted_dissipation": self._pair(values, values, nu * w2).real,
            "full_dissipation": self._pair(values, values, nu).real,
            "inner_micro2": self._pair(micro, micro, self.inner).real,
            "inner_norm2": self._pair(values, values, self.inner).real,
        }

    def free_energy_bound(self, kappa1: float) -> float:
        """The smallest C with |E_free(f̂)| ≤ C‖f̂‖² for every f̂, as a spectral norm in the quadrature metric."""
        s = 1.0 / np.sqrt(self.grid.quad_weights)
        form = (s[:, None] * np.conj(self._y_map)) @ (component_weights(kappa1)[:, None] * (self._x_map.T * s))
        return float(np.linalg.norm(form, 2))

    def lyapunov(self, terms: Dict[str, np.ndarray], constants: LyapunovConstants) -> Dict[str, np.ndarray]:
        """E, E_ℓ and dE_ℓ/dt from precomputed `terms`."""
        free = constants.kappa1 * terms["free_kappa"] + terms["free_base"]
        dfree = constants.kappa1 * terms["dfree_kappa"] + terms["dfree_base"]
        energy = terms["norm2"] + constants.kappa3 * free.real
        denergy = terms["dnorm2"] + constants.kappa3 * dfree
        if self.freq_norm <= 1.0:
            energy_ell = energy + constants.kappa4 * terms["wmicro2"]
            denergy_ell = denergy + constants.kappa4 * terms["dwmicro2"]
        else:
            energy_ell = energy + constants.kappa5 * terms["wnorm2"]
            denergy_ell = denergy + constants.kappa5 * terms["dwnorm2"]
        return {"free": free, "dfree": dfree, "E": energy, "dE": denergy, "E_ell": energy_ell, "dE_ell": denergy_ell}

    def roundoff_floor(self, norm2: np.ndarray, tol: float) -> np.ndarray:
        """Size below which a time derivative of a quadratic functional is indistinguishable from zero."""
        return tol * float(np.max(self.matrices.nu_diag)) * norm2

    @property
    def rho(self) -> float:
        """1 ∧ |k|²."""
        return min(1.0, self.freq_norm ** 2)


def propagate_eig(matrices: OperatorMatrices, freq, f0: np.ndarray, elapsed: np.ndarray) -> np.ndarray:
    """e^{tG}f₀ for every row of `f0` (S, N) and every t in `elapsed`, shape (S, T, N).

    The generator is diagonalized in the similar form W^{1/2}GW^{-1/2} = −(iD + S), which is complex symmetric."""
    grid = matrices.grid
    sw = np.sqrt(grid.quad_weights)
    similar = -(np.diag(1j * (grid.velocities @ frequency_vector(freq))) + matrices.symmetric_form)
    eigenvalues, vectors = linalg.eig(similar)
    coefficients = linalg.solve(vectors, (np.atleast_2d(f0) * sw).T)
    phases = np.exp(np.outer(eigenvalues, np.asarray(elapsed, dtype=float)))
    evolved = np.einsum("ne,et,es->stn", vectors, phases, coefficients)
    return evolved / sw


def random_states(grid: MomentumGrid, rng: np.random.Generator, n_states: int) -> np.ndarray:
    """Complex Gaussian nodal values damped by e^{-p⁰/4}, normalized in the quadrature norm."""
    raw = rng.standard_normal((n_states, grid.n_nodes)) + 1j * rng.standard_normal((n_states, grid.n_nodes))
    raw *= np.exp(-0.25 * grid.energies)
    norms = np.sqrt(np.sum(grid.quad_weights * np.abs(raw) ** 2, axis=1))
    return raw / norms[:, None]


def relative_margin(excess: np.ndarray, scale: np.ndarray, floor: np.ndarray) -> np.ndarray:
    """−excess/scale for an inequality excess ≤ 0, with |excess| ≤ floor counted as zero."""
    excess = np.where(np.abs(excess) <= floor, 0.0, excess)
    return -excess / (scale + floor)
