from typing import Any, Callable, Dict, Iterator, List, Optional

import numpy as np
from typing_extensions import Literal

from cognite.kinetics.data_classes._base import KineticsResource
from cognite.kinetics.exceptions import InvalidArgument

KernelKind = Literal["soft", "hard"]
KSplit = Literal["full", "chi", "one_minus_chi"]


class KernelModel(KineticsResource):
    """Representative cross-section σ(g, θ) of the soft or hard potential class.

    soft: σ = g^{-b} sin^γθ with 0 < b < min(4, 4+γ), γ > -2.
    hard: σ = (g^a + g^{-b}) sin^γθ with 0 ≤ a ≤ 2+γ, 0 ≤ b < min(4, 4+γ).

    Args:
        kind (str): "soft" or "hard".
        b_exponent (float): Decay exponent b.
        a_exponent (float): Growth exponent a, hard potentials only.
        angular_exponent (float): Exponent γ of the angular factor sin^γθ.
        chi_epsilon (float): Cutoff scale ε of the smooth ramp χ.
        g_min (float): Relative momenta below this are skipped by every quadrature.

    Examples:

        >>> from cognite.kinetics.data_classes import KernelModel
        >>> model = KernelModel(kind="soft", b_exponent=1.0, angular_exponent=0.0)
        >>> model.zeta
        0.5
    """

    _SUMMARY_FIELDS = ["kind", "b_exponent", "a_exponent", "angular_exponent", "chi_epsilon", "zeta"]

    def __init__(
        self,
        kind: KernelKind = "soft",
        b_exponent: float = 1.0,
        a_exponent: float = 0.0,
        angular_exponent: float = 0.0,
        chi_epsilon: float = 0.1,
        g_min: float = 1e-8,
    ):
        self.kind = kind
        self.b_exponent = float(b_exponent)
        self.a_exponent = float(a_exponent)
        self.angular_exponent = float(angular_exponent)
        self.chi_epsilon = float(chi_epsilon)
        self.g_min = float(g_min)
        self.validate()

    def validate(self):
        b, a, gamma = self.b_exponent, self.a_exponent, self.angular_exponent
        if self.kind not in ("soft", "hard"):
            raise InvalidArgument("kind", f"must be 'soft' or 'hard', got {self.kind!r}")
        if gamma <= -2:
            raise InvalidArgument("angular_exponent", f"must be > -2, got {gamma}")
        upper = min(4.0, 4.0 + gamma)
        if self.kind == "soft" and not 0 < b < upper:
            raise InvalidArgument("b_exponent", f"soft potentials need 0 < b < min(4, 4+gamma) = {upper:g}, got {b:g}")
        if self.kind == "hard":
            if not 0 <= b < upper:
                raise InvalidArgument(
                    "b_exponent", f"hard potentials need 0 <= b < min(4, 4+gamma) = {upper:g}, got {b:g}"
                )
            if not 0 <= a <= 2 + gamma:
                raise InvalidArgument("a_exponent", f"hard potentials need 0 <= a <= 2+gamma = {2 + gamma:g}, got {a:g}")
        if self.chi_epsilon <= 0:
            raise InvalidArgument("chi_epsilon", f"must be positive, got {self.chi_epsilon}")

    @property
    def zeta(self) -> float:
        return min(2.0 - abs(self.angular_exponent), 4.0 - self.b_exponent, 2.0) / 4.0

    def radial(self, g) -> np.ndarray:
        """g^{-b}, plus g^a for hard potentials."""
        g = np.asarray(g, dtype=float)
        with np.errstate(divide="ignore"):
            radial = np.power(g, -self.b_exponent) if self.b_exponent > 0 else np.ones_like(g)
        if self.kind == "hard":
            radial = radial + np.power(g, self.a_exponent)
        return radial

    def angular(self, cos_theta) -> np.ndarray:
        """sin^γθ; infinite at θ ∈ {0, π} when γ < 0."""
        sin_theta = np.sqrt(np.clip(1.0 - np.square(cos_theta), 0.0, 1.0))
        with np.errstate(divide="ignore"):
            return np.power(sin_theta, self.angular_exponent)

    def sigma(self, g, cos_theta) -> np.ndarray:
        return self.radial(g) * self.angular(cos_theta)

    def chi(self, g) -> np.ndarray:
        """Cubic smoothstep: 0 for g ≤ ε, 1 for g ≥ 2ε."""
        x = np.clip((np.asarray(g, dtype=float) - self.chi_epsilon) / self.chi_epsilon, 0.0, 1.0)
        return x * x * (3.0 - 2.0 * x)


class CollisionChunk:
    """Kept collision triples (p, q, ω) of one block of p-nodes.

    `weight` is w_q·w_ω·v_φ·σ(g, θ) of each triple; the post-collision momenta are kept as coordinates so that
    both the trilinear and the conservative stencils can be rebuilt from the table."""

    __slots__ = ["p_idx", "q_idx", "weight", "chi", "p_out", "q_out", "n_dropped"]

    def __init__(self, p_idx, q_idx, weight, chi, p_out, q_out, n_dropped=0):
        self.p_idx = p_idx
        self.q_idx = q_idx
        self.weight = weight
        self.chi = chi
        self.p_out = p_out
        self.q_out = q_out
        self.n_dropped = n_dropped

    def __len__(self):
        return len(self.weight)

    @property
    def nbytes(self) -> int:
        return sum(getattr(self, k).nbytes for k in ["p_idx", "q_idx", "weight", "chi", "p_out", "q_out"])


class CollisionTables(KineticsResource):
    """Collision frequency, loss matrix and the collision triples of a (model, grid, sphere rule).

    ν sums over every triple with g ≥ g_min; the loss matrix and the triple tables only hold the triples whose
    post-collision momenta stay inside the grid hull. The frequency carried by the dropped triples is the
    leakage, reported per node relative to ν.

    Args:
        nu (np.ndarray): ν at every node.
        nu_chi (np.ndarray): ν of the χ-part of the kernel.
        loss_matrix (np.ndarray): R(G) = loss_matrix @ G over the kept triples.
        leakage (np.ndarray): Dropped share of ν per node.
        n_triples (int): Kept triples.
        n_dropped (int): Triples dropped because p' or q' left the hull.
        diagnostics (Dict[str, Any]): Leakage summary and timings.
    """

    _SUMMARY_FIELDS = ["n_triples", "n_dropped", "cached", "diagnostics"]

    def __init__(
        self,
        nu=None,
        nu_chi=None,
        loss_matrix=None,
        leakage=None,
        n_triples=None,
        n_dropped=None,
        diagnostics: Optional[Dict[str, Any]] = None,
        model: KernelModel = None,
        grid=None,
        sphere=None,
        chunks: Optional[List[CollisionChunk]] = None,
        chunk_loaders: Optional[List[Callable[[], CollisionChunk]]] = None,
    ):
        self.nu = nu
        self.nu_chi = nu_chi
        self.loss_matrix = loss_matrix
        self.leakage = leakage
        self.n_triples = n_triples
        self.n_dropped = n_dropped
        self.diagnostics = diagnostics or {}
        self._model = model
        self._grid = grid
        self._sphere = sphere
        self._chunks = chunks
        self._chunk_loaders = chunk_loaders

    @property
    def cached(self) -> bool:
        return self._chunks is not None

    @property
    def model(self) -> KernelModel:
        return self._model

    @property
    def grid(self):
        return self._grid

    @property
    def sphere(self):
        return self._sphere

    def loaders(self) -> List[Callable[[], CollisionChunk]]:
        """One zero-argument callable per block of p-nodes returning its triple table, from memory when the tables
        were cached and regenerated otherwise."""
        if self._chunks is not None:
            return [lambda chunk=chunk: chunk for chunk in self._chunks]
        return list(self._chunk_loaders)

    def collision_chunks(self) -> Iterator[CollisionChunk]:
        for load in self.loaders():
            yield load()


class OperatorMatrices(KineticsResource):
    """Assembled linear operators over a grid, with the collision tables used by the nonlinear ones.

    `L_matrix` acts on nodal values and is self-adjoint in the quadrature inner product ⟨h, g⟩ = Σ w h g, that is
    ⟨Lh, g⟩ = hᵀ A g with the symmetric `weighted_form` A. `symmetric_form` = W^{-1/2} A W^{-1/2} is the similar
    matrix that is symmetric in the plain sense.

    Args:
        tables (CollisionTables): ν, the loss matrix and the triple tables.
        L_matrix (np.ndarray): Linearized operator.
        L_chi (np.ndarray): The χ-part of the linearized operator.
        weighted_form (np.ndarray): Symmetric matrix A.
        diagnostics (Dict[str, Any]): Symmetrization defect, leakage, tail bounds, timings.
    """

    _SUMMARY_FIELDS = ["n_nodes", "diagnostics"]

    def __init__(
        self,
        tables: CollisionTables = None,
        L_matrix=None,
        L_chi=None,
        weighted_form=None,
        diagnostics: Optional[Dict[str, Any]] = None,
    ):
        self.n_nodes = None if L_matrix is None else len(L_matrix)
        self.diagnostics = diagnostics or {}
        self._tables = tables
        self._L = L_matrix
        self._L_chi = L_chi
        self._A = weighted_form

    @property
    def tables(self) -> CollisionTables:
        return self._tables

    @property
    def nu_diag(self) -> np.ndarray:
        return self._tables.nu

    @property
    def nu_chi(self) -> np.ndarray:
        return self._tables.nu_chi

    @property
    def L_matrix(self) -> np.ndarray:
        return self._L

    @property
    def L_chi(self) -> np.ndarray:
        return self._L_chi

    @property
    def K_matrix(self) -> np.ndarray:
        return np.diag(self.nu_diag) - self._L

    @property
    def K_chi(self) -> np.ndarray:
        return np.diag(self.nu_chi) - self._L_chi

    @property
    def K_one_minus_chi(self) -> np.ndarray:
        return self.K_matrix - self.K_chi

    def K(self, split: KSplit = "full") -> np.ndarray:
        if split == "full":
            return self.K_matrix
        if split == "chi":
            return self.K_chi
        if split == "one_minus_chi":
            return self.K_one_minus_chi
        raise InvalidArgument("split", f"must be one of full, chi, one_minus_chi, got {split!r}")

    @property
    def weighted_form(self) -> np.ndarray:
        return self._A

    @property
    def loss_matrix(self) -> np.ndarray:
        return self._tables.loss_matrix

    @property
    def symmetric_form(self) -> np.ndarray:
        s = 1.0 / np.sqrt(self.grid.quad_weights)
        return s[:, None] * self._A * s[None, :]

    @property
    def grid(self):
        return self._tables.grid

    @property
    def model(self) -> KernelModel:
        return self._tables.model

    def with_zero_kernel(self) -> "OperatorMatrices":
        """The same ν with K ≡ 0, so that L = ν and the linear evolution is the damped transport alone."""
        w = self.grid.quad_weights
        return OperatorMatrices(
            tables=self._tables,
            L_matrix=np.diag(self.nu_diag),
            L_chi=np.diag(self.nu_chi),
            weighted_form=np.diag(w * self.nu_diag),
            diagnostics={**self.diagnostics, "zero_kernel": True},
        )


class GainLoss(KineticsResource):
    """Q₊(F, G), Q₋(F, G) = F·R(G) and R(G) at every node."""

    def __init__(self, q_plus=None, q_minus=None, r_of_g=None):
        self.q_plus = q_plus
        self.q_minus = q_minus
        self.r_of_g = r_of_g

    @property
    def q(self) -> np.ndarray:
        return self.q_plus - self.q_minus

    def summary(self):
        return {
            "max_q_plus": float(np.max(np.abs(self.q_plus))),
            "max_q": float(np.max(np.abs(self.q))),
            "min_r": float(np.min(self.r_of_g)),
        }


class NullSpaceReport(KineticsResource):
    def __init__(
        self,
        relative_residuals=None,
        smallest_eigenvalues=None,
        sixth_eigenvalue=None,
        n_below=None,
        eps_grid=None,
        min_eigenvalue=None,
        symmetry_defect=None,
        assembly_defect=None,
    ):
        self.relative_residuals = relative_residuals
        self.smallest_eigenvalues = smallest_eigenvalues
        self.sixth_eigenvalue = sixth_eigenvalue
        self.n_below = n_below
        self.eps_grid = eps_grid
        self.min_eigenvalue = min_eigenvalue
        self.symmetry_defect = symmetry_defect
        self.assembly_defect = assembly_defect


class GammaEstimateReport(KineticsResource):
    def __init__(self, ell=None, constant=None, weight_ratio_max=None, n_sampled=None):
        self.ell = ell
        self.constant = constant
        self.weight_ratio_max = weight_ratio_max
        self.n_sampled = n_sampled


class LinearizationReport(KineticsResource):
    def __init__(self, eps_values=None, remainders=None, weak_strong_gap=None, expansion_defect=None):
        self.eps_values = eps_values
        self.remainders = remainders
        self.weak_strong_gap = weak_strong_gap
        self.expansion_defect = expansion_defect
