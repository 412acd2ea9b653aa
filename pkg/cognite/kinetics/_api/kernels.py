import logging
import time
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, sparse

from cognite.kinetics._api.discretization import DiscretizationAPI, product_sphere_rule
from cognite.kinetics._api.kinematics import collision_frame, invariants_arrays, post_collision_arrays
from cognite.kinetics._api_client import APIClient
from cognite.kinetics.data_classes import (
    CollisionChunk,
    CollisionTables,
    GainLoss,
    GammaEstimateReport,
    KernelModel,
    LinearizationReport,
    MomentumGrid,
    NullSpaceReport,
    OperatorMatrices,
    SphereRule,
    WeightSpec,
)
from cognite.kinetics.exceptions import AssemblyAccuracyError, InvalidArgument
from cognite.kinetics.utils import finite_array, log_duration, scatter_add

logger = logging.getLogger(__name__)

TRIPLES_PER_CHUNK = 2 ** 18
DEFAULT_SPHERE_ORDER = 5


def invariant_basis(grid: MomentumGrid) -> np.ndarray:
    """The five collision invariants √J·(1, p₁, p₂, p₃, p⁰) as columns."""
    columns = np.column_stack([np.ones(grid.n_nodes), grid.nodes, grid.energies])
    return grid.sqrt_j[:, None] * columns


def weighted_norm(grid: MomentumGrid, h) -> float:
    return float(np.sqrt(np.sum(grid.quad_weights * np.abs(h) ** 2)))


def assembly_test_functions(grid: MomentumGrid) -> np.ndarray:
    """√J·p⁰² and √J·p₁p₂ as columns; neither lies in the span of the collision invariants."""
    return grid.sqrt_j[:, None] * np.column_stack([grid.energies ** 2, grid.nodes[:, 0] * grid.nodes[:, 1]])


def collision_sphere(model: KernelModel, sphere: SphereRule = None) -> SphereRule:
    """The product rule of the requested order whose weights carry the model's sin^γθ."""
    order = DEFAULT_SPHERE_ORDER if sphere is None else sphere.order
    if order is None:
        return sphere
    return product_sphere_rule(int(order), model.angular_exponent)


def _triples(model: KernelModel, grid: MomentumGrid, sphere: SphereRule, p_points: np.ndarray, radicand_tol: float):
    """Every (p, q, ω) with p from `p_points`, q a grid node and g ≥ g_min.

    The sphere rule is turned per pair so that its third axis is the collision axis û; the polar node is then cos θ
    itself, and no node sits at θ ∈ {0, π}.

    Returns:
        local p index, q index, W = w_q·w_ω·v_φ·σ, χ(g), p' and q' per triple."""
    n, m = grid.n_nodes, sphere.n_nodes
    p_loc = np.repeat(np.arange(len(p_points)), n)
    q_idx = np.tile(np.arange(n), len(p_points))
    g, _, moller, _ = invariants_arrays(p_points[p_loc], grid.nodes[q_idx], radicand_tol)
    keep = g >= model.g_min
    p_loc, q_idx, g, moller = p_loc[keep], q_idx[keep], g[keep], moller[keep]
    frames = collision_frame(p_points[p_loc], grid.nodes[q_idx], radicand_tol)
    omega = np.einsum("ja,kab->kjb", sphere.nodes, frames).reshape(-1, 3)
    n_pairs = len(g)
    cos_theta = np.tile(sphere.nodes[:, 2], n_pairs)
    w_idx = np.tile(np.arange(m), n_pairs)
    p_loc, q_idx, g, moller = (np.repeat(a, m) for a in (p_loc, q_idx, g, moller))
    p_out, q_out, _, _ = post_collision_arrays(p_points[p_loc], grid.nodes[q_idx], omega, radicand_tol)
    sigma = model.radial(g)
    if sphere.angular_exponent != model.angular_exponent:
        sigma = sigma * model.angular(cos_theta)
    weight = grid.quad_weights[q_idx] * sphere.weights[w_idx] * moller * sigma
    return p_loc, q_idx, weight, model.chi(g), p_out, q_out


def _collision_block(model, grid, sphere, block: np.ndarray, radicand_tol: float):
    """Triple table of one block of p-nodes with its share of ν, ν^χ and the leaked frequency."""
    p_loc, q_idx, weight, chi, p_out, q_out = _triples(model, grid, sphere, grid.nodes[block], radicand_tol)
    freq = weight * grid.j_values[q_idx]
    size = len(block)
    nu = scatter_add(p_loc, freq, size)
    nu_chi = scatter_add(p_loc, freq * chi, size)
    inside = grid.contains(p_out) & grid.contains(q_out)
    leaked = scatter_add(p_loc[~inside], freq[~inside], size)
    chunk = CollisionChunk(
        p_idx=block[p_loc[inside]].astype(np.int32),
        q_idx=q_idx[inside].astype(np.int32),
        weight=weight[inside],
        chi=chi[inside],
        p_out=p_out[inside],
        q_out=q_out[inside],
        n_dropped=int(np.count_nonzero(~inside)),
    )
    return chunk, nu, nu_chi, leaked


def _loss_rows(grid: MomentumGrid, chunk: CollisionChunk, block: np.ndarray) -> np.ndarray:
    n = grid.n_nodes
    rows = chunk.p_idx.astype(np.int64) - block[0]
    return np.bincount(rows * n + chunk.q_idx, weights=chunk.weight, minlength=len(block) * n).reshape(len(block), n)


def _weak_form(grid: MomentumGrid, chunk: CollisionChunk) -> Tuple[np.ndarray, np.ndarray]:
    """Σ c_t v_t v_tᵀ and its χ-part over the triples of a chunk.

    v_t = e_p + e_q − s(p') − s(q') in the variables φ = h/√J, with s the conservative stencil, and
    c_t = ¼ w_p W_t J(p) J(q)."""
    n = grid.n_nodes
    if len(chunk) == 0:
        return np.zeros((n, n)), np.zeros((n, n))
    cp, wp, _ = grid.conservative(chunk.p_out)
    cq, wq, _ = grid.conservative(chunk.q_out)
    cols = np.concatenate([chunk.p_idx[:, None], chunk.q_idx[:, None], cp, cq], axis=1)
    vals = np.concatenate([np.ones((len(chunk), 2)), -wp, -wq], axis=1) / grid.sqrt_j[cols]
    rows = np.repeat(np.arange(len(chunk)), cols.shape[1])
    v = sparse.csr_matrix((vals.ravel(), (rows, cols.ravel())), shape=(len(chunk), n))
    j = grid.j_values
    c = 0.25 * grid.quad_weights[chunk.p_idx] * chunk.weight * j[chunk.p_idx] * j[chunk.q_idx]
    form = (v.T @ (sparse.diags(c) @ v)).toarray()
    form_chi = (v.T @ (sparse.diags(c * chunk.chi) @ v)).toarray()
    return form, form_chi


def _interpolate(grid: MomentumGrid, phi: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Trilinear values of each row of `phi` (F, N) at the points, shape (T, F)."""
    corners, weights, _ = grid.trilinear(points)
    out = np.empty((len(points), phi.shape[0]), dtype=phi.dtype)
    for f in range(phi.shape[0]):
        out[:, f] = np.sum(weights * phi[f][corners], axis=1)
    return out


def truncated_convolution(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Convolution along the last axis of two fields on the same symmetric frequency line, terms that land outside
    the line dropped. A line of one frequency gives the plain product."""
    f = x.shape[-1]
    half = (f - 1) // 2
    out = np.zeros(np.broadcast(x, y).shape, dtype=np.result_type(x, y))
    for a in range(f):
        lo, hi = max(0, a - half), min(f, a - half + f)
        out[..., lo:hi] += x[..., a, None] * y[..., lo + half - a : hi + half - a]
    return out


def _gain_chunk(grid, chunk, phi1, phi2, factor) -> np.ndarray:
    """Σ_t W J(q) factor(p) φ₁(p')φ₂(q') per p, convolved along the frequency axis, shape (F, N)."""
    x = _interpolate(grid, phi1, chunk.p_out)
    y = _interpolate(grid, phi2, chunk.q_out)
    product = truncated_convolution(x, y)
    scale = chunk.weight * factor[chunk.p_idx] * grid.j_values[chunk.q_idx]
    return np.stack([scatter_add(chunk.p_idx, scale * product[:, f], grid.n_nodes) for f in range(product.shape[1])])


def _as_tables(operators: Union[CollisionTables, OperatorMatrices]) -> CollisionTables:
    if isinstance(operators, OperatorMatrices):
        return operators.tables
    if isinstance(operators, CollisionTables):
        return operators
    raise InvalidArgument("operators", f"expected OperatorMatrices or CollisionTables, got {type(operators).__name__}")


class KernelOpsAPI(APIClient):
    def sigma_eval(self, model: KernelModel, g: float, cos_theta: float) -> float:
        """Representative cross-section σ(g, θ).

        Args:
            model (KernelModel): Kernel hypothesis.
            g (float): Relative momentum.
            cos_theta (float): Cosine of the scattering angle.

        Returns:
            float: σ(g, θ).

        Examples:

            >>> from cognite.kinetics import KineticsClient
            >>> from cognite.kinetics.data_classes import KernelModel
            >>> c = KineticsClient()
            >>> c.kernels.sigma_eval(KernelModel(kind="soft", b_exponent=1.0), 2.0, 0.3)
            0.5
        """
        if not np.isfinite(g) or g < 0:
            raise InvalidArgument("g", f"must be finite and non-negative, got {g}")
        if not np.isfinite(cos_theta) or abs(cos_theta) > 1:
            raise InvalidArgument("cos_theta", f"must lie in [-1, 1], got {cos_theta}")
        if g == 0 and model.b_exponent > 0:
            raise InvalidArgument("g", "the kernel is singular at g = 0 for b > 0, cut off below g_min")
        return float(model.sigma(g, cos_theta))

    def collision_frequencies(
        self, model: KernelModel, grid: MomentumGrid, points, sphere: SphereRule = None, split: str = "full"
    ) -> np.ndarray:
        """ν at arbitrary momenta by quadrature over the grid nodes q and the sphere rule.

        Args:
            model (KernelModel): Kernel hypothesis.
            grid (MomentumGrid): Grid providing the q-quadrature and J.
            points (np.ndarray): Momenta, shape (K, 3).
            sphere (SphereRule): Rule on S², order 5 by default; rebuilt at its order for the model's sin^γθ.
            split (str): "full" for ν, "chi" for the χ-part.

        Returns:
            np.ndarray: ν at each point.
        """
        points = np.atleast_2d(finite_array(points, "points"))
        sphere = collision_sphere(model, sphere)
        per_block = max(1, TRIPLES_PER_CHUNK // (grid.n_nodes * sphere.n_nodes))
        tol = self._tolerances["radicand"]

        def frequency_block(start):
            block = points[start : start + per_block]
            p_loc, q_idx, weight, chi, _, _ = _triples(model, grid, sphere, block, tol)
            freq = weight * grid.j_values[q_idx]
            if split == "chi":
                freq = freq * chi
            return scatter_add(p_loc, freq, len(block))

        if split not in ("full", "chi"):
            raise InvalidArgument("split", f"must be 'full' or 'chi', got {split!r}")
        return np.concatenate(self._map(frequency_block, range(0, len(points), per_block)))

    def collision_frequency(self, model: KernelModel, grid: MomentumGrid, p, sphere: SphereRule = None) -> float:
        """ν(p) = ∫dq ∫dω v_φ σ(g, θ) J(q), nodes with g < g_min skipped.

        Args:
            model (KernelModel): Kernel hypothesis.
            grid (MomentumGrid): Grid providing the q-quadrature and J.
            p (np.ndarray): Momentum within the grid hull.
            sphere (SphereRule): Rule on S², order 5 by default; rebuilt at its order for the model's sin^γθ.

        Returns:
            float: ν(p) > 0.
        """
        p = finite_array(p, "p").reshape(1, 3)
        if not grid.contains(p)[0]:
            raise InvalidArgument("p", f"{p[0]} lies outside the grid hull")
        return float(self.collision_frequencies(model, grid, p, sphere)[0])

    @log_duration
    def collision_tables(
        self, model: KernelModel, grid: MomentumGrid, sphere: SphereRule = None
    ) -> CollisionTables:
        """ν, the loss matrix and the triple tables, without assembling the linear operator."""
        return self._build_tables(model, grid, collision_sphere(model, sphere), with_weak_form=False)[0]

    @log_duration
    def assemble_operator_matrices(
        self, model: KernelModel, grid: MomentumGrid, sphere_rule: SphereRule = None
    ) -> OperatorMatrices:
        """Assemble ν, L, the χ-split and the collision tables over a grid.

        L is assembled from its symmetric weak form ⟨Lh, g⟩ = ¼∫∫∫ v_φ σ J J Δφ_h Δφ_g with φ = h/√J, the
        post-collision values taken with the stencil that reproduces the collision invariants. The quadrature weights
        make L self-adjoint for ⟨h, g⟩ = Σ w h g; the roundoff asymmetry of the weighted form is measured, removed
        and reported. The weak form is then checked against the strong-form linearization −Γ(√J, h) − Γ(h, √J),
        which interpolates trilinearly, on the test functions of `assembly_test_functions`. The result is
        identical for any thread count.

        Args:
            model (KernelModel): Kernel hypothesis.
            grid (MomentumGrid): Momentum grid.
            sphere_rule (SphereRule): Rule on S², order 5 by default.

        Returns:
            OperatorMatrices: The assembled operators.

        Raises:
            AssemblyAccuracyError: If the symmetrization defect exceeds the `symmetry_defect` tolerance, or the
                weak/strong gap exceeds the `assembly_defect` tolerance.
        """
        start = time.perf_counter()
        sphere = collision_sphere(model, sphere_rule)
        tables, form, form_chi = self._build_tables(model, grid, sphere, with_weak_form=True)
        defect = float(np.linalg.norm(form - form.T) / max(np.linalg.norm(form), np.finfo(float).tiny))
        diagnostics = {
            **tables.diagnostics,
            "symmetry_defect": defect,
            "sphere_order": sphere.order,
            "tail": DiscretizationAPI(self._config, self._kinetics_client).tail_bound(grid),
        }
        budgets = self._tolerances
        if defect > budgets["symmetry_defect"]:
            raise AssemblyAccuracyError("symmetrization defect", defect, budgets["symmetry_defect"], diagnostics)
        form = 0.5 * (form + form.T)
        form_chi = 0.5 * (form_chi + form_chi.T)
        w = grid.quad_weights[:, None]
        gap = self._weak_strong_gap(tables, form / w)
        diagnostics["assembly_defect"] = gap
        if gap > budgets["assembly_defect"]:
            raise AssemblyAccuracyError("weak/strong assembly gap", gap, budgets["assembly_defect"], diagnostics)
        diagnostics["seconds"] = time.perf_counter() - start
        return OperatorMatrices(
            tables=tables, L_matrix=form / w, L_chi=form_chi / w, weighted_form=form, diagnostics=diagnostics
        )

    def _weak_strong_gap(self, tables: CollisionTables, l_matrix: np.ndarray) -> float:
        """max ‖Lh − L_s h‖ / max(‖Lh‖, ‖L_s h‖) over the assembly test functions, L_s h = −Γ(√J, h) − Γ(h, √J).

        The value lies in [0, 2]; 1 or more means the two forms disagree in sign or by an order of magnitude."""
        grid = tables.grid
        gaps = []
        for h in assembly_test_functions(grid).T:
            weak = l_matrix @ h
            strong = -self.apply_Gamma(tables, grid.sqrt_j, h) - self.apply_Gamma(tables, h, grid.sqrt_j)
            scale = max(weighted_norm(grid, weak), weighted_norm(grid, strong))
            gaps.append(weighted_norm(grid, weak - strong) / scale if scale > 0 else 0.0)
        return float(max(gaps))

    def _build_tables(self, model: KernelModel, grid: MomentumGrid, sphere: SphereRule, with_weak_form: bool):
        model.validate()
        n = grid.n_nodes
        tol = self._tolerances["radicand"]
        per_block = max(1, TRIPLES_PER_CHUNK // (n * sphere.n_nodes))
        blocks = [np.arange(s, min(s + per_block, n)) for s in range(0, n, per_block)]

        def process(block):
            chunk, nu, nu_chi, leaked = _collision_block(model, grid, sphere, block, tol)
            forms = _weak_form(grid, chunk) if with_weak_form else None
            return chunk, nu, nu_chi, leaked, _loss_rows(grid, chunk, block), forms

        nu, nu_chi, leaked = np.zeros(n), np.zeros(n), np.zeros(n)
        loss = np.zeros((n, n))
        form = np.zeros((n, n)) if with_weak_form else None
        form_chi = np.zeros((n, n)) if with_weak_form else None
        chunks: List[CollisionChunk] = []
        cache_bytes, n_triples, n_dropped = 0, 0, 0
        batch = self._config.max_workers
        for first in range(0, len(blocks), batch):
            group = blocks[first : first + batch]
            for block, (chunk, b_nu, b_nu_chi, b_leaked, b_loss, forms) in zip(group, self._map(process, group)):
                nu[block], nu_chi[block], leaked[block], loss[block] = b_nu, b_nu_chi, b_leaked, b_loss
                if forms is not None:
                    form += forms[0]
                    form_chi += forms[1]
                n_triples += len(chunk)
                n_dropped += chunk.n_dropped
                if chunks is not None:
                    cache_bytes += chunk.nbytes
                    if cache_bytes <= self._config.table_cache_bytes:
                        chunks.append(chunk)
                    else:
                        chunks = None
            logger.debug("Processed %d/%d p-blocks, %d triples kept", first + len(group), len(blocks), n_triples)

        leakage = np.divide(leaked, nu, out=np.zeros(n), where=nu > 0)
        mass = grid.quad_weights * grid.j_values
        weighted_leakage = float(np.sum(mass * leaked) / np.sum(mass * nu))
        if weighted_leakage > self._tolerances["leakage_warning"]:
            logger.warning(
                "Post-collision leakage %.3e exceeds %.1e; enlarge p_max",
                weighted_leakage,
                self._tolerances["leakage_warning"],
            )
        if chunks is None:
            logger.debug("Collision tables exceed %d bytes, regenerating them on use", self._config.table_cache_bytes)
        diagnostics = {
            "n_triples": n_triples,
            "n_dropped": n_dropped,
            "leakage_max": float(np.max(leakage)),
            "leakage_weighted": weighted_leakage,
            "tol_grid": grid.tol_grid,
            "table_bytes": cache_bytes if chunks is not None else None,
        }
        tables = CollisionTables(
            nu=nu,
            nu_chi=nu_chi,
            loss_matrix=loss,
            leakage=leakage,
            n_triples=n_triples,
            n_dropped=n_dropped,
            diagnostics=diagnostics,
            model=model,
            grid=grid,
            sphere=sphere,
            chunks=chunks,
            chunk_loaders=None
            if chunks is not None
            else [lambda block=block: _collision_block(model, grid, sphere, block, tol)[0] for block in blocks],
        )
        return tables, form, form_chi

    def _reduce_chunks(self, tables: CollisionTables, fn: Callable[[CollisionChunk], np.ndarray], out: np.ndarray):
        """Sum `fn` over all triple tables, in table order."""
        loaders = tables.loaders()
        batch = self._config.max_workers
        for first in range(0, len(loaders), batch):
            for part in self._map(lambda load: fn(load()), loaders[first : first + batch]):
                out += part
        return out

    def _nodal(self, matrices_or_tables, h, name="h") -> np.ndarray:
        h = np.asarray(h)
        n = _as_tables(matrices_or_tables).grid.n_nodes
        if h.shape != (n,):
            raise InvalidArgument(name, f"expected {n} nodal values, got shape {h.shape}")
        if not np.all(np.isfinite(h)):
            raise InvalidArgument(name, "contains non-finite values")
        return h

    def apply_K(self, matrices: OperatorMatrices, h, split: str = "full") -> np.ndarray:
        """K h with K = ν − L, or its χ / (1−χ) part.

        Args:
            matrices (OperatorMatrices): Assembled operators.
            h (np.ndarray): Nodal values, real or complex.
            split (str): "full", "chi" or "one_minus_chi".

        Returns:
            np.ndarray: K h at every node.
        """
        return matrices.K(split) @ self._nodal(matrices, h)

    def apply_L(self, matrices: OperatorMatrices, h) -> np.ndarray:
        return matrices.L_matrix @ self._nodal(matrices, h)

    def apply_gain_loss(self, operators: Union[CollisionTables, OperatorMatrices], F, G) -> GainLoss:
        """Gain and loss parts of Q(F, G).

        Q₊(F, G)(p) = ∫∫ v_φ σ F(p')G(q'), with F/J and G/J interpolated trilinearly at the post-collision momenta,
        and Q₋(F, G) = F·R(G) with R(G) = ∫∫ v_φ σ G(q). Both run over the same kept triples, so Q(J, J) = 0 up to
        roundoff and non-negative F, G give non-negative Q₊ and R(G).

        Args:
            operators (Union[CollisionTables, OperatorMatrices]): Collision tables of a (model, grid).
            F (np.ndarray): Nodal values.
            G (np.ndarray): Nodal values.

        Returns:
            GainLoss: Q₊, Q₋ and R(G).
        """
        tables = _as_tables(operators)
        grid = tables.grid
        F, G = self._nodal(tables, F, "F"), self._nodal(tables, G, "G")
        phi_f, phi_g = (F / grid.j_values)[None, :], (G / grid.j_values)[None, :]
        out = np.zeros((1, grid.n_nodes), dtype=np.result_type(F, G, float))
        gain = self._reduce_chunks(tables, lambda c: _gain_chunk(grid, c, phi_f, phi_g, grid.j_values), out)[0]
        r_of_g = tables.loss_matrix @ G
        return GainLoss(q_plus=gain, q_minus=F * r_of_g, r_of_g=r_of_g)

    def gamma_gain_loss(self, operators, h1, h2) -> Tuple[np.ndarray, np.ndarray]:
        """Γ₊(h₁, h₂) and Γ₋(h₁, h₂) = h₁·∫∫ v_φ σ √J(q) h₂(q), with Γ = Γ₊ − Γ₋ = J^{-1/2} Q(√J h₁, √J h₂)."""
        tables = _as_tables(operators)
        h1, h2 = self._nodal(tables, h1, "h1"), self._nodal(tables, h2, "h2")
        gain, loss = self.gamma_convolution(tables, h1[None, :], h2[None, :], split=True)
        return gain[0], loss[0]

    def apply_Gamma(self, operators, h1, h2) -> np.ndarray:
        """Γ(h₁, h₂) = ∫∫ v_φ σ √J(q) [h₁(p')h₂(q') − h₁(p)h₂(q)] at every node.

        Examples:

            Γ(√J, √J) vanishes up to roundoff:

                >>> gamma = c.kernels.apply_Gamma(matrices, grid.sqrt_j, grid.sqrt_j)
        """
        gain, loss = self.gamma_gain_loss(operators, h1, h2)
        return gain - loss

    def gamma_convolution(self, operators, h1, h2, split: bool = False):
        """Γ summed over all pairs of frequencies of a symmetric line that add up to each line frequency.

        Args:
            operators (Union[CollisionTables, OperatorMatrices]): Collision tables.
            h1 (np.ndarray): Field on the line, shape (F, N) with F odd, row j at frequency (j - (F-1)/2)·Δk.
            h2 (np.ndarray): Field on the line, same shape.
            split (bool): Return (Γ₊, Γ₋) instead of Γ.

        Returns:
            np.ndarray: Σ_{k'} Γ(h₁(k'), h₂(k - k')) per line frequency k, shape (F, N).
        """
        tables = _as_tables(operators)
        grid = tables.grid
        h1, h2 = np.atleast_2d(h1), np.atleast_2d(h2)
        if h1.shape != h2.shape or h1.shape[1] != grid.n_nodes or h1.shape[0] % 2 == 0:
            raise InvalidArgument(
                "h1", f"expected matching (odd, {grid.n_nodes}) line fields, got {h1.shape} and {h2.shape}"
            )
        sqrt_j = grid.sqrt_j
        phi1, phi2 = h1 / sqrt_j, h2 / sqrt_j
        out = np.zeros(h1.shape, dtype=np.result_type(h1, h2, float))
        gain = self._reduce_chunks(tables, lambda c: _gain_chunk(grid, c, phi1, phi2, sqrt_j), out)
        partner = (tables.loss_matrix @ (sqrt_j[:, None] * h2.T)).T
        loss = truncated_convolution(h1.T, partner.T).T
        if split:
            return gain, loss
        return gain - loss

    def coercivity_constant(self, matrices: OperatorMatrices) -> float:
        """δ₀ = min over h ⊥ N of ⟨Lh, h⟩/⟨νh, h⟩, from the generalized symmetric eigenproblem on N^⊥."""
        grid = matrices.grid
        w = grid.quad_weights
        complement = linalg.null_space((w[:, None] * invariant_basis(grid)).T)
        a = complement.T @ matrices.weighted_form @ complement
        b = complement.T @ ((w * matrices.nu_diag)[:, None] * complement)
        delta = linalg.eigh(0.5 * (a + a.T), 0.5 * (b + b.T), eigvals_only=True, subset_by_index=[0, 0])
        return float(delta[0])

    def null_space_report(self, matrices: OperatorMatrices) -> NullSpaceReport:
        """Relative residuals ‖Lχᵢ‖/‖νχᵢ‖ of the five invariants and the bottom of the spectrum of L."""
        grid = matrices.grid
        basis = invariant_basis(grid)
        residuals = [
            weighted_norm(grid, matrices.L_matrix @ chi) / weighted_norm(grid, matrices.nu_diag * chi)
            for chi in basis.T
        ]
        eigenvalues = linalg.eigvalsh(matrices.symmetric_form)
        eps_grid = self._tolerances["eps_grid"]
        n_below = int(np.count_nonzero(eigenvalues < eps_grid))
        if n_below != 5:
            logger.warning("L has %d eigenvalues below %.1e, expected 5", n_below, eps_grid)
        return NullSpaceReport(
            relative_residuals=residuals,
            smallest_eigenvalues=eigenvalues[:5],
            sixth_eigenvalue=float(eigenvalues[5]),
            n_below=n_below,
            eps_grid=eps_grid,
            min_eigenvalue=float(eigenvalues[0]),
            symmetry_defect=matrices.diagnostics.get("symmetry_defect"),
            assembly_defect=matrices.diagnostics.get("assembly_defect"),
        )

    def gamma_weight_estimate(self, matrices: OperatorMatrices, h1, h2, ell: float) -> GammaEstimateReport:
        """Empirical constants of the pointwise nonlinear estimates.

        `constant` is sup_p w_ℓ|Γ(h₁, h₂)|/ν divided by ‖w_ℓh₁‖_sup‖w_ℓh₂‖_sup; `weight_ratio_max` is the largest
        w_ℓ(p)/(w_ℓ(p')w_ℓ(q')) over the kept collision triples."""
        grid, model = matrices.grid, matrices.model
        spec = WeightSpec(ell=ell, b_exponent=model.b_exponent)
        w_ell = spec.momentum_weight(grid.energies)
        gamma = self.apply_Gamma(matrices, h1, h2)
        scale = np.max(np.abs(w_ell * h1)) * np.max(np.abs(w_ell * h2))
        constant = float(np.max(w_ell * np.abs(gamma) / matrices.nu_diag) / scale) if scale > 0 else 0.0

        def ratio(chunk):
            out_p = spec.momentum_weight(np.sqrt(1.0 + np.sum(chunk.p_out ** 2, axis=1)))
            out_q = spec.momentum_weight(np.sqrt(1.0 + np.sum(chunk.q_out ** 2, axis=1)))
            return np.max(w_ell[chunk.p_idx] / (out_p * out_q), initial=0.0)

        ratios = [ratio(chunk) for chunk in matrices.tables.collision_chunks()]
        return GammaEstimateReport(
            ell=ell,
            constant=constant,
            weight_ratio_max=float(max(ratios, default=0.0)),
            n_sampled=matrices.tables.n_triples,
        )

    def linearization_check(
        self, matrices: OperatorMatrices, h, eps_values: Sequence[float] = (1e-2, 3e-3, 1e-3)
    ) -> LinearizationReport:
        """Compare J^{-1/2}Q(J + ε√J h, J + ε√J h) with −εLh + ε²Γ(h, h).

        The difference is ε(L − L_s)h, where L_s h = −Γ(√J, h) − Γ(h, √J) is the strong-form linearization of the
        discrete Q; `weak_strong_gap` is its size relative to Lh, and `expansion_defect` is what is left after
        removing it, relative to ε²Γ(h, h)."""
        grid = matrices.grid
        h = self._nodal(matrices, h)
        sqrt_j = grid.sqrt_j
        lh = matrices.L_matrix @ h
        gap = lh + self.apply_Gamma(matrices, sqrt_j, h) + self.apply_Gamma(matrices, h, sqrt_j)
        gamma_hh = self.apply_Gamma(matrices, h, h)
        remainders, defects = [], []
        for eps in eps_values:
            F = grid.j_values + eps * sqrt_j * h
            lhs = self.apply_gain_loss(matrices, F, F).q / sqrt_j
            remainder = lhs - (-eps * lh + eps ** 2 * gamma_hh)
            remainders.append(weighted_norm(grid, remainder))
            defects.append(weighted_norm(grid, remainder - eps * gap) / (eps ** 2 * weighted_norm(grid, gamma_hh)))
        return LinearizationReport(
            eps_values=list(eps_values),
            remainders=remainders,
            weak_strong_gap=weighted_norm(grid, gap) / weighted_norm(grid, lh),
            expansion_defect=float(max(defects)),
        )
