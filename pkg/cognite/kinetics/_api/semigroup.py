import logging
import math
from typing import Sequence, Tuple

import numpy as np
from scipy import integrate

from cognite.kinetics._api.analysis import calculus_bound
from cognite.kinetics._api.energetics import frequency_vector, propagate_eig
from cognite.kinetics._api.kernels import weighted_norm
from cognite.kinetics._api_client import APIClient
from cognite.kinetics.data_classes import (
    BoundCheckReport,
    ModeState,
    ModeTrajectoryList,
    MomentumGrid,
    OperatorMatrices,
    RateSpec,
    SupNormDecayReport,
    VidavTerms,
    VidavTermsList,
    WeightSpec,
)
from cognite.kinetics.exceptions import ExpansionMismatchError, InvalidArgument, ResolutionError

logger = logging.getLogger(__name__)

SUPNORM_RATE_TOLERANCE = 0.2


def damping_exponent(matrices: OperatorMatrices, freq) -> np.ndarray:
    """ν(p) + i p̂·k, so that Ĝ(t) is multiplication by e^{−t(ν + i p̂·k)}."""
    return matrices.nu_diag + 1j * (matrices.grid.velocities @ frequency_vector(freq))


class SemigroupAPI(APIClient):
    def apply_G(self, matrices: OperatorMatrices, state: ModeState, t: float) -> ModeState:
        """The damped transport Ĝ(t)f̂(p) = e^{−(ν(p) + i p̂·k)t}f̂(p), with K removed. Exact.

        Args:
            matrices (OperatorMatrices): Supplies ν.
            state (ModeState): Mode at time `state.t`.
            t (float): Elapsed time, non-negative.

        Returns:
            ModeState: The damped mode at time state.t + t.
        """
        if t < 0:
            raise InvalidArgument("t", f"must be non-negative, got {t}")
        factor = np.exp(-t * damping_exponent(matrices, state.freq))
        return ModeState(freq=state.freq, values=factor * state.values, t=state.t + t)

    def vidav_terms(self, matrices: OperatorMatrices, f0, freq, t: float, dt: float = 0.05) -> VidavTerms:
        """The twice iterated Duhamel expansion U(t)f̂₀ = H₁ + H₂ + H₃ + H₄ + H₅.

        H₁ = Ĝ(t)f̂₀, H₂ = ∫₀ᵗĜ(t−s)K^{1−χ}U(s)f̂₀ds, H₃ = ∫₀ᵗĜ(t−s)K^χĜ(s)f̂₀ds, and
        H₄, H₅ = ∫₀ᵗĜ(t−s)K^χ∫₀ˢĜ(s−s₁)K'U(s₁)f̂₀ds₁ds with K' = K^{1−χ} and K^χ respectively.

        U is propagated exactly, the inner integrals are marched step by step with a local Simpson rule on half
        steps and the outer integrals use composite Simpson, so the residual is time quadrature error of order dt⁴.

        Args:
            matrices (OperatorMatrices): Assembled operators.
            f0 (np.ndarray): Initial mode values.
            freq (Union[float, np.ndarray]): Frequency, or |k| along e₁.
            t (float): Time.
            dt (float): Quadrature step, rounded down so that an even number of steps covers [0, t].

        Returns:
            VidavTerms: H₁..H₅, the relative five-term residual and the relative one-level Duhamel residual.

        Raises:
            ExpansionMismatchError: If the five-term residual exceeds the `vidav_budget` tolerance.
        """
        grid = matrices.grid
        f0 = np.asarray(f0, dtype=complex)
        if f0.shape != (grid.n_nodes,):
            raise InvalidArgument("f0", f"expected {grid.n_nodes} nodal values, got shape {f0.shape}")
        if not t > 0:
            raise InvalidArgument("t", f"must be positive, got {t}")
        k = frequency_vector(freq)
        n = 2 * max(1, math.ceil(t / (2.0 * dt)))
        h = t / n
        fine = np.linspace(0.0, t, 2 * n + 1)
        coarse = fine[::2]
        exponent = damping_exponent(matrices, k)
        k_chi, k_rest = matrices.K_chi, matrices.K_one_minus_chi
        u_fine = propagate_eig(matrices, k, f0, fine)[0]
        u_t = u_fine[-1]

        def damp(elapsed):
            return np.exp(-np.outer(elapsed, exponent))

        def outer(integrand):
            # ∫₀ᵗ Ĝ(t−s) X(s) ds over the coarse nodes
            return integrate.simpson(damp(t - coarse) * integrand, x=coarse, axis=0)

        def inner(integrand_fine):
            # V(s) = ∫₀ˢ Ĝ(s−σ) X(σ) dσ at the coarse nodes, marched by local Simpson steps
            full, half = np.exp(-h * exponent), np.exp(-0.5 * h * exponent)
            out = np.zeros((n + 1, grid.n_nodes), dtype=complex)
            for i in range(n):
                x0, xm, x1 = integrand_fine[2 * i], integrand_fine[2 * i + 1], integrand_fine[2 * i + 2]
                out[i + 1] = full * out[i] + h / 6.0 * (full * x0 + 4.0 * half * xm + x1)
            return out

        u_coarse = u_fine[::2]
        g_coarse = damp(coarse) * f0
        h1 = np.exp(-t * exponent) * f0
        h2 = outer(u_coarse @ k_rest.T)
        h3 = outer(g_coarse @ k_chi.T)
        h4 = outer(inner(u_fine @ k_rest.T) @ k_chi.T)
        h5 = outer(inner(u_fine @ k_chi.T) @ k_chi.T)
        terms = np.stack([h1, h2, h3, h4, h5])
        scale = weighted_norm(grid, u_t) or 1.0
        residual = weighted_norm(grid, u_t - terms.sum(axis=0)) / scale
        duhamel = weighted_norm(grid, u_t - h1 - outer(u_coarse @ matrices.K_matrix.T)) / scale
        result = VidavTerms(
            freq_norm=float(np.linalg.norm(k)),
            t=float(t),
            terms=terms,
            residual=float(residual),
            budget=self._tolerances["vidav_budget"],
            duhamel_residual=float(duhamel),
        )
        logger.debug("Vidav expansion at |k|=%.3g, t=%.3g: residual %.3e", result.freq_norm, t, residual)
        if residual > result.budget:
            raise ExpansionMismatchError(
                "vidav expansion", residual, result.budget, result.dominant_term, result.summary()
            )
        return result

    def vidav_sample(
        self, matrices: OperatorMatrices, f0, freq_norms: Sequence[float], times: Sequence[float], dt: float = 0.05
    ) -> VidavTermsList:
        """`vidav_terms` on every (|k|, t) pair, in parallel; ordered by |k| then t."""
        points = [(float(k), float(t)) for k in freq_norms for t in times]
        return VidavTermsList(self._map(lambda kt: self.vidav_terms(matrices, f0, kt[0], kt[1], dt=dt), points))

    def _resolution(self, freq_norms: np.ndarray, horizon: float):
        resolution = freq_norms[0] ** 2 * horizon
        if resolution > self._tolerances["resolution"]:
            raise ResolutionError(
                "low-frequency resolution",
                resolution,
                self._tolerances["resolution"],
                {"k_min": float(freq_norms[0]), "horizon": horizon},
            )

    def weighted_supnorm_decay(
        self,
        trajectories: ModeTrajectoryList,
        grid: MomentumGrid,
        rate: RateSpec,
        b_exponent: float = 1.0,
        window: Tuple[float, float] = (10.0, 100.0),
    ) -> SupNormDecayReport:
        """sup_p w_ℓ(p)(∫|f̂(t, k, p)|²dk)^{1/2} per snapshot of a rotationally reduced sweep, and its decay rate.

        The frequency integral is the radial one, 4π|k|²d|k| by the trapezoidal rule, so the series is the
        Parseval surrogate of the L^∞_pL²_x norm. The check passes when the fitted exponent is at least
        `rate.decay_order`·(1 − 0.2).

        Args:
            trajectories (ModeTrajectoryList): Output of `modes.mode_sweep`.
            grid (MomentumGrid): Grid of the trajectories.
            rate (RateSpec): Supplies ℓ and the target decay order.
            b_exponent (float): Kernel exponent b of the weight.
            window (Tuple[float, float]): Fit window.

        Returns:
            SupNormDecayReport: Series, fit and verdict.
        """
        freq_norms = trajectories.freq_norms
        times = np.asarray(trajectories[0].times, dtype=float)
        self._resolution(freq_norms, float(times[-1]))
        weight = WeightSpec(ell=rate.ell, b_exponent=b_exponent).momentum_weight(grid.energies)
        density = np.stack([np.abs(tr.values) ** 2 for tr in trajectories])
        radial = 4.0 * np.pi * freq_norms ** 2
        integrated = integrate.trapezoid(radial[:, None, None] * density, freq_norms, axis=0)
        supnorm = np.max(weight[None, :] * np.sqrt(integrated), axis=1)
        fit = self._kinetics_client.analysis.fit_decay_exponent(times, supnorm, window)
        return SupNormDecayReport(
            times=times,
            supnorm=supnorm,
            ell=rate.ell,
            decay_order=rate.decay_order,
            fit=fit,
            passed=bool(fit.exponent >= rate.decay_order * (1.0 - SUPNORM_RATE_TOLERANCE)),
        )

    def poly_decay_bound_check(
        self, matrices: OperatorMatrices, k_values: Sequence[float], t_values: Sequence[float]
    ) -> BoundCheckReport:
        """e^{−ν(p)t} ≤ C_k w_k(p)(1+t)^{−k} on the grid nodes, with w_k = (p⁰)^{kb/2}.

        C_k is the largest max{1, e^{ν−k}k^kν^{−k}}/w_k(p) over the nodes, the supremum in t given by the calculus
        inequality; `worst_ratio` is the largest sampled left side over the right side."""
        grid, b = matrices.grid, matrices.model.b_exponent
        nu = matrices.nu_diag
        t = np.asarray(t_values, dtype=float)
        worst, constants = 0.0, {}
        for k in k_values:
            weight = WeightSpec(ell=k, b_exponent=b).momentum_weight(grid.energies)
            constant = float(np.max(calculus_bound(nu, k) / weight))
            ratio = np.exp(-np.outer(nu, t)) * (1.0 + t[None, :]) ** k / (constant * weight[:, None])
            worst = max(worst, float(np.max(ratio)))
            constants[float(k)] = constant
        return BoundCheckReport(
            check="poly_decay",
            worst_ratio=worst,
            n_samples=len(nu) * len(t) * len(k_values),
            constant=max(constants.values()),
            passed=bool(worst <= 1.0 + 1e-12),
            details={"constants": constants},
        )

    def h3_decay_check(
        self, terms: VidavTermsList, f0, grid: MomentumGrid, ell: float, k: float, b_exponent: float = 1.0
    ) -> BoundCheckReport:
        """Empirical constant of ‖w_ℓH₃(t)‖ ≤ C(1+t)^{−k}‖w_{k+ℓ}f̂₀‖ over the times in `terms`.

        `worst_ratio` compares the last sampled time with the largest: at most one when the bound with the
        measured constant is sustained to the end of the sample."""
        w_ell = WeightSpec(ell=ell, b_exponent=b_exponent).momentum_weight(grid.energies)
        w_high = WeightSpec(ell=ell + k, b_exponent=b_exponent).momentum_weight(grid.energies)
        data = weighted_norm(grid, w_high * np.asarray(f0))
        ordered = sorted(terms, key=lambda term: term.t)
        values = np.array([weighted_norm(grid, w_ell * term.H3) * (1.0 + term.t) ** k / data for term in ordered])
        peak = float(np.max(values))
        return BoundCheckReport(
            check="h3_decay",
            worst_ratio=float(values[-1] / peak) if peak > 0 else 0.0,
            n_samples=len(values),
            constant=peak,
            passed=bool(np.isfinite(peak)),
            details={"times": [term.t for term in ordered], "scaled_norms": values.tolist()},
        )

    def semigroup_law_check(self, matrices: OperatorMatrices, state: ModeState, t: float, s: float) -> BoundCheckReport:
        """Ĝ(t+s) = Ĝ(t)Ĝ(s) and ‖Ĝ(t)f̂‖ ≤ e^{−ν_min t}‖f̂‖ on one state."""
        grid = matrices.grid
        joint = self.apply_G(matrices, state, t + s).values
        composed = self.apply_G(matrices, self.apply_G(matrices, state, s), t).values
        scale = float(np.max(np.abs(state.values))) or 1.0
        defect = float(np.max(np.abs(joint - composed))) / scale
        nu_min = float(np.min(matrices.nu_diag))
        initial = weighted_norm(grid, state.values)
        damped = weighted_norm(grid, self.apply_G(matrices, state, t).values)
        ratio = damped / (math.exp(-nu_min * t) * initial) if initial > 0 else 0.0
        return BoundCheckReport(
            check="semigroup_law",
            worst_ratio=ratio,
            n_samples=grid.n_nodes,
            constant=nu_min,
            passed=bool(defect <= 1e-13 and ratio <= 1.0 + 1e-12),
            details={"law_defect": defect},
        )
