import logging
from typing import Dict, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg

from cognite.kinetics._api.energetics import (
    ModeEnergetics,
    component_weights,
    free_energy_components,
    mode_generator,
    propagate_eig,
    relative_margin,
    spectral_bound,
)
from cognite.kinetics._api.kernels import KernelOpsAPI, weighted_norm
from cognite.kinetics._api.lyapunov import LyapunovAPI
from cognite.kinetics._api.moments import micro_part
from cognite.kinetics._api_client import APIClient
from cognite.kinetics.data_classes import (
    InterpolationReport,
    LyapunovConstants,
    ModeState,
    ModeTrajectory,
    ModeTrajectoryList,
    MomentumGrid,
    MuConstants,
    NormSeries,
    OperatorMatrices,
    RateSpec,
    WeightedInequalityReport,
    WeightSpec,
)
from cognite.kinetics.exceptions import InvalidArgument, ResolutionError, StepSizeError
from cognite.kinetics.utils import finite_array, log_duration

logger = logging.getLogger(__name__)

EVOLVE_METHODS = ("rk4", "eig", "expm")
LOW_FREQUENCY_MARGIN = 0.05


def low_frequency_amplitude(freq_norms, r: float, margin: float = LOW_FREQUENCY_MARGIN) -> np.ndarray:
    """|f̂₀(k)| ∝ |k|^{max(6/r − 6, −3 + 2 margin)/2} on |k| ≤ 1 and zero outside.

    The exponent makes ∫|f̂₀|^{r'}dk finite exactly as for data in L^r_x, r' the dual exponent; r = 1 gives flat
    data, r = 2 the borderline square-integrable profile."""
    freq_norms = np.asarray(freq_norms, dtype=float)
    exponent = max(6.0 / r - 6.0, -3.0 + 2.0 * margin)
    with np.errstate(divide="ignore"):
        amplitude = np.power(freq_norms, 0.5 * exponent)
    return np.where(freq_norms <= 1.0, amplitude, 0.0)


def initial_profile(grid: MomentumGrid, mu: MuConstants, kind: str = "generic") -> np.ndarray:
    """Unit-norm momentum profile of the mode data.

    "generic" has a macroscopic part in every invariant direction, "micro" is its (I-P) part, "equilibrium" is √J.
    """
    p, p0, sqrt_j = grid.nodes, grid.energies, grid.sqrt_j
    if kind == "equilibrium":
        h = sqrt_j.copy()
    else:
        h = sqrt_j * (1.0 + 0.5 * p[:, 0] + 0.3 * p[:, 1] - 0.2 * p[:, 2] + 0.25 * p0 + 0.1 * p[:, 0] * p[:, 1])
        h = h + 0.2 * sqrt_j * np.sin(p[:, 0]) * np.exp(-0.1 * p0)
        if kind == "micro":
            h = micro_part(grid, mu, h[None, :])[0]
        elif kind != "generic":
            raise InvalidArgument("kind", f"must be generic, micro or equilibrium, got {kind!r}")
    return h / weighted_norm(grid, h)


class ModeDynamicsAPI(APIClient):
    def __init__(self, config, kinetics_client=None):
        super().__init__(config, kinetics_client)
        self.lyapunov = LyapunovAPI(config, kinetics_client)

    def assemble_mode_generator(self, matrices: OperatorMatrices, freq) -> np.ndarray:
        """The generator −(i diag(p̂·k) + L) of the mode equation ∂_t f̂ + i p̂·k f̂ + L f̂ = 0.

        Args:
            matrices (OperatorMatrices): Assembled operators.
            freq (Union[float, np.ndarray]): Frequency k, or |k| for k along e₁.

        Returns:
            np.ndarray: Complex matrix acting on nodal values.
        """
        return mode_generator(matrices, freq)

    def evolve_mode(
        self,
        matrices: OperatorMatrices,
        state: ModeState,
        t_final: float,
        dt: float,
        method: str = "rk4",
        snapshot_every: int = 1,
    ) -> ModeTrajectory:
        """Propagate one mode with the semigroup U(t) = e^{tG}.

        Args:
            matrices (OperatorMatrices): Assembled operators.
            state (ModeState): Initial mode, its `t` is the start time.
            t_final (float): End time.
            dt (float): Step. rk4 integrates with it; eig and expm evaluate the propagator exactly at every step.
            method (str): "rk4", "eig" or "expm".
            snapshot_every (int): Store every n-th step; the final step is always stored.

        Returns:
            ModeTrajectory: Snapshots at the stored steps.

        Raises:
            StepSizeError: If dt times the spectral bound exceeds the `step_size` budget for rk4, or the quadrature
                norm grows between two snapshots beyond the `norm_growth` budget.
        """
        if method not in EVOLVE_METHODS:
            raise InvalidArgument("method", f"must be one of {EVOLVE_METHODS}, got {method!r}")
        if not (dt > 0 and t_final > state.t):
            raise InvalidArgument("dt", f"need dt > 0 and t_final > t, got dt={dt}, t_final={t_final}, t={state.t}")
        if state.values is None or state.values.shape != (matrices.n_nodes,):
            raise InvalidArgument("state", f"expected {matrices.n_nodes} nodal values")
        n_steps = int(round((t_final - state.t) / dt))
        steps = np.unique(np.append(np.arange(0, n_steps + 1, max(1, int(snapshot_every))), n_steps))
        times = state.t + dt * steps
        generator = mode_generator(matrices, state.freq)
        if method == "rk4":
            bound = dt * spectral_bound(matrices, state.freq)
            if bound > self._tolerances["step_size"]:
                raise StepSizeError("rk4 step", bound, self._tolerances["step_size"], {"dt": dt})
            values = self._rk4(generator, state.values, dt, steps)
        elif method == "eig":
            values = self._eig(matrices, state.freq, state.values, times - state.t)
        else:
            values = self._expm(generator, state.values, dt, steps)
        trajectory = ModeTrajectory(freq=state.freq, times=times, values=values, method=method)
        self._check_dissipation(matrices.grid, trajectory)
        return trajectory

    @staticmethod
    def _rk4(generator, f0, dt, steps) -> np.ndarray:
        out = np.empty((len(steps), len(f0)), dtype=complex)
        f = f0.astype(complex)
        keep = 0
        for step in range(steps[-1] + 1):
            if step == steps[keep]:
                out[keep] = f
                keep += 1
                if keep == len(steps):
                    break
            k1 = generator @ f
            k2 = generator @ (f + 0.5 * dt * k1)
            k3 = generator @ (f + 0.5 * dt * k2)
            k4 = generator @ (f + dt * k3)
            f = f + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return out

    @staticmethod
    def _eig(matrices, freq, f0, elapsed) -> np.ndarray:
        return propagate_eig(matrices, freq, f0, elapsed)[0]

    @staticmethod
    def _expm(generator, f0, dt, steps) -> np.ndarray:
        out = np.empty((len(steps), len(f0)), dtype=complex)
        out[0] = f0
        propagators = {}
        for i in range(1, len(steps)):
            gap = int(steps[i] - steps[i - 1])
            if gap not in propagators:
                propagators[gap] = linalg.expm(dt * gap * generator)
            out[i] = propagators[gap] @ out[i - 1]
        return out

    def _check_dissipation(self, grid: MomentumGrid, trajectory: ModeTrajectory):
        norms = np.sqrt(np.sum(grid.quad_weights * np.abs(trajectory.values) ** 2, axis=1))
        if norms[0] == 0:
            return
        growth = float(np.max(np.diff(norms), initial=0.0) / norms[0])
        if growth > self._tolerances["norm_growth"]:
            raise StepSizeError(
                "norm growth",
                growth,
                self._tolerances["norm_growth"],
                {"method": trajectory.method, "dt": trajectory.dt},
            )

    def free_energy(self, grid: MomentumGrid, mu: MuConstants, state: ModeState, constants: LyapunovConstants):
        """The free energy functional of the macroscopic coefficients and the high order moments.

        E_free = κ₁Σ_m(Σ_j ik_jΘ_{jm} | −b_m)/(1+|k|²) + κ₁Σ_m(β ik_mΘ_{mm} | −b_m)/(1+|k|²)
        + κ₁Σ_m((β+1)/3 ik_m A | −b_m)/(1+|k|²) + κ₁Σ_j(Λ_j | ik_j a)/(1+|k|²) + Σ_m(b_m | ik_m(μ¹¹₀a + μ¹¹c))/(1+|k|²),
        with Θ, Λ and A evaluated on (I-P)f̂ and (u | v) = u·conj(v).

        Args:
            grid (MomentumGrid): Grid.
            mu (MuConstants): Moments of the grid.
            state (ModeState): Mode.
            constants (LyapunovConstants): Supplies κ₁.

        Returns:
            complex: E_free; its real part enters the Lyapunov functional.
        """
        x, y = free_energy_components(grid, mu, state.freq, state.values[None, :])
        return complex(np.sum(component_weights(constants.kappa1) * x[0] * np.conj(y[0])))

    def lyapunov_energy(
        self,
        grid: MomentumGrid,
        mu: MuConstants,
        state: ModeState,
        ell: float,
        constants: LyapunovConstants,
        b_exponent: float = 1.0,
    ) -> Tuple[float, float]:
        """E = ‖f̂‖² + κ₃Re E_free and E_ℓ = E + κ₄‖w_ℓ(I-P)f̂‖² for |k| ≤ 1, E + κ₅‖w_ℓf̂‖² for |k| > 1.

        Returns:
            Tuple[float, float]: (E, E_ℓ).
        """
        values = state.values
        w2 = WeightSpec(ell=ell, b_exponent=b_exponent).momentum_weight(grid.energies) ** 2
        energy = weighted_norm(grid, values) ** 2 + constants.kappa3 * self.free_energy(grid, mu, state, constants).real
        if state.freq_norm <= 1.0:
            micro = micro_part(grid, mu, values[None, :])[0]
            extra = constants.kappa4 * float(np.sum(grid.quad_weights * w2 * np.abs(micro) ** 2))
        else:
            extra = constants.kappa5 * float(np.sum(grid.quad_weights * w2 * np.abs(values) ** 2))
        return energy, energy + extra

    def energetics(self, matrices: OperatorMatrices, mu: MuConstants, freq, ell: float = 0.0, radius: float = None):
        return ModeEnergetics(matrices, mu, freq, ell=ell, radius=radius)

    def lyapunov_series(
        self, matrices: OperatorMatrices, mu: MuConstants, trajectory: ModeTrajectory, constants: LyapunovConstants
    ) -> Dict[str, np.ndarray]:
        """Per-snapshot norm², E, E_ℓ, the dissipation λ(1∧|k|²)‖ν^{1/2}w_ℓf̂‖² and the relative margin of
        ∂_tE_ℓ + λ(1∧|k|²)‖ν^{1/2}w_ℓf̂‖² ≤ 0 along one trajectory."""
        energetics = ModeEnergetics(matrices, mu, trajectory.freq, ell=constants.ell)
        terms = energetics.terms(trajectory.values)
        lyap = energetics.lyapunov(terms, constants)
        dissipation = constants.lambda_rate * energetics.rho * terms["weighted_dissipation"]
        floor = energetics.roundoff_floor(terms["norm2"], self._tolerances["psd"])
        margin = relative_margin(lyap["dE_ell"] + dissipation, np.abs(lyap["dE_ell"]) + dissipation, floor)
        return {
            "t": np.asarray(trajectory.times, dtype=float),
            "freq_norm": np.full(trajectory.n_snapshots, trajectory.freq_norm),
            "norm2": terms["norm2"],
            "E": lyap["E"],
            "E_ell": lyap["E_ell"],
            "dissipation": dissipation,
            "margin": margin,
        }

    def initial_profile(self, grid: MomentumGrid, mu: MuConstants, kind: str = "generic") -> np.ndarray:
        return initial_profile(grid, mu, kind)

    @log_duration
    def mode_sweep(
        self,
        matrices: OperatorMatrices,
        freq_norms: Sequence[float],
        t_final: float,
        dt: float,
        r: float = 1.0,
        profile: str = "generic",
        method: str = "eig",
        snapshot_every: int = 1,
    ) -> ModeTrajectoryList:
        """Evolve the data f̂₀(k, p) = A_r(|k|) h₀(p) for every |k| sample, k along e₁, one mode per worker.

        Args:
            matrices (OperatorMatrices): Assembled operators.
            freq_norms (Sequence[float]): Increasing |k| samples.
            t_final (float): Horizon.
            dt (float): Step of the propagation.
            r (float): Integrability class of the data, 1 ≤ r ≤ 2; A_r is `low_frequency_amplitude`.
            profile (str): Momentum profile h₀, see `initial_profile`.
            method (str): Propagation method.
            snapshot_every (int): Snapshot cadence in steps.

        Returns:
            ModeTrajectoryList: One trajectory per |k|, in the order of `freq_norms`.
        """
        freq_norms = finite_array(freq_norms, "freq_norms")
        if np.any(np.diff(freq_norms) <= 0) or freq_norms[0] <= 0:
            raise InvalidArgument("freq_norms", "must be positive and strictly increasing")
        grid = matrices.grid
        mu = self._kinetics_client.moments.compute_mu_constants(grid)
        h0 = initial_profile(grid, mu, profile)
        amplitudes = low_frequency_amplitude(freq_norms, r)

        def evolve(i):
            state = ModeState(freq=(freq_norms[i], 0.0, 0.0), values=amplitudes[i] * h0)
            if amplitudes[i] == 0:
                n_steps = int(round(t_final / dt))
                steps = np.unique(np.append(np.arange(0, n_steps + 1, max(1, int(snapshot_every))), n_steps))
                zeros = np.zeros((len(steps), grid.n_nodes), dtype=complex)
                return ModeTrajectory(freq=state.freq, times=dt * steps, values=zeros, method=method)
            return self.evolve_mode(matrices, state, t_final, dt, method=method, snapshot_every=snapshot_every)

        trajectories = self._map(evolve, range(len(freq_norms)))
        logger.debug(
            "Mode sweep over %d frequencies in [%.3g, %.3g] done", len(freq_norms), freq_norms[0], freq_norms[-1]
        )
        return ModeTrajectoryList(trajectories)

    def synthesize_norm(
        self, trajectories: ModeTrajectoryList, rate: RateSpec, ell: float = 0.0, b_exponent: float = 1.0, grid=None
    ) -> NormSeries:
        """Whole-space squared norm ∫|k|^{2m}‖w_ℓf̂(t, k)‖² dk of a rotationally reduced mode sweep.

        Modes along e₁ stand for all directions, so the frequency integral is the radial one with measure
        4π|k|²d|k|, by the trapezoidal rule over the |k| samples. The Ḣ^m variant uses `rate.m`.

        Args:
            trajectories (ModeTrajectoryList): Output of `mode_sweep`, snapshot times shared.
            rate (RateSpec): Supplies m.
            ell (float): Momentum weight order.
            b_exponent (float): Kernel exponent b of the weight w_ℓ = (p⁰)^{ℓb/2}.
            grid (MomentumGrid): Grid of the trajectories.

        Returns:
            NormSeries: Squared norm per snapshot.

        Raises:
            ResolutionError: If |k|²_min·T exceeds the `resolution` budget.
        """
        if grid is None:
            raise InvalidArgument("grid", "the grid of the trajectories is required")
        freq_norms = trajectories.freq_norms
        times = np.asarray(trajectories[0].times, dtype=float)
        horizon = float(times[-1])
        resolution = freq_norms[0] ** 2 * horizon
        if resolution > self._tolerances["resolution"]:
            raise ResolutionError(
                "low-frequency resolution",
                resolution,
                self._tolerances["resolution"],
                {"k_min": float(freq_norms[0]), "horizon": horizon},
            )
        w2 = WeightSpec(ell=ell, b_exponent=b_exponent).momentum_weight(grid.energies) ** 2
        per_mode = np.stack([np.sum(grid.quad_weights * w2 * np.abs(tr.values) ** 2, axis=1) for tr in trajectories])
        radial = 4.0 * np.pi * freq_norms ** 2 * np.power(freq_norms, 2.0 * rate.m)
        norm2 = integrate.trapezoid(radial[:, None] * per_mode, freq_norms, axis=0)
        return NormSeries(times=times, norm2=norm2, rate=rate, ell=ell, initial_norm2=float(norm2[0]))

    def interpolation_decay_check(
        self,
        matrices: OperatorMatrices,
        mu: MuConstants,
        trajectory: ModeTrajectory,
        constants: LyapunovConstants,
        j: float = 2.0,
    ) -> InterpolationReport:
        """Measured constants of E_ℓ ≲ ‖ν^{1/2}w_ℓf̂‖^{2j/(j+1)}E_{ℓ+j}^{1/(j+1)} and of the per-mode bound
        E_ℓ(t) ≲ E_{ℓ+j}(0)(1 + tρ̂/j)^{-j}, ρ̂ = λ(1∧|k|²).

        `plain_holder_constant` is the constant of ‖w_ℓf̂‖² ≤ ‖w_{ℓ-1}f̂‖^{2j/(j+1)}‖w_{ℓ+j}f̂‖^{2/(j+1)}, at most one
        since w_ℓ = w_{ℓ-1}^{j/(j+1)}w_{ℓ+j}^{1/(j+1)} pointwise."""
        if j <= 0:
            raise InvalidArgument("j", f"must be positive, got {j}")
        ell = constants.ell
        base = ModeEnergetics(matrices, mu, trajectory.freq, ell=ell)
        high = ModeEnergetics(matrices, mu, trajectory.freq, ell=ell + j)
        low = ModeEnergetics(matrices, mu, trajectory.freq, ell=ell - 1)
        terms, terms_high = base.terms(trajectory.values), high.terms(trajectory.values)
        high_constants = LyapunovConstants(**{**constants.dump(), "ell": ell + j})
        e_ell = base.lyapunov(terms, constants)["E_ell"]
        e_high = high.lyapunov(terms_high, high_constants)["E_ell"]
        dissipation = terms["weighted_dissipation"]
        tiny = np.finfo(float).tiny
        live = e_ell > tiny * 1e10
        holder = e_ell[live] / (dissipation[live] ** (j / (j + 1)) * e_high[live] ** (1 / (j + 1)))
        plain = terms["wnorm2"] / (
            low.terms(trajectory.values)["wnorm2"] ** (j / (j + 1)) * terms_high["wnorm2"] ** (1 / (j + 1)) + tiny
        )
        rho_hat = constants.lambda_rate * base.rho
        times = np.asarray(trajectory.times, dtype=float) - trajectory.times[0]
        envelope = e_high[0] * (1.0 + times * rho_hat / j) ** (-j)
        return InterpolationReport(
            freq_norm=trajectory.freq_norm,
            j=j,
            ell=ell,
            holder_constant=float(np.max(holder, initial=0.0)),
            bound_constant=float(np.max(e_ell / envelope)),
            rho_hat=rho_hat,
            plain_holder_constant=float(np.max(plain[terms["wnorm2"] > 0], initial=0.0)),
        )

    def weighted_inequality_check(
        self,
        matrices: OperatorMatrices,
        mu: MuConstants,
        trajectory: ModeTrajectory,
        ell: float,
        lambda_: float = None,
        radius: float = None,
    ) -> WeightedInequalityReport:
        """Fit the constant C of the two weighted energy inequalities along one trajectory.

        ½d/dt‖w_ℓ(I-P)f̂‖² + λ‖ν^{1/2}w_ℓ(I-P)f̂‖² ≤ C(|k|²‖ν^{1/2}f̂‖² + ‖1_{≤R}(I-P)f̂‖²) and
        ½d/dt‖w_ℓf̂‖² + λ‖ν^{1/2}w_ℓf̂‖² ≤ C‖1_{≤R}f̂‖².

        Args:
            matrices (OperatorMatrices): Assembled operators.
            mu (MuConstants): Moments of the grid.
            trajectory (ModeTrajectory): Mode solution.
            ell (float): Momentum weight order.
            lambda_ (float): Dissipation rate; half the coercivity constant by default.
            radius (float): R of the low-momentum indicator; p_max/2 by default.

        Returns:
            WeightedInequalityReport: λ, C, R and the worst relative margins with the fitted C.
        """
        if lambda_ is None:
            lambda_ = 0.5 * KernelOpsAPI(self._config, self._kinetics_client).coercivity_constant(matrices)
        energetics = ModeEnergetics(matrices, mu, trajectory.freq, ell=ell, radius=radius)
        values = trajectory.values
        terms = energetics.terms(values)
        w2nu = energetics.w_ell ** 2 * matrices.nu_diag
        micro = micro_part(matrices.grid, mu, values)
        micro_dissipation = np.sum(matrices.grid.quad_weights * w2nu * np.abs(micro) ** 2, axis=1)
        lhs_micro = 0.5 * terms["dwmicro2"] + lambda_ * micro_dissipation
        rhs_micro = energetics.freq_norm ** 2 * terms["full_dissipation"] + terms["inner_micro2"]
        lhs_full = 0.5 * terms["dwnorm2"] + lambda_ * terms["weighted_dissipation"]
        rhs_full = terms["inner_norm2"]
        tiny = np.finfo(float).tiny

        def required(lhs, rhs):
            return float(np.max(np.maximum(lhs, 0.0) / (rhs + tiny), initial=0.0))

        constant = max(required(lhs_micro, rhs_micro), required(lhs_full, rhs_full))

        def margin(lhs, rhs):
            return float(np.min((constant * rhs - lhs) / (np.abs(lhs) + constant * rhs + tiny)))

        return WeightedInequalityReport(
            ell=ell,
            lambda_=lambda_,
            constant=constant,
            radius=energetics.radius,
            micro_margin=margin(lhs_micro, rhs_micro),
            full_margin=margin(lhs_full, rhs_full),
        )
