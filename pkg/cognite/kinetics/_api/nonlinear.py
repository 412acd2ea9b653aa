import logging
from typing import List, Tuple, Union

import numpy as np
from scipy import linalg, optimize, special

from cognite.kinetics._api.energetics import mode_generator
from cognite.kinetics._api_client import APIClient
from cognite.kinetics.data_classes import (
    CollisionTables,
    ConsistencyReport,
    HomogeneousState,
    MomentumGrid,
    MuConstants,
    OperatorMatrices,
    PicardReport,
    PicardResult,
    PositivityTrajectory,
    PositivityTrajectoryList,
    RelaxationSeries,
    SlabField,
    WeightSpec,
)
from cognite.kinetics.exceptions import DataTooLargeError, InvalidArgument
from cognite.kinetics.utils import log_duration, spawn_rng

logger = logging.getLogger(__name__)

CADENCES = ("outer", "stepwise")


def collision_moments(grid: MomentumGrid, F: np.ndarray) -> np.ndarray:
    """Discrete mass, momentum and energy Σ w F (1, p, p⁰) of every row of F, shape (..., 5)."""
    basis = np.column_stack([np.ones(grid.n_nodes), grid.nodes, grid.energies])
    return (np.asarray(F) * grid.quad_weights) @ basis


def slab_norm_series(grid: MomentumGrid, values: np.ndarray, dk: float, ell: float, b_exponent: float) -> np.ndarray:
    """sup_p w_ℓ(p)(Σ_j |f̂(t, jΔk, p)|² Δk)^{1/2} per snapshot of a (T, 2J+1, N) slab trajectory."""
    weight = WeightSpec(ell=ell, b_exponent=b_exponent).momentum_weight(grid.energies)
    line_l2 = np.sqrt(dk * np.sum(np.abs(values) ** 2, axis=-2))
    return np.max(weight * line_l2, axis=-1)


def _nonnegative(grid: MomentumGrid, F, name="F") -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if F.shape != (grid.n_nodes,):
        raise InvalidArgument(name, f"expected {grid.n_nodes} nodal values, got shape {F.shape}")
    if not np.all(np.isfinite(F)):
        raise InvalidArgument(name, "contains non-finite values")
    if np.any(F < 0):
        raise InvalidArgument(name, f"{int(np.count_nonzero(F < 0))} negative nodes; F must be non-negative")
    return F


class NonlinearAPI(APIClient):
    def slab_initial(self, grid: MomentumGrid, mu: MuConstants, n_line: int, dk: float, amplitude: float) -> SlabField:
        """Hermitian slab data amplitude·e^{−k₁²}·φ(p) on the line k₁ = jΔk, |j| ≤ n_line, φ the normalized generic
        momentum profile."""
        profile = self._kinetics_client.modes.initial_profile(grid, mu, "generic")
        line = dk * np.arange(-n_line, n_line + 1)
        return SlabField(dk=dk, values=amplitude * np.exp(-(line ** 2))[:, None] * profile[None, :], t=0.0)

    def _line_propagators(self, matrices: OperatorMatrices, slab: SlabField, dt: float) -> np.ndarray:
        half = slab.n_freqs // 2
        positive = self._map(lambda j: linalg.expm(dt * mode_generator(matrices, j * slab.dk)), range(half + 1))
        # the generator at −k is the conjugate of the one at k
        return np.stack([np.conj(p) for p in positive[:0:-1]] + positive)

    @log_duration
    def picard_iterate(
        self,
        matrices: OperatorMatrices,
        f0: SlabField,
        horizon: float,
        n_iters: int,
        dt: float = 0.1,
        ell: float = 0.0,
        decay_order: float = 0.0,
        threshold: float = 0.1,
        raise_on_failure: bool = True,
    ) -> PicardResult:
        """Picard iteration for the mild slab solution f = U(t)f̂₀ + ∫₀ᵗU(t−s)Γ(f, f)(s)ds.

        The quadratic term is the truncated line convolution Γ̂(k₁) = Σ_{k'}Γ(f̂(k'), f̂(k₁−k')) from the kernels
        service, frequencies outside the line dropped. U is advanced by exact per-frequency propagators over
        steps of `dt` and the Duhamel integral is marched with the trapezoidal rule. The first iterate is the
        linear solution.

        Args:
            matrices (OperatorMatrices): Operators with collision tables.
            f0 (SlabField): Initial data at t = 0.
            horizon (float): Final time.
            n_iters (int): Picard iterations after the linear one, at least 2.
            dt (float): Time step, adjusted to divide the horizon.
            ell (float): Momentum weight exponent of the sup norm.
            decay_order (float): Time weight exponent k of the sup norm.
            threshold (float): Smallness threshold of ‖w_{ℓ+k}f̂₀‖, echoed in the report and the error.
            raise_on_failure (bool): Raise DataTooLargeError when a ratio reaches one.

        Returns:
            PicardResult: Times, every iterate with shape (T, 2J+1, N), and the contraction report.
        """
        if n_iters < 2:
            raise InvalidArgument("n_iters", f"need at least 2 iterations to form a ratio, got {n_iters}")
        if not horizon > 0:
            raise InvalidArgument("horizon", f"must be positive, got {horizon}")
        grid, b = matrices.grid, matrices.model.b_exponent
        n_steps = max(1, int(round(horizon / dt)))
        step = horizon / n_steps
        times = step * np.arange(n_steps + 1)
        propagators = self._line_propagators(matrices, f0, step)

        def advance(values):
            return np.einsum("jab,jb->ja", propagators, values)

        linear = np.empty((n_steps + 1,) + f0.values.shape, dtype=complex)
        linear[0] = f0.values
        for m in range(n_steps):
            linear[m + 1] = advance(linear[m])

        def norm(values):
            return float(np.max(slab_norm_series(grid, values, f0.dk, ell, b) * (1.0 + times) ** decay_order))

        iterates = [linear]
        increments, ratios = [], []
        for n in range(n_iters):
            current = iterates[-1]
            source = np.stack([self._kinetics_client.kernels.gamma_convolution(matrices, v, v) for v in current])
            duhamel = np.zeros_like(current)
            for m in range(n_steps):
                duhamel[m + 1] = advance(duhamel[m] + 0.5 * step * source[m]) + 0.5 * step * source[m + 1]
            iterates.append(linear + duhamel)
            increments.append(norm(iterates[-1] - current))
            if len(increments) > 1:
                ratios.append(increments[-1] / increments[-2] if increments[-2] > 0 else 0.0)
            logger.debug("Picard iterate %d: increment %.3e", n + 1, increments[-1])

        data_norm = float(slab_norm_series(grid, f0.values[None], f0.dk, ell + decay_order, b)[0])
        report = PicardReport(
            increments=increments,
            ratios=ratios,
            data_norm=data_norm,
            threshold=threshold,
            ball_radius=max(norm(it) for it in iterates),
            amplitude=float(np.max(np.abs(f0.values))),
        )
        if data_norm > threshold:
            logger.warning("Slab data norm %.3g exceeds the smallness threshold %.3g", data_norm, threshold)
        if raise_on_failure and not report.contracting:
            worst = max(ratios)
            raise DataTooLargeError("picard contraction", worst, 1.0, threshold, report.dump())
        return PicardResult(times=times, iterates=iterates, report=report, dk=f0.dk)

    def calibrate_amplitude(
        self,
        matrices: OperatorMatrices,
        mu: MuConstants,
        n_line: int,
        dk: float,
        horizon: float,
        n_iters: int,
        amplitude_max: float = 1.0,
        n_bisect: int = 8,
        **picard_kwargs,
    ) -> Tuple[float, PicardResult]:
        """Largest data amplitude, to bisection resolution, for which the Picard iteration contracts.

        Returns:
            Tuple[float, PicardResult]: The amplitude and the iteration run at it.
        """
        grid = matrices.grid

        def attempt(amplitude):
            slab = self.slab_initial(grid, mu, n_line, dk, amplitude)
            result = self.picard_iterate(
                matrices, slab, horizon, n_iters, raise_on_failure=False, **picard_kwargs
            )
            return result if result.report.contracting else None

        best = attempt(amplitude_max)
        if best is not None:
            return amplitude_max, best
        lo, hi = 0.0, amplitude_max
        for _ in range(n_bisect):
            mid = 0.5 * (lo + hi)
            result = attempt(mid)
            if result is None:
                hi = mid
            else:
                lo, best = mid, result
        if best is None:
            best = attempt(lo)
        logger.info("Calibrated slab amplitude %.4g (contraction fails at %.4g)", lo, hi)
        return lo, best

    def _frozen_step(self, tables: CollisionTables, F: np.ndarray, frozen: np.ndarray, dt: float) -> np.ndarray:
        """F(t+dt) = e^{−R dt}F(t) + (1 − e^{−R dt})/R·Q₊, with R = R(G) and Q₊ = Q₊(G, G) frozen at G."""
        split = self._kinetics_client.kernels.apply_gain_loss(tables, frozen, frozen)
        rate, gain = split.r_of_g, split.q_plus
        assert np.all(rate >= 0) and np.all(gain >= 0), "frozen state must be non-negative"
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = np.where(rate > 0, -np.expm1(-rate * dt) / rate, dt)
        return np.exp(-rate * dt) * F + factor * gain

    @log_duration
    def positivity_iterate(
        self,
        operators: Union[CollisionTables, OperatorMatrices],
        F0,
        dt: float,
        horizon: float,
        n_outer: int = 4,
        cadence: str = "outer",
        n_inner: int = 1,
    ) -> PositivityTrajectoryList:
        """Sequence of linear problems ∂_tF^{n+1} + R(F^n)F^{n+1} = Q₊(F^n, F^n), F^{n+1}(0) = F₀, seeded by F¹ = F₀.

        Every step applies the exact integrating factor of the frozen rate and source, so non-negative data gives
        non-negative iterates. With cadence "outer" each of the `n_outer` iterates is a whole trajectory computed
        from the previous one. With cadence "stepwise" the outer update is tied to the time step: one trajectory,
        each step frozen at the current value and repeated `n_inner` times at the latest value.

        Args:
            operators (Union[CollisionTables, OperatorMatrices]): Collision tables of a (model, grid).
            F0 (np.ndarray): Non-negative homogeneous data.
            dt (float): Time step.
            horizon (float): Final time.
            n_outer (int): Outer iterates, cadence "outer" only.
            cadence (str): "outer" or "stepwise".
            n_inner (int): Inner refreezes per step, cadence "stepwise" only.

        Returns:
            PositivityTrajectoryList: One trajectory per outer iterate, or a single one for "stepwise".
        """
        tables = operators.tables if isinstance(operators, OperatorMatrices) else operators
        grid = tables.grid
        F0 = _nonnegative(grid, F0, "F0")
        if cadence not in CADENCES:
            raise InvalidArgument("cadence", f"must be one of {CADENCES}, got {cadence!r}")
        n_steps = max(1, int(round(horizon / dt)))
        step = horizon / n_steps
        times = step * np.arange(n_steps + 1)

        if cadence == "stepwise":
            values = np.empty((n_steps + 1, grid.n_nodes))
            values[0] = F0
            for m in range(n_steps):
                frozen = values[m]
                for _ in range(n_inner):
                    frozen = self._frozen_step(tables, values[m], frozen, step)
                values[m + 1] = frozen
            return PositivityTrajectoryList([PositivityTrajectory(iterate=1, times=times, values=values)])

        previous = np.repeat(F0[None, :], n_steps + 1, axis=0)
        trajectories: List[PositivityTrajectory] = [PositivityTrajectory(iterate=1, times=times, values=previous)]
        for n in range(2, n_outer + 2):
            values = np.empty_like(previous)
            values[0] = F0
            for m in range(n_steps):
                values[m + 1] = self._frozen_step(tables, values[m], previous[m], step)
            trajectories.append(PositivityTrajectory(iterate=n, times=times, values=values))
            logger.debug("Outer iterate %d: sup difference %.3e", n, float(np.max(np.abs(values - previous))))
            previous = values
        return PositivityTrajectoryList(trajectories)

    def entropy(self, grid: MomentumGrid, F) -> float:
        """H(F) = −Σ w F ln F with 0·ln 0 = 0."""
        F = _nonnegative(grid, F)
        return float(-np.sum(grid.quad_weights * special.xlogy(F, F)))

    def moment_match(self, grid: MomentumGrid, F) -> np.ndarray:
        """Exponential tilt F·e^{α + β·p + γp⁰} with the discrete mass, momentum and energy of J.

        The tilt keeps F positive. The five coefficients solve the moment equations by Newton's method with the
        exact Jacobian.

        Raises:
            InvalidArgument: If F has zero nodes in bulk or the moment equations do not converge.
        """
        F = _nonnegative(grid, F)
        if not np.any(F > 0):
            raise InvalidArgument("F", "must not vanish identically")
        basis = np.column_stack([np.ones(grid.n_nodes), grid.nodes, grid.energies])
        target = collision_moments(grid, grid.j_values)
        start = F * (target[0] / collision_moments(grid, F)[0])

        def equations(coefficients):
            tilted = start * np.exp(basis @ coefficients)
            weighted = grid.quad_weights * tilted
            return weighted @ basis - target, (basis * weighted[:, None]).T @ basis

        solution = optimize.root(equations, np.zeros(5), jac=True, method="hybr", options={"xtol": 1e-13})
        if not solution.success:
            raise InvalidArgument("F", f"moment matching did not converge: {solution.message}")
        return start * np.exp(basis @ solution.x)

    def entropy_trials(self, grid: MomentumGrid, n_trials: int = 100, seed: int = None) -> np.ndarray:
        """H(J) − H(F) for random positive F moment-matched to J; non-negative when J maximizes the entropy."""
        seed = self._config.seed if seed is None else seed
        h_j = self.entropy(grid, grid.j_values)

        def trial(i):
            rng = spawn_rng(seed, i)
            F = grid.j_values * rng.uniform(0.2, 1.8, grid.n_nodes)
            return h_j - self.entropy(grid, self.moment_match(grid, F))

        return np.array(self._map(trial, range(n_trials)))

    def homogeneous_relax(
        self, operators: Union[CollisionTables, OperatorMatrices], F0, dt: float, n_steps: int, n_inner: int = 1
    ) -> RelaxationSeries:
        """Stepwise positivity iteration from F₀ with the entropy and the collision moments per step."""
        tables = operators.tables if isinstance(operators, OperatorMatrices) else operators
        grid = tables.grid
        if isinstance(F0, HomogeneousState):
            F0 = F0.F
        (trajectory,) = self.positivity_iterate(tables, F0, dt, dt * n_steps, cadence="stepwise", n_inner=n_inner)
        values = trajectory.values
        return RelaxationSeries(
            times=trajectory.times,
            values=values,
            entropy=np.array([self.entropy(grid, np.maximum(F, 0.0)) for F in values]),
            moments=collision_moments(grid, values),
        )

    def relaxed_state(self, series: RelaxationSeries) -> HomogeneousState:
        return HomogeneousState(F=series.values[-1], t=float(series.times[-1]))

    def consistency_check(
        self, matrices: OperatorMatrices, f0, amplitude: float, horizon: float, dt: float
    ) -> ConsistencyReport:
        """Homogeneous runs of F = J + √J·f at the F level (stepwise positivity scheme) and at the f level
        (∂_tf = −Lf + Γ(f, f) by Heun's method) from matched data; reports the largest nodal difference of f.

        Raises:
            InvalidArgument: If J + √J·amplitude·f₀ has a negative node.
        """
        grid = matrices.grid
        f0 = amplitude * np.real(np.asarray(f0))
        F0 = grid.j_values + grid.sqrt_j * f0
        if np.any(F0 < 0):
            raise InvalidArgument("amplitude", f"J + √J·f₀ is negative at amplitude {amplitude}; reduce it")
        n_steps = max(1, int(round(horizon / dt)))
        step = horizon / n_steps
        kernels = self._kinetics_client.kernels
        series = self.homogeneous_relax(matrices, F0, step, n_steps)

        def rhs(f):
            return -(matrices.L_matrix @ f) + np.real(kernels.apply_Gamma(matrices, f, f))

        f, difference = f0.copy(), 0.0
        for m in range(n_steps):
            slope = rhs(f)
            predicted = f + step * slope
            f = f + 0.5 * step * (slope + rhs(predicted))
            from_f_level = (series.values[m + 1] - grid.j_values) / grid.sqrt_j
            difference = max(difference, float(np.max(np.abs(from_f_level - f))))
        return ConsistencyReport(max_difference=difference, horizon=horizon, amplitude=amplitude)
