import logging
from typing import Dict, List, Sequence

import numpy as np

from cognite.kinetics._api.energetics import ModeEnergetics, propagate_eig, random_states, relative_margin
from cognite.kinetics._api_client import APIClient
from cognite.kinetics.data_classes import (
    DissipationSample,
    DissipationSampleList,
    EquivalenceReport,
    LyapunovConstants,
    MuConstants,
    OperatorMatrices,
)
from cognite.kinetics.exceptions import InfeasibleConstantsError, InvalidArgument
from cognite.kinetics.utils import log_duration, spawn_rng

logger = logging.getLogger(__name__)

KAPPA1_CANDIDATES = np.logspace(-3, 1, 13)
MAX_HALVINGS = 40
FREE_ENERGY_RATE = 0.05
_TINY = 1e-14


class _Sample:
    """Functionals of the random trajectories at one frequency, flattened over (state, snapshot)."""

    def __init__(self, energetics: ModeEnergetics, terms: Dict[str, np.ndarray], times: np.ndarray):
        self.energetics = energetics
        self.terms = terms
        self.times = times

    @property
    def freq_norm(self) -> float:
        return self.energetics.freq_norm

    def live(self, denominator: np.ndarray) -> np.ndarray:
        return denominator > _TINY * self.terms["norm2"]


class LyapunovAPI(APIClient):
    def _samples(
        self,
        matrices: OperatorMatrices,
        mu: MuConstants,
        freq_norms: Sequence[float],
        n_states: int,
        t_final: float,
        n_snapshots: int,
        ell: float,
    ) -> List[_Sample]:
        times = np.linspace(0.0, t_final, n_snapshots)

        def sample(i):
            energetics = ModeEnergetics(matrices, mu, freq_norms[i], ell=ell)
            states = random_states(matrices.grid, spawn_rng(self._config.seed, i), n_states)
            values = propagate_eig(matrices, energetics.freq, states, times).reshape(-1, matrices.n_nodes)
            return _Sample(energetics, energetics.terms(values), np.tile(times, n_states))

        return self._map(sample, range(len(freq_norms)))

    @log_duration
    def fit_lyapunov_constants(
        self,
        matrices: OperatorMatrices,
        mu: MuConstants,
        freq_norms: Sequence[float] = None,
        n_states: int = 20,
        t_final: float = 50.0,
        n_snapshots: int = 26,
        ell: float = 0.0,
    ) -> LyapunovConstants:
        """Search constants of the free energy and of the time-frequency Lyapunov functional.

        Random states are evolved at every |k| sample and all functionals are differentiated exactly along the flow.
        The constants are fixed in the order the estimates depend on each other:

        1. κ₁ from a logarithmic grid, minimizing the constant C of
           ∂_tRe E_free + λ_f|k|²/(1+|k|²)(|a|²+|b|²+|c|²) ≤ C‖ν^{1/2}(I-P)f̂‖².
        2. κ₃ halved from 1/(2C_F), C_F the Cauchy-Schwarz constant of E_free, until
           ∂_tE ≤ −λ_E(‖ν^{1/2}(I-P)f̂‖² + |k|²/(1+|k|²)|(a, b, c)|²) with λ_E > 0.
        3. κ₄ (|k| ≤ 1) and κ₅ (|k| > 1) halved from 1/2 until ∂_tE_ℓ ≤ −λ(1∧|k|²)‖ν^{1/2}w_ℓf̂‖² with λ > 0;
           half the smallest such λ is reported.

        Args:
            matrices (OperatorMatrices): Assembled operators.
            mu (MuConstants): Moments of the grid.
            freq_norms (Sequence[float]): |k| samples, 40 log-spaced in [1e-2, 10] by default. Zero is allowed and
                checks ∂_tE_ℓ ≤ 0.
            n_states (int): Random initial states per frequency.
            t_final (float): Horizon of the sample trajectories.
            n_snapshots (int): Snapshots per trajectory.
            ell (float): Momentum weight order.

        Returns:
            LyapunovConstants: Constants, equivalence bounds over the sample and the worst relative margin.

        Raises:
            InfeasibleConstantsError: With the worst violating (|k|, t) when a step finds no admissible constant.
        """
        if freq_norms is None:
            freq_norms = np.logspace(-2, 1, 40)
        freq_norms = np.asarray(freq_norms, dtype=float)
        if np.any(freq_norms < 0):
            raise InvalidArgument("freq_norms", "must be non-negative")
        samples = self._samples(matrices, mu, freq_norms, n_states, t_final, n_snapshots, ell)
        moving = [s for s in samples if s.freq_norm > 0]
        if not moving:
            raise InvalidArgument("freq_norms", "need at least one non-zero frequency")

        kappa1, free_constant = self._fit_kappa1(moving)
        kappa3 = self._fit_kappa3(moving, kappa1)
        constants = LyapunovConstants(kappa1=kappa1, kappa3=kappa3, kappa4=0.5, kappa5=0.5, ell=ell)
        rates = []
        for key, selected in (
            ("kappa4", [s for s in moving if s.freq_norm <= 1.0]),
            ("kappa5", [s for s in moving if s.freq_norm > 1.0]),
        ):
            if selected:
                value, rate = self._fit_weighted_kappa(selected, constants, key)
                setattr(constants, key, value)
                rates.append(rate)
        constants.lambda_rate = 0.5 * min(rates)
        constants.free_energy_constant = free_constant

        margins, ratios = [], []
        for sample in samples:
            lyap = sample.energetics.lyapunov(sample.terms, constants)
            dissipation = constants.lambda_rate * sample.energetics.rho * sample.terms["weighted_dissipation"]
            floor = sample.energetics.roundoff_floor(sample.terms["norm2"], self._tolerances["psd"])
            margin = relative_margin(lyap["dE_ell"] + dissipation, np.abs(lyap["dE_ell"]) + dissipation, floor)
            worst = int(np.argmin(margin))
            if margin[worst] < 0:
                raise InfeasibleConstantsError(
                    "lyapunov dissipation", float(margin[worst]), 0.0, sample.freq_norm, float(sample.times[worst])
                )
            margins.append(float(margin[worst]))
            ratios.append(lyap["E_ell"] / sample.terms["wnorm2"])
        ratios = np.concatenate(ratios)
        constants.c1, constants.c2 = float(np.min(ratios)), float(np.max(ratios))
        constants.worst_margin = min(margins)
        logger.info("Fitted %s", constants)
        return constants

    def _fit_kappa1(self, samples: List[_Sample]):
        best = None
        for kappa1 in KAPPA1_CANDIDATES:
            required = 0.0
            for sample in samples:
                t = sample.terms
                q = sample.freq_norm ** 2 / (1.0 + sample.freq_norm ** 2)
                lhs = kappa1 * t["dfree_kappa"] + t["dfree_base"] + FREE_ENERGY_RATE * q * t["macro2"]
                live = sample.live(t["micro_dissipation"])
                if np.any(lhs[~live] > _TINY * t["norm2"][~live]):
                    required = np.inf
                    break
                required = max(required, float(np.max(lhs[live] / t["micro_dissipation"][live], initial=0.0)))
            logger.debug("kappa1=%.3g needs C=%.4g", kappa1, required)
            if best is None or required < best[1]:
                best = (float(kappa1), required)
        if not np.isfinite(best[1]):
            raise InfeasibleConstantsError("free energy inequality", np.inf, 0.0, samples[0].freq_norm, 0.0)
        return best

    def _fit_kappa3(self, samples: List[_Sample], kappa1: float) -> float:
        bound = max(sample.energetics.free_energy_bound(kappa1) for sample in samples)
        kappa3 = 0.5 / bound if bound > 0 else 1.0
        worst = None
        for _ in range(MAX_HALVINGS):
            rate, worst = np.inf, None
            for sample in samples:
                t = sample.terms
                q = sample.freq_norm ** 2 / (1.0 + sample.freq_norm ** 2)
                denergy = t["dnorm2"] + kappa3 * (kappa1 * t["dfree_kappa"] + t["dfree_base"])
                denominator = t["micro_dissipation"] + q * t["macro2"]
                live = sample.live(denominator)
                ratio = np.where(live, -denergy / np.where(live, denominator, 1.0), np.inf)
                i = int(np.argmin(ratio))
                if ratio[i] < rate:
                    rate, worst = float(ratio[i]), (sample.freq_norm, float(sample.times[i]))
            if rate > 0:
                logger.debug("kappa3=%.4g gives energy dissipation rate %.4g", kappa3, rate)
                return kappa3
            kappa3 *= 0.5
        raise InfeasibleConstantsError("energy dissipation", rate, 0.0, worst[0], worst[1])

    def _fit_weighted_kappa(self, samples: List[_Sample], constants: LyapunovConstants, key: str):
        kappa = 0.5
        for _ in range(MAX_HALVINGS):
            setattr(constants, key, kappa)
            rate, worst = np.inf, None
            for sample in samples:
                lyap = sample.energetics.lyapunov(sample.terms, constants)
                denominator = sample.energetics.rho * sample.terms["weighted_dissipation"]
                live = sample.live(denominator)
                ratio = np.where(live, -lyap["dE_ell"] / np.where(live, denominator, 1.0), np.inf)
                i = int(np.argmin(ratio))
                if ratio[i] < rate:
                    rate, worst = float(ratio[i]), (sample.freq_norm, float(sample.times[i]))
            if rate > 0:
                logger.debug("%s=%.4g gives lambda %.4g", key, kappa, rate)
                return kappa, rate
            kappa *= 0.5
        raise InfeasibleConstantsError(f"weighted dissipation ({key})", rate, 0.0, worst[0], worst[1])

    def verify(
        self,
        matrices: OperatorMatrices,
        mu: MuConstants,
        constants: LyapunovConstants,
        freq_norms: Sequence[float] = None,
        n_states: int = 20,
        t_final: float = 50.0,
        n_snapshots: int = 26,
    ) -> DissipationSampleList:
        """Worst free-energy and Lyapunov margins per frequency on fresh random states, and whether ‖f̂(t)‖ is
        non-increasing along every trajectory."""
        if freq_norms is None:
            freq_norms = np.logspace(-2, 1, 40)
        samples = self._samples(
            matrices, mu, np.asarray(freq_norms, dtype=float), n_states, t_final, n_snapshots, constants.ell
        )
        out = []
        for sample in samples:
            t = sample.terms
            lyap = sample.energetics.lyapunov(t, constants)
            q = sample.freq_norm ** 2 / (1.0 + sample.freq_norm ** 2)
            free_lhs = lyap["dfree"] + FREE_ENERGY_RATE * q * t["macro2"]
            free_rhs = constants.free_energy_constant * t["micro_dissipation"]
            floor = sample.energetics.roundoff_floor(t["norm2"], self._tolerances["psd"])
            free_margin = relative_margin(free_lhs - free_rhs, np.abs(free_lhs) + free_rhs, floor)
            dissipation = constants.lambda_rate * sample.energetics.rho * t["weighted_dissipation"]
            margin = relative_margin(lyap["dE_ell"] + dissipation, np.abs(lyap["dE_ell"]) + dissipation, floor)
            norms = t["norm2"].reshape(n_states, n_snapshots)
            i = int(np.argmin(margin))
            out.append(
                DissipationSample(
                    freq_norm=sample.freq_norm,
                    t=float(sample.times[i]),
                    free_energy_margin=float(np.min(free_margin)),
                    lyapunov_margin=float(margin[i]),
                    monotone=bool(np.all(np.diff(norms, axis=1) <= self._tolerances["norm_growth"] * norms[:, :1])),
                )
            )
        return DissipationSampleList(out)

    def equivalence(
        self,
        matrices: OperatorMatrices,
        mu: MuConstants,
        constants: LyapunovConstants,
        n_states: int = 1000,
        freq_norms: Sequence[float] = None,
    ) -> EquivalenceReport:
        """Bounds c₁ ≤ E_ℓ/‖w_ℓf̂‖² ≤ c₂ over random states spread over the |k| samples."""
        if freq_norms is None:
            freq_norms = np.logspace(-2, 1, 10)
        freq_norms = np.asarray(freq_norms, dtype=float)
        per_freq = np.diff(np.linspace(0, n_states, len(freq_norms) + 1).astype(int))

        def ratios(i):
            energetics = ModeEnergetics(matrices, mu, freq_norms[i], ell=constants.ell)
            states = random_states(matrices.grid, spawn_rng(self._config.seed, 7919, i), int(per_freq[i]))
            terms = energetics.terms(states)
            energy = energetics.lyapunov(terms, constants)["E_ell"]
            return energy / terms["wnorm2"], energy

        results = self._map(ratios, [i for i in range(len(freq_norms)) if per_freq[i] > 0])
        ratio = np.concatenate([r for r, _ in results])
        energy = np.concatenate([e for _, e in results])
        return EquivalenceReport(
            c1=float(np.min(ratio)), c2=float(np.max(ratio)), n_states=int(len(ratio)), min_energy=float(np.min(energy))
        )
