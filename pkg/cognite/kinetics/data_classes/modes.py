from fractions import Fraction

import numpy as np
import sympy

from cognite.kinetics.data_classes._base import KineticsResource, KineticsResourceList
from cognite.kinetics.exceptions import InvalidArgument


class ModeState(KineticsResource):
    """Fourier mode f̂(t, k, ·) of the perturbation at one spatial frequency.

    Args:
        freq (np.ndarray): Spatial frequency k, a real 3-vector.
        values (np.ndarray): Complex nodal values.
        t (float): Time.
    """

    _SUMMARY_FIELDS = ["freq", "t"]

    def __init__(self, freq=(0.0, 0.0, 0.0), values=None, t=0.0):
        self.freq = np.asarray(freq, dtype=float)
        self.values = None if values is None else np.asarray(values, dtype=complex)
        self.t = float(t)
        if self.freq.shape != (3,):
            raise InvalidArgument("freq", f"expected a 3-vector, got shape {self.freq.shape}")
        if self.values is not None and not np.all(np.isfinite(self.values)):
            raise InvalidArgument("values", "non-finite mode values")

    @property
    def freq_norm(self) -> float:
        return float(np.linalg.norm(self.freq))


class ModeTrajectory(KineticsResource):
    """Snapshots f̂(t_n) of one mode.

    Args:
        freq (np.ndarray): Spatial frequency.
        times (np.ndarray): Snapshot times, uniformly spaced.
        values (np.ndarray): Complex snapshots, shape (n_times, n_nodes).
        method (str): Propagation method used.
    """

    _SUMMARY_FIELDS = ["freq", "method", "n_snapshots", "t_final"]

    def __init__(self, freq=None, times=None, values=None, method=None):
        self.freq = None if freq is None else np.asarray(freq, dtype=float)
        self.times = times
        self.values = values
        self.method = method

    @property
    def freq_norm(self) -> float:
        return float(np.linalg.norm(self.freq))

    @property
    def n_snapshots(self) -> int:
        return 0 if self.times is None else len(self.times)

    @property
    def t_final(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def state(self, i: int) -> ModeState:
        return ModeState(self.freq, self.values[i], self.times[i])


class ModeTrajectoryList(KineticsResourceList):
    _RESOURCE = ModeTrajectory

    @property
    def freq_norms(self) -> np.ndarray:
        return np.array([tr.freq_norm for tr in self.data])


class LyapunovConstants(KineticsResource):
    """Constants of the free energy and the time-frequency Lyapunov functional.

    Args:
        kappa1 (float): Weight of the high order moment terms in the free energy.
        kappa3 (float): Weight of the free energy in E.
        kappa4 (float): Weight of ‖w_ℓ(I-P)f̂‖² for |k| ≤ 1.
        kappa5 (float): Weight of ‖w_ℓf̂‖² for |k| > 1.
        lambda_rate (float): Dissipation rate λ.
        c1 (float): Lower equivalence bound.
        c2 (float): Upper equivalence bound.
        free_energy_constant (float): The C of the free energy dissipation inequality.
        worst_margin (float): Smallest relative margin over the verification sample.
    """

    def __init__(
        self,
        kappa1=0.0,
        kappa3=0.0,
        kappa4=0.0,
        kappa5=0.0,
        lambda_rate=None,
        c1=None,
        c2=None,
        free_energy_constant=None,
        worst_margin=None,
        ell=0.0,
    ):
        self.kappa1 = kappa1
        self.kappa3 = kappa3
        self.kappa4 = kappa4
        self.kappa5 = kappa5
        self.lambda_rate = lambda_rate
        self.c1 = c1
        self.c2 = c2
        self.free_energy_constant = free_energy_constant
        self.worst_margin = worst_margin
        self.ell = ell

    def __str__(self):
        return "%s(kappa1: %.4g, kappa3: %.4g, kappa4: %.4g, kappa5: %.4g, lambda: %s)" % (
            self.__class__.__name__,
            self.kappa1,
            self.kappa3,
            self.kappa4,
            self.kappa5,
            self.lambda_rate,
        )


class RateSpec(KineticsResource):
    """Whole-space decay rate σ_{r,m} = (3/2)(1/r − 1/2) + m/2.

    Args:
        r (float): Integrability exponent of the initial data, 1 ≤ r ≤ 2.
        m (float): Order of the homogeneous Sobolev norm, m ≥ 0.
        ell (float): Momentum weight order.
        decay_order (float): Temporal weight exponent k.

    Examples:

        >>> from cognite.kinetics.data_classes import RateSpec
        >>> RateSpec(r=1, m=1).sigma_exact
        5/4
    """

    def __init__(self, r=1.0, m=0.0, ell=0.0, decay_order=0.0):
        if not 1.0 <= float(r) <= 2.0:
            raise InvalidArgument("r", f"must lie in [1, 2], got {r}")
        if float(m) < 0:
            raise InvalidArgument("m", f"must be non-negative, got {m}")
        self.r = r
        self.m = m
        self.ell = ell
        self.decay_order = decay_order

    @property
    def sigma_exact(self) -> sympy.Rational:
        r = sympy.Rational(str(Fraction(self.r).limit_denominator(10 ** 6)))
        m = sympy.Rational(str(Fraction(self.m).limit_denominator(10 ** 6)))
        return sympy.Rational(3, 2) * (1 / r - sympy.Rational(1, 2)) + m / 2

    @property
    def sigma_rm(self) -> float:
        return float(self.sigma_exact)

    def dump(self):
        return {**super().dump(), "sigma_rm": self.sigma_rm}


class DissipationSample(KineticsResource):
    """Worst instantaneous margins of one mode trajectory."""

    def __init__(self, freq_norm=None, t=None, free_energy_margin=None, lyapunov_margin=None, monotone=None):
        self.freq_norm = freq_norm
        self.t = t
        self.free_energy_margin = free_energy_margin
        self.lyapunov_margin = lyapunov_margin
        self.monotone = monotone


class DissipationSampleList(KineticsResourceList):
    _RESOURCE = DissipationSample

    @property
    def worst_lyapunov_margin(self) -> float:
        return min(s.lyapunov_margin for s in self.data)

    @property
    def all_monotone(self) -> bool:
        return all(s.monotone for s in self.data)


class NormSeries(KineticsResource):
    """Synthesized squared whole-space norm per snapshot."""

    _SUMMARY_FIELDS = ["rate", "ell", "initial_norm2", "n_snapshots"]

    def __init__(self, times=None, norm2=None, rate: RateSpec = None, ell=0.0, initial_norm2=None):
        self.times = times
        self.norm2 = norm2
        self.rate = rate
        self.ell = ell
        self.initial_norm2 = initial_norm2

    @property
    def n_snapshots(self) -> int:
        return 0 if self.times is None else len(self.times)


class InterpolationReport(KineticsResource):
    """Measured constants of the interpolation step and of the resulting per-mode decay bound."""

    def __init__(
        self,
        freq_norm=None,
        j=None,
        ell=None,
        holder_constant=None,
        bound_constant=None,
        rho_hat=None,
        plain_holder_constant=None,
    ):
        self.freq_norm = freq_norm
        self.j = j
        self.ell = ell
        self.holder_constant = holder_constant
        self.bound_constant = bound_constant
        self.rho_hat = rho_hat
        self.plain_holder_constant = plain_holder_constant


class WeightedInequalityReport(KineticsResource):
    def __init__(self, ell=None, lambda_=None, constant=None, radius=None, micro_margin=None, full_margin=None):
        self.ell = ell
        self.lambda_ = lambda_
        self.constant = constant
        self.radius = radius
        self.micro_margin = micro_margin
        self.full_margin = full_margin


class EquivalenceReport(KineticsResource):
    def __init__(self, c1=None, c2=None, n_states=None, min_energy=None):
        self.c1 = c1
        self.c2 = c2
        self.n_states = n_states
        self.min_energy = min_energy

