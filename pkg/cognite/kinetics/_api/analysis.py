import logging
import math
from functools import lru_cache
from typing import Sequence, Tuple

import numpy as np
import sympy
from scipy import integrate, stats

from cognite.kinetics._api_client import APIClient
from cognite.kinetics.data_classes import BasicDecayReport, CalcInequalityReport, DecayFit
from cognite.kinetics.exceptions import InvalidArgument

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 8
SUP_GROWTH_TOLERANCE = 0.01


def calculus_bound(a, k) -> np.ndarray:
    """max{1, e^{a−k}k^k a^{−k}}, the supremum of e^{−ay}(1+y)^k over y ≥ 0. Infinite for a = 0 < k."""
    a, k = np.asarray(a, dtype=float), np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        interior = np.exp(a - k + k * np.log(np.where(k > 0, k, 1.0)) - k * np.log(a))
    return np.where((k > a) & (k > 0), np.maximum(1.0, interior), 1.0)


@lru_cache(maxsize=1)
def _symbolic_argmax():
    a, k, y = sympy.symbols("a k y", positive=True)
    log_target = -a * y + k * sympy.log(1 + y)
    (critical,) = sympy.solve(sympy.diff(log_target, y), y)
    return sympy.lambdify((a, k), critical, "math")


def closed_form_argmax(a: float, k: float) -> float:
    """y* = max(0, k/a − 1), the maximizer of e^{−ay}(1+y)^k."""
    if k <= 0:
        return 0.0
    if a <= 0:
        return math.inf
    return max(0.0, float(_symbolic_argmax()(a, k)))


def decay_integral(lam: float, mu: float, t: float) -> float:
    """I(t) = ∫₀ᵗ (1+t−s)^{−λ}(1+s)^{−μ} ds."""
    if t == 0:
        return 0.0
    if lam == 0 and mu == 0:
        return float(t)
    value, _ = integrate.quad(
        lambda s: (1.0 + t - s) ** -lam * (1.0 + s) ** -mu, 0.0, t, limit=200, epsabs=0.0, epsrel=1e-11
    )
    return value


class AnalysisAPI(APIClient):
    def fit_decay_exponent(self, times, values, window: Tuple[float, float] = (10.0, math.inf)) -> DecayFit:
        """Least-squares fit of log(value) against −log(1+t) on a window.

        Args:
            times (Sequence[float]): Sample times.
            values (Sequence[float]): Positive series values.
            window (Tuple[float, float]): [t_lo, t_hi], inclusive.

        Returns:
            DecayFit: Slope as the exponent, with a 95% confidence half-width and the rms residual of the log fit.

        Raises:
            InvalidArgument: If fewer than eight points lie in the window or a value in it is not positive.

        Examples:

            >>> t = np.linspace(0, 100, 101)
            >>> round(c.analysis.fit_decay_exponent(t, (1 + t) ** -2).exponent, 6)
            2.0
        """
        times, values = np.asarray(times, dtype=float), np.asarray(values, dtype=float)
        if times.shape != values.shape:
            raise InvalidArgument("values", f"shape {values.shape} does not match times {times.shape}")
        lo, hi = window
        inside = (times >= lo) & (times <= hi)
        n = int(np.count_nonzero(inside))
        if n < MIN_FIT_POINTS:
            raise InvalidArgument("window", f"[{lo}, {hi}] holds {n} points, need at least {MIN_FIT_POINTS}")
        if np.any(values[inside] <= 0) or not np.all(np.isfinite(values[inside])):
            raise InvalidArgument("values", "must be positive and finite inside the fit window")
        x, y = -np.log1p(times[inside]), np.log(values[inside])
        fit = stats.linregress(x, y)
        residual = float(np.sqrt(np.mean((y - fit.intercept - fit.slope * x) ** 2)))
        half_width = float(stats.t.ppf(0.975, n - 2) * fit.stderr)
        return DecayFit(
            exponent=float(fit.slope),
            half_width=half_width,
            window=(float(lo), float(hi)),
            residual=residual,
            n_points=n,
        )

    def basic_decay_check(self, lam: float, mu: float, T: float = 1000.0, n_samples: int = 200) -> BasicDecayReport:
        """Sup-test of I(t)(1+t)^ρ/C(t), ρ = min{λ+μ−1, μ}, C(t) = log(2+t) when λ = 1 and 1 otherwise.

        I is evaluated by adaptive quadrature on geometrically spaced times up to 2T. The supremum counts as
        finite when its value over [T, 2T] exceeds the one over [T/2, T] by less than 1%; the same growth
        without the log factor is reported as `unweighted_growth`.

        Args:
            lam (float): λ ≥ μ.
            mu (float): μ ≥ 0.
            T (float): Horizon, larger than one.
            n_samples (int): Samples per doubling window.

        Returns:
            BasicDecayReport: Scaled series and verdict.
        """
        if mu < 0:
            raise InvalidArgument("mu", f"must be non-negative, got {mu}")
        if lam < mu:
            raise InvalidArgument("lam", f"λ={lam} < μ={mu}; swap the exponents first")
        if not T > 1:
            raise InvalidArgument("T", f"must exceed 1, got {T}")
        rho = min(lam + mu - 1.0, mu)
        log_factor = lam == 1
        times = np.unique(np.concatenate([[0.0], np.geomspace(1e-2, 2.0 * T, 3 * n_samples)]))
        integral = np.array([decay_integral(lam, mu, t) for t in times])
        plain = integral * (1.0 + times) ** rho
        values = plain / np.log(2.0 + times) if log_factor else plain

        def growth(series):
            half = float(np.max(series[(times >= T / 2) & (times <= T)]))
            full = float(np.max(series[(times >= T) & (times <= 2 * T)]))
            return half, full, (full - half) / half if half > 0 else 0.0

        sup_half, sup_full, change = growth(values)
        _, _, unweighted = growth(plain)
        report = BasicDecayReport(
            lam=lam,
            mu=mu,
            rho=rho,
            log_factor=log_factor,
            times=times,
            values=values,
            sup_half=sup_half,
            sup_full=sup_full,
            bounded=bool(change < SUP_GROWTH_TOLERANCE),
            unweighted_growth=unweighted,
        )
        logger.debug("Basic decay (λ=%g, μ=%g): sup grows by %.3g%% on doubling", lam, mu, 100 * change)
        return report

    def calc_inequality_check(
        self, a: float, decay_order: float, y_max: float = None, n_samples: int = 20001
    ) -> CalcInequalityReport:
        """Dense sampling of e^{−ay}(1+y)^k on [0, y_max] plus the closed-form maximizer, against the bound."""
        if a < 0 or decay_order < 0:
            raise InvalidArgument("a", f"a and decay_order must be non-negative, got {a} and {decay_order}")
        k = decay_order
        y_star = closed_form_argmax(a, k)
        if y_max is None:
            y_max = 10.0 + 4.0 * (y_star if math.isfinite(y_star) else 10.0)
        y = np.linspace(0.0, y_max, n_samples)
        if math.isfinite(y_star) and y_star <= y_max:
            y = np.sort(np.append(y, y_star))
        samples = np.exp(-a * y + k * np.log1p(y))
        i = int(np.argmax(samples))
        return CalcInequalityReport(
            a=a,
            decay_order=k,
            bound=float(calculus_bound(a, k)),
            numeric_max=float(samples[i]),
            argmax=float(y[i]),
            closed_form_argmax=y_star,
        )

    def calc_inequality_grid(self, a_values: Sequence[float], k_values: Sequence[float]) -> float:
        """Largest violation of the calculus inequality over an (a, k) grid, relative to the bound."""
        reports = self._map(
            lambda ak: self.calc_inequality_check(*ak), [(float(a), float(k)) for a in a_values for k in k_values]
        )
        return max(r.violation / r.bound for r in reports)
