from cognite.kinetics.data_classes._base import KineticsResource


class DecayFit(KineticsResource):
    """Least-squares fit value ≈ C(1+t)^{-exponent} on a time window.

    Args:
        exponent (float): Fitted decay exponent.
        half_width (float): 95% confidence half-width of the exponent.
        window (Tuple[float, float]): Fit window [t_lo, t_hi].
        residual (float): Root-mean-square residual of the log fit.
        n_points (int): Points inside the window.
    """

    def __init__(self, exponent=None, half_width=None, window=None, residual=None, n_points=None):
        self.exponent = exponent
        self.half_width = half_width
        self.window = window
        self.residual = residual
        self.n_points = n_points

    def within(self, target: float, rel_tol: float) -> bool:
        return abs(self.exponent - target) <= rel_tol * abs(target)

    def __str__(self):
        return "%s(exponent: %.6g ± %.2g, window: [%g, %g])" % (
            self.__class__.__name__,
            self.exponent,
            self.half_width,
            self.window[0],
            self.window[1],
        )


class BasicDecayReport(KineticsResource):
    """Sup-tests of I(t) = ∫₀ᵗ (1+t−s)^{-λ}(1+s)^{-μ} ds against (1+t)^{-ρ}, with the log factor when λ = 1."""

    _SUMMARY_FIELDS = ["lam", "mu", "rho", "log_factor", "sup_half", "sup_full", "bounded", "unweighted_growth"]

    def __init__(
        self,
        lam=None,
        mu=None,
        rho=None,
        log_factor=None,
        times=None,
        values=None,
        sup_half=None,
        sup_full=None,
        bounded=None,
        unweighted_growth=None,
    ):
        self.lam = lam
        self.mu = mu
        self.rho = rho
        self.log_factor = log_factor
        self.times = times
        self.values = values
        self.sup_half = sup_half
        self.sup_full = sup_full
        self.bounded = bounded
        self.unweighted_growth = unweighted_growth


class CalcInequalityReport(KineticsResource):
    def __init__(self, a=None, decay_order=None, bound=None, numeric_max=None, argmax=None, closed_form_argmax=None):
        self.a = a
        self.decay_order = decay_order
        self.bound = bound
        self.numeric_max = numeric_max
        self.argmax = argmax
        self.closed_form_argmax = closed_form_argmax

    @property
    def violation(self) -> float:
        return max(0.0, self.numeric_max - self.bound)
