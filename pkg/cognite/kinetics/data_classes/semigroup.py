import numpy as np

from cognite.kinetics.data_classes._base import KineticsResource, KineticsResourceList


class VidavTerms(KineticsResource):
    """The five terms of the twice-iterated Duhamel expansion of U(t)f̂₀ at one (freq, t).

    Args:
        freq_norm (float): |freq|.
        t (float): Time.
        terms (np.ndarray): H₁..H₅ stacked, shape (5, n_nodes), complex.
        residual (float): ‖U(t)f̂₀ − ΣHᵢ‖ relative to ‖U(t)f̂₀‖.
        budget (float): Allowed residual.
    """

    _SUMMARY_FIELDS = ["freq_norm", "t", "term_norms", "residual", "budget"]

    def __init__(self, freq_norm=None, t=None, terms=None, residual=None, budget=None, duhamel_residual=None):
        self.freq_norm = freq_norm
        self.t = t
        self.terms = terms
        self.residual = residual
        self.budget = budget
        self.duhamel_residual = duhamel_residual

    @property
    def term_norms(self):
        return [float(np.linalg.norm(h)) for h in self.terms]

    @property
    def dominant_term(self) -> str:
        return "H%d" % (int(np.argmax(self.term_norms[1:])) + 2)

    def __getattr__(self, item):
        if item in ("H1", "H2", "H3", "H4", "H5") and self.__dict__.get("terms") is not None:
            return self.__dict__["terms"][int(item[1]) - 1]
        raise AttributeError(item)


class VidavTermsList(KineticsResourceList):
    _RESOURCE = VidavTerms


class SupNormDecayReport(KineticsResource):
    """Weighted sup-norm series sup_p w_ℓ(p)(∫|f̂|² dfreq)^{1/2} and its fitted decay."""

    _SUMMARY_FIELDS = ["ell", "decay_order", "fit", "passed"]

    def __init__(self, times=None, supnorm=None, ell=None, decay_order=None, fit=None, passed=None):
        self.times = times
        self.supnorm = supnorm
        self.ell = ell
        self.decay_order = decay_order
        self.fit = fit
        self.passed = passed


class BoundCheckReport(KineticsResource):
    """Worst ratio of a sampled quantity to its claimed bound; the check passes when `worst_ratio` ≤ 1 + tol."""

    def __init__(self, check=None, worst_ratio=None, n_samples=None, constant=None, passed=None, details=None):
        self.check = check
        self.worst_ratio = worst_ratio
        self.n_samples = n_samples
        self.constant = constant
        self.passed = passed
        self.details = details
