from typing import Dict

import numpy as np

from cognite.kinetics.data_classes._base import KineticsResource


class MuConstants(KineticsResource):
    """The seven J-moments and the constants α₁, α₂, β derived from them.

    mu0 = ∫p⁰J, mu00 = ∫(p⁰)²J, mu11 = ∫p₁²J, mu11_0 = ∫p₁²J/p⁰, mu1122_00 = ∫p₁²p₂²J/(p⁰)²,
    mu1111_00 = ∫p₁⁴J/(p⁰)², mu11_00 = ∫p₁²J/(p⁰)².
    """

    def __init__(
        self,
        mu0=None,
        mu00=None,
        mu11=None,
        mu11_0=None,
        mu1122_00=None,
        mu1111_00=None,
        mu11_00=None,
        alpha1=None,
        alpha2=None,
        beta=None,
    ):
        self.mu0 = mu0
        self.mu00 = mu00
        self.mu11 = mu11
        self.mu11_0 = mu11_0
        self.mu1122_00 = mu1122_00
        self.mu1111_00 = mu1111_00
        self.mu11_00 = mu11_00
        self.alpha1 = alpha1
        self.alpha2 = alpha2
        self.beta = beta

    @classmethod
    def from_moments(cls, mu0, mu00, mu11, mu11_0, mu1122_00, mu1111_00, mu11_00) -> "MuConstants":
        alpha1 = (mu1122_00 - mu11 * mu11_0 / mu0) / (mu11_0 - mu11 / mu0)
        alpha2 = mu11_0 / mu11
        beta = -3.0 * mu1122_00 / (mu1122_00 - mu1111_00) - 1.0
        return cls(mu0, mu00, mu11, mu11_0, mu1122_00, mu1111_00, mu11_00, alpha1, alpha2, beta)

    @property
    def variance(self) -> float:
        return self.mu00 - self.mu0 ** 2

    def alpha1_residual(self) -> float:
        a1 = self.alpha1
        return self.mu11 / self.mu0 * (self.mu11_0 - a1) - self.mu1122_00 + a1 * self.mu11_0

    def beta_bracket(self) -> float:
        """(β+1)(μ¹¹²²₀₀ − μ¹¹¹¹₀₀)/3 + μ¹¹²²₀₀, zero by the choice of β."""
        return (self.beta + 1.0) * (self.mu1122_00 - self.mu1111_00) / 3.0 + self.mu1122_00

    def checks(self) -> Dict[str, float]:
        return {
            "variance": self.variance,
            "alpha1_residual": self.alpha1_residual(),
            "beta_bracket": self.beta_bracket(),
            "isotropy_ratio": self.mu1111_00 / self.mu1122_00,
            "lambda_coercivity": self.mu11_00 - self.alpha2 * self.mu11_0,
            "mu1122_00": self.mu1122_00,
        }


class MacroCoefficients(KineticsResource):
    """Coefficients (a, b, c) of Ph = (a + b·p + c p⁰)√J."""

    def __init__(self, a=None, b=None, c=None):
        self.a = a
        self.b = b
        self.c = c

    def __str__(self):
        return "%s(a: %s, b: %s, c: %s)" % (self.__class__.__name__, self.a, np.array2string(np.asarray(self.b)), self.c)


class MomentSet(KineticsResource):
    """High order moments Θ_{mj}(h), Λ_m(h) and A(h)."""

    def __init__(self, theta=None, lambda_=None, a_func=None):
        self.theta = theta
        self.lambda_ = lambda_
        self.a_func = a_func


class BalanceReport(KineticsResource):
    """Max-over-time residuals of the balance laws along one trajectory.

    Args:
        residuals (Dict[str, float]): Residual per law, relative to the largest term of that law.
        dt (float): Snapshot spacing used by the finite-difference time derivatives.
        budget (float): Allowed residual.
        constants (Dict[str, float]): Measured residual / dt² per law.
    """

    _SUMMARY_FIELDS = ["residuals", "dt", "budget", "worst_law"]

    def __init__(self, residuals=None, dt=None, budget=None, constants=None, freq=None):
        self.residuals = residuals or {}
        self.dt = dt
        self.budget = budget
        self.constants = constants or {}
        self.freq = freq

    @property
    def worst_law(self):
        if not self.residuals:
            return None
        return max(self.residuals, key=self.residuals.get)

    @property
    def passed(self) -> bool:
        return all(v <= self.budget for v in self.residuals.values())
