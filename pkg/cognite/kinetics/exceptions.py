from typing import Any, Dict, Optional


class InvalidArgument(ValueError):
    def __init__(self, argument, message):
        self.argument = argument
        self.message = message

    def __str__(self):
        return f"Invalid argument '{self.argument}': {self.message}"


class NumericalInconsistency(ArithmeticError):
    def __init__(self, quantity, value, message=""):
        self.quantity = quantity
        self.value = value
        self.message = message

    def __str__(self):
        msg = f"{self.quantity} is numerically inconsistent (value {self.value!r})"
        return f"{msg}: {self.message}" if self.message else msg


class GridTooCoarseError(NumericalInconsistency):
    pass


class BudgetFailure(Exception):
    """Base class for checks whose measured value exceeded its numerical budget.

    Args:
        check (str): Name of the failed check.
        value (float): Measured value.
        budget (float): Allowed value.
        report (Dict[str, Any]): Inner report, embedded verbatim in run manifests.
    """

    def __init__(self, check: str, value: float, budget: float, report: Optional[Dict[str, Any]] = None):
        self.check = check
        self.value = value
        self.budget = budget
        self.report = report or {}

    def __str__(self):
        return f"{self.check} failed: {self.value:.6g} exceeds budget {self.budget:.6g}"

    def dump(self) -> Dict[str, Any]:
        """Check, value, budget, report and the subclass fields, for embedding in a manifest."""
        return dict(vars(self))


class AssemblyAccuracyError(BudgetFailure):
    pass


class ResolutionError(BudgetFailure):
    def __str__(self):
        return (
            f"{self.check}: |freq|_min^2 * T = {self.value:.6g} exceeds {self.budget:.6g}, "
            "refine the low-frequency samples or shorten the horizon"
        )


class StepSizeError(BudgetFailure):
    pass


class ExpansionMismatchError(BudgetFailure):
    def __init__(self, check, value, budget, dominant_term, report=None):
        super().__init__(check, value, budget, report)
        self.dominant_term = dominant_term

    def __str__(self):
        return f"{super().__str__()} (dominant term {self.dominant_term})"


class InfeasibleConstantsError(BudgetFailure):
    def __init__(self, check, value, budget, freq=None, t=None, report=None):
        super().__init__(check, value, budget, report)
        self.freq = freq
        self.t = t

    def __str__(self):
        return f"no feasible constants for {self.check}; worst violation {self.value:.6g} at |freq|={self.freq}, t={self.t}"


class DataTooLargeError(BudgetFailure):
    def __init__(self, check, value, budget, threshold, report=None):
        super().__init__(check, value, budget, report)
        self.threshold = threshold

    def __str__(self):
        return (
            f"Picard iteration does not contract (ratio {self.value:.6g} >= {self.budget:.6g}); "
            f"data norm exceeds the smallness threshold {self.threshold:.6g}"
        )


class BalanceLawError(BudgetFailure):
    def __init__(self, law, value, budget, report=None):
        super().__init__(law, value, budget, report)
        self.law = law

    def __str__(self):
        return f"balance law {self.law} residual {self.value:.6g} exceeds budget {self.budget:.6g}"


class ConfigError(Exception):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        self.message = message

    def __str__(self):
        if self.line is None:
            return f"{self.path}: {self.message}"
        return f"{self.path}:{self.line}: {self.message}"
