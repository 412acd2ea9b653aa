import numpy as np

from cognite.kinetics.data_classes._base import KineticsResource, KineticsResourceList
from cognite.kinetics.exceptions import InvalidArgument


class SlabField(KineticsResource):
    """Perturbation depending on x₁ only, stored on the frequency line k₁ = jΔk, j = -J..J.

    Args:
        dk (float): Line spacing Δk.
        values (np.ndarray): Complex nodal values, shape (2J+1, n_nodes), row j+J holds frequency jΔk.
        t (float): Time.
    """

    _SUMMARY_FIELDS = ["dk", "n_freqs", "t"]

    def __init__(self, dk=None, values=None, t=0.0):
        self.dk = dk
        self.values = None if values is None else np.asarray(values, dtype=complex)
        self.t = t
        if self.values is not None and self.values.shape[0] % 2 != 1:
            raise InvalidArgument("values", "the frequency line must be symmetric, an odd number of rows")

    @property
    def n_freqs(self) -> int:
        return 0 if self.values is None else self.values.shape[0]

    @property
    def freq_line(self) -> np.ndarray:
        half = self.n_freqs // 2
        return self.dk * np.arange(-half, half + 1)

    def hermitian_defect(self) -> float:
        """max |f̂(-k, p) - conj f̂(k, p)| over the line and the grid."""
        flipped = self.values[::-1]
        return float(np.max(np.abs(flipped - np.conj(self.values)))) if self.values.size else 0.0


class HomogeneousState(KineticsResource):
    def __init__(self, F=None, t=0.0):
        self.F = F
        self.t = t


class PicardReport(KineticsResource):
    """Contraction report of the mild-solution iteration.

    Args:
        increments (List[float]): ‖f^{(n+1)} − f^{(n)}‖ in the weighted sup norm.
        ratios (List[float]): Successive increment ratios.
        data_norm (float): ‖w_{ℓ+k}f̂₀‖ of the data.
        threshold (float): Configured smallness threshold.
        ball_radius (float): Largest weighted sup norm of the iterates.
    """

    _SUMMARY_FIELDS = ["increments", "ratios", "data_norm", "threshold", "ball_radius"]

    def __init__(
        self, increments=None, ratios=None, data_norm=None, threshold=None, ball_radius=None, amplitude=None
    ):
        self.increments = increments or []
        self.ratios = ratios or []
        self.data_norm = data_norm
        self.threshold = threshold
        self.ball_radius = ball_radius
        self.amplitude = amplitude

    @property
    def contracting(self) -> bool:
        return all(r < 1.0 for r in self.ratios)


class PicardResult(KineticsResource):
    _SUMMARY_FIELDS = ["report"]

    def __init__(self, times=None, iterates=None, report: PicardReport = None, dk=None):
        self.times = times
        self.iterates = iterates
        self.report = report
        self.dk = dk

    @property
    def solution(self) -> np.ndarray:
        """Last iterate, shape (n_times, n_freqs, n_nodes)."""
        return self.iterates[-1]


class PositivityTrajectory(KineticsResource):
    """Trajectory of one outer iterate of the gain/loss scheme."""

    _SUMMARY_FIELDS = ["iterate", "min_value", "n_snapshots"]

    def __init__(self, iterate=None, times=None, values=None):
        self.iterate = iterate
        self.times = times
        self.values = values

    @property
    def min_value(self) -> float:
        return float(np.min(self.values))

    @property
    def n_snapshots(self) -> int:
        return len(self.times)


class PositivityTrajectoryList(KineticsResourceList):
    _RESOURCE = PositivityTrajectory

    def sup_differences(self):
        return [
            float(np.max(np.abs(b.values - a.values))) for a, b in zip(self.data[:-1], self.data[1:])
        ]


class RelaxationSeries(KineticsResource):
    """Homogeneous relaxation run: entropy, extremes and moment drifts per step."""

    _SUMMARY_FIELDS = ["n_steps", "min_value", "entropy_drop", "max_moment_drift"]

    def __init__(self, times=None, values=None, entropy=None, moments=None):
        self.times = times
        self.values = values
        self.entropy = entropy
        self.moments = moments

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1

    @property
    def min_value(self) -> float:
        return float(np.min(self.values))

    @property
    def entropy_drop(self) -> float:
        """Largest decrease of H between consecutive steps, zero when H is monotone."""
        return float(max(0.0, -np.min(np.diff(self.entropy)))) if len(self.entropy) > 1 else 0.0

    @property
    def max_moment_drift(self) -> float:
        return float(np.max(np.abs(self.moments - self.moments[0])))


class ConsistencyReport(KineticsResource):
    def __init__(self, max_difference=None, horizon=None, amplitude=None):
        self.max_difference = max_difference
        self.horizon = horizon
        self.amplitude = amplitude
