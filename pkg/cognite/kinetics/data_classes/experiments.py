from typing import Any, Dict, List

from cognite.kinetics.data_classes._base import KineticsResource, KineticsResourceList
from cognite.kinetics.data_classes.kernels import KernelModel
from cognite.kinetics.data_classes.modes import RateSpec

EXPERIMENT_KINDS = [
    "linear_decay",
    "lyapunov_verify",
    "vidav_check",
    "nonlinear_slab",
    "homogeneous_relax",
    "inequality_suite",
]


class ExperimentConfig(KineticsResource):
    """Resolved experiment configuration, one dict per config section.

    Args:
        experiment (Dict[str, Any]): kind, seed.
        kernel (Dict[str, Any]): kind, b, a, gamma, chi_epsilon, g_min.
        grid (Dict[str, Any]): p_max, n_per_axis, rule, sphere_order.
        frequencies (Dict[str, Any]): n, k_min, k_max.
        time (Dict[str, Any]): t_final, dt, method, snapshot_every.
        rate (Dict[str, Any]): r, m, ell, decay_order, fit_t_lo, fit_t_hi.
        nonlinear (Dict[str, Any]): n_line, dk, amplitude, n_iters, threshold, cadence, n_outer.
        tolerances (Dict[str, float]): Numerical budgets.
        output (Dict[str, Any]): dir.
        overrides (List[str]): Tolerance keys that were set explicitly.
        source (str): Path of the config file.
    """

    _SUMMARY_FIELDS = ["source", "experiment", "kernel", "grid"]

    def __init__(
        self,
        experiment: Dict[str, Any] = None,
        kernel: Dict[str, Any] = None,
        grid: Dict[str, Any] = None,
        frequencies: Dict[str, Any] = None,
        time: Dict[str, Any] = None,
        rate: Dict[str, Any] = None,
        nonlinear: Dict[str, Any] = None,
        tolerances: Dict[str, float] = None,
        output: Dict[str, Any] = None,
        overrides: List[str] = None,
        source: str = None,
    ):
        self.experiment = experiment or {}
        self.kernel = kernel or {}
        self.grid = grid or {}
        self.frequencies = frequencies or {}
        self.time = time or {}
        self.rate = rate or {}
        self.nonlinear = nonlinear or {}
        self.tolerances = tolerances or {}
        self.output = output or {}
        self.overrides = overrides or []
        self.source = source

    @property
    def kind(self) -> str:
        return self.experiment["kind"]

    @property
    def seed(self) -> int:
        return self.experiment["seed"]

    def kernel_model(self) -> KernelModel:
        k = self.kernel
        return KernelModel(
            kind=k["kind"],
            b_exponent=k["b"],
            a_exponent=k["a"],
            angular_exponent=k["gamma"],
            chi_epsilon=k["chi_epsilon"],
            g_min=k["g_min"],
        )

    def rate_spec(self) -> RateSpec:
        r = self.rate
        return RateSpec(r=r["r"], m=r["m"], ell=r["ell"], decay_order=r["decay_order"])


class RunManifest(KineticsResource):
    """Everything needed to reproduce a run: resolved config, seed, versions, tolerances, results, diagnostics.

    Args:
        kind (str): Experiment kind, or "verify" / "fit-constants".
        status (str): "ok", "failed" (a check did not pass) or "budget_failure".
        versions (Dict[str, str]): Package and interpreter versions.
        seed (int): Base seed.
        threads (int): Worker threads.
        config (Dict[str, Any]): Resolved config sections.
        tolerances (Dict[str, float]): Budgets in effect.
        overrides (List[str]): Tolerance keys changed from their defaults.
        results (Dict[str, Any]): Fitted exponents, constants and verdicts.
        diagnostics (Dict[str, Any]): Assembly and quadrature diagnostics, leakage included.
        files (List[str]): Artifacts written next to the manifest.
        failure (Dict[str, Any]): The failing check and its report, for status "budget_failure".
    """

    _SUMMARY_FIELDS = ["kind", "status", "seed", "threads", "files"]

    def __init__(
        self,
        kind=None,
        status="ok",
        versions=None,
        seed=None,
        threads=None,
        config=None,
        tolerances=None,
        overrides=None,
        results=None,
        diagnostics=None,
        files=None,
        failure=None,
    ):
        self.kind = kind
        self.status = status
        self.versions = versions
        self.seed = seed
        self.threads = threads
        self.config = config
        self.tolerances = tolerances
        self.overrides = overrides
        self.results = results or {}
        self.diagnostics = diagnostics or {}
        self.files = files or []
        self.failure = failure

    @property
    def passed(self) -> bool:
        return self.status == "ok"


class PropertyCheck(KineticsResource):
    """One entry of the property suite."""

    _SUMMARY_FIELDS = ["name", "passed", "value", "budget"]

    def __init__(self, name=None, passed=None, value=None, budget=None, details=None):
        self.name = name
        self.passed = passed
        self.value = value
        self.budget = budget
        self.details = details


class PropertyCheckList(KineticsResourceList):
    _RESOURCE = PropertyCheck

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.data)

    def failures(self) -> List[str]:
        return [check.name for check in self.data if not check.passed]
