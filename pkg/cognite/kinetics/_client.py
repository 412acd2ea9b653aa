from typing import Dict

from cognite.kinetics._api.analysis import AnalysisAPI
from cognite.kinetics._api.discretization import DiscretizationAPI
from cognite.kinetics._api.experiments import ExperimentsAPI
from cognite.kinetics._api.kernels import KernelOpsAPI
from cognite.kinetics._api.kinematics import KinematicsAPI
from cognite.kinetics._api.modes import ModeDynamicsAPI
from cognite.kinetics._api.moments import MacroMomentsAPI
from cognite.kinetics._api.nonlinear import NonlinearAPI
from cognite.kinetics._api.semigroup import SemigroupAPI
from cognite.kinetics.config import ClientConfig


class KineticsClient:
    """Entry point to the collision operators, the mode solvers and the decay checks.

    Args:
        max_workers (int): Threads used by assembly, mode sweeps and the nonlinear convolution. Defaults to
            KINETICS_MAX_WORKERS or 4.
        debug (bool): Log everything under `cognite.kinetics` at DEBUG to stderr. Defaults to KINETICS_DEBUG.
        seed (int): Base seed of all random samples. Defaults to KINETICS_SEED or 0.
        tolerances (Dict[str, float]): Overrides of the numerical budgets, keys as in `config.DEFAULT_TOLERANCES`.
        table_cache_bytes (int): Collision tables up to this size are kept in memory.
        config (ClientConfig): A ready configuration; the other arguments are ignored when given.

    Examples:

        >>> from cognite.kinetics import KineticsClient
        >>> c = KineticsClient(max_workers=2)
        >>> grid = c.discretization.build_grid(p_max=6, n_per_axis=5)
        >>> mu = c.moments.compute_mu_constants(grid)
    """

    def __init__(
        self,
        max_workers: int = None,
        debug: bool = None,
        seed: int = None,
        tolerances: Dict[str, float] = None,
        table_cache_bytes: int = None,
        config: ClientConfig = None,
    ):
        self._config = config or ClientConfig(
            max_workers=max_workers,
            debug=debug,
            seed=seed,
            tolerances=tolerances,
            table_cache_bytes=table_cache_bytes,
        )
        self.kinematics = KinematicsAPI(self._config, kinetics_client=self)
        self.discretization = DiscretizationAPI(self._config, kinetics_client=self)
        self.kernels = KernelOpsAPI(self._config, kinetics_client=self)
        self.moments = MacroMomentsAPI(self._config, kinetics_client=self)
        self.modes = ModeDynamicsAPI(self._config, kinetics_client=self)
        self.semigroup = SemigroupAPI(self._config, kinetics_client=self)
        self.nonlinear = NonlinearAPI(self._config, kinetics_client=self)
        self.analysis = AnalysisAPI(self._config, kinetics_client=self)
        self.experiments = ExperimentsAPI(self._config, kinetics_client=self)

    @property
    def config(self) -> ClientConfig:
        return self._config

    def __str__(self):
        return "%s(%s)" % (self.__class__.__name__, self._config)
