from cognite.kinetics._client import KineticsClient
from cognite.kinetics._version import __version__
