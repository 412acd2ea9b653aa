import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List

from cognite.kinetics.config import ClientConfig

logger = logging.getLogger(__name__)


class APIClient:
    """Base class of the service objects attached to a KineticsClient.

    Args:
        config (ClientConfig): Shared process-level settings.
        kinetics_client (KineticsClient): The owning client, for calls across services.
    """

    def __init__(self, config: ClientConfig, kinetics_client=None):
        self._config = config
        self._kinetics_client = kinetics_client

    @property
    def _tolerances(self):
        return self._config.tolerances

    def _map(self, fn: Callable, items: Iterable, max_workers: int = None) -> List:
        """Apply `fn` to every item on the shared thread budget, results in submission order."""
        items = list(items)
        workers = min(max_workers or self._config.max_workers, max(len(items), 1))
        if workers == 1:
            return [fn(item) for item in items]
        logger.debug("%s: mapping %d items on %d threads", self.__class__.__name__, len(items), workers)
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(fn, items))
