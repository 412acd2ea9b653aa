import logging
import time
from functools import wraps

import numpy as np

from cognite.kinetics.exceptions import InvalidArgument

logger = logging.getLogger(__name__)


def log_duration(f):
    @wraps(f)
    def wrapper(self, *args, **kwargs):
        start = time.perf_counter()
        result = f(self, *args, **kwargs)
        logger.debug("%s.%s took %.3fs", self.__class__.__name__, f.__name__, time.perf_counter() - start)
        return result

    return wrapper


def finite_array(values, name, dtype=float) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(name, "contains non-finite values")
    return arr


def scatter_add(index: np.ndarray, values: np.ndarray, size: int) -> np.ndarray:
    """Sums `values` into `size` bins given by `index` in a fixed order. Complex values are supported."""
    if np.iscomplexobj(values):
        return np.bincount(index, weights=values.real, minlength=size) + 1j * np.bincount(
            index, weights=values.imag, minlength=size
        )
    return np.bincount(index, weights=values, minlength=size)


def spawn_rng(seed, *keys) -> np.random.Generator:
    """Independent generator per (seed, keys), so parallel work items draw the same numbers for any thread count."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), *[int(k) for k in keys]]))
