import math

import numpy as np

from cognite.kinetics.data_classes._base import KineticsResource
from cognite.kinetics.exceptions import InvalidArgument


class Momentum3(KineticsResource):
    """Dimensionless momentum with c = m = 1.

    Args:
        components (Sequence[float]): The three Cartesian components.
    """

    def __init__(self, components=(0.0, 0.0, 0.0)):
        components = np.asarray(components, dtype=float)
        if components.shape != (3,):
            raise InvalidArgument("components", f"expected 3 components, got shape {components.shape}")
        if not np.all(np.isfinite(components)):
            raise InvalidArgument("components", "non-finite momentum component")
        self.components = components

    @property
    def energy(self) -> float:
        return math.sqrt(1.0 + float(self.components @ self.components))

    @property
    def velocity(self) -> np.ndarray:
        """Normalized velocity p/p⁰, always strictly inside the unit ball."""
        return self.components / self.energy

    def __add__(self, other):
        return Momentum3(self.components + other.components)

    def __neg__(self):
        return Momentum3(-self.components)

    def __str__(self):
        return "%s(%s, energy: %.6g)" % (self.__class__.__name__, np.array2string(self.components), self.energy)


class CollisionInvariants(KineticsResource):
    def __init__(self, g=None, s=None, moller=None, gamma_lorentz=None):
        self.g = g
        self.s = s
        self.moller = moller
        self.gamma_lorentz = gamma_lorentz


class PostCollision(KineticsResource):
    def __init__(self, p_out: Momentum3 = None, q_out: Momentum3 = None, cos_theta: float = None):
        self.p_out = p_out
        self.q_out = q_out
        self.cos_theta = cos_theta

    def __str__(self):
        return "%s(p_out: %s, q_out: %s, cos_theta: %.6g)" % (
            self.__class__.__name__,
            np.array2string(self.p_out.components),
            np.array2string(self.q_out.components),
            self.cos_theta,
        )


class WeightSpec(KineticsResource):
    """Momentum weight w_ℓ(p) = (p⁰)^{ℓb/2} and temporal weight ϖ_k(t) = (1+t)^k.

    Args:
        ell (float): Momentum weight order ℓ.
        b_exponent (float): Kernel decay exponent b.
        decay_order (float): Temporal exponent k, non-negative.
    """

    def __init__(self, ell=0.0, b_exponent=1.0, decay_order=0.0):
        if decay_order < 0:
            raise InvalidArgument("decay_order", f"must be non-negative, got {decay_order}")
        self.ell = float(ell)
        self.b_exponent = float(b_exponent)
        self.decay_order = float(decay_order)

    def momentum_weight(self, energy):
        return np.power(energy, 0.5 * self.ell * self.b_exponent)

    def time_weight(self, t):
        return np.power(1.0 + np.asarray(t, dtype=float), self.decay_order)
