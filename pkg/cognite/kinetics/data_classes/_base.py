import json
from collections import UserList
from typing import Any, Dict, List

import numpy as np


def _basic_obj(value):
    if isinstance(value, KineticsResource):
        return value.dump()
    if isinstance(value, np.ndarray):
        if np.iscomplexobj(value):
            return {"real": value.real.tolist(), "imag": value.imag.tolist()}
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, complex):
        return {"real": value.real, "imag": value.imag}
    if isinstance(value, dict):
        return {k: _basic_obj(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_basic_obj(v) for v in value]
    return value


class KineticsResource:
    """Base class of every result and value object.

    Public attributes are the fields; attributes starting with an underscore are caches or references and are
    never dumped."""

    _SUMMARY_FIELDS: List[str] = []

    def dump(self) -> Dict[str, Any]:
        """Dump the instance into a json serializable dictionary. Arrays become (nested) lists."""
        return {k: _basic_obj(v) for k, v in vars(self).items() if not k.startswith("_") and v is not None}

    @classmethod
    def _load(cls, data: Dict[str, Any], **kwargs):
        instance = cls(**kwargs)
        for key, value in data.items():
            if not hasattr(instance, key):
                raise AttributeError(f"{cls.__name__} has no attribute '{key}'")
            setattr(instance, key, value)
        return instance

    def summary(self) -> Dict[str, Any]:
        fields = self._SUMMARY_FIELDS or [k for k in vars(self) if not k.startswith("_")]
        return {k: _basic_obj(getattr(self, k)) for k in fields}

    def __eq__(self, other):
        return type(self) == type(other) and json.dumps(self.dump(), sort_keys=True) == json.dumps(
            other.dump(), sort_keys=True
        )

    def __str__(self):
        return json.dumps(self.summary(), indent=4, default=str)

    def __repr__(self):
        return f"{self.__class__.__name__}({', '.join(f'{k}={v}' for k, v in self.summary().items() if not isinstance(v, list))})"


class KineticsResourceList(UserList):
    _RESOURCE = None

    def __init__(self, resources=None):
        resources = list(resources or [])
        for resource in resources:
            if not isinstance(resource, self._RESOURCE):
                raise TypeError(f"All resources for class '{self.__class__.__name__}' must be of type '{self._RESOURCE.__name__}'")
        super().__init__(resources)

    def dump(self) -> List[Dict[str, Any]]:
        return [resource.dump() for resource in self.data]

    def __str__(self):
        return json.dumps([resource.summary() for resource in self.data], indent=4, default=str)
