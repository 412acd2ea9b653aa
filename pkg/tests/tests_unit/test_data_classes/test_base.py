import json

import numpy as np
import pytest

from cognite.kinetics.data_classes import (
    DissipationSample,
    DissipationSampleList,
    KineticsResource,
    ModeState,
    Momentum3,
    SlabField,
)
from cognite.kinetics.exceptions import (
    BalanceLawError,
    ConfigError,
    ExpansionMismatchError,
    InfeasibleConstantsError,
    InvalidArgument,
)


class MyResource(KineticsResource):
    _SUMMARY_FIELDS = ["var_a"]

    def __init__(self, var_a=None, var_b=None):
        self.var_a = var_a
        self.var_b = var_b
        self._cache = {"hidden": 1}


class TestKineticsResource:
    def test_dump(self):
        assert {"var_a": 1, "var_b": [1.0, 2.0]} == MyResource(1, np.array([1.0, 2.0])).dump()

    def test_dump_skips_none_and_private(self):
        assert {"var_a": 1} == MyResource(1).dump()

    def test_dump_complex(self):
        dumped = MyResource(1j, np.array([1 + 2j])).dump()
        assert {"real": 0.0, "imag": 1.0} == dumped["var_a"]
        assert {"real": [1.0], "imag": [2.0]} == dumped["var_b"]
        json.dumps(dumped)

    def test_dump_numpy_scalars(self):
        dumped = MyResource(np.float64(0.5), {"n": np.int64(3), "ok": np.bool_(True)}).dump()
        assert {"var_a": 0.5, "var_b": {"n": 3, "ok": True}} == dumped
        assert isinstance(dumped["var_b"]["n"], int)

    def test_dump_nested(self):
        assert {"var_a": {"var_a": 2}} == MyResource(MyResource(2)).dump()

    def test_load(self):
        assert MyResource(1, 2) == MyResource._load({"var_a": 1, "var_b": 2})

    def test_load_unknown_attribute(self):
        with pytest.raises(AttributeError):
            MyResource._load({"var_c": 1})

    def test_eq(self):
        assert MyResource(1, [1.0]) == MyResource(1, np.array([1.0]))
        assert MyResource(1) != MyResource(2)
        assert MyResource(1) != DissipationSample()

    def test_summary_and_str(self):
        resource = MyResource(1, 2)
        assert {"var_a": 1} == resource.summary()
        assert {"var_a": 1} == json.loads(str(resource))
        assert "MyResource(var_a=1)" == repr(resource)


class TestKineticsResourceList:
    def test_type_check(self):
        with pytest.raises(TypeError, match="DissipationSample"):
            DissipationSampleList([MyResource()])

    def test_dump_and_aggregates(self):
        samples = DissipationSampleList(
            [
                DissipationSample(freq_norm=0.1, lyapunov_margin=0.3, monotone=True),
                DissipationSample(freq_norm=1.0, lyapunov_margin=0.1, monotone=False),
            ]
        )
        assert 0.1 == samples.worst_lyapunov_margin
        assert not samples.all_monotone
        assert [{"freq_norm": 0.1, "lyapunov_margin": 0.3, "monotone": True}] == samples.dump()[:1]


class TestValueObjects:
    def test_momentum(self):
        p = Momentum3([3.0, 4.0, 0.0])
        assert np.sqrt(26.0) == pytest.approx(p.energy)
        np.testing.assert_array_equal([0.0, 0.0, 0.0], (p + -p).components)

    def test_mode_state(self):
        state = ModeState(freq=(3.0, 4.0, 0.0), values=[1.0, 2.0])
        assert 5.0 == state.freq_norm
        assert np.iscomplexobj(state.values)
        with pytest.raises(InvalidArgument):
            ModeState(freq=(1.0, 0.0))
        with pytest.raises(InvalidArgument):
            ModeState(values=[np.nan])

    def test_slab_field(self):
        values = np.array([[1 - 1j], [2.0], [1 + 1j]])
        slab = SlabField(dk=0.5, values=values)
        assert 3 == slab.n_freqs
        np.testing.assert_allclose([-0.5, 0.0, 0.5], slab.freq_line)
        assert 0.0 == slab.hermitian_defect()
        assert 2.0 == SlabField(dk=0.5, values=np.array([[1.0], [0.0], [1 + 1j]])).hermitian_defect()


class TestExceptions:
    def test_budget_failure_dump(self):
        error = BalanceLawError("3.8", 1.0, 0.5, {"dt": 0.05})
        assert {"check": "3.8", "value": 1.0, "budget": 0.5, "report": {"dt": 0.05}, "law": "3.8"} == error.dump()
        json.dumps(error.dump())

    def test_messages(self):
        assert "(dominant term H3)" in str(ExpansionMismatchError("vidav", 1.0, 0.1, "H3"))
        error = InfeasibleConstantsError("energy", -0.1, 0.0, freq=0.5, t=2.0)
        assert (0.5, 2.0) == (error.freq, error.t)
        assert "Invalid argument 'r': bad" == str(InvalidArgument("r", "bad"))
        assert "a.ini:3: bad" == str(ConfigError("a.ini", 3, "bad"))
