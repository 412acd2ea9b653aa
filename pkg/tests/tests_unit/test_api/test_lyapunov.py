import numpy as np
import pytest

from cognite.kinetics.data_classes import DissipationSampleList, EquivalenceReport, LyapunovConstants
from cognite.kinetics.exceptions import InvalidArgument

FREQ_NORMS = np.logspace(-2, 1, 8)
SAMPLE = dict(n_states=4, t_final=20.0, n_snapshots=11)


@pytest.fixture(scope="module")
def constants(client, matrices, mu):
    return client.modes.lyapunov.fit_lyapunov_constants(matrices, mu, FREQ_NORMS, **SAMPLE)


class TestFitLyapunovConstants:
    def test_constants(self, constants):
        assert isinstance(constants, LyapunovConstants)
        assert constants.kappa1 > 0
        assert 0 < constants.kappa3 <= 1.0
        assert 0 < constants.kappa4 <= 0.5
        assert 0 < constants.kappa5 <= 0.5
        assert constants.lambda_rate > 0
        assert constants.free_energy_constant >= 0
        assert constants.worst_margin >= 0

    def test_equivalence_bounds_over_the_sample(self, constants):
        assert 0 < constants.c1 <= constants.c2 < np.inf

    def test_deterministic(self, client, matrices, mu, constants):
        again = client.modes.lyapunov.fit_lyapunov_constants(matrices, mu, FREQ_NORMS, **SAMPLE)
        assert constants == again

    def test_zero_frequency_is_allowed(self, client, matrices, mu):
        fitted = client.modes.lyapunov.fit_lyapunov_constants(matrices, mu, [0.0, 0.1, 2.0], **SAMPLE)
        assert fitted.worst_margin >= 0

    @pytest.mark.parametrize("freq_norms", [[-0.1, 1.0], [0.0]])
    def test_invalid_frequencies(self, client, matrices, mu, freq_norms):
        with pytest.raises(InvalidArgument):
            client.modes.lyapunov.fit_lyapunov_constants(matrices, mu, freq_norms, **SAMPLE)


class TestVerify:
    def test_margins(self, client, matrices, mu, constants):
        samples = client.modes.lyapunov.verify(matrices, mu, constants, FREQ_NORMS, **SAMPLE)
        assert isinstance(samples, DissipationSampleList)
        assert len(FREQ_NORMS) == len(samples)
        np.testing.assert_allclose(FREQ_NORMS, [s.freq_norm for s in samples])
        assert samples.worst_lyapunov_margin >= 0
        assert samples.all_monotone
        for sample in samples:
            assert 0 <= sample.t <= SAMPLE["t_final"]


class TestEquivalence:
    def test_bounds(self, client, matrices, mu, constants):
        report = client.modes.lyapunov.equivalence(matrices, mu, constants, n_states=40, freq_norms=FREQ_NORMS)
        assert isinstance(report, EquivalenceReport)
        assert 40 == report.n_states
        assert 0 < report.c1 <= report.c2
        assert report.min_energy > 0
