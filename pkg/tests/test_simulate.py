import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavespec import (
    ArgumentError,
    ConfigurationError,
    SpectrumSpec,
    autocov_from_spectrum,
    build_filter,
    operator_matrix,
    simulate,
    spectrum_from_autocov,
)
from wavespec.gridio import encode_grid

HAAR = build_filter("haar")


def test_zero_spec_gives_zero_field():
    spec = SpectrumSpec(J=3, layers={(1, "h"): 0.0})
    assert spec.is_zero()
    assert np.all(simulate(spec, (32, 32), 1).values == 0)


def test_determinism():
    spec = SpectrumSpec.constant(4, {(2, "v"): 1.0, (3, "d"): 0.5})
    a = simulate(spec, (64, 64), 7)
    b = simulate(spec, (64, 64), 7)
    c = simulate(spec, (64, 64), 8)
    assert encode_grid(a) == encode_grid(b)
    assert not np.allclose(a.values, c.values)


def test_layers_use_independent_substreams():
    # adding a layer must not change the noise drawn for another layer
    one = simulate(SpectrumSpec.constant(3, {(2, "h"): 1.0}), (32, 32), 3).values
    both = simulate(SpectrumSpec.constant(3, {(2, "h"): 1.0, (1, "d"): 1.0}), (32, 32), 3).values
    only_d = simulate(SpectrumSpec.constant(3, {(1, "d"): 1.0}), (32, 32), 3).values
    np.testing.assert_allclose(both, one + only_d, atol=1e-12)


def test_simulate_errors():
    spec = SpectrumSpec.constant(6, {(6, "h"): 1.0})
    with pytest.raises(ArgumentError):
        simulate(spec, (32, 32), 0)
    with pytest.raises(ArgumentError):
        simulate(spec, (96, 128), 0)


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        SpectrumSpec(J=2, layers={(3, "h"): 1.0})
    with pytest.raises(ConfigurationError):
        SpectrumSpec(J=2, layers={(1, "x"): 1.0})
    with pytest.raises(ConfigurationError):
        SpectrumSpec(J=2, layers={(1, "h"): -1.0})
    with pytest.raises(ConfigurationError):
        SpectrumSpec.from_dict({"spectrum": []})


def test_from_dict_and_grid_layers():
    spec = SpectrumSpec.from_dict(
        {"J": 3, "spectrum": [{"scale": 1, "direction": "d", "energy": 2.0}, {"scale": 2, "direction": "h", "grid": [[0, 1], [2, 3]]}]}
    )
    assert spec.vector_at((0.3, 0.3))[2] == 2.0
    g = spec.energy_grid(2, "h", (8, 8))
    # corners clamp to the coarse cell values, centre is the bilinear mean
    assert g[0, 0] == 0.0 and g[-1, -1] == 3.0
    assert spec.vector_at((0.5, 0.5))[3] == pytest.approx(1.5)
    assert np.all(np.diff(g, axis=0) >= 0) and np.all(np.diff(g, axis=1) >= 0)


def test_spatially_varying_amplitude():
    # energy only in the left half: the right half of the field is quiet
    spec = SpectrumSpec(J=2, layers={(1, "d"): [[1.0, 1.0, 0.0, 0.0]] * 2})
    x = simulate(spec, (64, 64), 0).values
    assert x[:, 4:24].var() > 0.5 and x[:, 42:62].var() < 1e-12


def test_autocov_examples():
    spec = SpectrumSpec.constant(1, {(1, "d"): 1.0})
    assert autocov_from_spectrum(spec, lags=[(0, 0)])[0] == pytest.approx(1.0)
    assert autocov_from_spectrum(spec, lags=[(1, 1)])[0] == pytest.approx(0.25)
    assert np.all(autocov_from_spectrum(SpectrumSpec(J=3)) == 0)
    with pytest.raises(ArgumentError):
        autocov_from_spectrum(spec, lags=[(5, 0)])


def test_delta_autocov():
    op = operator_matrix(3, HAAR)
    m = 7
    c = np.zeros((2 * m + 1, 2 * m + 1))
    c[m, m] = 2.5
    np.testing.assert_allclose(spectrum_from_autocov(c, op), 2.5 * op.inverse @ np.ones(9), atol=1e-10)
    np.testing.assert_allclose(spectrum_from_autocov(np.zeros_like(c), op), 0.0)
    with pytest.raises(ArgumentError):
        spectrum_from_autocov(np.zeros((5, 5)), op)
    with pytest.raises(ArgumentError):
        spectrum_from_autocov(np.zeros((6, 6)), op)


@settings(max_examples=30, deadline=None)
@given(J=st.integers(1, 5), seed=st.integers(0, 2**32 - 1), family=st.sampled_from(["haar", "d4"]))
def test_roundtrip(J, seed, family):
    filt = build_filter(family)
    rng = np.random.default_rng(seed)
    S = rng.exponential(size=3 * J)
    spec = SpectrumSpec.constant(J, {(j, l): S[3 * (j - 1) + k] for j in range(1, J + 1) for k, l in enumerate("hvd")})
    c = autocov_from_spectrum(spec, filt=filt)
    assert np.abs(c - c[::-1, ::-1]).max() < 1e-12
    back = spectrum_from_autocov(c, operator_matrix(J, filt), filt)
    assert np.abs(back - S).max() < 1e-8


def sample_autocov(x, lag):
    return float(np.mean(x * np.roll(x, (-lag[0], -lag[1]), axis=(0, 1))))


def test_stationary_autocovariance():
    spec = SpectrumSpec.constant(3, {(1, "d"): 1.0, (2, "h"): 1.0, (3, "v"): 0.5})
    lags = [(0, 0), (1, 1), (0, 1), (1, 0), (2, 0)]
    theory = autocov_from_spectrum(spec, lags=lags)
    est = np.zeros(len(lags))
    for seed in range(20):
        x = simulate(spec, (512, 512), seed).values
        est += [sample_autocov(x, t) for t in lags]
    est /= 20
    for t, a, b in zip(lags, est, theory):
        assert abs(a - b) < 0.1 * abs(b), (t, a, b)
