import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tsleig.circle import (ENV_OVERSAMPLE, GridFunction, coefficient_indices, continuous_log,
                           grid_size_for, plus_projection, pv_cauchy, to_coefficients,
                           to_samples, winding_number)
from tsleig.errors import NearZeroSample, UnresolvedPhase


def test_grid_size_default_and_override(monkeypatch):
    monkeypatch.delenv(ENV_OVERSAMPLE, raising=False)
    assert grid_size_for(80) == 2048
    assert grid_size_for(20) == 512
    assert grid_size_for(1) == 64
    monkeypatch.setenv(ENV_OVERSAMPLE, "64")
    assert grid_size_for(80) == 8192
    assert grid_size_for(80, oversample=4) == 512


def test_grid_function_validates_size():
    with pytest.raises(ValueError):
        GridFunction(np.ones(12))
    with pytest.raises(ValueError):
        GridFunction(np.ones(4))
    g = GridFunction.from_function(lambda t: t ** 2, 16)
    assert g.size == 16
    assert g.values.flags.writeable is False


def test_coefficients_of_trig_polynomial():
    N = 32
    g = GridFunction.from_function(lambda t: 3 + 2j * t ** 2 - 0.5 / t ** 5, N)
    c = to_coefficients(g)
    j = coefficient_indices(N)
    expected = np.zeros(N, complex)
    expected[j == 0] = 3
    expected[j == 2] = 2j
    expected[j == -5] = -0.5
    assert np.allclose(c, expected, atol=1e-15)
    assert np.allclose(plus_projection(c)[j < 0], 0)
    assert np.allclose(plus_projection(c)[j >= 0], expected[j >= 0])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=8, max_size=8))
def test_sample_coefficient_roundtrip(vals):
    g = GridFunction(np.array(vals))
    back = to_samples(to_coefficients(g))
    assert np.allclose(back.values, g.values, atol=1e-12)


def test_continuous_log_tracks_large_phase():
    N = 256
    t = GridFunction.nodes(N)
    f = 0.3 + 2.5j * (t + 1 / t) + 0.4j * (t ** 2 + t ** -2)  # imaginary part exceeds pi
    br = continuous_log(GridFunction(np.exp(f)))
    assert br.winding == 0
    # the branch starts at the principal value, so it differs from f by a 2 pi i multiple
    shift = (br.samples.values - f) / (2j * np.pi)
    assert np.allclose(shift, np.round(shift[0].real), atol=1e-12)


def test_winding_numbers():
    for k in (-2, 0, 1, 3):
        g = GridFunction.from_function(lambda t: t ** k * (2 + 0.5 * t), 64)
        assert winding_number(g) == k


def test_log_failures():
    t = GridFunction.nodes(64)
    with pytest.raises(NearZeroSample):
        continuous_log(GridFunction(t - t[5]))
    with pytest.raises(UnresolvedPhase):
        continuous_log(GridFunction(t ** 30))
    with pytest.raises(UnresolvedPhase):
        continuous_log(GridFunction(np.ones(64)), band=16)


def test_pv_cauchy_monomials():
    N = 64
    t0 = np.exp(0.7j)
    for m in (-3, 0, 2, 5):
        g = GridFunction.from_function(lambda t: t ** m, N)
        sign = 0.5 if m >= 0 else -0.5
        assert pv_cauchy(g, t0) == pytest.approx(sign * t0 ** m, abs=1e-14)


def test_pv_cauchy_against_regularized_quadrature():
    # PV int f / (tau - t0) = int (f - f(t0)) / (tau - t0) + f(t0) * (pi i)
    f = lambda t: np.exp(0.3 * t + 0.2 / t) + 1j * t ** 3
    t0 = np.exp(1.234j)
    M = 1 << 14
    tau = np.exp(2j * np.pi * (np.arange(M) + 0.5) / M)
    integrand = (f(tau) - f(t0)) / (tau - t0) * 1j * tau
    quad = integrand.mean() * 2 * np.pi / (2j * np.pi) + 0.5 * f(t0)
    assert pv_cauchy(GridFunction.from_function(f, 64), t0) == pytest.approx(quad, abs=1e-10)


def test_pv_cauchy_rejects_off_circle():
    g = GridFunction(np.ones(8))
    with pytest.raises(ValueError):
        pv_cauchy(g, 1.01)
    out = pv_cauchy(g, np.exp(1j * np.array([0.1, 0.2])))
    assert out.shape == (2,)
