import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from trimlevy.inversion import cdf_from_cf, cdf_interpolant


def test_gamma_two():
    x = np.linspace(0.1, 10, 200)
    F = cdf_from_cf(lambda th: (1 - 1j * th) ** -2.0, x)
    assert np.max(np.abs(F - special.gammainc(2, x))) < 1e-4


def test_point_mass_and_symmetry():
    F = cdf_from_cf(lambda th: np.exp(1j * th), [0.5, 1.5])
    assert F[0] < 1e-3 and F[1] > 1 - 1e-3
    assert cdf_from_cf(lambda th: np.exp(-np.abs(th)), 0.0) == pytest.approx(0.5, abs=1e-9)


def test_cauchy_heavy_tail():
    x = np.array([-20.0, -1.0, 0.3, 5.0])
    F = cdf_from_cf(lambda th: np.exp(-np.abs(th)), x)
    assert np.max(np.abs(F - stats.cauchy.cdf(x))) < 1e-4


def test_info_and_normalization():
    res = cdf_from_cf(lambda th: np.exp(-0.5 * th**2), [0.0, 1.0], return_info=True)
    assert res.cap >= 64 and res.truncation_error < 1e-4
    assert res.cdf[1] == pytest.approx(stats.norm.cdf(1.0), abs=1e-6)
    with pytest.raises(ValueError):
        cdf_from_cf(lambda th: 0.5 * np.exp(-th**2), [0.0])


def test_interpolant_bounds():
    F = cdf_interpolant(lambda th: np.exp(-0.5 * th**2), -6, 6, 200)
    assert F(-10.0) == 0.0 and F(10.0) == 1.0
    assert F(0.0) == pytest.approx(0.5, abs=1e-3)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.5, 5.0), st.floats(0.3, 3.0))
def test_gamma_family_monotone_and_accurate(shape, scale):
    x = np.linspace(0.05, 8 * shape * scale, 60)
    F = cdf_from_cf(lambda th: (1 - 1j * scale * th) ** -shape, x)
    assert np.all(np.diff(F) >= 0) and F.min() >= 0 and F.max() <= 1
    assert np.max(np.abs(F - special.gammainc(shape, x / scale))) < 2e-3
