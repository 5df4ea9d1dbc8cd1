import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from trimlevy import measures as M

# Frozen oracles: mpmath at 40 digits (findroot, tanh-sinh quad with split
# points, power series for the compensated integrand near 0).
GAMMA_INV = {0.01: 3.21051263065061827, 1.0: 0.264737010451543159, 10.0: math.exp(-10.5771901741930876)}
TEMPERED_INV = {1e-3: 6.01096281042324674, 1.0: 0.426302751006862746, 1e3: 9.99998000005999979e-07}
TEMPERED_M1_02_3 = 1.18879866563613310
TEMPERED_M2_0_01 = 0.0111084639524658710
TEMPERED_COMP_THETA2 = complex(-0.678189715993392176, -0.279561719296268515)
GAMMA_MINUS_ONE = complex(-0.515600779518562576, 1.00311039815837369)
ATOM_PLAIN = complex(0.376869679848888774, 0.578021782022309929)
RESTRICTED_EXP = complex(-2.50738420082337413, -0.924498858661961953)
PSI_TWO_SIDED_15 = complex(-17.3597347756442507, -2.01538334620130293)


@pytest.fixture
def atomic():
    return M.atomic_stable(1.0, [(1.0, 0.5)])


def test_stable_tail_and_inverse():
    s = M.pure_stable(0.5)
    assert s.positive_tail(4.0) == pytest.approx(0.5, abs=1e-15)
    assert M.pure_stable(1.0).positive_tail(1.0) == 1.0
    assert s.inverse_positive_tail(4.0) == pytest.approx(0.0625, abs=1e-15)
    assert M.pure_stable(1.0).inverse_positive_tail(1.0) == 1.0
    # tail matches numerical integration of the density
    val, _ = integrate.quad(lambda x: 0.5 * x**-1.5, 4.0, np.inf)
    assert val == pytest.approx(0.5, rel=1e-9)


def test_atomic_tail(atomic):
    assert atomic.positive_tail(1.0) == pytest.approx(1.0)
    assert atomic.positive_tail(1 - 1e-9) == pytest.approx(1.5, abs=1e-8)
    assert atomic.positive_tail_left(1.0) == pytest.approx(1.5)
    assert atomic.inverse_positive_tail(1.2) == 1.0
    assert atomic.inverse_positive_tail(1.0) == 1.0
    assert atomic.inverse_positive_tail(1.5) == 1.0
    assert atomic.inverse_positive_tail(1.6) == pytest.approx(1 / 1.1)
    assert atomic.inverse_positive_tail(0.5) == pytest.approx(2.0)


def test_atomic_inverse_brute_force(atomic):
    grid = np.linspace(0.01, 5, 200001)
    tails = atomic.positive_tail(grid)
    for y in [0.3, 0.99, 1.0, 1.2, 1.49, 1.5, 1.51, 4.0]:
        brute = grid[np.argmax(tails <= y)]
        assert atomic.inverse_positive_tail(y) == pytest.approx(brute, abs=3e-5)


def test_domain_errors():
    s = M.pure_stable(0.5)
    with pytest.raises(ValueError):
        s.positive_tail(0.0)
    with pytest.raises(ValueError):
        s.inverse_positive_tail(-1.0)
    with pytest.raises(ValueError):
        M.pure_stable(2.5)
    with pytest.raises(ValueError):
        M.LevyModel(M.Kind.PURE_STABLE, 0.5, a_plus=0.0)
    with pytest.raises(ValueError):
        M.LevyModel(M.Kind.PURE_STABLE, 1.5, drift=0.0)


def test_gamma_and_tempered_inverse():
    g = M.gamma_subordinator()
    for v, x in GAMMA_INV.items():
        assert g.inverse_positive_tail(v) == pytest.approx(x, rel=1e-11)
    t = M.tempered_stable(0.5, 1.0)
    for v, x in TEMPERED_INV.items():
        assert t.inverse_positive_tail(v) == pytest.approx(x, rel=1e-12)
    # very large tail value goes through the asymptotic branch
    assert g.positive_tail(g.inverse_positive_tail(50.0)) == pytest.approx(50.0, rel=1e-12)
    assert t.positive_tail(t.inverse_positive_tail(1e15)) == pytest.approx(1e15, rel=1e-10)


def test_centering_rho():
    L = M.stable_limit_model(0.5)
    assert L.centering_rho(1.0) == 0.0
    assert L.centering_rho(0.25) == pytest.approx(-0.5, abs=1e-14)
    assert L.centering_rho(4.0) == pytest.approx(1.0, abs=1e-14)
    # cross-check with adaptive quadrature
    q, _ = integrate.quad(lambda x: x * 0.5 * x**-1.5, 0.25, 1)
    assert L.centering_rho(0.25) == pytest.approx(-q, rel=1e-10)
    # two-sided: the negative side enters with opposite sign
    T = M.pure_stable(1.5, 0.7, gamma_shift=0.2)
    c = 0.3 / 0.7
    m = 1.5 / 0.5 * (0.3**-0.5 - 1)
    assert T.centering_rho(0.3) == pytest.approx(0.2 - m + c * m, rel=1e-12)


def test_centering_rho_atoms():
    a = M.atomic_stable(0.5, [(0.5, 0.2), (2.0, 0.3)], gamma_shift=1.0)
    cont = 0.5 / 0.5 * (1 - 0.3**0.5)
    assert a.centering_rho(0.3) == pytest.approx(1.0 - cont - 0.5 * 0.2)
    # atom at w itself is included for w <= 1 (closed interval)
    assert a.centering_rho(0.5) == pytest.approx(1.0 - (1 - 0.5**0.5) - 0.1)
    # for w > 1 the upper end is open
    assert a.centering_rho(2.0) == pytest.approx(1.0 + (2**0.5 - 1))
    assert a.centering_rho(2.5) == pytest.approx(1.0 + (2.5**0.5 - 1) + 0.6)


def test_restricted_triplet():
    L = M.stable_limit_model(0.5)
    assert L.restricted_triplet(0.25).gamma == pytest.approx(-0.5, abs=1e-14)
    assert L.restricted_triplet(1.0).gamma == 0.0
    assert L.restricted_triplet(3.0).gamma == 0.0
    m = M.pure_stable(1.2, 0.8, gamma_shift=0.4, sigma2=0.3)
    val = m.restricted_triplet(0.5).cf_exponent(1.7)
    assert abs(val - RESTRICTED_EXP) < 1e-9


def test_truncated_exp_moment():
    L = M.stable_limit_model(0.5)
    assert L.truncated_exp_moment(0.0, 0.0, 1.0, "compensated") == 0
    assert L.truncated_exp_moment(0.0, -5.0, 7.0, "compensated") == 0
    assert L.truncated_exp_moment(0.0, 1.0, 2.0).real == pytest.approx(1 - 2**-0.5, abs=1e-12)
    a = M.atomic_stable(1.0, [(1.5, 0.2)])
    assert a.truncated_exp_moment(0.0, 1.0, 2.0).real == pytest.approx(0.5 + 0.2, abs=1e-12)
    assert abs(a.truncated_exp_moment(0.7, 1.0, 2.0) - ATOM_PLAIN) < 1e-10
    # endpoint closure decides whether the atom counts
    assert a.truncated_exp_moment(0.0, 1.0, 1.5).real == pytest.approx(1 - 1 / 1.5)
    assert a.truncated_exp_moment(0.0, 1.0, 1.5, closed_upper=True).real == pytest.approx(1 - 1 / 1.5 + 0.2)
    t = M.tempered_stable(0.5, 1.0)
    assert abs(t.truncated_exp_moment(2.0, 0.0, 1.0, "compensated") - TEMPERED_COMP_THETA2) < 1e-10
    g = M.gamma_subordinator()
    assert abs(g.truncated_exp_moment(1.5, 0.0, 2.0, "minus_one") - GAMMA_MINUS_ONE) < 1e-10
    two = M.pure_stable(1.5, 0.7)
    assert abs(two.truncated_exp_moment(3.0, -np.inf, 1.0, "compensated") - PSI_TWO_SIDED_15) < 1e-9


def test_truncated_exp_moment_brute_riemann():
    a = M.atomic_stable(1.0, [(1.5, 0.2)])
    x = np.linspace(1, 2, 2_000_001)
    mid = 0.5 * (x[1:] + x[:-1])
    riemann = np.sum(np.exp(0.7j * mid) * mid**-2) * (x[1] - x[0]) + 0.2 * np.exp(0.7j * 1.5)
    assert abs(a.truncated_exp_moment(0.7, 1.0, 2.0) - riemann) < 1e-8


def test_nonintegrable_names_endpoint():
    s = M.pure_stable(1.5)
    with pytest.raises(M.NonIntegrableError, match="endpoint 0"):
        s.truncated_exp_moment(1.0, 0.0, 1.0, "plain")
    with pytest.raises(M.NonIntegrableError, match="endpoint 0"):
        s.truncated_exp_moment(1.0, 0.0, 1.0, "minus_one")


def test_error_estimate_reported():
    t = M.tempered_stable(0.5, 1.0)
    val, err = t.truncated_exp_moment(2.0, 0.0, 3.0, "compensated", return_error=True)
    assert err <= 1e-10


def test_kernel_moments():
    t = M.tempered_stable(0.5, 1.0)
    assert t.kernel.m1(0.2, 3.0) == pytest.approx(TEMPERED_M1_02_3, rel=1e-12)
    assert t.kernel.m2_0(0.1) == pytest.approx(TEMPERED_M2_0_01, rel=1e-12)
    assert t.kernel.m1_0(3.0) - t.kernel.m1_0(0.2) == pytest.approx(TEMPERED_M1_02_3, rel=1e-10)


def test_regular_variation_diagnostic():
    d = M.regular_variation_diagnostic(M.pure_stable(1.0), 2.0, 3.0, [1.0, 0.1, 1e-3])
    assert np.max(np.abs(d.values - 1.5)) <= 1e-12
    assert d.limit == 1.5 and d.converged
    d = M.regular_variation_diagnostic(M.tempered_stable(0.5, 1.0), 1.0, 1.0, [0.1])
    assert d.limit == 1.0
    d = M.regular_variation_diagnostic(M.tempered_stable(0.5, 1.0), 2.0, 1.0, [10.0**-k for k in range(1, 7)])
    assert np.all(np.diff(d.values) > 0)
    assert d.converged and abs(d.values[-1] / 2**-0.5 - 1) < 0.01


def test_json_roundtrip_and_unknown_fields():
    m = M.atomic_stable(1.2, [(1.0, 0.5), (0.3, 0.1)], a_plus=0.6, gamma_shift=0.1)
    assert M.LevyModel.from_dict(m.to_dict()) == m
    s = M.LevyModel.from_json('{"kind": "pure_stable", "alpha": 0.5, "drift": 0.0}')
    assert s.is_subordinator and s.gamma_shift == pytest.approx(1.0)
    t = M.LevyModel.from_json('{"kind": "tempered_stable", "alpha": 0.5, "a_plus": 0.8, "a_minus": 0.2}')
    assert t.a_minus == pytest.approx(0.2)
    with pytest.raises(ValueError, match="unknown"):
        M.LevyModel.from_json('{"kind": "pure_stable", "alpha": 0.5, "colour": 1}')
    with pytest.raises(ValueError):
        M.LevyModel.from_json('{"kind": "pure_stable", "alpha": 0.5, "a_plus": 0.5, "a_minus": 0.2}')


# ---------------------------------------------------------------------------
# properties
# ---------------------------------------------------------------------------

models = st.sampled_from([
    M.pure_stable(0.5),
    M.pure_stable(1.5, 0.7),
    M.tempered_stable(0.5, 1.0),
    M.tempered_stable(1.3, 2.0, a_plus=0.6, gamma_shift=0.0),
    M.atomic_stable(1.0, [(1.0, 0.5)]),
    M.atomic_stable(0.7, [(2.0, 0.3), (0.5, 1.0), (0.1, 2.0)]),
    M.gamma_subordinator(),
])


@settings(max_examples=300, deadline=None)
@given(models, st.floats(1e-4, 500.0))
def test_inverse_sandwich(model, y):
    x = model.inverse_positive_tail(y)
    assert model.positive_tail(x) <= y * (1 + 1e-9)
    assert model.positive_tail_left(x) >= y * (1 - 1e-9)


@settings(max_examples=200, deadline=None)
@given(models, st.floats(1e-3, 50), st.floats(1e-3, 50))
def test_tail_monotone(model, x1, x2):
    lo, hi = min(x1, x2), max(x1, x2)
    assert model.positive_tail(lo) >= model.positive_tail(hi)


@settings(max_examples=100, deadline=None)
@given(models, st.floats(1e-3, 100))
def test_inverse_of_tail_below_x(model, x):
    assert model.inverse_positive_tail(model.positive_tail(x)) <= x * (1 + 1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.05, 1.95), st.floats(0.1, 1.0))
def test_rho_zero_at_one_for_limit(alpha, a_plus):
    assert M.stable_limit_model(alpha, a_plus).centering_rho(1.0) == 0.0


@settings(max_examples=100, deadline=None)
@given(models, st.floats(0.02, 20))
def test_rho_continuous_off_atoms(model, w):
    if model.atoms and min(abs(w - x) for x, _ in model.atoms) < 1e-3:
        return
    h = 1e-7 * w
    assert model.centering_rho(w + h) == pytest.approx(model.centering_rho(w - h), abs=1e-4)


@settings(max_examples=60, deadline=None)
@given(models, st.floats(0.05, 5), st.floats(0.05, 5))
def test_plain_moment_at_zero_is_mass(model, a, b):
    lo, hi = min(a, b), max(a, b) + 0.01
    val = model.truncated_exp_moment(0.0, lo, hi)
    mass = model.positive_tail(lo) - model.positive_tail_left(hi)
    assert val.real == pytest.approx(mass, rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 1.95), st.floats(1e-3, 1.0), st.floats(0.5, 50.0))
def test_rv_constant_for_pure_stable(alpha, u, y):
    d = M.regular_variation_diagnostic(M.pure_stable(alpha), u, y, [1.0, 1e-2, 1e-4])
    assert np.max(np.abs(d.values / d.limit - 1)) <= 1e-12
