import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from trimlevy import conditional as C
from trimlevy import measures as M
from trimlevy.rng import RngStream
from trimlevy.samplers import sample_trimmed

ATOMIC = M.atomic_stable(1.0, [(1.0, 0.5)])


def _k_quadrature(model, t, r, y, theta):
    # independent route: V = Gamma_r / t restricted to the plateau [lo, hi)
    lo, hi = model.positive_tail(y), model.positive_tail_left(y)
    fac = complex(math.cos(theta * y) - 1, math.sin(theta * y))
    dens = lambda v: t * math.exp((r - 1) * math.log(t * v) - t * v - math.lgamma(r))
    mass = special.gammainc(r, t * hi) - special.gammainc(r, t * lo)
    re = integrate.quad(lambda v: (np.exp(t * (hi - v) * fac)).real * dens(v), lo, hi, epsabs=1e-13)[0]
    im = integrate.quad(lambda v: (np.exp(t * (hi - v) * fac)).imag * dens(v), lo, hi, epsabs=1e-13)[0]
    return complex(re, im) / mass


def test_spec_validation():
    with pytest.raises(ValueError):
        C.ConditionSpec(1.0, 2, 1, (1.0,))
    with pytest.raises(ValueError):
        C.ConditionSpec(1.0, 1, 2, (1.0,))
    with pytest.raises(ValueError):
        C.ConditionSpec(1.0, 1, 2, (1.0, 2.0))
    with pytest.raises(ValueError):
        C.ConditionSpec(1.0, 1, 1, (1.0,), atom_flags=(False,)).flags_for(ATOMIC)


def test_k_factor_continuous_is_one():
    spec = C.ConditionSpec(2.0, 1, 2, (1.3, 0.7))
    assert C.k_factor(M.pure_stable(1.2, 0.7), spec, 1.4) == 1
    assert C.k_factor(ATOMIC, C.ConditionSpec(2.0, 1, 1, (0.9,)), 1.4) == 1


@pytest.mark.parametrize("method", ["rejection", "sequential"])
def test_k_factor_against_quadrature(method):
    t, r, y, th = 1.5, 2, 1.0, 0.8
    spec = C.ConditionSpec(t, r, r, (y,))
    est = C.k_factor(ATOMIC, spec, th, RngStream(1, 0), 200_000, method=method, detail=True)
    assert est.method == method
    assert abs(est.value - _k_quadrature(ATOMIC, t, r, y, th)) < 4 * est.stderr + 1e-6


def test_k_factor_auto_switches_to_sequential():
    # a tiny plateau makes rejection hopeless
    m = M.atomic_stable(0.8, [(1.0, 1e-5)])
    spec = C.ConditionSpec(1.0, 3, 3, (1.0,))
    est = C.k_factor(m, spec, 2.0, RngStream(2, 0), 50_000, detail=True)
    assert est.method == "sequential"
    assert abs(est.value - _k_quadrature(m, 1.0, 3, 1.0, 2.0)) < 4 * est.stderr + 1e-8


def test_conditional_cf_against_simulation():
    # jumps equal to the atom occur with positive probability, so condition directly
    t, r = 1.0, 2
    s = sample_trimmed(ATOMIC, t, r, 0, RngStream(7, 0), 400_000)
    hit = s.jumps[:, -1] == 1.0
    x = s.trimmed_value[hit]
    spec = C.ConditionSpec(t, r, r, (1.0,))
    for th in [0.4, 1.3]:
        emp = np.mean(np.exp(1j * th * x))
        val = C.conditional_cf_trimmed(ATOMIC, spec, th, rng=RngStream(7, 1), n_mc=200_000)
        assert abs(emp - val) < 4.5 / math.sqrt(x.size)


def test_conditional_cf_two_levels_against_simulation():
    m = M.atomic_stable(0.8, [(2.0, 0.3), (1.0, 0.6)])
    t = 1.0
    s = sample_trimmed(m, t, 2, 0, RngStream(8, 0), 400_000)
    hit = (s.jumps[:, 0] == 2.0) & (s.jumps[:, 1] == 1.0)
    x = s.trimmed_value[hit]
    spec = C.ConditionSpec(t, 1, 2, (2.0, 1.0))
    for th in [0.5, 1.5]:
        emp = np.mean(np.exp(1j * th * x))
        val = C.conditional_cf_trimmed(m, spec, th, rng=RngStream(8, 1), n_mc=200_000)
        assert abs(emp - val) < 4.5 / math.sqrt(x.size)


def test_subordinator_forms_agree():
    m = M.atomic_stable(0.6, [(1.0, 0.4)], drift=0.2)
    spec = C.ConditionSpec(1.3, 2, 2, (1.0,))
    a = C.conditional_cf_trimmed(m, spec, 0.9, "compensated", RngStream(3, 0), 50_000)
    b = C.conditional_cf_trimmed(m, spec, 0.9, "subordinator", RngStream(3, 0), 50_000)
    assert abs(a - b) < 1e-12
    with pytest.raises(ValueError):
        C.conditional_cf_trimmed(ATOMIC, spec, 0.9, "subordinator")


def test_ratio_forms_agree():
    m = M.LevyModel(M.Kind.ATOMIC_STABLE, 1.3, a_plus=0.7, gamma_shift=0.4, sigma2=0.2, atoms=((1.0, 0.5),))
    spec = C.ConditionSpec(2.0, 1, 3, (2.0, 1.5, 1.0))
    a = C.conditional_cf_ratio(m, spec, 0.7, 1, 2, "rescaled", RngStream(4, 0), 50_000)
    b = C.conditional_cf_ratio(m, spec, 0.7, 1, 2, "kernel", RngStream(4, 0), 50_000)
    assert abs(a - b) < 1e-9
    with pytest.raises(ValueError):
        C.conditional_cf_ratio(m, spec, 0.7, 2, 2)


def test_ratio_subordinator_form_against_simulation():
    m = M.stable_subordinator(0.6)
    t, r, n = 1.0, 1, 1
    s = sample_trimmed(m, t, r + n, 0, RngStream(9, 0), 200_000)
    y1, y2 = s.jumps[:, 0], s.jumps[:, 1]
    stat = s.trimmed_value / y1
    # tower property over the conditioning levels
    th = 0.8
    cf = np.array([C.conditional_cf_ratio(m, C.ConditionSpec(t, 1, 2, (a, b)), th, r, n, "subordinator")
                   for a, b in zip(y1[:2000], y2[:2000])])
    emp = np.mean(np.exp(1j * th * stat))
    assert abs(cf.mean() - emp) < 4.5 / math.sqrt(2000)


def test_tower_property_continuous():
    # averaging the conditional CF over the law of the level recovers the unconditional CF
    m = M.pure_stable(1.4, 0.8, gamma_shift=0.1)
    t, th = 1.0, 0.9
    x, w = special.roots_genlaguerre(60, 0.0)
    cond = np.array([C.conditional_cf_trimmed(m, C.ConditionSpec(t, 1, 1, (m.inverse_positive_tail(g / t),)), th)
                     for g in x])
    tower = np.sum(w * cond)
    s = sample_trimmed(m, t, 1, 0, RngStream(10, 0), 200_000)
    emp = np.mean(np.exp(1j * th * s.trimmed_value))
    assert abs(tower - emp) < 4.5 / math.sqrt(200_000)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.3, 1.8).filter(lambda a: abs(a - 1) > 1e-2), st.floats(0.3, 3.0), st.floats(0.2, 5.0),
       st.floats(-3.0, 3.0))
def test_scale_identity(alpha, c, y, th):
    m = M.pure_stable(alpha, 0.7)
    t = 1.3
    a = C.conditional_cf_ratio(m, C.ConditionSpec(t, 1, 2, (3 * c * y, c * y)), th, 1, 1)
    b = C.conditional_cf_ratio(m, C.ConditionSpec(t * c**-alpha, 1, 2, (3 * y, y)), th, 1, 1)
    assert abs(a - b) < 1e-8


def test_jump_ratio_closed_values():
    assert C.conditional_jump_ratio_limit(0, 2, [2.0], 1.0) == pytest.approx(0.5, abs=1e-15)
    v = C.conditional_jump_ratio_limit(1, 3, [4.0, 2.0], 0.5)
    assert v == pytest.approx(0.28033008588991093, abs=1e-14)


@pytest.mark.parametrize("r,n,x,alpha", [(1, 3, [4.0, 2.0], 0.5), (2, 3, [3.0, 1.5], 1.2), (0, 4, [5.0, 2.0, 1.1], 0.8)])
def test_jump_ratio_three_routes(r, n, x, alpha):
    closed = C.conditional_jump_ratio_limit(r, n, x, alpha)
    mc = C.conditional_jump_ratio_limit(r, n, x, alpha, "mc", RngStream(12, 0), 400_000)
    os_ = C.conditional_jump_ratio_limit(r, n, x, alpha, "order_stats", RngStream(12, 1), 400_000)
    assert abs(mc.value - closed) < 4 * mc.stderr
    assert abs(os_.value - closed) < 4 * os_.stderr


def test_jump_ratio_validation():
    with pytest.raises(ValueError):
        C.conditional_jump_ratio_limit(1, 3, [2.0], 0.5)
    with pytest.raises(ValueError):
        C.conditional_jump_ratio_limit(1, 3, [2.0, 3.0], 0.5)
    with pytest.raises(ValueError):
        C.conditional_jump_ratio_limit(1, 3, [0.5, 0.5], 0.5)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 4), st.integers(2, 5), st.floats(0.2, 1.9),
       st.lists(st.floats(1.0, 10.0), min_size=4, max_size=4), st.floats(1.0, 2.0))
def test_jump_ratio_monotone_in_x(r, n, alpha, xs, bump):
    x = sorted(xs[: n - 1], reverse=True)
    p = C.conditional_jump_ratio_limit(r, n, x, alpha)
    assert -1e-12 <= p <= 1 + 1e-12
    p2 = C.conditional_jump_ratio_limit(r, n, [v * bump for v in x], alpha)
    assert p2 <= p + 1e-12
