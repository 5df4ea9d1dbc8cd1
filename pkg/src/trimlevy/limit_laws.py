"""Limit laws of trimmed ratios for a stable limit measure Lambda.

Lambda has positive tail x^-alpha and negative tail (a_minus/a_plus) x^-alpha.
The basic kernels are

* ``E(theta) = int_1^inf e^{i theta x} Lambda(dx)``,
* ``P(theta) = int_0^1 (e^{i theta x} - 1 - i theta x) Lambda(dx)``,

evaluated by a power series for small |theta| and by Gauss-Laguerre along a
rotated contour for large |theta|; the two are tied together through the
closed form of the full-line integral.  Each public evaluator has a second,
independent route through adaptive quadrature against the measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import integrate, special

from .measures import stable_limit_model
from .rng import RngStream, as_stream
from .samplers import sample_small_jump_remainder

_LAG_X, _LAG_W = np.polynomial.laguerre.laggauss(80)
_SERIES_TERMS = 60
_SWITCH = 2.0
_THETA0_CAP = 10.0
_THETA0_STEP = 1e-3
_THETA0_LEVEL = 0.95


class ThetaRangeError(ValueError):
    """The closed-form branch was asked for |theta| beyond theta0."""


@dataclass(frozen=True)
class CFEstimate:
    value: complex
    stderr: float
    n: int

    def __complex__(self):
        return complex(self.value)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


def _series_P(alpha: float, theta: np.ndarray) -> np.ndarray:
    k = np.arange(2, _SERIES_TERMS + 2, dtype=float)
    coef = alpha / (special.factorial(k) * (k - alpha))
    z = 1j * theta[..., None]
    return np.sum(coef * np.power(z, k), axis=-1)


def _full_line(alpha: float, theta: np.ndarray) -> np.ndarray:
    """int_0^inf (e^{i theta x} - 1 [- i theta x 1{x<=1} if alpha=1]) alpha x^{-alpha-1} dx.

    For alpha in (1,2) the integrand carries - i theta x on all of (0, inf).
    """
    a = np.abs(theta)
    s = np.sign(theta)
    out = np.zeros(theta.shape, dtype=complex)
    nz = a > 0
    if alpha == 1.0:
        out[nz] = -0.5 * math.pi * a[nz] - 1j * theta[nz] * np.log(a[nz]) + 1j * theta[nz] * (1.0 - np.euler_gamma)
    else:
        phase = np.exp(-0.5j * math.pi * alpha * s[nz])
        out[nz] = -special.gamma(1.0 - alpha) * np.power(a[nz], alpha) * phase
    return out


def _c1(alpha: float) -> float:
    return 0.0 if alpha == 1.0 else alpha / (1.0 - alpha)


def _contour_E(alpha: float, theta: np.ndarray) -> np.ndarray:
    a = np.abs(theta)
    s = np.sign(theta)
    ratio = 1.0 + 1j * s[..., None] * _LAG_X / a[..., None]
    body = np.sum(_LAG_W * np.power(ratio, -alpha - 1.0), axis=-1)
    return 1j * s * alpha * np.exp(1j * theta) / a * body


def _check_alpha_closed(alpha: float):
    if alpha != 1.0 and abs(alpha - 1.0) < 1e-3:
        raise ValueError("closed-form kernels lose accuracy for alpha near 1; use method='quad'")


def kernel_E(alpha: float, theta) -> np.ndarray:
    """int_1^inf e^{i theta x} alpha x^{-alpha-1} dx, vectorized."""
    _check_alpha_closed(alpha)
    th = np.asarray(theta, float)
    out = np.empty(th.shape, dtype=complex)
    small = np.abs(th) < _SWITCH
    if np.any(small):
        ts = th[small]
        out[small] = 1.0 + _full_line(alpha, ts) - _series_P(alpha, ts) - 1j * ts * _c1(alpha)
    if np.any(~small):
        out[~small] = _contour_E(alpha, th[~small])
    return out if th.ndim else complex(out)


def kernel_P(alpha: float, theta) -> np.ndarray:
    """int_0^1 (e^{i theta x} - 1 - i theta x) alpha x^{-alpha-1} dx, vectorized."""
    _check_alpha_closed(alpha)
    th = np.asarray(theta, float)
    out = np.empty(th.shape, dtype=complex)
    small = np.abs(th) < _SWITCH
    if np.any(small):
        out[small] = _series_P(alpha, th[small])
    if np.any(~small):
        tb = th[~small]
        out[~small] = _full_line(alpha, tb) - (_contour_E(alpha, tb) - 1.0) - 1j * tb * _c1(alpha)
    return out if th.ndim else complex(out)


# ---------------------------------------------------------------------------
# spec
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitLawSpec:
    """Parameters of the limit law of the (r, n) trimmed ratio vector.

    ``subordinator=True`` selects the driftless stable subordinator
    (a_plus = 1, alpha < 1) whose ratios are centred by the drift instead of
    the centering function; psi is then the uncompensated exponent.
    """

    alpha: float
    a_plus: float = 1.0
    r: int = 1
    n: int = 1
    subordinator: bool = False

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if not 0 < self.a_plus <= 1:
            raise ValueError("a_plus must lie in (0, 1]")
        if self.r < 0 or self.n < 1:
            raise ValueError("need r >= 0 and n >= 1")
        if self.subordinator and (self.a_plus != 1.0 or self.alpha >= 1.0):
            raise ValueError("subordinator branch needs a_plus = 1 and alpha < 1")

    @property
    def a_minus(self) -> float:
        return 1.0 - self.a_plus

    @property
    def neg_scale(self) -> float:
        return self.a_minus / self.a_plus

    @cached_property
    def model(self):
        return stable_limit_model(self.alpha, self.a_plus, self.subordinator)

    @cached_property
    def theta0(self) -> float:
        """Largest grid point <= 10 with sup_{|s|<=theta0} |psi(s)| <= 0.95."""
        grid = np.arange(0.0, _THETA0_CAP + _THETA0_STEP / 2, _THETA0_STEP)
        mod = np.maximum.accumulate(np.abs(psi(self, grid)))
        bad = np.nonzero(mod > _THETA0_LEVEL)[0]
        if bad.size == 0:
            return float(grid[-1])
        return float(grid[max(bad[0] - 1, 0)])


def _as_spec(spec_or_alpha, **kw) -> LimitLawSpec:
    if isinstance(spec_or_alpha, LimitLawSpec):
        return spec_or_alpha
    return LimitLawSpec(float(spec_or_alpha), **kw)


# ---------------------------------------------------------------------------
# exponents
# ---------------------------------------------------------------------------


def psi(spec: LimitLawSpec, theta, method: str = "closed"):
    """Characteristic exponent of W: int_(-inf,1) (e^{i theta x} - 1 - i theta x 1{|x|<=1}) Lambda(dx).

    In the subordinator branch the compensator is dropped.
    """
    th = np.asarray(theta, float)
    if method == "quad":
        out = np.array([_psi_quad(spec, float(v)) for v in th.ravel()]).reshape(th.shape)
    elif method == "closed":
        al = spec.alpha
        p = kernel_P(al, th)
        out = p
        if spec.subordinator:
            out = p + 1j * th * al / (1.0 - al)
        elif spec.neg_scale > 0:
            out = p + spec.neg_scale * (np.conj(p) + np.conj(kernel_E(al, th)) - 1.0)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out if th.ndim else complex(out)


def _psi_quad(spec: LimitLawSpec, theta: float) -> complex:
    form = "minus_one" if spec.subordinator else "compensated"
    lower = 0.0 if spec.subordinator else -np.inf
    return spec.model.truncated_exp_moment(theta, lower, 1.0, form, tol=1e-12)


def phi(spec: LimitLawSpec, theta, u):
    """CF of one unordered coordinate of the J(u) law (u = 0: the L law)."""
    th = np.asarray(theta, float)
    ua = np.asarray(u, float)
    if np.any(ua < 0) or np.any(ua >= 1):
        raise ValueError("u must lie in [0, 1)")
    al = spec.alpha
    th_b, u_b = np.broadcast_arrays(th, ua)
    out = np.empty(th_b.shape, dtype=complex)
    ua_al = np.power(u_b, al)
    direct = (1.0 - ua_al) < 0.5
    far = ~direct
    if np.any(far):
        tf, uf, wf = th_b[far], u_b[far], ua_al[far]
        e1 = kernel_E(al, tf)
        e2 = np.zeros_like(e1)
        # |E| <= 1, so the second term is negligible once u^alpha is tiny
        pos = wf > 1e-18
        if np.any(pos):
            e2[pos] = wf[pos] * kernel_E(al, tf[pos] / uf[pos])
        out[far] = (e1 - e2) / (1.0 - wf)
    if np.any(direct):
        out[direct] = _phi_direct(al, th_b[direct], u_b[direct])
    return out if out.ndim else complex(out)


_GL64_X, _GL64_W = np.polynomial.legendre.leggauss(64)


def _phi_direct(alpha: float, theta: np.ndarray, u: np.ndarray) -> np.ndarray:
    # Gauss-Legendre on [1, 1/u] for u near 1 where the difference form cancels
    hi = 1.0 / u
    half = 0.5 * (hi - 1.0)
    x = 1.0 + half[:, None] * (_GL64_X + 1.0)
    dens = alpha * np.power(x, -alpha - 1.0)
    val = np.sum(_GL64_W * np.exp(1j * theta[:, None] * x) * dens, axis=1) * half
    mass = 1.0 - np.power(u, alpha)
    return val / mass


def phi_quad(spec: LimitLawSpec, theta: float, u: float) -> complex:
    """Independent route for phi by adaptive quadrature against Lambda."""
    if not 0 <= u < 1:
        raise ValueError("u must lie in [0, 1)")
    upper = np.inf if u == 0 else 1.0 / u
    val = spec.model.truncated_exp_moment(theta, 1.0, upper, "plain", tol=1e-12)
    return val / (1.0 - u**spec.alpha)


def subordinator_exponent(spec: LimitLawSpec, lam, method: str = "closed"):
    """Psi(lambda) = int_(0,1) (1 - e^{-lambda x}) Lambda(dx)."""
    al = spec.alpha
    if al >= 1 or spec.a_plus != 1.0:
        raise ValueError("subordinator exponent needs alpha < 1 and a_plus = 1")
    la = np.asarray(lam, float)
    if np.any(la < 0):
        raise ValueError("lambda must be non-negative")
    if method == "closed":
        # integration by parts: lambda^alpha gamma_lower(1-alpha, lambda) - (1 - e^{-lambda})
        out = np.power(la, al) * special.gamma(1.0 - al) * special.gammainc(1.0 - al, la) + np.expm1(-la)
    elif method == "quad":
        out = np.array([_Psi_quad(al, float(v)) for v in la.ravel()]).reshape(la.shape)
    elif method == "series":
        out = np.array([_Psi_series(al, float(v)) for v in la.ravel()]).reshape(la.shape)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out if la.ndim else float(out)


def _Psi_series(alpha: float, lam: float) -> float:
    # term-by-term integration of 1 - e^{-lam x}; alternating, so keep lam moderate
    if lam > 8.0:
        raise ValueError("series route is limited to lambda <= 8")
    terms = []
    term = 1.0
    for k in range(1, 200):
        term *= lam / k
        terms.append((-1) ** (k + 1) * term * alpha / (k - alpha))
        if term < 1e-18:
            break
    return math.fsum(terms)


def _Psi_quad(alpha: float, lam: float) -> float:
    if lam == 0:
        return 0.0

    def f(x):
        return lam * alpha if x == 0 else -math.expm1(-lam * x) / x * alpha

    val, _ = integrate.quad(f, 0.0, 1.0, weight="alg", wvar=(-alpha, 0.0), epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


# ---------------------------------------------------------------------------
# Gamma-subordinated W
# ---------------------------------------------------------------------------


def _theta_guard(spec: LimitLawSpec, theta, strict: bool):
    if strict and np.any(np.abs(theta) > spec.theta0):
        raise ThetaRangeError(f"|theta| exceeds theta0={spec.theta0:.3f}; use the Monte Carlo evaluator")


def sample_W_gamma(spec: LimitLawSpec, index: float, rng: RngStream | int | None = None,
                   size: int = 1, budget: float = 512.0) -> np.ndarray:
    """Draws of W at an independent Gamma(index, 1) time."""
    if index <= 0:
        raise ValueError("index must be positive")
    rng = as_stream(rng)
    times = rng.gamma(float(index), size)
    return sample_small_jump_remainder(spec.model, 1.0, times, rng, budget=budget)


def cf_W_gamma(spec: LimitLawSpec, theta, index: float, method: str = "closed", strict: bool = True,
               rng: RngStream | int | None = None, n_mc: int = 100_000):
    """E exp(i theta W_{Gamma_index}) = (1 - psi(theta))^{-index}."""
    if index <= 0:
        raise ValueError("index must be positive")
    if method == "closed":
        _theta_guard(spec, theta, strict)
        base = 1.0 - psi(spec, theta)
        if np.any(np.real(base) <= 0):
            raise ArithmeticError("1 - psi on the branch cut; use method='mc'")
        return np.exp(-index * np.log(base))
    if method == "mc":
        w = sample_W_gamma(spec, index, rng, n_mc)
        return _empirical_cf(np.exp(1j * float(theta) * w))
    raise ValueError(f"unknown method {method!r}")


def _empirical_cf(z: np.ndarray) -> CFEstimate:
    m = complex(np.mean(z))
    se = math.sqrt(max(float(np.mean(np.abs(z - m) ** 2)), 0.0) / z.size)
    return CFEstimate(m, se, int(z.size))


def sample_limit_ratio(spec: LimitLawSpec, rng: RngStream | int | None = None, size: int = 1,
                       budget: float = 512.0) -> np.ndarray:
    """Draws of W_{Gamma_r}."""
    if spec.r < 1:
        raise ValueError("sample_limit_ratio needs r >= 1")
    return sample_W_gamma(spec, spec.r, rng, size, budget)


def limit_laplace(spec: LimitLawSpec, lam) -> float:
    """(1 + Psi(lambda))^{-r}."""
    if not spec.subordinator and spec.a_plus != 1.0:
        raise ValueError("Laplace transform needs a one-sided limit")
    if spec.r < 1:
        raise ValueError("Laplace limit needs r >= 1")
    return np.power(1.0 + subordinator_exponent(spec, lam), -spec.r)


# ---------------------------------------------------------------------------
# order statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderStatLaw:
    """Decreasing order statistics of ``count`` iid J(u) (L when u = 0)."""

    alpha: float
    u: float
    count: int

    def __post_init__(self):
        if not 0 <= self.u < 1:
            raise ValueError("u must lie in [0, 1)")
        if self.count < 1:
            raise ValueError("count must be >= 1")

    def tail(self, x):
        x = np.asarray(x, float)
        ua = self.u**self.alpha
        val = (np.power(np.maximum(x, 1.0), -self.alpha) - ua) / (1.0 - ua)
        return np.clip(val, 0.0, 1.0)


def _order_stats(alpha: float, u, count: int, rng: RngStream, size: int) -> np.ndarray:
    ua = np.broadcast_to(np.power(np.asarray(u, float), alpha), (size,))[:, None]
    v = rng.random((size, count))
    x = np.power(ua + (1.0 - ua) * v, -1.0 / alpha)
    return -np.sort(-x, axis=1)


def sample_order_stats(law: OrderStatLaw, rng: RngStream | int | None = None, size: int = 1) -> np.ndarray:
    """Shape (size, count), each row nonincreasing."""
    return _order_stats(law.alpha, law.u, law.count, as_stream(rng), size)


def sample_jump_ratios(spec: LimitLawSpec, rng: RngStream | int | None = None, size: int = 1) -> np.ndarray:
    """Limit law of (DeltaX^{(r+k)} / DeltaX^{(r+n)})_{k<n}: order stats of J(B^{1/alpha})."""
    rng = as_stream(rng)
    if spec.n == 1:
        return np.zeros((size, 0))
    if spec.r == 0:
        u = np.zeros(size)
    else:
        u = np.power(rng.beta(spec.r, spec.n, size), 1.0 / spec.alpha)
    return _order_stats(spec.alpha, u, spec.n - 1, rng, size)


# ---------------------------------------------------------------------------
# limit characteristic functions
# ---------------------------------------------------------------------------


def limit_cf_single(spec: LimitLawSpec, theta, strict: bool = True, nodes: int = 64):
    """CF of the n-th coordinate: e^{i theta} (1-psi)^{-(r+n)} E phi^{n-1}(theta, B^{1/alpha})."""
    th = np.asarray(theta, float)
    _theta_guard(spec, th, strict)
    r, n = spec.r, spec.n
    front = np.exp(1j * th) * np.exp(-(r + n) * np.log(1.0 - psi(spec, th)))
    if n == 1:
        return front
    if r == 0:
        mix = np.power(phi(spec, th, 0.0), n - 1)
    else:
        x, w = special.roots_jacobi(nodes, n - 1, r - 1)
        w = w / w.sum()
        u = np.power(0.5 * (1.0 + x), 1.0 / spec.alpha)
        vals = np.power(phi(spec, th[..., None], u), n - 1)
        mix = np.sum(w * vals, axis=-1)
    out = front * mix
    return out if out.ndim else complex(out)


def limit_cf_joint(spec: LimitLawSpec, theta_vec, method: str = "auto", rng: RngStream | int | None = None,
                   n_mc: int = 100_000, strict: bool = True) -> CFEstimate:
    """Joint CF of the n ratio coordinates by Monte Carlo over the jump ratios.

    ``closed`` averages e^{i s x_+} (1 - psi(s))^{-(r+n)} with s = sum theta_k / x_k;
    ``mc`` replaces the second factor by e^{i s W_{Gamma_{r+n}}} from independent draws.
    ``auto`` uses ``closed`` when sum |theta_k| <= theta0.
    """
    th = np.asarray(theta_vec, float)
    if th.shape != (spec.n,):
        raise ValueError(f"theta_vec must have length n={spec.n}")
    if not np.all(np.isfinite(th)):
        raise ValueError("theta_vec must be finite")
    if np.all(th == 0):
        return CFEstimate(1.0 + 0j, 0.0, 0)
    bound = float(np.sum(np.abs(th)))
    if method == "auto":
        method = "closed" if bound <= spec.theta0 else "mc"
    rng = as_stream(rng)
    x = np.concatenate([sample_jump_ratios(spec, rng, n_mc), np.ones((n_mc, 1))], axis=1)
    s = np.sum(th / x, axis=1)
    xp = np.sum(x, axis=1)
    if method == "closed":
        if strict and bound > spec.theta0:
            raise ThetaRangeError(f"sum |theta_k| exceeds theta0={spec.theta0:.3f}")
        z = np.exp(1j * s * xp - (spec.r + spec.n) * np.log(1.0 - psi(spec, s)))
    elif method == "mc":
        w = sample_W_gamma(spec, spec.r + spec.n, rng, n_mc)
        z = np.exp(1j * s * (xp + w))
    else:
        raise ValueError(f"unknown method {method!r}")
    return _empirical_cf(z)
