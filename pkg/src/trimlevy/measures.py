"""Parametric Levy measures with exact tails, inverse tails and truncated moments.

Every catalogued model splits into a continuous positive part (a *kernel*
with closed-form or cheaply bisected tail inverse), an optional mirror image
of that kernel on the negative half-line scaled by ``a_minus / a_plus``, and a
finite list of positive atoms.  The generalized inverse of the positive tail
handles the atom plateaus by direct lookup.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy import integrate, special

ArrayLike = float | np.ndarray

DEFAULT_TOL = 1e-10


class NonIntegrableError(ValueError):
    """Raised when a requested integral against the Levy measure diverges."""


class Kind(str, enum.Enum):
    PURE_STABLE = "pure_stable"
    TEMPERED_STABLE = "tempered_stable"
    ATOMIC_STABLE = "atomic_stable"
    GAMMA_SUBORDINATOR = "gamma_subordinator"


# ---------------------------------------------------------------------------
# continuous kernels (positive half-line)
# ---------------------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _log_gl(fun: Callable[[np.ndarray], np.ndarray], a, b, panel: float = 0.25):
    """Vectorized composite Gauss-Legendre of ``fun`` over ``[a, b]`` in log x.

    ``a`` and ``b`` are broadcast together; ``fun`` receives x values.
    """
    a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
    out = np.zeros(a.shape)
    ok = b > a
    if not np.any(ok):
        return out
    la, lb = np.log(a[ok]), np.log(b[ok])
    npanel = max(1, int(np.ceil(np.max(lb - la) / panel)))
    h = (lb - la) / npanel
    acc = np.zeros(la.shape)
    for j in range(npanel):
        left = la + j * h
        u = left[:, None] + 0.5 * h[:, None] * (_GL_NODES[None, :] + 1.0)
        x = np.exp(u)
        acc += 0.5 * h * ((fun(x) * x) @ _GL_WEIGHTS)
    out[ok] = acc
    return out


class _StableKernel:
    """Tail x^-alpha, density alpha x^(-alpha-1)."""

    def __init__(self, alpha: float):
        self.alpha = alpha

    def tail(self, x):
        with np.errstate(divide="ignore"):
            return np.power(x, -self.alpha)

    def inv_tail(self, v):
        with np.errstate(divide="ignore"):
            return np.power(v, -1.0 / self.alpha)

    def density_reg(self, x):
        # density * x**(alpha+1)
        return np.full(np.shape(x), self.alpha, dtype=float)

    def m1(self, a, b):
        """Integral of x over (a, b) against the density, 0 < a <= b <= inf."""
        al = self.alpha
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        if al == 1.0:
            with np.errstate(divide="ignore"):
                return np.log(b / a)
        with np.errstate(divide="ignore", over="ignore"):
            return al / (1.0 - al) * (np.power(b, 1.0 - al) - np.power(a, 1.0 - al))

    def m1_0(self, m):
        if self.alpha >= 1.0:
            return np.full(np.shape(m), np.inf)
        al = self.alpha
        return al / (1.0 - al) * np.power(m, 1.0 - al)

    def m2_0(self, m):
        al = self.alpha
        return al / (2.0 - al) * np.power(m, 2.0 - al)


class _TemperedKernel:
    """Tail x^-alpha exp(-rate x)."""

    def __init__(self, alpha: float, rate: float):
        self.alpha = alpha
        self.rate = rate

    def tail(self, x):
        with np.errstate(divide="ignore", over="ignore"):
            return np.power(x, -self.alpha) * np.exp(-self.rate * np.asarray(x, float))

    def inv_tail(self, v):
        # x^-a e^{-bx} = v  <=>  x = (a/b) W((b/a) v^{-1/a})
        a, b = self.alpha, self.rate
        v = np.asarray(v, float)
        with np.errstate(divide="ignore", over="ignore"):
            logz = np.log(b / a) - np.log(v) / a
            z = np.exp(logz)
            w = special.lambertw(z).real
            # huge arguments: asymptotic W(z) = L - log L with L = log z
            big = ~np.isfinite(z)
            if np.any(big):
                L = logz[big]
                w_big = L - np.log(L)
                for _ in range(3):  # Newton on w + log w = L
                    w_big = w_big - (w_big + np.log(w_big) - L) / (1.0 + 1.0 / w_big)
                w = np.where(big, 0.0, w)
                w[big] = w_big
        return a / b * w

    def density_reg(self, x):
        x = np.asarray(x, float)
        return (self.alpha + self.rate * x) * np.exp(-self.rate * x)

    def _density(self, x):
        return self.density_reg(x) * np.power(x, -self.alpha - 1.0)

    def _lower_inc(self, s, m):
        # int_0^m x^{s-1} e^{-rate x} dx
        return self.rate ** (-s) * special.gamma(s) * special.gammainc(s, self.rate * np.asarray(m, float))

    def m1_0(self, m):
        if self.alpha >= 1.0:
            return np.full(np.shape(m), np.inf)
        al = self.alpha
        return al * self._lower_inc(1.0 - al, m) + self.rate * self._lower_inc(2.0 - al, m)

    def m2_0(self, m):
        al = self.alpha
        return al * self._lower_inc(2.0 - al, m) + self.rate * self._lower_inc(3.0 - al, m)

    def m1(self, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        b_eff = np.minimum(b, np.maximum(a, 1.0 / self.rate) + 80.0 / self.rate)
        return _log_gl(lambda x: x * self._density(x), a, b_eff)


class _GammaKernel:
    """Gamma subordinator: density e^-x / x, tail E1(x)."""

    alpha = 0.0

    def tail(self, x):
        return special.exp1(x)

    def inv_tail(self, v, rtol: float = 1e-12):
        v = np.atleast_1d(np.asarray(v, float))
        out = np.empty(v.shape)
        # E1(x) = -euler_gamma - log x + O(x): exact to double precision once x < e^-30
        big = v > 30.0
        out[big] = np.exp(-v[big] - np.euler_gamma)
        small = ~big
        if np.any(small):
            vs = v[small]
            lo = np.full(vs.shape, -31.0)
            hi = np.full(vs.shape, 6.0)
            hi = np.maximum(hi, np.log(np.maximum(-np.log(np.maximum(vs, 1e-300)), 1.0)) + 1.0)
            while np.max(hi - lo) > rtol:
                mid = 0.5 * (lo + hi)
                above = special.exp1(np.exp(mid)) > vs
                lo = np.where(above, mid, lo)
                hi = np.where(above, hi, mid)
            out[small] = np.exp(0.5 * (lo + hi))
        return out

    def density_reg(self, x):
        return np.exp(-np.asarray(x, float))

    def m1(self, a, b):
        return np.exp(-np.asarray(a, float)) - np.exp(-np.asarray(b, float))

    def m1_0(self, m):
        return -np.expm1(-np.asarray(m, float))

    def m2_0(self, m):
        m = np.asarray(m, float)
        return 1.0 - np.exp(-m) * (1.0 + m)


# ---------------------------------------------------------------------------
# model
# ---------------------------------------------------------------------------

_JSON_FIELDS = {"kind", "alpha", "a_plus", "a_minus", "gamma_shift", "sigma2", "atoms", "drift", "tempering"}


@dataclass(frozen=True)
class LevyModel:
    """Levy triplet ``(gamma_shift, sigma2, Pi)`` from the catalogue.

    For subordinators pass ``drift`` instead of ``gamma_shift``; the triplet
    constant is then ``drift + int_(0,1] x Pi(dx)``.
    """

    kind: Kind
    alpha: float
    a_plus: float = 1.0
    gamma_shift: float | None = None
    sigma2: float = 0.0
    atoms: tuple[tuple[float, float], ...] = ()
    drift: float | None = None
    tempering: float = 1.0
    _kernel: Any = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is Kind.GAMMA_SUBORDINATOR:
            if self.alpha not in (0, 0.0):
                raise ValueError("gamma subordinator has alpha = 0")
            if self.drift is None:
                object.__setattr__(self, "drift", 0.0)
        elif not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if not 0.0 < self.a_plus <= 1.0:
            raise ValueError("a_plus must lie in (0, 1]")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        if kind is Kind.TEMPERED_STABLE and self.tempering <= 0:
            raise ValueError("tempering rate must be positive")

        atoms = tuple(sorted(((float(x), float(m)) for x, m in self.atoms), reverse=True))
        if kind is Kind.ATOMIC_STABLE and not atoms:
            raise ValueError("atomic_stable needs at least one atom")
        if kind is not Kind.ATOMIC_STABLE and atoms:
            raise ValueError(f"{kind.value} models carry no atoms")
        for x, m in atoms:
            if x <= 0 or m <= 0:
                raise ValueError("atoms need positive location and mass")
        if len({x for x, _ in atoms}) != len(atoms):
            raise ValueError("duplicate atom locations")
        object.__setattr__(self, "atoms", atoms)

        if kind is Kind.PURE_STABLE or kind is Kind.ATOMIC_STABLE:
            kern = _StableKernel(self.alpha)
        elif kind is Kind.TEMPERED_STABLE:
            kern = _TemperedKernel(self.alpha, self.tempering)
        else:
            kern = _GammaKernel()
        object.__setattr__(self, "_kernel", kern)

        if self.drift is not None:
            if self.a_plus != 1.0 or self.sigma2 != 0.0 or self.alpha >= 1.0:
                raise ValueError("a subordinator needs a_plus=1, sigma2=0 and alpha<1")
            if self.drift < 0:
                raise ValueError("subordinator drift must be non-negative")
            g = self.drift + float(kern.m1_0(1.0)) + sum(x * m for x, m in atoms if x <= 1.0)
            if self.gamma_shift is not None and not math.isclose(self.gamma_shift, g, rel_tol=1e-9, abs_tol=1e-12):
                raise ValueError("gamma_shift inconsistent with drift")
            object.__setattr__(self, "gamma_shift", g)
        elif self.gamma_shift is None:
            object.__setattr__(self, "gamma_shift", 0.0)

    # -- basic attributes -----------------------------------------------------
    @property
    def a_minus(self) -> float:
        return 1.0 - self.a_plus

    @property
    def neg_scale(self) -> float:
        """Negative continuous tail divided by positive continuous tail."""
        return self.a_minus / self.a_plus

    @property
    def kernel(self):
        return self._kernel

    @property
    def is_subordinator(self) -> bool:
        return self.drift is not None

    @property
    def atom_locations(self) -> np.ndarray:
        return np.array([x for x, _ in self.atoms], dtype=float)

    @property
    def atom_masses(self) -> np.ndarray:
        return np.array([m for _, m in self.atoms], dtype=float)

    # -- serialization ----------------------------------------------------------
    def to_dict(self) -> dict:
        d = {"kind": self.kind.value, "alpha": self.alpha, "a_plus": self.a_plus}
        if self.drift is not None:
            d["drift"] = self.drift
        else:
            d["gamma_shift"] = self.gamma_shift
        if self.sigma2:
            d["sigma2"] = self.sigma2
        if self.atoms:
            d["atoms"] = [list(a) for a in self.atoms]
        if self.kind is Kind.TEMPERED_STABLE:
            d["tempering"] = self.tempering
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "LevyModel":
        unknown = set(d) - _JSON_FIELDS
        if unknown:
            raise ValueError(f"unknown model fields: {sorted(unknown)}")
        d = dict(d)
        if "kind" not in d:
            raise ValueError("model description needs a 'kind'")
        a_minus = d.pop("a_minus", None)
        if a_minus is not None:
            a_plus = d.get("a_plus", 1.0 - a_minus)
            if not math.isclose(a_plus + a_minus, 1.0):
                raise ValueError("a_plus + a_minus must equal 1")
            d["a_plus"] = a_plus
        if d["kind"] == Kind.GAMMA_SUBORDINATOR.value:
            d.setdefault("alpha", 0.0)
        d["atoms"] = tuple(tuple(a) for a in d.get("atoms", ()))
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> "LevyModel":
        return cls.from_dict(json.loads(text))

    # -- tails ------------------------------------------------------------------
    def positive_tail(self, x: ArrayLike) -> ArrayLike:
        """Pi((x, inf)); right-continuous at atoms; +inf at 0+."""
        xa = np.asarray(x, float)
        if np.any(xa <= 0) or np.any(np.isnan(xa)):
            raise ValueError("positive_tail needs x > 0")
        out = self._kernel.tail(xa)
        for loc, mass in self.atoms:
            out = out + mass * (xa < loc)
        return out if np.ndim(x) else float(out)

    def positive_tail_left(self, x: ArrayLike) -> ArrayLike:
        """Left limit Pi([x, inf))."""
        xa = np.asarray(x, float)
        if np.any(xa <= 0):
            raise ValueError("positive_tail_left needs x > 0")
        out = self._kernel.tail(xa)
        for loc, mass in self.atoms:
            out = out + mass * (xa <= loc)
        return out if np.ndim(x) else float(out)

    def negative_tail(self, x: ArrayLike) -> ArrayLike:
        xa = np.asarray(x, float)
        if np.any(xa <= 0):
            raise ValueError("negative_tail needs x > 0")
        out = self.neg_scale * self._kernel.tail(xa)
        return out if np.ndim(x) else float(out)

    def is_atom(self, x: ArrayLike) -> ArrayLike:
        xa = np.asarray(x, float)
        out = np.zeros(xa.shape, dtype=bool)
        for loc, _ in self.atoms:
            out |= xa == loc
        return out if np.ndim(x) else bool(out)

    def atom_mass_at(self, x: ArrayLike) -> ArrayLike:
        xa = np.asarray(x, float)
        out = np.zeros(xa.shape)
        for loc, mass in self.atoms:
            out = out + mass * (xa == loc)
        return out if np.ndim(x) else float(out)

    def inverse_positive_tail(self, y: ArrayLike) -> ArrayLike:
        """inf{v > 0 : Pi+(v) <= y}; constant over atom plateaus."""
        ya = np.asarray(y, float)
        if np.any(ya <= 0) or np.any(np.isnan(ya)):
            raise ValueError("inverse_positive_tail needs y > 0")
        kern = self._kernel
        out = np.asarray(kern.inv_tail(ya), float).reshape(ya.shape)
        above = 0.0  # mass of atoms strictly right of the current one
        for loc, mass in self.atoms:  # descending locations
            t_right = float(kern.tail(loc)) + above
            t_left = t_right + mass
            above += mass
            hit = ya >= t_right
            if np.any(hit):
                on_plateau = hit & (ya <= t_left)
                out = np.where(on_plateau, loc, out)
                beyond = hit & ~on_plateau
                if np.any(beyond):
                    out = np.where(beyond, np.asarray(kern.inv_tail(np.where(beyond, ya - above, 1.0))).reshape(ya.shape), out)
        return out if np.ndim(y) else float(out)

    # -- moments ----------------------------------------------------------------
    def positive_mean(self, a: ArrayLike, b: ArrayLike, closed_a: bool = True, closed_b: bool = True) -> ArrayLike:
        """int x Pi(dx) over the positive interval from a to b (atoms by closure)."""
        a_arr = np.asarray(a, float)
        b_arr = np.asarray(b, float)
        out = np.where(b_arr > a_arr, self._kernel.m1(a_arr, np.maximum(a_arr, b_arr)), 0.0)
        for loc, mass in self.atoms:
            lo_ok = (loc >= a_arr) if closed_a else (loc > a_arr)
            hi_ok = (loc <= b_arr) if closed_b else (loc < b_arr)
            out = out + loc * mass * (lo_ok & hi_ok)
        return out if (np.ndim(a) or np.ndim(b)) else float(out)

    def negative_mean_abs(self, a: ArrayLike, b: ArrayLike) -> ArrayLike:
        """int |x| Pi(dx) over -b < x < -a (negative side has no atoms)."""
        a_arr = np.asarray(a, float)
        b_arr = np.asarray(b, float)
        if self.neg_scale == 0.0:
            out = np.zeros(np.broadcast(a_arr, b_arr).shape)
        else:
            out = self.neg_scale * np.where(b_arr > a_arr, self._kernel.m1(a_arr, np.maximum(a_arr, b_arr)), 0.0)
        return out if (np.ndim(a) or np.ndim(b)) else float(out)

    # -- centering ------------------------------------------------------------------
    def centering_rho(self, w: ArrayLike) -> ArrayLike:
        """Two-branch centering function: the truncated mean with the shift."""
        wa = np.asarray(w, float)
        if np.any(wa <= 0):
            raise ValueError("centering_rho needs w > 0")
        g = self.gamma_shift
        lo = np.minimum(wa, 1.0)
        hi = np.maximum(wa, 1.0)
        # w <= 1: gamma - int_{[w,1]} x Pi - int_{[-1,-w)} x Pi
        small = g - self.positive_mean(lo, 1.0, True, True) + self.negative_mean_abs(lo, 1.0)
        # w > 1: gamma + int_{(1,w)} x Pi + int_{[-w,-1)} x Pi
        large = g + self.positive_mean(1.0, hi, False, False) - self.negative_mean_abs(1.0, hi)
        out = np.where(wa <= 1.0, small, large)
        return out if np.ndim(w) else float(out)

    def restricted_triplet(self, y: float) -> "RestrictedTriplet":
        if y <= 0:
            raise ValueError("restricted_triplet needs y > 0")
        g = self.gamma_shift
        if y <= 1.0:
            g = g - self.positive_mean(y, 1.0, True, True)
        return RestrictedTriplet(gamma=float(g), sigma2=self.sigma2, base=self, cutoff=float(y))

    # -- integration ------------------------------------------------------------------
    def truncated_exp_moment(
        self,
        theta: float,
        lower: float,
        upper: float,
        form: str = "plain",
        *,
        comp_cutoff: float = 1.0,
        closed_lower: bool = False,
        closed_upper: bool = False,
        tol: float = DEFAULT_TOL,
        return_error: bool = False,
    ):
        """Integral of a chosen integrand against Pi over (lower, upper).

        ``form`` selects the integrand: ``"plain"`` is e^{i theta x},
        ``"minus_one"`` is e^{i theta x} - 1 and ``"compensated"`` is
        e^{i theta x} - 1 - i theta x 1{|x| <= comp_cutoff}.  Atoms are summed
        explicitly; closure flags decide whether atoms at the endpoints count.
        """
        if form not in ("plain", "minus_one", "compensated"):
            raise ValueError(f"unknown integrand form {form!r}")
        if not lower < upper:
            return (0j, 0.0) if return_error else 0j
        if form == "compensated" and theta == 0.0:
            return (0j, 0.0) if return_error else 0j
        total = 0j
        err = 0.0
        if upper > 0:
            v, e = _kernel_integral(self._kernel, theta, max(lower, 0.0), upper, form, comp_cutoff, tol)
            total += v
            err += e
            for loc, mass in self.atoms:
                lo_ok = loc >= lower if closed_lower else loc > lower
                hi_ok = loc <= upper if closed_upper else loc < upper
                if lo_ok and hi_ok:
                    total += mass * _integrand(theta, loc, form, comp_cutoff)
        if lower < 0 and self.neg_scale > 0:
            v, e = _kernel_integral(self._kernel, -theta, max(-upper, 0.0), -lower, form, comp_cutoff, tol)
            total += self.neg_scale * v
            err += self.neg_scale * e
        return (total, err) if return_error else total


def _integrand(theta, x, form, cutoff):
    val = np.exp(1j * theta * x)
    if form != "plain":
        val = val - 1.0
    if form == "compensated" and abs(x) <= cutoff:
        val = val - 1j * theta * x
    return complex(val)


def _h(theta: float, x: np.ndarray, k: int, compensate: bool):
    """g(x) / x^k computed without cancellation, as (real, imag)."""
    y = theta * x
    if k == 0:
        return np.cos(y), np.sin(y)
    half = np.sinc(y / (2 * np.pi))  # sin(y/2)/(y/2)
    re_k1 = -0.5 * theta * y * half * half  # (cos y - 1)/x
    if k == 1:
        return re_k1, theta * np.sinc(y / np.pi)
    re = -0.5 * theta * theta * half * half  # (cos y - 1)/x^2
    if compensate:
        small = np.abs(y) < 1e-2
        with np.errstate(divide="ignore", invalid="ignore"):
            im_big = theta * theta * (np.sin(y) - y) / (y * y)
        im_small = theta * theta * (-y / 6.0 + y**3 / 120.0)
        im = np.where(small, im_small, im_big)
    else:
        with np.errstate(divide="ignore", invalid="ignore"):
            im = np.sin(y) / (x * x)
    return re, im


def _quad_pair(fr, fi, a, b, tol, **kw):
    r, er = integrate.quad(fr, a, b, epsabs=tol, epsrel=1e-12, limit=500, **kw)
    i, ei = integrate.quad(fi, a, b, epsabs=tol, epsrel=1e-12, limit=500, **kw)
    return complex(r, i), er + ei


def _inner(kern, theta, lo, hi, k, compensate, tol):
    """int_lo^hi g(x) p(x) dx for 0 <= lo < hi <= 1 via log substitution."""
    al = kern.alpha
    if lo == 0.0 and k <= al:
        raise NonIntegrableError(f"integrand not integrable at the endpoint 0 (alpha={al})")

    def f(u, part):
        x = math.exp(u)
        re, im = _h(theta, np.array(x), k, compensate)
        w = float(kern.density_reg(np.array(x))) * math.exp((k - al) * u)
        return float(re) * w if part == 0 else float(im) * w

    ua = -np.inf if lo == 0.0 else math.log(lo)
    ub = math.log(hi)
    with np.errstate(all="ignore"):
        return _quad_pair(lambda u: f(u, 0), lambda u: f(u, 1), ua, ub, tol)


def _outer(kern, theta, lo, hi, form, cutoff, tol):
    """int_lo^hi g(x) p(x) dx for 1 <= lo < hi <= inf."""
    al = kern.alpha

    def p(x):
        return float(kern.density_reg(np.array(x))) * x ** (-al - 1.0)

    def mass_between(a, b):
        return float(kern.tail(a) - (kern.tail(b) if np.isfinite(b) else 0.0))

    mass = mass_between(lo, hi)
    if theta == 0.0:
        val, err = complex(mass), 0.0
    else:
        # e^{i theta x} - 1 without cancellation up to a few periods, in log x
        split = min(max(lo, 8.0 * math.pi / abs(theta)), hi)
        if split > lo:

            def f(u, part):
                x = math.exp(u)
                y = theta * x
                g = -2.0 * math.sin(0.5 * y) ** 2 if part == 0 else math.sin(y)
                return g * p(x) * x

            val, err = _quad_pair(lambda u: f(u, 0), lambda u: f(u, 1), math.log(lo), math.log(split), tol)
        else:
            val, err = 0j, 0.0
        if split < hi:
            kw = dict(limit=500) if np.isfinite(hi) else dict(limlst=200)
            r, er = integrate.quad(p, split, hi, weight="cos", wvar=abs(theta), epsabs=tol, **kw)
            i, ei = integrate.quad(p, split, hi, weight="sin", wvar=abs(theta), epsabs=tol, **kw)
            val += complex(r, math.copysign(1.0, theta) * i) - mass_between(split, hi)
            err += er + ei
        if form == "plain":
            val += mass
    if form == "minus_one" and theta == 0.0:
        val = 0j
    if form == "compensated":
        val = 0j if theta == 0.0 else val
        if cutoff > lo:
            val -= 1j * theta * float(kern.m1(lo, min(hi, cutoff)))
    return val, err


def _kernel_integral(kern, theta, lo, hi, form, cutoff, tol):
    """Integral over (lo, hi) subset of (0, inf) against the continuous kernel."""
    total, err = 0j, 0.0
    if lo < 1.0:
        top = min(hi, 1.0)
        if form == "compensated":
            c = min(cutoff, top)
            if c > lo:
                v, e = _inner(kern, theta, lo, c, 2, True, tol)
                total, err = total + v, err + e
            if top > max(c, lo):
                v, e = _inner(kern, theta, max(c, lo), top, 1, False, tol)
                total, err = total + v, err + e
        else:
            k = 1 if form == "minus_one" else 0
            v, e = _inner(kern, theta, lo, top, k, False, tol)
            total, err = total + v, err + e
    if hi > 1.0:
        v, e = _outer(kern, theta, max(lo, 1.0), hi, form, cutoff, tol)
        total, err = total + v, err + e
    return total, err


# ---------------------------------------------------------------------------
# restricted triplet
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RestrictedTriplet:
    """Triplet of the process with positive jumps >= cutoff removed."""

    gamma: float
    sigma2: float
    base: LevyModel
    cutoff: float

    def cf_exponent(self, theta: float, tol: float = DEFAULT_TOL) -> complex:
        """log E exp(i theta X_1) for the restricted process."""
        integral = self.base.truncated_exp_moment(theta, -np.inf, self.cutoff, "compensated", tol=tol)
        return 1j * theta * self.gamma - 0.5 * self.sigma2 * theta**2 + integral


# ---------------------------------------------------------------------------
# constructors and module-level operations
# ---------------------------------------------------------------------------


def pure_stable(alpha: float, a_plus: float = 1.0, gamma_shift: float = 0.0, sigma2: float = 0.0) -> LevyModel:
    return LevyModel(Kind.PURE_STABLE, alpha, a_plus=a_plus, gamma_shift=gamma_shift, sigma2=sigma2)


def stable_subordinator(alpha: float, drift: float = 0.0) -> LevyModel:
    return LevyModel(Kind.PURE_STABLE, alpha, drift=drift)


def stable_limit_model(alpha: float, a_plus: float = 1.0, subordinator: bool = False) -> LevyModel:
    """Limit measure with tail exactly x^-alpha, no atoms, sigma2 = 0.

    ``subordinator=True`` gives the driftless stable subordinator (alpha < 1,
    a_plus = 1); otherwise the triplet constant is 0.
    """
    if subordinator:
        if a_plus != 1.0:
            raise ValueError("a subordinator limit needs a_plus = 1")
        return stable_subordinator(alpha, 0.0)
    return pure_stable(alpha, a_plus, 0.0)


def tempered_stable(alpha: float, rate: float = 1.0, a_plus: float = 1.0, drift: float | None = None,
                    gamma_shift: float | None = None) -> LevyModel:
    if drift is None and gamma_shift is None and a_plus == 1.0 and alpha < 1.0:
        drift = 0.0
    return LevyModel(Kind.TEMPERED_STABLE, alpha, a_plus=a_plus, drift=drift, gamma_shift=gamma_shift, tempering=rate)


def atomic_stable(alpha: float, atoms: Sequence[tuple[float, float]], a_plus: float = 1.0,
                  gamma_shift: float | None = None, drift: float | None = None) -> LevyModel:
    return LevyModel(Kind.ATOMIC_STABLE, alpha, a_plus=a_plus, atoms=tuple(tuple(a) for a in atoms),
                     gamma_shift=gamma_shift, drift=drift)


def gamma_subordinator() -> LevyModel:
    return LevyModel(Kind.GAMMA_SUBORDINATOR, 0.0)


def positive_tail(model: LevyModel, x):
    return model.positive_tail(x)


def inverse_positive_tail(model: LevyModel, y):
    return model.inverse_positive_tail(y)


def centering_rho(model: LevyModel, w):
    return model.centering_rho(w)


def truncated_exp_moment(model: LevyModel, theta: float, lower: float, upper: float, form: str = "plain", **kw):
    return model.truncated_exp_moment(theta, lower, upper, form, **kw)


def restricted_triplet(model: LevyModel, y: float) -> RestrictedTriplet:
    return model.restricted_triplet(y)


@dataclass(frozen=True)
class RVDiagnostic:
    t_grid: np.ndarray
    values: np.ndarray
    limit: float
    converged: bool


def regular_variation_diagnostic(model: LevyModel, u: float, y: float, t_grid: Sequence[float],
                                 rtol: float = 1e-2) -> RVDiagnostic:
    """t Pi+(u Pi+^{-1}(y/t)) along a decreasing t grid, against u^-alpha y."""
    t = np.asarray(t_grid, float)
    if t.size == 0:
        raise ValueError("t_grid must be non-empty")
    if u <= 0 or y <= 0 or np.any(t <= 0):
        raise ValueError("u, y and t must be positive")
    q = model.inverse_positive_tail(y / t)
    vals = t * model.positive_tail(u * q)
    limit = u ** (-model.alpha) * y
    return RVDiagnostic(t, vals, float(limit), bool(abs(vals[-1] - limit) <= rtol * abs(limit)))
