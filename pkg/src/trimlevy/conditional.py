"""Conditional characteristic functions given the sizes of the top jumps.

Conditioning on jump sizes y_m >= ... >= y_r fixes the restricted process
X^{(y_r)} in law; the only extra randomness is the tie count at an atom y_r,
whose CF factor K is an expectation over the gamma sequence restricted to the
atom plateaus [a_i, b_i), a_i = Pi+(y_i), b_i = Pi+(y_i-).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .measures import LevyModel
from .rng import RngStream, as_stream
from .samplers import gamma_sequence

REJECTION_FLOOR = 1e-4


@dataclass(frozen=True)
class ConditionSpec:
    """Levels y_m >= ... >= y_r of the m-th through r-th largest jumps at time t."""

    t: float
    m: int
    r: int
    levels: tuple[float, ...]
    atom_flags: tuple[bool, ...] | None = None

    def __post_init__(self):
        if self.t <= 0:
            raise ValueError("t must be positive")
        if not 1 <= self.m <= self.r:
            raise ValueError("need 1 <= m <= r")
        lv = tuple(float(v) for v in self.levels)
        if len(lv) != self.r - self.m + 1:
            raise ValueError(f"need {self.r - self.m + 1} levels for indices {self.m}..{self.r}")
        if any(v <= 0 for v in lv) or any(a < b for a, b in zip(lv, lv[1:])):
            raise ValueError("levels must be positive and nonincreasing")
        object.__setattr__(self, "levels", lv)
        if self.atom_flags is not None:
            object.__setattr__(self, "atom_flags", tuple(bool(f) for f in self.atom_flags))

    def flags_for(self, model: LevyModel) -> tuple[bool, ...]:
        flags = tuple(bool(model.is_atom(y)) for y in self.levels)
        if self.atom_flags is not None and self.atom_flags != flags:
            raise ValueError("atom_flags disagree with the model's atoms")
        return flags

    def level(self, i: int) -> float:
        return self.levels[i - self.m]


@dataclass(frozen=True)
class KEstimate:
    value: complex
    stderr: float
    n: int
    acceptance: float
    method: str


def _plateaus(model: LevyModel, spec: ConditionSpec):
    flags = spec.flags_for(model)
    idx, lo, hi = [], [], []
    for i, (y, f) in enumerate(zip(spec.levels, flags)):
        if f:
            idx.append(spec.m + i)
            lo.append(model.positive_tail(y))
            hi.append(model.positive_tail_left(y))
    return np.array(idx, int), np.array(lo), np.array(hi)


def k_factor(model: LevyModel, spec: ConditionSpec, theta: float, rng: RngStream | int | None = None,
             n_mc: int = 100_000, method: str = "auto", detail: bool = False):
    """Conditional CF of the tie correction G at level y_r given the plateau events.

    Rao-Blackwellized: E[exp(t (b_r - V)(e^{i theta y_r} - 1)) | events], V = Gamma_r / t.
    ``method`` is ``rejection``, ``sequential`` (truncated-gamma importance
    sampling) or ``auto`` (rejection unless the acceptance rate is below 1e-4).
    """
    yr = spec.levels[-1]
    if not model.is_atom(yr) or theta == 0.0:
        res = KEstimate(1.0 + 0j, 0.0, 0, 1.0, "exact")
        return res if detail else res.value
    idx, lo, hi = _plateaus(model, spec)
    if np.any(np.diff(idx) <= 0) or idx[-1] != spec.r:
        raise AssertionError("plateau bookkeeping")
    rng = as_stream(rng)
    t = spec.t
    factor = math.cos(theta * yr) - 1.0 + 1j * math.sin(theta * yr)
    br = hi[-1]

    if method in ("auto", "rejection"):
        g = gamma_sequence(spec.r, rng, n_mc)[:, idx - 1] / t
        ok = np.all((g >= lo) & (g < hi), axis=1)
        acc = float(ok.mean())
        if method == "rejection" or acc >= REJECTION_FLOOR:
            if not ok.any():
                raise ValueError("conditioning event has zero probability")
            z = np.exp(t * (br - g[ok, -1]) * factor)
            m = complex(z.mean())
            se = math.sqrt(float(np.mean(np.abs(z - m) ** 2)) / z.size)
            res = KEstimate(m, se, int(z.size), acc, "rejection")
            return res if detail else res.value
    elif method != "sequential":
        raise ValueError(f"unknown method {method!r}")

    v, logw = _sequential(idx, lo * t, hi * t, rng, n_mc)
    w = np.exp(logw - logw.max())
    if not np.all(np.isfinite(logw)) or w.sum() == 0:
        raise ValueError("conditioning event has zero probability")
    w /= w.sum()
    z = np.exp(t * (br - v / t) * factor)
    m = complex(np.sum(w * z))
    ess = 1.0 / float(np.sum(w * w))
    se = math.sqrt(float(np.sum(w * np.abs(z - m) ** 2)) / ess)
    res = KEstimate(m, se, n_mc, float("nan"), "sequential")
    return res if detail else res.value


def _truncated_gamma(shape: float, lo: np.ndarray, hi: np.ndarray, rng: RngStream):
    """Inverse-CDF draws from Gamma(shape, 1) restricted to [lo, hi); returns (draws, log mass)."""
    plo = special.gammainc(shape, lo)
    phi_ = special.gammainc(shape, hi)
    mass = phi_ - plo
    # upper-tail form when both ends sit far out
    far = plo > 0.5
    qlo = special.gammaincc(shape, lo)
    qhi = special.gammaincc(shape, hi)
    mass = np.where(far, qlo - qhi, mass)
    u = rng.random(lo.shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_near = special.gammaincinv(shape, plo + u * (phi_ - plo))
        x_far = special.gammainccinv(shape, qlo - u * (qlo - qhi))
        x = np.where(far, x_far, x_near)
        x = np.clip(x, lo, np.nextafter(hi, lo))
        logm = np.log(mass)
    return x, logm


def _sequential(idx: np.ndarray, lo: np.ndarray, hi: np.ndarray, rng: RngStream, n: int):
    """Sample Gamma at the flagged indices restricted to [lo, hi) with importance weights."""
    cur = np.zeros(n)
    logw = np.zeros(n)
    prev = 0
    for j, a, b in zip(idx, lo, hi):
        k = int(j - prev)
        inc_lo = np.maximum(a - cur, 0.0)
        inc_hi = b - cur
        dead = inc_hi <= 0
        inc_hi = np.where(dead, inc_lo + 1.0, inc_hi)
        inc, lm = _truncated_gamma(float(k), inc_lo, inc_hi, rng)
        lm = np.where(dead, -np.inf, lm)
        cur = cur + inc
        logw = logw + lm
        prev = int(j)
    return cur, logw


def _restricted_exponent(model: LevyModel, y: float, theta: float) -> complex:
    return model.restricted_triplet(y).cf_exponent(theta)


def conditional_cf_trimmed(model: LevyModel, spec: ConditionSpec, theta: float, form: str = "compensated",
                           rng: RngStream | int | None = None, n_mc: int = 100_000) -> complex:
    """E(exp(i theta ^{(r)}X_t) | jumps m..r equal the levels).

    ``form="subordinator"`` uses the drift form, valid for subordinators.
    """
    t, yr = spec.t, spec.levels[-1]
    if theta == 0.0:
        return 1.0 + 0j
    if form == "compensated":
        base = np.exp(t * _restricted_exponent(model, yr, theta))
    elif form == "subordinator":
        if not model.is_subordinator:
            raise ValueError("subordinator form needs a subordinator model")
        integral = model.truncated_exp_moment(theta, 0.0, yr, "minus_one")
        base = np.exp(1j * theta * t * model.drift + t * integral)
    else:
        raise ValueError(f"unknown form {form!r}")
    return complex(base * k_factor(model, spec, theta, rng, n_mc))


def conditional_cf_ratio(model: LevyModel, spec: ConditionSpec, theta: float, r: int, n: int,
                         form: str = "rescaled", rng: RngStream | int | None = None,
                         n_mc: int = 100_000) -> complex:
    """Conditional CF of a centred, scaled trimmed value given jumps m..r+n.

    ``rescaled`` and ``kernel`` both give the CF of
    (^{(r+n)}X_t - t rho(y_{r+n})) / y_{r+n}: the first integrates against the
    measure rescaled by y_{r+n}, the second evaluates the restricted exponent
    at theta / y_{r+n}.  ``subordinator`` gives the CF of
    (^{(r+n)}X_t - t d) / y_r.
    """
    if spec.r != r + n or spec.m > r:
        raise ValueError("spec must cover indices m..r+n with m <= r")
    t = spec.t
    y_last = spec.levels[-1]
    if theta == 0.0:
        return 1.0 + 0j
    if form == "rescaled":
        s = theta / y_last
        integral = model.truncated_exp_moment(s, -np.inf, y_last, "compensated", comp_cutoff=y_last)
        expo = t * integral - 0.5 * t * model.sigma2 * s * s
    elif form == "kernel":
        s = theta / y_last
        expo = t * _restricted_exponent(model, y_last, s) - 1j * s * t * model.centering_rho(y_last)
    elif form == "subordinator":
        if not model.is_subordinator:
            raise ValueError("subordinator form needs a subordinator model")
        s = theta / spec.level(r)
        expo = t * model.truncated_exp_moment(s, 0.0, y_last, "minus_one")
    else:
        raise ValueError(f"unknown form {form!r}")
    return complex(np.exp(expo) * k_factor(model, spec, s, rng, n_mc))


# ---------------------------------------------------------------------------
# limit of jump ratios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProbEstimate:
    value: float
    stderr: float
    n: int


def _check_x(x_vec: Sequence[float], n: int) -> np.ndarray:
    x = np.asarray(x_vec, float)
    if x.shape != (n - 1,):
        raise ValueError(f"x_vec must have length n-1={n - 1}")
    if np.any(x < 1) or np.any(np.diff(x) > 0):
        raise ValueError("x_vec must be nonincreasing with entries >= 1")
    return x


def _uniform_order_dp(c: np.ndarray, r: int, M: int) -> float:
    """P(U_(r+k) < c_k for k=1..K) for M iid uniforms, c nondecreasing."""
    edges = np.concatenate([[0.0], c, [1.0]])
    probs = np.diff(edges)
    lf = [math.lgamma(i + 1) for i in range(M + 1)]
    f = np.full(M + 1, -np.inf)  # log of sum over counts, cumulative count s
    f[0] = 0.0
    for k, p in enumerate(probs[:-1], start=1):
        g = np.full(M + 1, -np.inf)
        lp = math.log(p) if p > 0 else -np.inf
        for s_new in range(M + 1):
            terms = []
            for s_old in range(s_new + 1):
                if f[s_old] == -np.inf:
                    continue
                d = s_new - s_old
                if d and lp == -np.inf:
                    continue
                terms.append(f[s_old] + (d * lp if d else 0.0) - lf[d])
            if terms:
                g[s_new] = np.logaddexp.reduce(terms)
        g[: min(r + k, M + 1)] = -np.inf
        f = g
    lp = math.log(probs[-1]) if probs[-1] > 0 else -np.inf
    total = []
    for s in range(M + 1):
        if f[s] == -np.inf:
            continue
        d = M - s
        if d and lp == -np.inf:
            continue
        total.append(f[s] + (d * lp if d else 0.0) - lf[d])
    if not total:
        return 0.0
    return float(np.exp(lf[M] + np.logaddexp.reduce(total)))


def conditional_jump_ratio_limit(r: int, n: int, x_vec: Sequence[float], alpha: float, method: str = "closed",
                                 rng: RngStream | int | None = None, n_mc: int = 1_000_000):
    """P(Gamma_{r+k} / Gamma_{r+n} < x_k^{-alpha}, 1 <= k <= n-1).

    ``closed``: Gamma_j / Gamma_{r+n}, j < r+n, are uniform order statistics,
    so the probability is a multinomial sum evaluated by dynamic programming.
    ``mc``: direct gamma sequences.  ``order_stats``: P(J^{(k)}(B^{1/alpha}) > x_k),
    with the L law when r = 0.  Monte Carlo methods return a ProbEstimate.
    """
    if r < 0 or n < 2:
        raise ValueError("need r >= 0 and n >= 2")
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    x = _check_x(x_vec, n)
    c = np.power(x, -alpha)
    if method == "closed":
        return _uniform_order_dp(c, r, r + n - 1)
    rng = as_stream(rng)
    if method == "mc":
        hits = 0
        done = 0
        block = 200_000
        while done < n_mc:
            b = min(block, n_mc - done)
            g = gamma_sequence(r + n, rng, b)
            ratio = g[:, r:r + n - 1] / g[:, -1:]
            hits += int(np.all(ratio < c, axis=1).sum())
            done += b
    elif method == "order_stats":
        from .limit_laws import LimitLawSpec, sample_jump_ratios

        if alpha >= 2:
            raise ValueError("order_stats method needs alpha < 2")
        spec = LimitLawSpec(alpha, 1.0, r, n)
        hits = 0
        done = 0
        block = 200_000
        while done < n_mc:
            b = min(block, n_mc - done)
            js = sample_jump_ratios(spec, rng, b)
            hits += int(np.all(js > x, axis=1).sum())
            done += b
    else:
        raise ValueError(f"unknown method {method!r}")
    p = hits / n_mc
    return ProbEstimate(p, math.sqrt(max(p * (1 - p), 1e-300) / n_mc), n_mc)
