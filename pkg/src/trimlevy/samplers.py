"""Joint sampling of ordered jumps and trimmed remainders.

The top jumps at time t are ``Pi+^{<-}(Gamma_i / t)`` where ``Gamma_i`` are
arrival times of a unit Poisson process.  Given the r-th level
``y = Pi+^{<-}(Gamma_r / t)``, the r-trimmed value is an independent draw of
the process with positive jumps >= y removed, plus ``y`` times a Poisson
count that accounts for further jumps tied at an atom ``y``.

All samplers are vectorized over a leading batch axis of length ``size``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import LevyModel
from .rng import RngStream, as_stream

DEFAULT_BUDGET = 512.0
_CHUNK_JUMPS = 4_000_000


@dataclass(frozen=True)
class OrderedJumpSample:
    """Batch of ordered-jump draws; arrays have shape (size, count)."""

    t: np.ndarray
    gammas: np.ndarray
    jumps: np.ndarray

    @property
    def count(self) -> int:
        return self.jumps.shape[-1]


@dataclass(frozen=True)
class TrimmedSample:
    """Batch of joint draws of the r-trimmed value and the top jumps.

    ``remainder`` and ``tie_correction`` belong to the deepest recorded level
    ``level = jumps[:, -1]``; the r-trimmed value adds back the recorded jumps
    with index above r.
    """

    ordered: OrderedJumpSample
    r: int
    remainder: np.ndarray
    tie_correction: np.ndarray
    trimmed_value: np.ndarray

    @property
    def t(self) -> np.ndarray:
        return self.ordered.t

    @property
    def jumps(self) -> np.ndarray:
        return self.ordered.jumps

    def trimmed_at(self, r: int) -> np.ndarray:
        """^{(r)}X_t for any r >= self.r covered by the recorded jumps."""
        if r < self.r or r > self.ordered.count:
            raise ValueError(f"r={r} outside recorded range [{self.r}, {self.ordered.count}]")
        return self.trimmed_value - self.jumps[:, self.r:r].sum(axis=1)


def gamma_sequence(count: int, rng: RngStream | int | None = None, size: int | None = None) -> np.ndarray:
    """Arrival times Gamma_1 < ... < Gamma_count of a unit Poisson process."""
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = as_stream(rng)
    shape = (count,) if size is None else (size, count)
    return np.cumsum(rng.exponential(shape), axis=-1)


def sample_ordered_jumps(model: LevyModel, t: float, count: int, rng: RngStream | int | None = None,
                         size: int | None = None, gammas: np.ndarray | None = None) -> OrderedJumpSample:
    """Top ``count`` ordered positive jumps at time t (``gammas`` may be forced)."""
    if t <= 0:
        raise ValueError("t must be positive")
    if gammas is None:
        gammas = gamma_sequence(count, rng, size)
    gammas = np.atleast_2d(np.asarray(gammas, float))
    if np.any(np.diff(gammas, axis=1) <= 0) or np.any(gammas <= 0):
        raise ValueError("gammas must be positive and strictly increasing")
    jumps = model.inverse_positive_tail(gammas / t)
    return OrderedJumpSample(np.full(gammas.shape[0], float(t)), gammas, jumps)


def small_jump_cutoff(model: LevyModel, t, budget: float = DEFAULT_BUDGET):
    """Level below which jumps are replaced by their mean and variance.

    Chosen so the expected number of simulated continuous jumps of size
    >= eps up to time t is ``budget``; never above 1.
    """
    t = np.asarray(t, float)
    # floor at the smallest normal double: the gamma inverse underflows for huge budgets
    return np.clip(model.kernel.inv_tail(budget / t), np.finfo(float).tiny, 1.0)


def residual_moments(model: LevyModel, y, t, budget: float = DEFAULT_BUDGET):
    """(mean, variance) of the part of X_t^{(y)} not simulated jump by jump."""
    kern = model.kernel
    eps = small_jump_cutoff(model, t, budget)
    m = np.minimum(eps, y)
    var = t * (kern.m2_0(m) + model.neg_scale * kern.m2_0(eps))
    if model.is_subordinator:
        mean = t * (model.drift + kern.m1_0(m))
    else:
        atoms_le1 = sum(x * w for x, w in model.atoms if x <= 1.0)
        mean = t * (model.gamma_shift - kern.m1(m, 1.0) - atoms_le1 + model.neg_scale * kern.m1(eps, 1.0))
    return mean, var


def _sum_inverse_tail_jumps(kern, rng: RngStream, rate, t_hi, t_lo):
    """Per-draw sum of Poisson(rate) jumps with tail values uniform on (t_lo, t_hi]."""
    counts = rng.poisson(rate)
    out = np.zeros(rate.shape)
    total = int(counts.sum())
    if total == 0:
        return out
    starts = np.concatenate([[0], np.cumsum(counts)])
    # chunk draws so the flat jump array stays bounded
    i = 0
    n = rate.size
    while i < n:
        j = int(np.searchsorted(starts, starts[i] + _CHUNK_JUMPS, side="right")) - 1
        j = min(max(j, i + 1), n)
        c = counts[i:j]
        k = int(c.sum())
        if k:
            owner = np.repeat(np.arange(j - i), c)
            u = rng.random(k)
            lo = t_lo[i:j][owner]
            hi = t_hi[i:j][owner]
            sizes = kern.inv_tail(hi - u * (hi - lo))
            out[i:j] = np.bincount(owner, weights=sizes, minlength=j - i)
        i = j
    return out


def sample_small_jump_remainder(model: LevyModel, y, t, rng: RngStream | int | None = None,
                                size: int | None = None, budget: float = DEFAULT_BUDGET) -> np.ndarray:
    """Draws of X_t^{(y)}: the process with positive jumps >= y removed.

    Continuous jumps with |x| >= eps are simulated exactly by inversion,
    atoms below y by Poisson counts; the rest is replaced by its exact mean
    plus a Gaussian with the exact residual variance (mean only for
    subordinators, which keeps draws non-negative).
    ``y`` and ``t`` broadcast against ``size``; ``y = inf`` means no removal.
    """
    rng = as_stream(rng)
    y = np.asarray(y, float)
    t = np.asarray(t, float)
    shape = np.broadcast_shapes(y.shape, t.shape, () if size is None else (size,))
    y = np.broadcast_to(y, shape).ravel()
    t = np.broadcast_to(t, shape).ravel()
    if np.any(y <= 0) or np.any(t <= 0):
        raise ValueError("y and t must be positive")
    kern = model.kernel

    eps = small_jump_cutoff(model, t, budget)
    tail_eps = kern.tail(eps)
    tail_y = np.where(np.isfinite(y), kern.tail(y), 0.0)
    rate = t * np.maximum(tail_eps - tail_y, 0.0)
    out = _sum_inverse_tail_jumps(kern, rng, rate, tail_eps, np.minimum(tail_y, tail_eps))

    for loc, mass in model.atoms:
        below = loc < y
        if np.any(below):
            out += loc * rng.poisson(np.where(below, t * mass, 0.0))

    if model.neg_scale > 0:
        neg_rate = t * model.neg_scale * tail_eps
        out -= _sum_inverse_tail_jumps(kern, rng, neg_rate, tail_eps, np.zeros_like(tail_eps))

    mean, var = residual_moments(model, y, t, budget)
    out += mean
    if not model.is_subordinator:
        var = var + t * model.sigma2
        out += np.sqrt(var) * rng.normal(out.shape)
    return out.reshape(shape)


def sample_tie_correction(model: LevyModel, y, v, t, rng: RngStream | int | None = None) -> np.ndarray:
    """y times a Poisson(t * kappa) count, kappa = Pi+(y-) - v at atoms, else 0."""
    rng = as_stream(rng)
    y, v, t = np.broadcast_arrays(np.asarray(y, float), np.asarray(v, float), np.asarray(t, float))
    shape = y.shape
    y, v, t = y.ravel(), v.ravel(), t.ravel()
    out = np.zeros(y.shape)
    finite = np.isfinite(y)
    atom = np.asarray(model.is_atom(np.where(finite, y, 1.0))) & finite
    if np.any(atom):
        left = np.asarray(model.positive_tail_left(np.where(atom, y, 1.0)), float)
        kappa = left - v
        if np.any(kappa[atom] < -1e-12 * np.maximum(left[atom], 1.0)):
            raise ValueError("v exceeds the left tail limit at y: negative Poisson rate")
        kappa = np.where(atom, np.maximum(kappa, 0.0), 0.0)
        out = np.where(atom, y * rng.poisson(t * kappa), 0.0)
    return out.reshape(shape)


def sample_trimmed(model: LevyModel, t: float, r: int, extra: int = 0, rng: RngStream | int | None = None,
                   size: int | None = None, budget: float = DEFAULT_BUDGET,
                   gammas: np.ndarray | None = None) -> TrimmedSample:
    """Joint draw of ^{(r)}X_t and the top r + extra jumps."""
    if r < 0 or extra < 0:
        raise ValueError("r and extra must be non-negative")
    rng = as_stream(rng)
    depth = r + extra
    nrow = 1 if size is None else size
    if depth > 0:
        ordered = sample_ordered_jumps(model, t, depth, rng, nrow, gammas=gammas)
        level = ordered.jumps[:, -1]
        v = ordered.gammas[:, -1] / t
    else:
        ordered = OrderedJumpSample(np.full(nrow, float(t)), np.zeros((nrow, 0)), np.zeros((nrow, 0)))
        level = np.full(nrow, np.inf)
        v = np.zeros(nrow)
    remainder = sample_small_jump_remainder(model, level, t, rng, budget=budget)
    tie = sample_tie_correction(model, level, v, t, rng)
    trimmed = remainder + tie + ordered.jumps[:, r:].sum(axis=1)
    return TrimmedSample(ordered, r, remainder, tie, trimmed)


def ratio_vector(sample: TrimmedSample, model: LevyModel, r: int, n: int) -> np.ndarray:
    """((^{(r)}X_t - t rho(DeltaX^{(r+n)})) / DeltaX^{(r+k)})_{k=1..n}, shape (size, n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sample.ordered.count < r + n:
        raise ValueError(f"sample records {sample.ordered.count} jumps, need {r + n}")
    den = sample.jumps[:, r:r + n]
    if np.any(den <= 0):
        raise ValueError("zero jump in the denominator")
    t = sample.t
    if model.is_subordinator:
        centre = t * model.drift
    else:
        centre = t * model.centering_rho(den[:, -1])
    num = sample.trimmed_at(r) - centre
    return num[:, None] / den


def sample_stable_series_trimmed(alpha: float, t: float, r: int, rng: RngStream | int | None = None,
                                 size: int | None = None, terms: int = 2000) -> np.ndarray:
    """Driftless stable subordinator trimmed value from the series of inverse gammas.

    Sums (Gamma_i/t)^{-1/alpha} for r < i <= terms and adds the mean of the
    omitted tail.  Independent of the small-jump machinery; used as a check.
    """
    if not 0 < alpha < 1:
        raise ValueError("series path needs alpha in (0, 1)")
    g = gamma_sequence(terms, rng, 1 if size is None else size)
    p = 1.0 / alpha
    vals = np.power(g[:, r:] / t, -p).sum(axis=1)
    tail = t**p * g[:, -1] ** (1.0 - p) / (p - 1.0)
    return vals + tail
