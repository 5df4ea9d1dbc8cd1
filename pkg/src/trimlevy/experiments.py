"""Monte Carlo experiment harnesses with CSV / JSON reports.

Every cell of an experiment grid draws from its own RngStream derived from
the configured seed, so reports are bit-reproducible regardless of the
number of worker threads.  Cells that differ only in t share a stream id,
which couples them through the same gamma sequence (variance reduction for
trend estimates).
"""

from __future__ import annotations

import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from . import limit_laws as ll
from .inversion import cdf_interpolant
from .measures import LevyModel
from .rng import RngStream
from .samplers import DEFAULT_BUDGET, ratio_vector, sample_trimmed
from .stats import KOLMOGOROV_SD, ks_critical, ks_distance, ks_two_sample, wilson_interval

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "convergence_experiment",
    "subordinator_laplace_experiment",
    "large_trim_experiment",
    "pd_ratio_experiment",
    "ks_distance",
]

_CONFIG_FIELDS = {
    "model", "r", "n", "t_grid", "sample_count", "seed", "theta_grid", "lambda_grid", "eps", "n_grid",
    "out_csv", "out_json", "threads", "budget", "reference_count", "target", "inversion_points",
    "integration_cap",
}


@dataclass
class ExperimentConfig:
    model: dict
    r: int = 1
    n: int = 1
    t_grid: list = field(default_factory=lambda: [1.0])
    sample_count: int = 100_000
    seed: int = 0
    theta_grid: list = field(default_factory=list)
    lambda_grid: list = field(default_factory=list)
    eps: float = 0.1
    n_grid: list = field(default_factory=lambda: [1, 2, 4, 8, 16, 32])
    out_csv: str | None = None
    out_json: str | None = None
    threads: int = 1
    budget: float = DEFAULT_BUDGET
    reference_count: int | None = None
    target: float = 0.05
    inversion_points: int = 400
    integration_cap: float = 2000.0

    def __post_init__(self):
        t = [float(v) for v in self.t_grid]
        if not t or any(v <= 0 for v in t) or any(a <= b for a, b in zip(t, t[1:])):
            raise ValueError("t_grid must be non-empty, positive and strictly decreasing")
        self.t_grid = t
        if self.sample_count < 1000:
            raise ValueError("sample_count must be >= 1000")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.r < 0 or self.n < 1:
            raise ValueError("need r >= 0 and n >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        self.n_grid = sorted(int(v) for v in self.n_grid)
        if not self.n_grid or self.n_grid[0] < 1:
            raise ValueError("n_grid must contain positive integers")

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        unknown = set(d) - _CONFIG_FIELDS
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        if "model" not in d:
            raise ValueError("config needs a 'model' description")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def levy_model(self) -> LevyModel:
        return LevyModel.from_dict(self.model)

    def to_dict(self) -> dict:
        return asdict(self)


def _fmt(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


@dataclass
class ExperimentReport:
    name: str
    columns: list
    rows: list
    summary: dict
    runtime: dict = field(default_factory=dict)

    def csv_text(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def write_csv(self, path: str):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.csv_text())

    def summary_dict(self) -> dict:
        return {"experiment": self.name, "summary": _jsonable(self.summary), "runtime": self.runtime}

    def write_json(self, path: str):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.summary_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def passed(self) -> bool:
        return all(v for k, v in self.summary.items() if k.startswith("pass_"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _run_cells(fn: Callable, cells: Sequence, threads: int) -> list:
    if threads <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, cells))


def _finish(report: ExperimentReport, cfg: ExperimentConfig, started: float) -> ExperimentReport:
    report.runtime = {"seconds": round(time.perf_counter() - started, 3), "threads": cfg.threads}
    if cfg.out_csv:
        report.write_csv(cfg.out_csv)
    if cfg.out_json:
        report.write_json(cfg.out_json)
    return report


def _nonincreasing_with_slack(values: Sequence[float], se: Sequence[float], allowed: int = 1) -> bool:
    """Nonincreasing except at most ``allowed`` rises, each within one standard error."""
    rises = 0
    for i in range(1, len(values)):
        d = values[i] - values[i - 1]
        if d > 0:
            if d > se[i] or rises >= allowed:
                return False
            rises += 1
    return True


def _limit_spec(model: LevyModel, r: int, n: int) -> ll.LimitLawSpec:
    if not 0 < model.alpha < 2:
        raise ValueError(f"model with alpha={model.alpha} is outside the stable domain of attraction")
    return ll.LimitLawSpec(model.alpha, model.a_plus, r, n, subordinator=model.is_subordinator)


def _is_exact_stable(model: LevyModel) -> bool:
    """Model equal to its own stable limit (the ratio law is then exact at t = 1)."""
    base = model.kind.value == "pure_stable" and model.sigma2 == 0 and not model.atoms
    if model.is_subordinator:
        return base and model.drift == 0
    return base and model.gamma_shift == 0


# ---------------------------------------------------------------------------
# convergence of the ratio vector
# ---------------------------------------------------------------------------


def limit_reference_sample(spec: ll.LimitLawSpec, rng: RngStream, size: int, budget: float = DEFAULT_BUDGET):
    """Draws of the n-th limit coordinate x_+ + W_{Gamma_{r+n}} (x_n = 1)."""
    x = ll.sample_jump_ratios(spec, rng, size)
    w = ll.sample_W_gamma(spec, spec.r + spec.n, rng, size, budget)
    return 1.0 + x.sum(axis=1) + w


def limit_cdf(spec: ll.LimitLawSpec, seed: int, points: int = 400, integration_cap: float = 2000.0):
    """Interpolated CDF of the n-th limit coordinate from the inverted CF."""
    ref = limit_reference_sample(spec, RngStream(seed, (9, 0)), 20_000)
    lo, hi = np.quantile(ref, [2e-4, 1 - 2e-4])
    centre = float(np.median(ref))

    def cf(theta):
        return ll.limit_cf_single(spec, theta, strict=False) * np.exp(-1j * theta * centre)

    F = cdf_interpolant(cf, lo - centre, hi - centre, points, integration_cap=integration_cap)
    return lambda v: F(np.asarray(v) - centre)


def convergence_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    started = time.perf_counter()
    model = cfg.levy_model()
    spec = _limit_spec(model, cfg.r, cfg.n)
    N = cfg.sample_count
    F = limit_cdf(spec, cfg.seed, cfg.inversion_points, cfg.integration_cap)

    thetas = [np.atleast_1d(np.asarray(th, float)) for th in cfg.theta_grid]
    limit_cf = []
    for j, th in enumerate(thetas):
        if th.size == 1:
            limit_cf.append((complex(ll.limit_cf_single(spec, float(th[0]), strict=False)), 0.0))
        elif th.size == cfg.n:
            est = ll.limit_cf_joint(spec, th, "auto", RngStream(cfg.seed, (8, j)), strict=False)
            limit_cf.append((complex(est.value), est.stderr))
        else:
            raise ValueError("theta_grid entries must be scalars or length-n vectors")

    def cell(t):
        rng = RngStream(cfg.seed, (1,))
        sample = sample_trimmed(model, t, cfg.r, cfg.n, rng, N, cfg.budget)
        ratios = ratio_vector(sample, model, cfg.r, cfg.n)
        ks = ks_distance(ratios[:, -1], F)
        dist, dist_se = 0.0, 0.0
        for th, (lim, lim_se) in zip(thetas, limit_cf):
            if th.size == 1:
                z = np.exp(1j * th[0] * ratios[:, -1])
            else:
                z = np.exp(1j * (ratios @ th))
            m = complex(z.mean())
            se = math.sqrt(max(1.0 - abs(m) ** 2, 0.0) / N + lim_se**2)
            d = abs(m - lim)
            if d > dist:
                dist, dist_se = d, se
        return ks, dist, dist_se

    results = _run_cells(cell, cfg.t_grid, cfg.threads)
    ks_se = KOLMOGOROV_SD / math.sqrt(N)
    crit = ks_critical(N)
    exact = _is_exact_stable(model)
    rows = []
    for t, (ks, dist, dist_se) in zip(cfg.t_grid, results):
        exact_cell = exact and t == 1.0
        flag = ks <= crit if exact_cell else True
        rows.append((t, cfg.r, cfg.n, N, ks, ks_se, dist, dist_se, exact_cell, flag))
    ks_vals = [row[4] for row in rows]
    summary = {
        "ks": ks_vals,
        "ks_critical": crit,
        "ks_trend_nonincreasing": _nonincreasing_with_slack(ks_vals, [ks_se] * len(ks_vals)),
        "final_ks": ks_vals[-1],
        "pass_exact_cells": all(row[-1] for row in rows),
        "theta0": spec.theta0,
    }
    report = ExperimentReport(
        "convergence",
        ["t", "r", "n", "samples", "ks_distance", "ks_stderr", "cf_sup_distance", "cf_stderr",
         "exact_identity_cell", "pass"],
        rows, summary)
    return _finish(report, cfg, started)


# ---------------------------------------------------------------------------
# Laplace transform of the subordinator ratio
# ---------------------------------------------------------------------------


def _require_driftless_subordinator(model: LevyModel):
    if not model.is_subordinator or not 0 < model.alpha < 1:
        raise ValueError("experiment needs a subordinator model with alpha in (0, 1)")
    if model.drift != 0:
        raise ValueError("experiment needs a driftless subordinator")


def subordinator_laplace_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """E exp(-lambda ^{(r)}X_t / DeltaX^{(r)}) against (1 + Psi(lambda))^{-r}."""
    started = time.perf_counter()
    model = cfg.levy_model()
    _require_driftless_subordinator(model)
    if cfg.r < 1:
        raise ValueError("Laplace experiment needs r >= 1")
    spec = ll.LimitLawSpec(model.alpha, 1.0, cfg.r, 1, subordinator=True)
    lams = [float(v) for v in (cfg.lambda_grid or [0.5, 1.0, 2.0])]
    if any(v < 0 for v in lams):
        raise ValueError("lambda values must be non-negative")
    lam_arr = np.array(lams)
    psi_closed = ll.subordinator_exponent(spec, lam_arr)
    psi_quad = ll.subordinator_exponent(spec, lam_arr, "quad")
    psi_series = ll.subordinator_exponent(spec, lam_arr, "series")
    theory = np.power(1.0 + psi_closed, -cfg.r)
    N = cfg.sample_count

    def cell(t):
        rng = RngStream(cfg.seed, (2,))
        s = sample_trimmed(model, t, cfg.r, 0, rng, N, cfg.budget)
        stat = s.trimmed_value / s.jumps[:, cfg.r - 1]
        z = np.exp(-np.outer(stat, lam_arr))
        return z.mean(axis=0), z.std(axis=0, ddof=1) / math.sqrt(N)

    results = _run_cells(cell, cfg.t_grid, cfg.threads)
    rows = []
    for t, (est, se) in zip(cfg.t_grid, results):
        for j, lam in enumerate(lams):
            dev = est[j] - theory[j]
            ok = abs(dev) <= 3.0 * se[j] if se[j] > 0 else dev == 0
            rows.append((t, cfg.r, lam, N, est[j], se[j], theory[j], dev, ok))
    summary = {
        "psi_quad_series_gap": float(np.max(np.abs(psi_quad - psi_series))),
        "psi_closed_series_gap": float(np.max(np.abs(psi_closed - psi_series))),
        "pass_psi_agreement": bool(np.max(np.abs(psi_quad - psi_series)) <= 1e-8),
        "pass_all_cells_3se": all(row[-1] for row in rows),
    }
    report = ExperimentReport(
        "laplace",
        ["t", "r", "lambda", "samples", "laplace_estimate", "stderr", "laplace_limit", "deviation", "within_3se"],
        rows, summary)
    return _finish(report, cfg, started)


# ---------------------------------------------------------------------------
# large trimming
# ---------------------------------------------------------------------------


def large_trim_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """P(^{(r+n)}X_t > eps DeltaX^{(r)}) on the (n, t) grid, coupled across n and t."""
    started = time.perf_counter()
    model = cfg.levy_model()
    _require_driftless_subordinator(model)
    if cfg.r < 1:
        raise ValueError("large-trim experiment needs r >= 1")
    N = cfg.sample_count
    n_grid = cfg.n_grid
    depth = max(n_grid)

    def cell(t):
        rng = RngStream(cfg.seed, (3,))
        s = sample_trimmed(model, t, cfg.r, depth, rng, N, cfg.budget)
        ref = cfg.eps * s.jumps[:, cfg.r - 1]
        hits = np.stack([s.trimmed_at(cfg.r + n) > ref for n in n_grid], axis=1)
        pathwise = bool(np.all(hits[:, 1:] <= hits[:, :-1]))
        return hits.sum(axis=0), pathwise

    results = _run_cells(cell, cfg.t_grid, cfg.threads)
    rows = []
    sup = {n: 0.0 for n in n_grid}
    pathwise_all = True
    for t, (counts, pathwise) in zip(cfg.t_grid, results):
        pathwise_all &= pathwise
        for n, k in zip(n_grid, counts):
            p = int(k) / N
            lo, hi = wilson_interval(int(k), N)
            se = math.sqrt(p * (1 - p) / N)
            sup[n] = max(sup[n], p)
            rows.append((t, cfg.r, n, cfg.eps, N, p, se, lo, hi))
    sups = [sup[n] for n in n_grid]
    summary = {
        "sup_over_t": {str(n): sup[n] for n in n_grid},
        "pass_pathwise_monotone": pathwise_all,
        "pass_sup_nonincreasing": all(b <= a for a, b in zip(sups, sups[1:])),
        "target": cfg.target,
        "pass_final_sup_below_target": sups[-1] < cfg.target,
    }
    report = ExperimentReport(
        "large_trim",
        ["t", "r", "n", "eps", "samples", "exceed_probability", "stderr", "wilson_low", "wilson_high"],
        rows, summary)
    return _finish(report, cfg, started)


# ---------------------------------------------------------------------------
# normalized jumps on the simplex
# ---------------------------------------------------------------------------


def pd_ratio_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """(DeltaX^{(r+k)} / ^{(r)}X_t)_k against the stable subordinator at t = 1."""
    started = time.perf_counter()
    model = cfg.levy_model()
    _require_driftless_subordinator(model)
    N = cfg.sample_count
    from .measures import stable_subordinator

    ref_model = stable_subordinator(model.alpha)
    ref_n = cfg.reference_count or N
    ref = sample_trimmed(ref_model, 1.0, cfg.r, cfg.n, RngStream(cfg.seed, (4, 1)), ref_n, cfg.budget)
    ref_coords = ref.jumps[:, cfg.r:cfg.r + cfg.n] / ref.trimmed_value[:, None]

    def cell(t):
        rng = RngStream(cfg.seed, (4, 0))
        s = sample_trimmed(model, t, cfg.r, cfg.n, rng, N, cfg.budget)
        coords = s.jumps[:, cfg.r:cfg.r + cfg.n] / s.trimmed_value[:, None]
        ks = [ks_two_sample(coords[:, k], ref_coords[:, k]) for k in range(cfg.n)]
        ordered = bool(np.all(np.diff(coords, axis=1) <= 0))
        in_range = bool(np.all((coords > 0) & (coords <= 1)))
        deficit = 1.0 - coords.sum(axis=1)
        m0 = float(coords[:, 0].mean())
        se0 = float(coords[:, 0].std(ddof=1) / math.sqrt(N))
        return ks, ordered, in_range, float(deficit.min()), m0, se0

    results = _run_cells(cell, cfg.t_grid, cfg.threads)
    rows = []
    crit = ks_critical(N, 3.0, ref_n)
    for t, (ks, ordered, in_range, dmin, m0, se0) in zip(cfg.t_grid, results):
        for k, d in enumerate(ks, start=1):
            rows.append((t, cfg.r, k, N, d, crit, ordered, in_range, dmin, m0, se0))
    summary = {
        "pass_ordering": all(r[6] for r in rows),
        "pass_in_unit_interval": all(r[7] for r in rows),
        "pass_simplex_deficit": all(r[8] >= -1e-12 for r in rows),
        "final_ks": [r[4] for r in rows if r[0] == cfg.t_grid[-1]],
        "ks_critical": crit,
    }
    report = ExperimentReport(
        "pd_ratio",
        ["t", "r", "k", "samples", "ks_two_sample", "ks_critical", "coords_ordered", "coords_in_unit",
         "min_simplex_deficit", "first_coord_mean", "first_coord_stderr"],
        rows, summary)
    return _finish(report, cfg, started)


def default_threads(requested: int | None = None) -> int:
    env = os.environ.get("TRIMLEVY_THREADS")
    if env:
        return max(1, int(env))
    return requested or 1
