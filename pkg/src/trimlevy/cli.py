"""Command-line front end: ``trimlevy <subcommand> [flags]``.

Exit status: 0 on success, 2 on usage or configuration errors, 3 on
numerical failures.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import os
import sys
from typing import Sequence

import numpy as np

from . import experiments as ex
from . import limit_laws as ll
from .inversion import cdf_from_cf
from .measures import Kind, LevyModel, NonIntegrableError, regular_variation_diagnostic
from .rng import RngStream
from .samplers import sample_ordered_jumps, sample_trimmed

log = logging.getLogger("trimlevy")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    """Comma list, or lo:hi:count for an evenly spaced grid."""
    text = text.strip()
    if text.count(":") == 2:
        lo, hi, num = text.split(":")
        return list(np.linspace(float(lo), float(hi), int(num)))
    return [float(v) for v in text.split(",") if v.strip()]


def _atoms(text: str) -> list[tuple[float, float]]:
    out = []
    for part in text.split(","):
        if part.strip():
            loc, mass = part.split(":")
            out.append((float(loc), float(mass)))
    return out


def _add_model_flags(p):
    p.add_argument("--model", default="stable",
                   help="stable | tempered | atomic | gamma, or a path to a JSON model description")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--a-plus", type=float, default=1.0)
    p.add_argument("--atoms", type=_atoms, default=None, help="loc:mass,loc:mass")
    p.add_argument("--drift", type=float, default=None, help="subordinator drift")
    p.add_argument("--gamma-shift", type=float, default=None)
    p.add_argument("--tempering", type=float, default=1.0, help="exponential tempering rate")


def _add_common(p):
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output CSV path (stdout when absent)")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trimlevy", description="Trimmed Levy process simulation and limit laws")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample-jumps", help="ordered jumps, one draw per row")
    _add_model_flags(p)
    _add_common(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--count", type=int, default=5, help="number of ordered jumps per draw")
    p.add_argument("--n", type=int, default=10, help="number of draws")

    p = sub.add_parser("sample-trimmed", help="trimmed value with the top jumps, one draw per row")
    _add_model_flags(p)
    _add_common(p)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--n", type=int, default=0, help="extra jumps recorded beyond r")
    p.add_argument("--count", type=int, default=10, help="number of draws")

    p = sub.add_parser("limit-cf", help="limit characteristic function")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--a-plus", type=float, default=1.0)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--theta", type=_floats, default=[0.1])
    p.add_argument("--joint", action="store_true", help="treat --theta as one length-n vector")
    p.add_argument("--subordinator", action="store_true")
    p.add_argument("--count", type=int, default=100_000, help="Monte Carlo draws for the joint CF")

    p = sub.add_parser("limit-laplace", help="(1 + Psi(lambda))^-r")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--lambda", dest="lam", type=_floats, default=[1.0])

    p = sub.add_parser("invert-cf", help="CDF of the n-th limit coordinate by CF inversion")
    _add_common(p)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--a-plus", type=float, default=1.0)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--subordinator", action="store_true")
    p.add_argument("--x", type=_floats, default=[1.0, 2.0, 5.0, 10.0])
    p.add_argument("--cap", type=float, default=2000.0)

    for name, help_ in [("converge", "ratio convergence experiment"),
                        ("laplace-check", "Laplace transform experiment"),
                        ("large-trim", "large trimming experiment"),
                        ("pd", "normalized jump vector experiment")]:
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        p.add_argument("--config", required=True)
        p.add_argument("--eps", type=float, default=None)

    p = sub.add_parser("rv-diag", help="regular variation diagnostic")
    _add_model_flags(p)
    _add_common(p)
    p.add_argument("--u", type=float, default=2.0)
    p.add_argument("--y", type=float, default=1.0)
    p.add_argument("--t", type=_floats, default=[10.0**-k for k in range(1, 7)])
    return parser


def model_from_args(args) -> LevyModel:
    name = args.model
    if name.endswith(".json") or os.path.sep in name:
        with open(name, encoding="utf-8") as fh:
            return LevyModel.from_dict(json.load(fh))
    kinds = {"stable": Kind.PURE_STABLE, "tempered": Kind.TEMPERED_STABLE, "atomic": Kind.ATOMIC_STABLE,
             "gamma": Kind.GAMMA_SUBORDINATOR}
    if name not in kinds:
        raise ValueError(f"unknown model {name!r}")
    kind = kinds[name]
    if kind is Kind.GAMMA_SUBORDINATOR:
        return LevyModel(kind, 0.0, drift=args.drift if args.drift is not None else 0.0)
    drift = args.drift
    if kind is Kind.TEMPERED_STABLE and drift is None and args.gamma_shift is None \
            and args.a_plus == 1.0 and args.alpha < 1:
        drift = 0.0
    return LevyModel(kind, args.alpha, a_plus=args.a_plus, atoms=tuple(args.atoms or ()), drift=drift,
                     gamma_shift=args.gamma_shift, tempering=args.tempering)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(columns: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(ex._fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _resolve_seed(args) -> int:
    if args.seed is None:
        args.seed = int(np.random.SeedSequence().entropy % (2**63))
        log.info("generated seed %d", args.seed)
    return args.seed


def _resolve_threads(args) -> int:
    env = os.environ.get("TRIMLEVY_THREADS")
    if env:
        args.threads = int(env)
    if args.threads < 1:
        raise ValueError("threads must be >= 1")
    return args.threads


def _cmd_sample_jumps(args):
    model = model_from_args(args)
    s = sample_ordered_jumps(model, args.t, args.count, RngStream(args.seed), args.n)
    cols = [f"jump_{i}" for i in range(1, args.count + 1)]
    _emit(_csv(cols, s.jumps.tolist()), args.out)


def _cmd_sample_trimmed(args):
    model = model_from_args(args)
    s = sample_trimmed(model, args.t, args.r, args.n, RngStream(args.seed), args.count)
    depth = args.r + args.n
    cols = ["trimmed_value", "remainder", "tie_correction"] + [f"jump_{i}" for i in range(1, depth + 1)]
    rows = np.column_stack([s.trimmed_value, s.remainder, s.tie_correction, s.jumps]).tolist()
    _emit(_csv(cols, rows), args.out)


def _spec(args) -> ll.LimitLawSpec:
    return ll.LimitLawSpec(args.alpha, args.a_plus, args.r, args.n, subordinator=args.subordinator)


def _cmd_limit_cf(args):
    spec = _spec(args)
    if args.joint:
        est = ll.limit_cf_joint(spec, args.theta, "auto", RngStream(args.seed), args.count, strict=False)
        rows = [(";".join(ex._fmt(v) for v in args.theta), est.value.real, est.value.imag, est.stderr)]
        cols = ["theta_vector", "cf_real", "cf_imag", "stderr"]
    else:
        vals = ll.limit_cf_single(spec, np.asarray(args.theta), strict=False)
        rows = [(th, v.real, v.imag, 0.0) for th, v in zip(args.theta, np.atleast_1d(vals))]
        cols = ["theta", "cf_real", "cf_imag", "stderr"]
    _emit(_csv(cols, rows), args.out)


def _cmd_limit_laplace(args):
    spec = ll.LimitLawSpec(args.alpha, 1.0, args.r, 1, subordinator=True)
    lam = np.asarray(args.lam)
    psi = ll.subordinator_exponent(spec, lam)
    val = ll.limit_laplace(spec, lam)
    _emit(_csv(["lambda", "laplace_limit", "psi"], zip(lam, val, psi)), args.out)


def _cmd_invert_cf(args):
    spec = _spec(args)
    x = np.asarray(args.x)
    res = cdf_from_cf(lambda th: ll.limit_cf_single(spec, th, strict=False), x, integration_cap=args.cap,
                      return_info=True)
    log.info("inversion cap %.6g, truncation estimate %.3g", res.cap, res.truncation_error)
    _emit(_csv(["x", "cdf"], zip(x, res.cdf)), args.out)


_EXPERIMENTS = {
    "converge": ex.convergence_experiment,
    "laplace-check": ex.subordinator_laplace_experiment,
    "large-trim": ex.large_trim_experiment,
    "pd": ex.pd_ratio_experiment,
}


def _cmd_experiment(args):
    with open(args.config, encoding="utf-8") as fh:
        raw = json.load(fh)
    if args.seed is not None:
        raw["seed"] = args.seed
    elif "seed" not in raw:
        raw["seed"] = _resolve_seed(args)
    if args.eps is not None:
        raw["eps"] = args.eps
    raw["threads"] = args.threads
    if args.out:
        raw["out_csv"] = args.out
        raw["out_json"] = os.path.splitext(args.out)[0] + ".json"
    cfg = ex.ExperimentConfig.from_dict(raw)
    log.info("resolved config %s", json.dumps(cfg.to_dict(), sort_keys=True))
    report = _EXPERIMENTS[args.command](cfg)
    if not cfg.out_csv:
        sys.stdout.write(report.csv_text())
    if not cfg.out_json:
        sys.stderr.write(json.dumps(report.summary_dict(), indent=2, sort_keys=True) + "\n")


def _cmd_rv_diag(args):
    model = model_from_args(args)
    d = regular_variation_diagnostic(model, args.u, args.y, args.t)
    rows = [(t, v, d.limit) for t, v in zip(d.t_grid, d.values)]
    log.info("converged=%s", d.converged)
    _emit(_csv(["t", "scaled_tail", "limit"], rows), args.out)


_COMMANDS = {
    "sample-jumps": _cmd_sample_jumps,
    "sample-trimmed": _cmd_sample_trimmed,
    "limit-cf": _cmd_limit_cf,
    "limit-laplace": _cmd_limit_laplace,
    "invert-cf": _cmd_invert_cf,
    "rv-diag": _cmd_rv_diag,
    **{k: _cmd_experiment for k in _EXPERIMENTS},
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(name)s: %(message)s", stream=sys.stderr, force=True)
    try:
        _resolve_threads(args)
        if args.command not in _EXPERIMENTS:
            _resolve_seed(args)
        log.info("resolved arguments %s", json.dumps(vars(args), sort_keys=True, default=str))
        _COMMANDS[args.command](args)
    except (NonIntegrableError, ArithmeticError, FloatingPointError, np.linalg.LinAlgError) as exc:
        sys.stderr.write(f"trimlevy: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"trimlevy: configuration error: {exc}\n")
        return EXIT_CONFIG
    return EXIT_OK


def main(argv: Sequence[str] | None = None):
    sys.exit(run(argv))
