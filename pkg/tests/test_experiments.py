import json

import numpy as np
import pytest

from trimlevy import experiments as E
from trimlevy import limit_laws as ll
from trimlevy import measures as M

SUB = M.stable_subordinator(0.5).to_dict()


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        E.ExperimentConfig(model=SUB, t_grid=[0.1, 1.0])
    with pytest.raises(ValueError):
        E.ExperimentConfig(model=SUB, sample_count=999)
    with pytest.raises(ValueError):
        E.ExperimentConfig(model=SUB, eps=0.0)
    with pytest.raises(ValueError, match="unknown"):
        E.ExperimentConfig.from_dict({"model": SUB, "colour": 1})
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"model": SUB, "r": 2, "t_grid": [1, 0.5]}))
    cfg = E.ExperimentConfig.from_json(str(p))
    assert cfg.r == 2 and cfg.t_grid == [1.0, 0.5]
    assert cfg.levy_model().is_subordinator


def test_convergence_exact_cell_and_zero_theta(tmp_path):
    cfg = E.ExperimentConfig(model=M.stable_limit_model(0.5).to_dict(), t_grid=[1.0], sample_count=20_000,
                             seed=3, theta_grid=[0.0], inversion_points=200,
                             out_csv=str(tmp_path / "c.csv"), out_json=str(tmp_path / "c.json"))
    rep = E.convergence_experiment(cfg)
    assert rep.column("exact_identity_cell") == [True]
    assert rep.summary["pass_exact_cells"]
    assert rep.column("cf_sup_distance") == [0.0]
    head = (tmp_path / "c.csv").read_text().splitlines()[0]
    assert head.startswith("t,r,n,samples,ks_distance,ks_stderr")
    js = json.loads((tmp_path / "c.json").read_text())
    assert js["experiment"] == "convergence" and "runtime" in js


def test_laplace_zero_lambda_and_power_identity():
    cfg = E.ExperimentConfig(model=SUB, r=1, t_grid=[1.0], sample_count=5000, seed=1, lambda_grid=[0.0, 1.0])
    rep = E.subordinator_laplace_experiment(cfg)
    assert rep.column("deviation")[0] == 0.0
    s1 = ll.LimitLawSpec(0.5, r=1, subordinator=True)
    s3 = ll.LimitLawSpec(0.5, r=3, subordinator=True)
    for lam in [0.5, 1.0, 2.0]:
        assert abs(ll.limit_laplace(s3, lam) - ll.limit_laplace(s1, lam) ** 3) < 1e-12


def test_laplace_rejects_non_subordinator():
    cfg = E.ExperimentConfig(model=M.pure_stable(1.5).to_dict(), sample_count=1000)
    with pytest.raises(ValueError):
        E.subordinator_laplace_experiment(cfg)


def test_large_trim_huge_eps_and_flags():
    cfg = E.ExperimentConfig(model=SUB, r=1, t_grid=[1.0, 0.01], sample_count=2000, seed=2, eps=1e6,
                             n_grid=[1, 2, 4])
    rep = E.large_trim_experiment(cfg)
    assert max(rep.column("exceed_probability")) == 0.0
    assert rep.summary["pass_pathwise_monotone"]
    cfg = E.ExperimentConfig(model=SUB, r=1, t_grid=[1.0], sample_count=2000, seed=2, n_grid=[1, 4, 16])
    rep = E.large_trim_experiment(cfg)
    p = rep.column("exceed_probability")
    assert p == sorted(p, reverse=True)
    lo, hi = rep.column("wilson_low"), rep.column("wilson_high")
    assert all(a <= v <= b for a, v, b in zip(lo, p, hi))


def test_pd_flags():
    cfg = E.ExperimentConfig(model=M.tempered_stable(0.5, 1.0).to_dict(), r=1, n=3, t_grid=[1.0, 0.001],
                             sample_count=5000, seed=4)
    rep = E.pd_ratio_experiment(cfg)
    assert rep.summary["pass_ordering"] and rep.summary["pass_in_unit_interval"]
    assert rep.summary["pass_simplex_deficit"]
    # at small t the tempered coordinates match the stable reference
    assert max(rep.summary["final_ks"]) < rep.summary["ks_critical"]


def test_csv_formatting_and_passed():
    rep = E.ExperimentReport("x", ["a", "b", "c"], [(1, 0.1, True)], {"pass_a": True, "other": False})
    assert rep.csv_text() == "a,b,c\n1,0.1,true\n"
    assert rep.passed()


def test_default_threads(monkeypatch):
    monkeypatch.setenv("TRIMLEVY_THREADS", "3")
    assert E.default_threads(1) == 3
    monkeypatch.delenv("TRIMLEVY_THREADS")
    assert E.default_threads(None) == 1
