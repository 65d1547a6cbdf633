import json
import math

import numpy as np
import pytest

import foehnrecon as fr


def test_hourly_label():
    nan = float("nan")
    assert fr.hourly_label([0.9, 0.9, 0.1, 0.1, nan, nan]) == "foehn"
    assert fr.hourly_label([0.9, 0.1, 0.1, 0.1, 0.2, 0.3]) == "no_foehn"
    assert fr.hourly_label([0.9, 0.9, 0.9, nan, nan, nan]) == "missing"
    with pytest.raises(fr.FoehnError):
        fr.hourly_label([0.5] * 7)


def test_em_fit_recovers_components():
    rng = np.random.default_rng(1)
    n = 4000
    rh = rng.normal(60, 10, n)
    ff = rng.normal(4, 2, n)
    z = -0.5 - 1.2 * (rh - 60) / 10 + 0.8 * (ff - 4) / 2
    foehn = rng.uniform(size=n) < 1 / (1 + np.exp(-z))
    y = np.where(foehn, rng.normal(0, 1, n), rng.normal(-6, 2, n))
    p = fr.em_fit(y, rh, ff)
    assert abs(p["mu1"] + 6) < 0.3
    assert abs(p["mu2"]) < 0.3
    trace = p["loglik_trace"]
    assert all(b >= a - 1e-10 for a, b in zip(trace, trace[1:]))


def test_learners_fit_predict_and_round_trip():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(400, 3))
    y = (rng.uniform(size=400) < 1 / (1 + np.exp(-2 * X[:, 0]))).astype(float)
    names = ["a", "b", "c"]
    gp = fr.GbtParams()
    gp.max_depth = 3
    for kind in ("lasso", "stabsel", "gbt"):
        m = fr.fit(kind, X, y, names, seed=3, lasso_folds=5, n_lambda=20, stabsel_runs=10, gbt_cv_folds=2,
                   gbt_params=gp)
        assert m.kind == kind
        p = m.predict(X, names)
        assert p.shape == (400,)
        assert np.all((p >= 0) & (p <= 1))
        assert fr.brier(p, y) < fr.brier(np.full(400, y.mean()), y)
        back = fr.Model.from_json(m.to_json())
        np.testing.assert_array_equal(back.predict(X, names), p)
        json.loads(m.to_json())


def test_lasso_path_starts_empty():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(200, 5))
    y = (X[:, 1] + rng.normal(size=200) > 0).astype(float)
    path = fr.lasso_path(X, y, n_lambda=10)
    assert np.all(path[0]["beta"] == 0)
    assert np.count_nonzero(path[-1]["beta"]) > 0


def test_gbt_trace_non_increasing():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(300, 2))
    y = (X[:, 0] * X[:, 1] > 0).astype(float)
    p = fr.GbtParams()
    p.subsample = 1.0
    p.gamma = 0.0
    p.max_depth = 3
    t = fr.gbt_trace(X, y, p)
    assert len(t) == p.nrounds
    assert all(b <= a + 1e-12 for a, b in zip(t, t[1:]))


def test_metrics():
    m = fr.event_metrics([0.9, 0.1, 0.6, 0.2], [1, 1, 0, 0])
    assert (m["tp"], m["fn"], m["fp"], m["tn"]) == (1, 1, 1, 1)
    assert m["pc"] == pytest.approx(50.0)


def test_fit_str_additive():
    t = np.arange(120)
    y = 0.01 * t + np.sin(2 * math.pi * t / 12) + np.random.default_rng(6).normal(0, 0.1, 120)
    f = fr.fit_str(y, 2000, 1)
    recon = np.array(f["trend"]) + np.array(f["seasonal"]) + np.array(f["remainder"])
    np.testing.assert_allclose(recon, y, atol=1e-12)
    assert f["trend_significant"]
    assert fr.trend_significance([0, 1, 2], [0.5, 1.5, 2.5])


def test_cli_pipeline(tmp_path):
    out = tmp_path / "syn"
    fr.synth(str(out), seed=5, years=12)
    config = str(out / "config.json")
    assert fr.run_cli(["classify", "--config", config]) == 0
    assert fr.run_cli(["aggregate", "--config", config]) == 0
    assert (out / "out" / "labels_SYN_V.csv").exists()
    assert fr.run_cli(["bogus"]) == 1
