import json
import math

import numpy as np
import pytest

import disparity as d


def test_gaussian_tpr_ordering():
    low = d.GaussianGroupSpec(-1.0, 1.0, 1.0)
    high = d.GaussianGroupSpec(0.0, 1.0, 1.0)
    assert d.gamma(low) == pytest.approx(0.5)
    for cutoff in (-1.0, 1.0):
        assert d.group_tpr(high, cutoff) > d.group_tpr(low, cutoff)
    mean, var = d.score_given_creditworthy(high)
    assert mean == pytest.approx(1.0 / math.sqrt(math.pi), rel=1e-10)
    assert 0.0 < var < 1.0


def test_parity_solver():
    r = d.solve_gamma_for_parity(d.GaussianGroupSpec(-1, 1, 1), d.GaussianGroupSpec(0, 1, 1), 1.0)
    assert r["status"] == "solved"
    assert abs(r["tpr_L"] - r["tpr_H"]) < 1e-6


def test_invalid_spec_raises():
    with pytest.raises(ValueError):
        d.GaussianGroupSpec(0.0, -1.0, 1.0)


def test_theorem_checks():
    v = d.check_proposition1((1, 2, 1, 6), (3, 1, 3, 3))
    assert v["antecedent"] and v["over_represented"] and v["holds"]
    report = d.exhaustive_sweep(3)
    assert report["populations"] > 0
    assert report["prop1_counterexamples"] == 0 and report["thm1_counterexamples"] == 0


def test_audit_report():
    r = d.audit(["L", "L", "H", "H"], [1, 0, 1, 0], [1, 1, 1, 0])
    assert r["L"]["tpr"] == 1.0
    assert r["H"]["fpr"] == 0.0


def test_train_and_score():
    cohort = d.generate_cohort(n=4000, seed=3)
    x = np.asarray(cohort["base_features"])
    assert x.shape == (4000, 5)
    model = d.train_logistic(x, cohort["label"])
    scores = np.asarray(d.predict_scores(json.dumps(model), x))
    assert scores.shape == (4000,)
    assert np.all((scores > 0) & (scores < 1))
    cutoff, profit = d.optimal_cutoff(list(scores), cohort["label"], 1.0)
    assert profit >= 0.0


def test_cli_roundtrip(tmp_path):
    code, out, _ = d.run_cli(["gaussian", "figure3", "--grid", "1", "--out", str(tmp_path / "f3")])
    assert code == 0
    assert (tmp_path / "f3" / "fig3_tpr_ratio.csv").exists()
    code, _, err = d.run_cli(["nonsense"])
    assert code == 2
