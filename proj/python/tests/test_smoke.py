import math

import numpy as np
import pytest

import cpdcond


def test_shapes():
    s = cpdcond.Shape.parse("5x4x3")
    assert s.dims == [5, 4, 3]
    assert (s.sigma, s.pi) == (10, 60)
    assert cpdcond.shape_constants(s) == (10, 60)
    assert cpdcond.is_perfect(s, 6)
    assert not cpdcond.is_perfect(cpdcond.Shape([3, 3, 3]), 4)
    assert str(cpdcond.Shape([2, 2, 2])) == "2x2x2"


def test_condition_numbers():
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    # orthogonal terms with weights 0.5 and 2
    rep = cpdcond.condition_numbers([[0.5 * e1, e1, e1], [2 * e2, e2, e2]])
    assert rep["kappa"] == pytest.approx(1.0)
    assert rep["kappa_ang"] == pytest.approx(2.0)
    same = cpdcond.condition_numbers([[e1, e1, e1], [e1, e1, e1]])
    assert math.isinf(same["kappa"])
    cert = cpdcond.kruskal_certificate([[e1, e1, e1], [e2, e2, e2]])
    assert cert["identifiable"]


def test_cpd_eval_is_row_major():
    t = cpdcond.cpd_eval([[np.array([1.0, 2.0]), np.array([1.0, 0.0]), np.array([0.0, 3.0])]])
    expected = np.einsum("i,j,k->ijk", [1.0, 2.0], [1.0, 0.0], [0.0, 3.0]).ravel()
    np.testing.assert_allclose(t, expected)


def test_bf_probability():
    assert cpdcond.bf_probability(2) == pytest.approx(math.pi / 4)
    assert cpdcond.bf_probability(3) == pytest.approx(0.5)
    assert cpdcond.barnes_g(3) == pytest.approx(1.0)


def test_fit_tail_recovers_exponent():
    n = 20000
    x = (np.arange(1, n + 1) / n) ** (-1 / 1.8)
    fit = cpdcond.fit_tail(list(x) + [math.inf])
    assert abs(fit["b"] - 1.8) < 0.05
    assert fit["excluded_non_finite"] == 1
    assert math.isfinite(fit["tail_truncated_mean"])
    with pytest.raises(cpdcond.InsufficientData):
        cpdcond.fit_tail([1.0, 2.0, 3.0])


def test_sampling_is_deterministic():
    s = cpdcond.Shape([2, 2, 2])
    assert cpdcond.sample_one(s, 2, 3, 5) == cpdcond.sample_one(s, 2, 3, 5)
    a = cpdcond.run_campaign(s, 2, 100, seed=9, workers=1)
    b = cpdcond.run_campaign(s, 2, 100, seed=9, workers=2)
    assert a["kinds"] == b["kinds"]
    assert a["real"] == 100
    np.testing.assert_array_equal(a["kappa"], b["kappa"])
    assert np.all(a["kappa"] >= 1.0 - 1e-12)
    with pytest.raises(ValueError):
        cpdcond.run_campaign(cpdcond.Shape([3, 3, 3]), 4, 10)


def test_verify_and_cli():
    (rep,) = cpdcond.run_verify(trials=50, seed=1, only="check_cos_inequality")
    assert rep["passed"]
    assert "check_gram_blocks" in cpdcond.oracle_names()
    code, out, _ = cpdcond.run_cli(["bf-table", "--n-max", "3"])
    assert code == 0
    assert "0.785398" in out
    assert cpdcond.run_cli(["frobnicate"])[0] == 2
