import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nni_validity.errors import ValidationError
from nni_validity.fitting import LogFit, a_vs_nmax, fit_log, sse_at

NS = np.arange(10, 101, 10)


def synthetic(a=1.4, b=2.0, c=6.5, ns=NS):
    return [(int(n), a * np.log(n - b) + c) for n in ns]


def test_recovers_exact_curve():
    fit = fit_log(synthetic())
    assert fit.a == pytest.approx(1.4, abs=1e-5)
    assert fit.b == pytest.approx(2.0, abs=1e-5)
    assert fit.c == pytest.approx(6.5, abs=1e-5)
    assert fit.sse <= 1e-10
    assert fit.n_points == 10 and fit.n_max == 100


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 3.0), st.floats(0.0, 8.0), st.floats(-5.0, 10.0))
def test_recovers_random_parameters(a, b, c):
    fit = fit_log(synthetic(a, b, c))
    np.testing.assert_allclose(fit.predict(NS), [y for _, y in synthetic(a, b, c)], atol=1e-5)


def noisy(seed=0):
    rng = np.random.default_rng(seed)
    return [(n, y + rng.normal(scale=0.02)) for n, y in synthetic()]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_local_optimality(seed):
    pts = noisy(seed)
    fit = fit_log(pts)
    base = sse_at(pts, fit.a, fit.b, fit.c)
    assert base == pytest.approx(fit.sse, rel=1e-12)
    for da in (-1e-3, 0, 1e-3):
        for db in (-1e-3, 0, 1e-3):
            for dc in (-1e-3, 0, 1e-3):
                assert sse_at(pts, fit.a + da, fit.b + db, fit.c + dc) >= base - 1e-14


@pytest.mark.parametrize("seed", [0, 3])
def test_residuals_orthogonal_to_linear_basis(seed):
    pts = noisy(seed)
    fit = fit_log(pts)
    n = np.array([p[0] for p in pts], dtype=float)
    r = np.array([p[1] for p in pts]) - fit.predict(n)
    assert abs(r.sum()) <= 1e-9
    assert abs(r @ np.log(n - fit.b)) <= 1e-9


def test_reproducible():
    pts = noisy(5)
    assert fit_log(pts) == fit_log(list(reversed(pts)))
    json.dumps(fit_log(pts).to_record())


def test_predict_matches_formula():
    fit = LogFit(1.5, 1.0, 6.0, 0.0, 4, 40)
    assert fit.predict(11) == pytest.approx(1.5 * np.log(10) + 6.0)


@pytest.mark.parametrize(
    "pts",
    [
        [(10, 1.0), (20, 2.0), (30, 3.0)],
        [(10, 1.0)] * 5,
        [(10, 1.0), (10, 2.0), (20, 3.0), (30, 4.0)],
        [(1, 1.0), (20, 2.0), (30, 3.0), (40, 4.0)],
    ],
)
def test_invalid_inputs(pts):
    with pytest.raises(ValidationError):
        fit_log(pts)


def test_degenerate_design_message():
    with pytest.raises(ValidationError, match="degenerate"):
        fit_log([(10, 1.0), (10, 2.0), (10, 3.0), (10, 4.0)])


def test_b_stays_in_admissible_interval():
    fit = fit_log(noisy(7))
    assert 0.0 <= fit.b <= 10 - 0.5


def test_a_vs_nmax():
    pts = synthetic()
    out = a_vs_nmax(pts, [50, 70, 100])
    assert [n for n, _ in out] == [50, 70, 100]
    for _, a in out:
        assert a == pytest.approx(1.4, abs=1e-5)
    with pytest.raises(ValidationError):
        a_vs_nmax(pts, [30])
