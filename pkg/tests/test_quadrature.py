import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from graphene_cp.errors import ConvergenceError, DomainError, IntegrationError
from graphene_cp.quadrature import (GAUSS_WEIGHTS, KRONROD_WEIGHTS, NODES, QuadratureConfig,
                                    integrate_semi_infinite, sum_until_converged)

GOLDEN = [
    (lambda x: np.exp(-x), 1.0),
    (lambda x: x**2 * np.exp(-2 * x), 0.25),
    (lambda x: x * np.exp(-x) * np.sin(x), 0.5),
    (lambda x: 1.0 / (1.0 + x * x) ** 2, math.pi / 4),
    (lambda x: np.exp(-x * x), math.sqrt(math.pi) / 2),
]


def test_rule_tables():
    gx, gw = np.polynomial.legendre.leggauss(10)
    assert np.allclose(np.sort(NODES[GAUSS_WEIGHTS > 0]), gx, atol=1e-15)
    assert np.allclose(GAUSS_WEIGHTS[GAUSS_WEIGHTS > 0], gw[np.argsort(gx)], atol=1e-15)
    assert KRONROD_WEIGHTS.sum() == pytest.approx(2.0, abs=1e-14)
    # Kronrod rule integrates polynomials through degree 31
    assert KRONROD_WEIGHTS @ NODES**30 == pytest.approx(2 / 31, rel=1e-13, abs=0)


@pytest.mark.parametrize("f, exact", GOLDEN)
def test_golden_integrals(f, exact):
    res = integrate_semi_infinite(f, QuadratureConfig(rel_tol=1e-9))
    assert res.converged
    assert abs(res.value - exact) / exact < 1e-8
    assert res.error_estimate <= 1e-9 * abs(res.value) or res.error_estimate < 1e-15


@pytest.mark.parametrize("f, exact", GOLDEN[:3])
def test_default_tolerance(f, exact):
    res = integrate_semi_infinite(f)
    assert res.value == pytest.approx(exact, rel=1e-6, abs=0)


def test_decay_scale_mapping():
    res = integrate_semi_infinite(lambda x: np.exp(-x / 1e-7), QuadratureConfig(decay_scale=1e-7))
    assert res.value == pytest.approx(1e-7, rel=1e-10, abs=0)


def test_vector_integrand_shares_mesh():
    a = np.array([1.0, 2.0, 3.0])[:, None]
    res = integrate_semi_infinite(lambda x: np.exp(-a * x), QuadratureConfig(rel_tol=1e-10))
    assert res.value.shape == (3,)
    assert np.allclose(res.value, 1 / a.ravel(), rtol=1e-10)


def test_breakpoints_help_kinks():
    f = lambda x: np.exp(-x) * np.abs(x - 2.0)
    exact = 2 * math.exp(-2) + 1.0
    with_pt = integrate_semi_infinite(f, QuadratureConfig(rel_tol=1e-10), points=[2.0])
    without = integrate_semi_infinite(f, QuadratureConfig(rel_tol=1e-10))
    assert with_pt.value == pytest.approx(exact, rel=1e-10, abs=0)
    assert with_pt.evaluations < without.evaluations


@settings(max_examples=25, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5))
def test_linearity(a, b):
    cfg = QuadratureConfig(rel_tol=1e-9)
    (f, _), (g, _) = GOLDEN[0], GOLDEN[1]
    combined = integrate_semi_infinite(lambda x: a * f(x) + b * g(x), cfg).value
    separate = a * integrate_semi_infinite(f, cfg).value + b * integrate_semi_infinite(g, cfg).value
    scale = abs(a) + abs(b) + 1e-300
    assert abs(combined - separate) <= 2 * 1e-9 * scale


@pytest.mark.parametrize("f, exact", GOLDEN)
def test_more_subdivisions_never_hurt(f, exact):
    errs = [integrate_semi_infinite(f, QuadratureConfig(rel_tol=1e-14, max_subdivisions=m)).error_estimate
            for m in (2, 4, 8, 16, 32)]
    assert all(e2 <= e1 for e1, e2 in zip(errs, errs[1:]))


def test_nonconvergence_reported_not_raised():
    res = integrate_semi_infinite(lambda x: np.exp(-x) * np.sin(50 * x) ** 2,
                                  QuadratureConfig(rel_tol=1e-12, max_subdivisions=1))
    assert not res.converged
    assert res.subdivisions == 1


def test_nan_integrand_raises():
    with pytest.raises(IntegrationError):
        integrate_semi_infinite(lambda x: np.where(x > 1, np.nan, 1.0))


def test_wrong_shape_raises():
    with pytest.raises(IntegrationError):
        integrate_semi_infinite(lambda x: np.ones(3))


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0), dict(rel_tol=1), dict(abs_tol=-1),
                                    dict(max_subdivisions=0), dict(decay_scale=0)])
def test_config_validation(kwargs):
    with pytest.raises(DomainError):
        QuadratureConfig(**kwargs)


def test_geometric_series():
    assert sum_until_converged(lambda j: 2.0**-j) == pytest.approx(1.5, rel=1e-8, abs=0)


def test_zero_series():
    assert sum_until_converged(lambda j: 0.0) == 0.0


def test_blocked_vector_series():
    r = np.array([0.5, 0.25])[:, None]
    total = sum_until_converged(lambda j: r ** j, block=7)
    assert np.allclose(total, 1 / (1 - r.ravel()) - 0.5, rtol=1e-8)


def test_stops_after_consecutive_small_terms():
    calls = []

    def term(j):
        calls.append(j)
        return 1.0 if j < 3 else 0.0
    assert sum_until_converged(term, consecutive=3) == 2.5
    assert calls == [0, 1, 2, 3, 4, 5]


def test_term_cap():
    with pytest.raises(ConvergenceError, match="max_terms=50"):
        sum_until_converged(lambda j: 1.0, max_terms=50)


@pytest.mark.xfail(strict=True, reason="3-term stopping rule truncates a 1/j^2 tail at ~sqrt(rel_tol)")
def test_basel_series_to_rel_tol():
    rel_tol = 1e-8
    total = sum_until_converged(lambda j: 1.0 / (j + 1) ** 2, rel_tol=rel_tol)
    assert abs(total - (math.pi**2 / 6 - 0.5)) <= rel_tol * (math.pi**2 / 6 - 0.5)


def test_basel_series_truncation_bound():
    # the tail after stopping at 1/J^2 <= tol * S is about 1/J = sqrt(tol * S)
    rel_tol = 1e-8
    exact = math.pi**2 / 6 - 0.5
    total = sum_until_converged(lambda j: 1.0 / (j + 1) ** 2, rel_tol=rel_tol)
    assert total < exact
    assert exact - total < 2 * math.sqrt(rel_tol * exact)
