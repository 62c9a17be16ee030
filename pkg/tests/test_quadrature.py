import math

import numpy as np
import pytest
from scipy import special

from isoagg.quadrature import (
    QuadratureError,
    adaptive,
    gauss_jacobi_01,
    power_weighted,
    tanh_sinh,
)


@pytest.mark.parametrize(
    "f, a, b, exact",
    [
        (lambda x: x**-0.9, 0.0, 1.0, 10.0),
        (np.log, 0.0, 1.0, -1.0),
        (np.exp, -1.0, 2.0, math.exp(2) - math.exp(-1)),
        (lambda x: 1.0 / np.sqrt(x), 0.0, 4.0, 4.0),
    ],
)
def test_tanh_sinh_endpoint_singularities(f, a, b, exact):
    value, err = tanh_sinh(f, a, b, rel_tol=1e-12)
    assert value == pytest.approx(exact, rel=1e-11)
    assert err < 1e-9


def test_tanh_sinh_never_touches_endpoints():
    seen = []

    def f(x):
        seen.append(np.asarray(x).copy())
        return np.ones_like(x)

    tanh_sinh(f, 0.0, 1.0)
    xs = np.concatenate(seen)
    assert np.all((xs > 0) & (xs < 1))


def test_tanh_sinh_reports_failure():
    with pytest.raises(QuadratureError):
        tanh_sinh(lambda x: np.cos(400.0 * x), 0.0, 1.0, max_level=2)


@pytest.mark.parametrize("alpha", [-0.95, -0.5, 0.0, 0.3, 2.5])
def test_power_weighted_matches_beta_function(alpha):
    # int_0^1 z^alpha (1 - z)^2 dz = B(alpha + 1, 3)
    got = power_weighted(lambda z: (1.0 - z) ** 2, alpha, 1.0)
    assert got == pytest.approx(special.beta(alpha + 1, 3), rel=1e-12)


def test_power_weighted_rejects_nonintegrable():
    with pytest.raises(ValueError):
        power_weighted(lambda z: 1.0, -1.0, 1.0)


def test_adaptive_falls_back_when_quad_gives_up():
    # one subdivision is not enough for quad; tanh-sinh finishes the job
    f = lambda x: math.log(x) * math.sqrt(x)  # noqa: E731
    got = adaptive(f, 0.0, 1.0, rel_tol=1e-12, abs_tol=1e-300, limit=1)
    assert got == pytest.approx(-4.0 / 9.0, rel=1e-10)


@pytest.mark.parametrize("alpha", [-0.7, 0.5, 1.7])
def test_gauss_jacobi_integrates_weighted_polynomials_exactly(alpha):
    u, w = gauss_jacobi_01(12, alpha)
    got = np.sum(w * (1 + u) ** 5)
    exact = sum(math.comb(5, k) / (alpha + k + 1) for k in range(6))
    assert got == pytest.approx(exact, rel=1e-13)
