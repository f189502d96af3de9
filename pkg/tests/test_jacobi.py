import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from cavitate.errors import AdmissibilityError
from cavitate.geometry import constant_curvature, tabulated_curvature, zero_curvature
from cavitate.jacobi import (curvature_moments, f_bounds, moment_tail_bound, sigma_inverse,
                             solve_jacobi)


def test_flat_field_exact(flat3):
    t = np.linspace(0, 5, 101)
    f, fp = flat3.f_fp(t)
    assert np.max(np.abs(f - t)) <= 1e-10
    assert np.max(np.abs(fp - 1)) <= 1e-10
    assert np.max(np.abs(flat3.sigma(t) - t ** 3 / 3)) <= 1e-10 * 125


def test_flat_to_ten():
    F = solve_jacobi(zero_curvature(), 2, 10.0)
    t = np.linspace(0, 10, 201)
    assert np.max(np.abs(F.f(t) - t)) <= 1e-10
    assert np.max(np.abs(F.sigma(t) - t * t / 2)) <= 1e-10 * 50


def test_sphere_closed_form(sphere2):
    assert sphere2.f(math.pi / 2) == pytest.approx(1.0, abs=1e-10)
    assert sphere2.fp(math.pi / 2) == pytest.approx(0.0, abs=1e-10)


def test_hyperbolic_closed_form():
    F = solve_jacobi(constant_curvature(-1.0), 3, 3.0)
    assert F.f(2.0) == pytest.approx(math.sinh(2.0), abs=1e-9)
    assert F.fp(2.0) == pytest.approx(math.cosh(2.0), abs=1e-9)


def test_conjugate_point_truncates():
    F = solve_jacobi(constant_curvature(1.0), 2, 4.0)
    assert F.truncated
    assert F.t_max == pytest.approx(math.pi, rel=1e-8)
    assert F.t_max < math.pi


def test_volterra_identity(bump2):
    kap = bump2.kappa
    for t in np.linspace(0.1, 6.0, 20):
        integral = quad(lambda s: (t - s) * kap(s) * bump2.f(s), 0, t,
                        epsabs=1e-13, limit=200)[0]
        assert bump2.f(t) == pytest.approx(t - integral, abs=1e-9)


def test_ode_residual(bump2):
    t = np.linspace(0.05, 6.0, 50)
    h = 1e-4
    fpp = (bump2.fp(t + h) - bump2.fp(t - h)) / (2 * h)
    res = np.abs(fpp + bump2.kappa(t) * bump2.f(t))
    assert np.all(res <= 1e-6 * np.maximum(1, bump2.f(t)))


def test_sigma_matches_quadrature(bump_curv):
    F = solve_jacobi(bump_curv, 3, 6.0)
    for t in np.linspace(0.05, 6.0, 20):
        ref = quad(lambda s: F.f(s) ** 2, 0, t, epsabs=0, epsrel=1e-13, limit=200)[0]
        assert F.sigma(t) == pytest.approx(ref, rel=1e-9)


def test_small_t_series(bump2):
    # f(t)/t = 1 - kappa(0) t^2 / 6 + O(t^4)
    for t in (1e-3, 1e-4):
        assert abs(bump2.f(t) / t - 1) <= (bump2.curv.kappa0 / 6 + 1e-3) * t * t


def test_moments_basic():
    assert curvature_moments(zero_curvature(), 4.0) == (0.0, 0.0)
    mp, mm = curvature_moments(constant_curvature(1.0), 1.0)
    assert mp == pytest.approx(0.5, abs=1e-13)
    assert mm == 0.0
    mp, mm = curvature_moments(constant_curvature(-2.0), 1.0)
    assert (mp, mm) == (0.0, pytest.approx(1.0, abs=1e-13))


def test_moments_sign_change():
    c = tabulated_curvature([0.0, 2.0], [1.0, -1.0])
    mp, mm = curvature_moments(c, 2.0)
    # kappa = 1 - t, split at t = 1
    assert mp == pytest.approx(1 / 2 - 1 / 3, abs=1e-12)
    assert mm == pytest.approx((8 / 3 - 2) - (1 / 3 - 1 / 2), abs=1e-12)


def test_moment_tail(bump_curv):
    bound = moment_tail_bound(bump_curv)
    assert 0 <= bound < 1e-2
    assert moment_tail_bound(constant_curvature(1.0)) == np.inf


def test_sigma_inverse_examples(flat3, sphere2):
    assert sigma_inverse(flat3, 8 / 3) == pytest.approx(2.0, rel=1e-12)
    assert sigma_inverse(sphere2, 1.0) == pytest.approx(math.pi / 2, rel=1e-10)
    assert sigma_inverse(flat3, 0.0) == 0.0
    with pytest.raises(ValueError):
        sigma_inverse(flat3, flat3.sigma_max * 1.01)


def test_sigma_inverse_round_trip(bump2, rng):
    x = rng.uniform(0, bump2.t_max, 100)
    back = np.array([sigma_inverse(bump2, bump2.sigma(v)) for v in x])
    assert np.allclose(back, x, rtol=1e-10)
    arr = bump2.sigma_inv(bump2.sigma(x))
    assert np.allclose(arr, x, rtol=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 5.0), st.floats(1e-6, 5.0))
def test_sigma_inverse_monotone(a, b):
    F = _cached_field()
    lo, hi = sorted((a, b))
    s = F.sigma_max
    assert sigma_inverse(F, lo / 5 * s) <= sigma_inverse(F, hi / 5 * s)


_CACHE = {}


def _cached_field():
    if "f" not in _CACHE:
        _CACHE["f"] = solve_jacobi(constant_curvature(-0.3), 3, 4.0)
    return _CACHE["f"]


def test_f_bounds():
    mu0, mu1 = f_bounds(solve_jacobi(zero_curvature(), 2, 2.0), 1.0)
    assert (mu0, mu1) == (pytest.approx(1.0, abs=1e-12), pytest.approx(1.0, abs=1e-12))
    mu0, mu1 = f_bounds(solve_jacobi(constant_curvature(1.0), 2, 2.0), 1.0)
    assert (mu0, mu1) == (pytest.approx(math.cos(1.0), abs=1e-10), pytest.approx(1.0))
    mu0, mu1 = f_bounds(solve_jacobi(constant_curvature(-1.0), 2, 2.0), 1.0)
    assert (mu0, mu1) == (pytest.approx(1.0), pytest.approx(math.cosh(1.0), abs=1e-10))


def test_comparison_bounds(bump2):
    lam = 4.0
    mu0, mu1 = f_bounds(bump2, lam)
    assert 0 < mu0 <= 1 <= mu1 <= math.exp(bump2.mu_minus(lam))
    t = np.linspace(1e-3, lam, 200)
    f = bump2.f(t)
    assert np.all(mu0 * t <= f * (1 + 1e-10))
    assert np.all(f <= math.exp(bump2.mu_minus(lam)) * t * (1 + 1e-10))
    assert np.all(bump2.fp(t) > 0)


def test_running_bounds_bracket_sampled(bump2):
    for r in (0.5, 2.0, 5.0):
        b0, b1 = bump2.fp_running_bounds(r)
        fp = bump2.fp(np.linspace(0, r, 2001))
        assert b0 <= fp.min() + 1e-12 and b1 >= fp.max() - 1e-12


def test_input_validation():
    with pytest.raises(ValueError):
        solve_jacobi(zero_curvature(), 1, 1.0)
    with pytest.raises(ValueError):
        solve_jacobi(zero_curvature(), 2, 1.0, tol=1e-3)
    with pytest.raises(ValueError):
        solve_jacobi(tabulated_curvature([0, 1], [0, 0], t_max=1.0), 2, 2.0)


def test_positivity_loss_with_small_moment_is_an_error():
    # a spike that the moment misses cannot occur for genuine profiles, so
    # check the gate through f_bounds instead
    F = solve_jacobi(constant_curvature(1.0), 2, 3.0)
    with pytest.raises(AdmissibilityError):
        f_bounds(F, 3.0)


def test_dump_round_trip(flat3):
    d = flat3.to_dict()
    assert set(d) == {"n", "t_max", "grid", "f", "f_prime", "sigma"}
    assert len(d["grid"]) == len(d["f"]) == len(d["sigma"])
    assert d["grid"][0] == 0.0 and d["f"][0] == 0.0 and d["f_prime"][0] == 1.0
