import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavitate import constitutive as con
from cavitate.constitutive import ConstitutiveLaw, Phi, Phi1_Phi2, example42


def quadratic_law(n=2):
    return ConstitutiveLaw(n, lambda v: v * v, lambda v: 2 * v, lambda v: 2.0 + 0 * v,
                           lambda d: (d - 1) ** 2, lambda d: 2 * (d - 1),
                           lambda d: 2.0 + 0 * d)


def test_phi_at_identity(law3):
    assert Phi(law3, [1.0, 1.0, 1.0]) == pytest.approx(-8.5, abs=1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 20.0))
def test_phi_diagonal(v):
    law = example42(3, nu=0.1, beta=0.5)
    assert Phi(law, [v, v, v]) == pytest.approx(3 * law.phi(v) + law.h(v ** 3), rel=1e-14)


def test_phi_permutation_invariant(law3):
    v = [0.3, 1.7, 2.2]
    assert Phi(law3, v) == Phi(law3, [v[2], v[0], v[1]])
    with pytest.raises(ValueError):
        Phi(law3, [1.0, -1.0, 1.0])


def test_natural_state(law3):
    assert con.natural_state_residual(law3) == pytest.approx(0.0, abs=1e-14)
    p1, p2 = Phi1_Phi2(law3, 1.0, 1.0)
    assert p1 == pytest.approx(0.0, abs=1e-14) and p2 == pytest.approx(0.0, abs=1e-14)


def test_partials_hand_values():
    p1, p2 = Phi1_Phi2(quadratic_law(), 2.0, 3.0)
    assert (p1, p2) == (34.0, 26.0)


def test_partials_against_differences(law2, rng):
    law = example42(3, nu=0.2, beta=0.8, alpha=2.5)
    for L in (law, law2):
        n = L.n
        for _ in range(50):
            a, t = rng.uniform(0.2, 4.0, 2)
            e = 1e-6
            d1 = (Phi(L, [a + e] + [t] * (n - 1)) - Phi(L, [a - e] + [t] * (n - 1))) / (2 * e)
            d2 = (Phi(L, [a, t + e] + [t] * (n - 2)) - Phi(L, [a, t - e] + [t] * (n - 2))) / (2 * e)
            p1, p2 = Phi1_Phi2(L, a, t)
            assert p1 == pytest.approx(d1, abs=1e-6 * (1 + abs(p1)))
            assert p2 == pytest.approx(d2, abs=1e-6 * (1 + abs(p2)))


def test_partials_symmetric_on_diagonal(law2):
    for v in np.geomspace(0.1, 10, 15):
        p1, p2 = Phi1_Phi2(law2, v, v)
        assert p1 == p2


@pytest.mark.parametrize("name", ["phi", "h"])
def test_derivative_consistency(law2, name):
    g, gp, gpp = (getattr(law2, name + s) for s in ("", "_p", "_pp"))
    for v in np.geomspace(0.02, 50, 50):
        e = 1e-6 * v
        assert gp(v) == pytest.approx((g(v + e) - g(v - e)) / (2 * e), abs=1e-6 * (1 + abs(gp(v))))
        assert gpp(v) == pytest.approx((gp(v + e) - gp(v - e)) / (2 * e),
                                       abs=1e-6 * (1 + abs(gpp(v))))


def test_h_extension_is_c2_at_half(law2):
    e = 1e-9
    for g in (law2.h, law2.h_p, law2.h_pp):
        assert g(0.5 - e) == pytest.approx(g(0.5 + e), abs=1e-6)
    assert law2.h(1e-6) > 1e4


def test_constructor_limits():
    for kw in ({"alpha": 3.0}, {"alpha": 1.0}, {"beta": 1.5}, {"k": 1.0}, {"mu": 0.0},
               {"nu": -1.0}):
        with pytest.raises(ValueError):
            example42(3, **kw)


def test_phi_hat_prime_at_one(law2, law3):
    for law in (law2, law3, quadratic_law()):
        assert con.phi_hat_prime(law, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_phi_hat_quadratic():
    law = quadratic_law()
    assert con.phi_hat(law, 2.0) == pytest.approx(0.25 + 4 + 0.0)
    assert con.phi_hat_prime(law, 2.0) == pytest.approx(3.75)


def test_phi_hat_two_ways(law2, law3):
    for law in (law2, law3):
        n = law.n
        v = np.geomspace(0.05, 20, 100)
        p1, p2 = Phi1_Phi2(law, v ** (1 - n), v)
        other = (n - 1) * (p2 - v ** (-n) * p1)
        direct = law.phi_hat_prime(v)
        assert np.allclose(direct, other, rtol=1e-10, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 20.0))
def test_phi_hat_derivatives(v):
    law = example42(3, nu=0.1, beta=0.5)
    e = 1e-6 * v
    fd = (law.phi_hat(v + e) - law.phi_hat(v - e)) / (2 * e)
    assert law.phi_hat_prime(v) == pytest.approx(fd, abs=1e-6 * (1 + abs(fd)))
    fd2 = (law.phi_hat_prime(v + e) - law.phi_hat_prime(v - e)) / (2 * e)
    assert law.phi_hat_second(v) == pytest.approx(fd2, abs=1e-5 * (1 + abs(fd2)))


def test_phi_hat_ratio_series(law3):
    for d in (1e-6, -1e-6, 5e-5):
        t = 1 + d
        exact = law3.phi_hat_prime(t) / d
        assert con.phi_hat_ratio(law3, t) == pytest.approx(exact, rel=1e-6)


def test_varpi_and_t0(law3, law2):
    assert con.varpi(law3) == pytest.approx(1.5, abs=1e-12)
    for law in (law2, law3):
        w = con.varpi(law)
        assert abs(law.h_p(w)) <= 1e-10 and law.h_pp(w) > 0
    assert con.t_zero(law3) == 0.0
    # phi' = alpha v^(alpha-1) - beta nu v^(-beta-1) vanishes at t0
    t0 = con.t_zero(law2)
    assert t0 == pytest.approx((0.1 * 0.5 / 1.5) ** (1 / 2.0), rel=1e-10)


def test_assumption_report(law2):
    law = example42(3, nu=0.1, beta=0.5)
    for L in (law, law2):
        rep = con.check_assumptions(L)
        assert rep.ok, rep.status
        assert set(rep.status) == {f"A{i}" for i in range(1, 10)}
        assert all(s == "sampled-pass" for s in rep.status.values())


def test_envelopes_power_law():
    law = example42(3, alpha=2.0)
    rep = con.check_assumptions(law)
    s_hi = rep.q_grid[rep.q_grid > 1]
    s_lo = rep.q_grid[rep.q_grid <= 1]
    assert np.allclose(rep.q1_samples, s_hi ** (1 - 2.0), rtol=1e-10)
    assert np.allclose(rep.q0_samples, s_lo ** (1 - 2.0), rtol=1e-10)
    assert law.q1(4.0) == pytest.approx(4.0 ** -1.0)


def test_theta_quadratic_growth(law3):
    rep = con.check_assumptions(law3)
    for s, val in rep.theta.items():
        assert val == pytest.approx(s * s, rel=1e-4)


def test_concave_phi_fails():
    law = con.custom_law(2, {"terms": [[-1.0, 2.0]]}, {"terms": [[1.0, 2.0]], "log": -1.0})
    rep = con.check_assumptions(law)
    assert rep.status["A4"] == "fail"
    assert "A4" in rep.witnesses


def test_baker_ericksen():
    ok, wit = con.baker_ericksen(quadratic_law())
    assert ok and wit == []
    ok, _ = con.baker_ericksen(example42(3, nu=0.1, beta=0.5))
    assert ok
    ok, wit = con.baker_ericksen(quadratic_law(), samples=np.empty((0, 2)))
    assert ok and wit == []
    # v phi'(v) = -sqrt(v)/2 is decreasing
    bad = con.custom_law(2, {"terms": [[-1.0, 0.5]]}, {"terms": [[1.0, 2.0]]})
    ok, wit = con.baker_ericksen(bad)
    assert not ok and wit
    a, t, val = wit[0]
    p1, p2 = Phi1_Phi2(bad, a, t)
    assert val == pytest.approx((a * p1 - t * p2) / (a - t)) and val < 0


def test_omega():
    assert con.omega(2) == pytest.approx(2 * np.pi)
    assert con.omega(3) == pytest.approx(4 * np.pi)
