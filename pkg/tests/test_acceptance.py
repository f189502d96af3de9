"""Acceptance criteria, one check per criterion.

Each check returns ``(ok, detail)``; the test prints a ``PASS``/``FAIL``
line and then asserts.  Run ``python3 tests/test_acceptance.py`` for the
lines alone.
"""

import math
import time

import numpy as np
import pytest

from cavitate import compressible as comp
from cavitate import geometry as geo
from cavitate import incompressible as inc
from cavitate.constitutive import baker_ericksen, example42, varpi
from cavitate.errors import AdmissibilityError
from cavitate.jacobi import curvature_moments, moment_tail_bound, solve_jacobi

TITLES = {
    1: "Jacobi exactness",
    2: "Euclidean regular solution",
    3: "incompressibility identity",
    4: "bifurcation limit",
    5: "energy-derivative identity",
    6: "stress monotonicity",
    7: "conservation law",
    8: "a-priori envelopes",
    9: "cavitation transition",
    10: "geometry formulas",
    11: "cross-form consistency",
}

_cache = {}


def cached(key, make):
    if key not in _cache:
        _cache[key] = make()
    return _cache[key]


def flat(n):
    return cached(("flat", n), lambda: solve_jacobi(geo.zero_curvature(), n, 5.0))


def bump(n):
    def make():
        c = cached("bump", lambda: geo.curvature_of_revolution(geo.log_bump_surface(0.5)))
        return solve_jacobi(c, n, min(c.t_max, 10.0))
    return cached(("bump", n), make)


def law(n):
    if n == 2:
        return example42(2, mu=1.0, nu=0.1, alpha=1.5, beta=0.5, k=2.0)
    return example42(n)


def check_1():
    cases = [(0.0, lambda t: t), (1.0, np.sin), (-1.0, np.sinh)]
    worst, slowest = 0.0, 0.0
    for k, exact in cases:
        t0 = time.perf_counter()
        F = solve_jacobi(geo.constant_curvature(k), 2, 3.0)
        t = np.linspace(0.0, min(3.0, F.t_max), 3001)
        err = float(np.max(np.abs(F.f(t) - exact(t))))
        slowest = max(slowest, time.perf_counter() - t0)
        worst = max(worst, err)
    return worst <= 1e-9 and slowest < 1.0, f"sup error {worst:.2e}, slowest {slowest:.3f} s"


def check_2():
    worst, slowest = 0.0, 0.0
    rho = np.linspace(0.0, 1.0, 1001)
    for n in (2, 3):
        for lam in (0.5, 1.7):
            t0 = time.perf_counter()
            sol = comp.solve_regular(flat(n), law(n), lam)
            slowest = max(slowest, time.perf_counter() - t0)
            worst = max(worst, float(np.max(np.abs(sol.state(rho)[0] - lam * rho))))
    return worst <= 1e-6 and slowest < 5.0, f"sup error {worst:.2e}, slowest {slowest:.2f} s"


def _random_profile(rng):
    kind = rng.integers(4)
    if kind == 0:
        return geo.constant_curvature(rng.uniform(-1.0, 0.8))
    if kind == 1:
        # tabulated profiles have kinks that spoil difference quotients
        b = geo.RadialFunction.from_spec({"form": "exp_sq", "c": rng.uniform(0.0, 0.4)})
        return geo.ellipsoid_metric(2, np.eye(2), b, t_max=4.0).curvature()
    if kind == 2:
        return geo.curvature_of_revolution(geo.log_bump_surface(rng.uniform(0.1, 0.7), 20.0))
    return geo.zero_curvature()


_D8 = ((-4, 1 / 280), (-3, -4 / 105), (-2, 1 / 5), (-1, -4 / 5),
       (1, 4 / 5), (2, -1 / 5), (3, 4 / 105), (4, -1 / 280))


def check_3():
    rng = np.random.default_rng(7)
    worst, done, tries = 0.0, 0, 0
    while done < 10 and tries < 100:
        tries += 1
        n = int(rng.integers(2, 5))
        curv = _random_profile(rng)
        A = rng.uniform(0.05, 1.5)
        try:
            F = solve_jacobi(curv, n, min(curv.t_max, 4.0))
            sol = inc.incompressible_deformation(F, A)
        except AdmissibilityError:
            continue
        for rho in np.linspace(0.05, 1.0, 20):
            # phi' can be ~1e-5 next to a large cavity, so rounding in phi
            # forces a wide step; an eighth-order stencil absorbs the truncation
            h = 3e-2 * rho
            dphi = sum(w * sol.phi(rho + k * h) for k, w in _D8) / h
            ref = F.f(rho) ** (n - 1)
            worst = max(worst, abs(dphi * F.f(sol.phi(rho)) ** (n - 1) - ref) / ref)
        done += 1
    return done == 10 and worst <= 1e-8, f"{done} pairs, worst relative residual {worst:.2e}"


def check_4():
    t0 = time.perf_counter()
    F, L = flat(3), law(3)
    P = inc.pcr(L)
    gaps = [abs(inc.chi(F, L, A) - P) for A in (1e-1, 1e-2, 1e-3)]
    el = time.perf_counter() - t0
    ok = gaps[2] <= 1e-2 * (1 + abs(P)) and gaps[0] > gaps[1] > gaps[2] and el < 30
    return ok, f"P_cr {P:.12g}, gaps " + ", ".join(f"{g:.2e}" for g in gaps) + f", {el:.2f} s"


def check_5():
    worst = 0.0
    for F, L in ((flat(3), law(3)), (bump(2), law(2))):
        P = inc.pcr(L) + 1.0
        for A in (0.2, 0.5):
            h = 1e-4
            fd = (inc.energy_I(F, L, A + h, P) - inc.energy_I(F, L, A - h, P)) / (2 * h)
            worst = max(worst, abs(inc.energy_I_prime(F, L, A, P) - fd) / abs(fd))
    return worst <= 1e-3, f"worst relative difference {worst:.2e}"


def _compressible_solutions():
    def make():
        out = [(flat(3), law(3), comp.solve_regular(flat(3), law(3), lam)) for lam in (0.5, 1.7)]
        out.append((flat(3), law(3), comp.solve_cavitating(flat(3), law(3), 3.0)))
        out += [(bump(2), law(2), comp.solve_regular(bump(2), law(2), lam))
                for lam in (0.5, 1.2, 2.0)]
        return out
    return cached("solutions", make)


def check_6():
    worst = -math.inf
    for n in (2, 3):
        ok, _ = baker_ericksen(law(n))
        if not ok:
            return False, f"law for n={n} fails Baker-Ericksen"
    rho = np.geomspace(1e-3, 1.0, 40)
    for F, L, sol in _compressible_solutions():
        rep = comp.stress_report(F, L, sol)
        _, a, t, _ = sol.state(rho)
        prod = np.array([rep.T_prime(r) for r in rho]) * (a - t)
        worst = max(worst, float(prod.max()), rep.monotonicity_violation)
    drop = 0.0
    for F, L in ((flat(3), law(3)), (bump(2), law(2))):
        for A in (0.1, 0.5):
            sol = inc.incompressible_deformation(F, A)
            T = inc.cauchy_stress_T(F, L, sol, inc.pcr(L))
            vals = T(np.geomspace(1e-4, 1.0, 25))
            drop = max(drop, float(np.max(-np.diff(vals))))
    ok = worst <= 1e-10 and drop <= 1e-10
    return ok, f"max T'(phi'-tau) {worst:.2e}, max decrease of incompressible T {drop:.2e}"


def check_7():
    worst = 0.0
    for F, L, sol in _compressible_solutions():
        if F.curv.kind == "zero":
            worst = max(worst, comp.stress_report(F, L, sol).conservation_residual)
    return worst <= 1e-6, f"worst relative defect {worst:.2e}"


def check_8():
    n_sol, bad = 0, []
    for F, L, sol in _compressible_solutions():
        if F.curv.kind != "revolution":
            continue
        env = comp.check_envelopes(F, L, sol, checkpoints=50)
        n_sol += 1
        if not env.ok:
            bad.append(sol.lam)
    return not bad and n_sol > 0, f"{n_sol} regular solutions, violations at lam={bad}"


def check_9():
    t0 = time.perf_counter()
    F, L = flat(3), law(3)
    low = comp.minimize_energy(F, L, 1.05)
    high = comp.minimize_energy(F, L, 3.0)
    margin = high.regular_energy - high.best_cavitating_energy
    qtol = high.energy_tol
    phi, a, t, _ = high.cavitating.state(1e-5)
    launch = abs(a * t ** 2 - varpi(L))
    el = time.perf_counter() - t0
    ok = (low.verdict == "regular" and high.verdict == "cavitating" and margin > 10 * qtol
          and launch <= 1e-3 and el < 120)
    return ok, (f"verdicts {low.verdict}/{high.verdict}, margin {margin:.4g} "
                f"(tol {qtol:.1e}), launch {launch:.1e}, {el:.1f} s")


def check_10():
    a = 0.5
    surf = geo.log_bump_surface(a)
    curv = cached("bump", lambda: geo.curvature_of_revolution(surf))
    err = 0.0
    for t in np.linspace(0.0, 10.0, 20):
        z = geo.zeta(surf, t)
        closed = 4 * a * a * (1 - z ** 4) / (1 + (4 * a * a + 2) * z * z + z ** 4) ** 2
        err = max(err, abs(curv(t) - closed))
    mp, _ = curvature_moments(curv, math.inf)
    mp_hi = mp + moment_tail_bound(curv)
    b = geo.RadialFunction.from_spec({"form": "exp", "c": 2.0})
    A = np.array([[2.0, 0.4, 0.0], [0.4, 1.0, -0.2], [0.0, -0.2, 0.7]])
    metric = geo.ellipsoid_metric(3, A, b)
    rng = np.random.default_rng(11)
    res = 0.0
    for t in (0.5, 2.0):
        q = geo.ellipsoid_geodesic_sphere(metric, t)
        y = q.points(rng.normal(size=(50, 3)))
        res = max(res, float(np.max(np.abs(q.residual(y)))),
                  abs(q.radius ** 2 - math.log1p(t) ** 2))
    ok = err <= 1e-8 and mp_hi <= 2 * a * a and res <= 1e-8
    return ok, f"kappa error {err:.1e}, mu_plus(inf) <= {mp_hi:.4f}, sphere residual {res:.1e}"


def check_11():
    rng = np.random.default_rng(5)
    worst = 0.0
    cases = [(bump(2), law(2)), (flat(3), law(3)),
             (cached("hyp3", lambda: solve_jacobi(geo.constant_curvature(-0.5), 3, 4.0)),
              example42(3, nu=0.2, beta=0.7))]
    for i in range(100):
        F, L = cases[i % 3]
        rho, phi, dphi = rng.uniform(0.05, 1.0), rng.uniform(0.05, 2.5), rng.uniform(0.1, 3.0)
        a = comp.equilibrium_rhs(F, L, rho, phi, dphi)
        b = comp.equilibrium_rhs_divergence(F, L, rho, phi, dphi)
        worst = max(worst, abs(a - b) / max(1.0, abs(a)))
    return worst <= 1e-8, f"worst difference {worst:.2e} over 100 states"


CHECKS = {k: globals()[f"check_{k}"] for k in TITLES}


def report(k):
    try:
        ok, detail = CHECKS[k]()
    except Exception as exc:  # a crash is a failure, reported like one
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    line = f"ACCEPTANCE {k:2d} {'PASS' if ok else 'FAIL'}  {TITLES[k]}: {detail}"
    return ok, line


@pytest.mark.parametrize("k", list(TITLES), ids=[f"{k}-{v.replace(' ', '_')}"
                                                 for k, v in TITLES.items()])
def test_acceptance(k, capsys):
    ok, line = report(k)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = [report(k) for k in TITLES]
    for _, line in results:
        print(line)
    raise SystemExit(0 if all(ok for ok, _ in results) else 1)
