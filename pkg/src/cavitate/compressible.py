"""Compressible radial equilibria: shooting solvers, stresses and energies.

A radial deformation ``phi`` of the geodesic ball is an equilibrium when it
solves the second order equation

    f [phi''(a) + h''(d) tau^(2(n-1))] a'
        = (n-1) [f'(phi) phi'(tau) - f' phi'(a)]
          - (n-1) (f'(phi) a - f' tau) h''(d) a tau^(2n-3),

with ``a = phi'(rho)``, ``tau = f(phi)/f(rho)`` and ``d = a tau^(n-1)``.
The shooting integrators work in ``x = log(rho)`` with state
``(phi, log d)``; both the regular and the cavitating solutions have bounded
``d`` at ``rho = 0``.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp, trapezoid
from scipy.optimize import brentq

from .constitutive import Phi1_Phi2, sampled_envelopes, varpi
from .errors import AdmissibilityError, ConvergenceError
from .jacobi import JacobiField, f_bounds

__all__ = [
    "EquilibriumSolution",
    "StressReport",
    "EnvelopeReport",
    "equilibrium_rhs",
    "equilibrium_rhs_divergence",
    "solve_regular",
    "solve_cavitating",
    "stress_report",
    "energy_of",
    "check_envelopes",
    "envelope_constants",
    "regular_slope_scaling",
    "MinimizerReport",
    "minimize_energy",
]

log = logging.getLogger(__name__)

RHO_START = 1e-6


# ---------------------------------------------------------------------------
# the equilibrium equation


def _radial_energy(law, a, t, d):
    n = law.n
    return law.phi(a) + (n - 1) * law.phi(t) + law.h(d)


def equilibrium_rhs(field: JacobiField, law, rho, phi, dphi):
    """``phi''`` from the equilibrium equation at one state."""
    n = law.n
    if not (rho > 0 and phi > 0 and dphi > 0):
        raise ValueError("state must satisfy rho > 0, phi > 0, phi' > 0")
    f, fp = field.f_fp(rho)
    F, Fp = field.f_fp(phi)
    t = F / f
    a = dphi
    d = a * t ** (n - 1)
    hpp = law.h_pp(d)
    coef = law.phi_pp(a) + hpp * t ** (2 * (n - 1))
    if not coef > 0:
        raise ValueError(f"vanishing coefficient {coef!r}: convexity violated")
    num = ((n - 1) * (Fp * law.phi_p(t) - fp * law.phi_p(a))
           - (n - 1) * (Fp * a - fp * t) * hpp * a * t ** (2 * n - 3))
    return num / (f * coef)


def _fd5(g, h):
    return (g(-2 * h) - 8 * g(-h) + 8 * g(h) - g(2 * h)) / (12 * h)


def equilibrium_rhs_divergence(field: JacobiField, law, rho, phi, dphi, step=None):
    """``phi''`` from ``[f^(n-1) Phi_1]' = (n-1) f^(n-2) f'(phi) Phi_2``.

    The total derivative is split into its part at frozen ``phi'`` and the
    coefficient of ``phi''``, each taken by a five-point difference.
    """
    n = law.n
    a = dphi
    f, fp = field.f_fp(rho)
    F, Fp = field.f_fp(phi)
    t = F / f
    e = 1e-3 * min(rho, phi / max(a, 1e-300), 1.0) if step is None else step

    def along(eps):
        r = rho + eps
        fr = field.f(r)
        return fr ** (n - 1) * Phi1_Phi2(law, a, field.f(phi + a * eps) / fr)[0]

    def in_a(eps):
        return Phi1_Phi2(law, a + eps, t)[0]

    g_rho = _fd5(along, e)
    g_a = _fd5(in_a, 1e-3 * a)
    p2 = Phi1_Phi2(law, a, t)[1]
    return ((n - 1) * f ** (n - 2) * Fp * p2 - g_rho) / (f ** (n - 1) * g_a)


class _Flow:
    """Right-hand side in ``x = log rho`` for the state ``(phi, log d, energy)``."""

    def __init__(self, field: JacobiField, law):
        self.F = field
        self.law = law
        self.n = law.n
        self.cap = field.t_max

    def parts(self, rho, phi, d):
        n = self.n
        F = self.F
        law = self.law
        f, fp = F.f_fp(rho)
        G, Gp = F.f_fp(phi)
        t = G / f
        a = d * t ** (1 - n)
        return f, fp, G, Gp, t, a

    def __call__(self, x, y):
        n = self.n
        law = self.law
        rho = math.exp(x)
        phi, ell = y[0], y[1]
        if not (0 < phi < self.cap):
            return np.array([0.0, 0.0, 0.0])
        d = math.exp(ell)
        f, fp, G, Gp, t, a = self.parts(rho, phi, d)
        hpp = law.h_pp(d)
        ppa = law.phi_pp(a)
        t2 = t ** (2 * n - 2)
        coef = ppa + hpp * t2
        # two pieces of d' kept apart to avoid cancelling the h'' terms
        d1 = (n - 1) * t ** (n - 1) * (Gp * law.phi_p(t) - fp * law.phi_p(a)) / (f * coef)
        d2 = (n - 1) * a * t ** (n - 2) * (Gp * a - fp * t) / f * (ppa / coef)
        energy = rho * f ** (n - 1) * _radial_energy(law, a, t, d)
        return np.array([rho * a, rho * (d1 + d2) / d, energy])


# ---------------------------------------------------------------------------
# solutions


@dataclass
class EquilibriumSolution:
    kind: str
    A: float
    lam: float
    field: JacobiField
    law: object
    rho_start: float
    ode: object
    residual: float = math.nan
    T0: float = math.nan
    energy: float = math.nan
    slope0: Optional[float] = None
    flags: list = dc_field(default_factory=list)
    info: dict = dc_field(default_factory=dict)

    @property
    def n(self):
        return self.law.n

    def state(self, rho):
        """``(phi, phi', tau, d)`` at ``rho`` (arrays allowed)."""
        rho = np.asarray(rho, dtype=float)
        n = self.n
        small = rho < self.rho_start
        x = np.log(np.maximum(rho, self.rho_start))
        y = self.ode(x)
        phi, d = y[0], np.exp(y[1])
        f = self.field.f(np.maximum(rho, 1e-300))
        t = self.field.f(phi) / f
        a = d * t ** (1 - n)
        if np.any(small):
            # below the launch point use the launch asymptotics
            r = rho[small] if rho.ndim else rho
            if self.kind == "regular":
                s = self.slope0
                phi_s = s * r
                with np.errstate(invalid="ignore"):
                    t_s = np.where(r > 0, self.field.f(phi_s) / self.field.f(r), s)
                a_s = np.full_like(np.asarray(r, dtype=float), s)
                d_s = a_s * t_s ** (n - 1)
            else:
                phi_s = np.full_like(np.asarray(r, dtype=float), self.A)
                d_s = np.full_like(phi_s, d if np.ndim(d) == 0 else d[small])
                with np.errstate(divide="ignore"):
                    t_s = np.asarray(self.field.f(phi_s), dtype=float) / np.asarray(self.field.f(r))
                    a_s = d_s * t_s ** (1 - n)
            if rho.ndim:
                phi, a, t, d = (np.where(small, 0.0, v) for v in (phi, a, t, d))
                phi[small], a[small], t[small], d[small] = phi_s, a_s, t_s, d_s
            else:
                phi, a, t, d = phi_s, a_s, t_s, d_s
        return phi, a, t, d

    def profile(self, rho):
        phi, a, t, _ = self.state(rho)
        return phi, a, t

    @property
    def energy_ode(self):
        return self.info.get("energy_ode", math.nan)


def _ode_solve(flow: _Flow, x0, y0, tol, dense=False):
    cap = flow.cap

    def top(x, y):
        return cap * (1 - 1e-9) - y[0]

    def blow(x, y):
        return 60.0 - abs(y[1])

    top.terminal = True
    blow.terminal = True
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        res = solve_ivp(flow, (x0, 0.0), y0, method="DOP853", rtol=tol, atol=tol * 1e-2,
                        events=(top, blow), dense_output=dense)
    return res


def _shoot_value(res, lam):
    """Mismatch ``phi(1) - lam``; upward blow-up maps to ``+inf``."""
    if res.status == 1:
        if res.t_events[0].size or res.y[1, -1] > 0:
            return math.inf
        return res.y[0, -1] - lam
    if res.status != 0:
        return math.nan
    return res.y[0, -1] - lam


def _root(g, lo, hi, glo, ghi, xtol=1e-14):
    """Brent on a sign-changing bracket, bisecting first while an end is infinite."""
    for _ in range(200):
        if math.isfinite(glo) and math.isfinite(ghi):
            break
        mid = math.sqrt(lo * hi) if lo > 0 else 0.5 * (lo + hi)
        gm = g(mid)
        if not math.isfinite(gm) and gm != math.inf:
            raise ConvergenceError(f"integration failed at {mid:g}")
        if gm == 0:
            return mid
        if (gm > 0) == (ghi > 0):
            hi, ghi = mid, gm
        else:
            lo, glo = mid, gm
    return brentq(g, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


# ---------------------------------------------------------------------------
# regular solutions


def _regular_launch(field, law, s, rho0):
    n = law.n
    phi0 = s * rho0
    t0 = field.f(phi0) / field.f(rho0)
    return np.array([phi0, math.log(s * t0 ** (n - 1)), 0.0])


def _gate(field, lam):
    m = max(lam, 1.0)
    if m > field.t_max:
        raise AdmissibilityError(f"Jacobi field solved only up to {field.t_max:g} < {m:g}")
    mp = field.mu_plus(m)
    if mp > 1.0:
        raise AdmissibilityError(f"gate failed: mu_plus(max(lam, 1)) = {mp:.6g} > 1")
    return mp


def solve_regular(field: JacobiField, law, lam: float, tol: float = 1e-10,
                  rho_start: float = RHO_START, check: bool = True) -> EquilibriumSolution:
    """Regular equilibrium with ``phi(1) = lam`` by shooting on ``s = phi'(0)``."""
    lam = float(lam)
    if not lam > 0:
        raise ValueError("lam must be positive")
    _gate(field, lam)
    flow = _Flow(field, law)
    x0 = math.log(rho_start)

    def g(s):
        if s * rho_start >= field.t_max:
            return math.inf
        return _shoot_value(_ode_solve(flow, x0, _regular_launch(field, law, s, rho_start), tol), lam)

    lo, hi = 0.5 * lam, 2.0 * lam
    glo, ghi = g(lo), g(hi)
    for _ in range(60):
        if glo < 0 < ghi:
            break
        if glo >= 0:
            hi, ghi = lo, glo
            lo *= 0.5
            glo = g(lo)
        else:
            lo, glo = hi, ghi
            hi *= 2.0
            ghi = g(hi)
    else:
        raise ConvergenceError(f"no regular shooting bracket for lam={lam:g}")
    s = lo if glo == 0 else _root(g, lo, hi, glo, ghi)
    res = _ode_solve(flow, x0, _regular_launch(field, law, s, rho_start), tol, dense=True)
    if res.status != 0:
        raise ConvergenceError(f"regular shooting failed at s={s:g}: {res.message}")
    t0 = field.f(s * rho_start) / field.f(rho_start)
    tail = field.sigma(rho_start) * _radial_energy(law, s, t0, math.exp(res.y[1, 0]))
    sol = EquilibriumSolution("regular", 0.0, float(res.y[0, -1]), field, law, rho_start,
                              res.sol, slope0=s)
    sol.info.update(energy_ode=float(res.y[2, -1] + tail), nfev=int(res.nfev),
                    lam_target=lam)
    _finish(sol, tol)
    if check:
        env = check_envelopes(field, law, sol)
        sol.info["envelopes"] = env
        if not env.ok:
            sol.flags.append("envelope violation")
            log.warning("a-priori envelope violated by the regular solution at lam=%g", lam)
    return sol


def regular_slope_scaling(field: JacobiField, law, lams=(0.2, 0.4, 0.8), tol: float = 1e-10):
    """``phi'(0)/lam`` for a set of small loads; returns ``(ratios, (min, max))``."""
    r = np.array([solve_regular(field, law, l, tol, check=False).slope0 / l for l in lams])
    return r, (float(r.min()), float(r.max()))


# ---------------------------------------------------------------------------
# cavitating solutions


def _cavity_launch(law, A, w):
    return np.array([A, math.log(w), 0.0])


def _cavity_tail_energy(field, law, A, w, rho0):
    """``int_0^rho0 f^(n-1) Phi`` along the launch asymptotics."""
    n = law.n
    FA = field.f(A)

    def g(r):
        f = field.f(r)
        t = FA / f
        return f ** (n - 1) * _radial_energy(law, w * t ** (1 - n), t, w)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return quad(g, 0.0, rho0, epsabs=1e-15, epsrel=1e-10, limit=200)[0]


def _scan(field, law, lam, tol, rho_start, w, num):
    flow = _Flow(field, law)
    x0 = math.log(rho_start)
    A_grid = np.geomspace(1e-4 * lam, 0.99 * lam, num)
    A_grid = A_grid[A_grid < field.t_max]

    def g(A):
        return _shoot_value(_ode_solve(flow, x0, _cavity_launch(law, A, w), tol), lam)

    vals = np.array([g(A) for A in A_grid])
    return flow, x0, A_grid, vals, g


def solve_cavitating(field: JacobiField, law, lam: float, tol: float = 1e-10,
                     rho_start: float = RHO_START, num: int = 40, cavity_tol: float = 1e-6,
                     all_roots: bool = False):
    """Cavitating equilibrium with ``phi(1) = lam`` by shooting on ``A = phi(0+)``.

    Launches at ``rho_start`` from ``phi = A`` and ``phi' tau^(n-1) = varpi``.
    Every sign change on a geometric scan of ``A`` in ``[1e-4 lam, 0.99 lam]``
    is refined; the lowest-energy root is returned (all of them when
    ``all_roots``).  Returns ``None`` when the scan has no sign change.
    """
    lam = float(lam)
    _gate(field, lam)
    w = varpi(law)
    flow, x0, A_grid, vals, g = _scan(field, law, lam, tol, rho_start, w, num)
    finite = np.isfinite(vals)
    good = vals[finite]
    mono = bool(np.all(np.diff(good) > 0)) if good.size > 1 else True
    roots = []
    for i in range(len(A_grid) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isnan(a) or np.isnan(b):
            continue
        if a == 0:
            roots.append(float(A_grid[i]))
        elif (a < 0 < b) or (b < 0 < a):
            roots.append(_root(g, float(A_grid[i]), float(A_grid[i + 1]), a, b))
    if not roots:
        return [] if all_roots else None
    sols = []
    for A in roots:
        res = _ode_solve(flow, x0, _cavity_launch(law, A, w), tol, dense=True)
        if res.status != 0:
            raise ConvergenceError(f"cavitating integration blew up at A={A:g}: {res.message}")
        sol = EquilibriumSolution("cavitating", float(A), float(res.y[0, -1]), field, law,
                                  rho_start, res.sol)
        tail = _cavity_tail_energy(field, law, A, w, rho_start)
        sol.info.update(energy_ode=float(res.y[2, -1] + tail), nfev=int(res.nfev),
                        varpi=w, monotone_load=mono, lam_target=lam,
                        scan=(A_grid.tolist(), vals.tolist()))
        _finish(sol, tol)
        if abs(sol.T0) > cavity_tol:
            sol.flags.append(f"T0 = {sol.T0:.3g} exceeds the cavitation tolerance")
            sol.kind = "non-cavitating"
        sols.append(sol)
    sols.sort(key=lambda s: s.energy)
    return sols if all_roots else sols[0]


# ---------------------------------------------------------------------------
# stresses


@dataclass
class StressReport:
    T: Callable
    T_tilde: Callable
    T_prime: Callable
    T_tilde_prime: Callable
    conservation_residual: float
    identity_residual: float
    monotonicity_violation: float


def _stress_parts(sol, rho):
    law = sol.law
    n = law.n
    phi, a, t, d = sol.state(rho)
    p1, p2 = Phi1_Phi2(law, a, t)
    T = t ** (1 - n) * p1
    Tt = _radial_energy(law, a, t, d) - a * p1
    return phi, a, t, d, p1, p2, T, Tt


def _derivatives(sol, rho):
    """``(T', T~')`` at scalar ``rho`` by the chain rule along the ODE."""
    law = sol.law
    field = sol.field
    n = law.n
    phi, a, t, d = (float(v) for v in sol.state(rho))
    f, fp = field.f_fp(rho)
    G, Gp = field.f_fp(phi)
    da = equilibrium_rhs(field, law, rho, phi, a)
    dt = (Gp * a - fp * t) / f
    dd = da * t ** (n - 1) + (n - 1) * a * t ** (n - 2) * dt
    hp, hpp = law.h_p(d), law.h_pp(d)
    dT = ((1 - n) * t ** (-n) * dt * law.phi_p(a) + t ** (1 - n) * law.phi_pp(a) * da
          + hpp * dd)
    p1, p2 = Phi1_Phi2(law, a, t)
    dp1 = law.phi_pp(a) * da + hpp * dd * t ** (n - 1) + hp * (n - 1) * t ** (n - 2) * dt
    dTt = (n - 1) * p2 * dt - a * dp1
    return dT, dTt, f, fp, G, Gp, p1, p2, a, t


def stress_report(field: JacobiField, law, sol: EquilibriumSolution, checkpoints: int = 60
                  ) -> StressReport:
    """Cauchy and inverse Cauchy stress evaluators with their identities checked."""
    n = law.n

    def T(rho):
        return _stress_parts(sol, rho)[6]

    def Tt(rho):
        return _stress_parts(sol, rho)[7]

    def dT(rho):
        return _derivatives(sol, float(rho))[0]

    def dTt(rho):
        return _derivatives(sol, float(rho))[1]

    rhos = np.geomspace(max(sol.rho_start, 1e-4), 1.0, checkpoints)
    ident = 0.0
    mono = 0.0
    for r in rhos:
        dT_, dTt_, f, fp, G, Gp, p1, p2, a, t = _derivatives(sol, float(r))
        rhs = -(fp / Gp) * t ** n * dT_
        # closed form of T' from the partials
        dT_closed = (n - 1) * Gp / G * t ** (1 - n) * (t * p2 - a * p1)
        scale = 1.0 + abs(dTt_) + abs(rhs)
        ident = max(ident, abs(dTt_ - rhs) / scale,
                    abs(dT_ - dT_closed) / (1.0 + abs(dT_)) * (1.0 + abs(rhs)) / scale)
        mono = max(mono, dT_closed * (a - t))
    cons = _conservation(field, law, sol)
    return StressReport(T, Tt, dT, dTt, cons, ident, mono)


def _conservation(field, law, sol, lo=None):
    """Relative defect of the integrated conservation law on ``[lo, 1]``."""
    n = law.n
    lo = max(sol.rho_start, 1e-4) if lo is None else lo

    def L(rho):
        phi, a, t, d, p1, p2, T, Tt = _stress_parts(sol, rho)
        return float(field.f(rho) ** n * (_radial_energy(law, a, t, d) - (a - t) * p1))

    def src(x):
        rho = math.exp(x)
        phi, a, t, d, p1, p2, T, Tt = _stress_parts(sol, rho)
        f, fp = field.f_fp(rho)
        G, Gp = field.f_fp(float(phi))
        val = n * fp * f ** (n - 1) * _radial_energy(law, a, t, d)
        val += (Gp - fp) * f ** (n - 1) * (a * p1 + (n - 1) * t * p2)
        return float(rho * val)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        integral = quad(src, math.log(lo), 0.0, epsabs=1e-13, epsrel=1e-11, limit=400)[0]
    jump = L(1.0) - L(lo)
    return abs(jump - integral) / (1.0 + abs(integral) + abs(L(1.0)))


# ---------------------------------------------------------------------------
# energies


def energy_of(field: JacobiField, law, sol: EquilibriumSolution, method: str = "quad",
              num: int = 4001) -> float:
    """``I(phi) = int_0^1 f^(n-1) Phi d rho`` along the solution.

    ``method="trapezoid"`` uses ``num`` points uniform in ``log rho`` and is
    meant for refinement studies.
    """
    n = law.n
    lo = sol.rho_start

    def g(x):
        rho = np.exp(x)
        phi, a, t, d = sol.state(rho)
        return rho * field.f(rho) ** (n - 1) * _radial_energy(law, a, t, d)

    if method == "quad":
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            body = quad(lambda x: float(g(x)), math.log(lo), 0.0, epsabs=1e-13,
                        epsrel=1e-12, limit=400)[0]
    elif method == "trapezoid":
        xs = np.linspace(math.log(lo), 0.0, num)
        body = float(trapezoid(g(xs), xs))
    else:
        raise ValueError(f"unknown method {method!r}")
    if sol.kind == "regular":
        s = sol.slope0
        t0 = field.f(s * lo) / field.f(lo)
        tail = field.sigma(lo) * _radial_energy(law, s, t0, s * t0 ** (n - 1))
    else:
        tail = _cavity_tail_energy(field, law, sol.A, sol.info.get("varpi", varpi(law)), lo)
    total = body + tail
    if not np.isfinite(total):
        raise ConvergenceError("energy integral diverges")
    return float(total)


def _finish(sol: EquilibriumSolution, tol: float):
    field, law = sol.field, sol.law
    n = law.n
    rho0 = sol.rho_start
    phi, a, t, d = (float(v) for v in sol.state(rho0))
    sol.T0 = float(t ** (1 - n) * Phi1_Phi2(law, a, t)[0])
    sol.energy = energy_of(field, law, sol)
    sol.residual = _divergence_residual(sol)
    lam = sol.info.get("lam_target", sol.lam)
    if abs(sol.lam - lam) > 1e-9 * max(1.0, lam):
        sol.flags.append(f"phi(1) misses lam by {sol.lam - lam:.3g}")
    xs = np.linspace(math.log(rho0), 0.0, 200)
    if np.any(sol.state(np.exp(xs))[1] <= 0):
        sol.flags.append("phi' not positive")


def _divergence_residual(sol, num=40):
    """Max relative defect of ``[f^(n-1) Phi_1]' - (n-1) f^(n-2) f'(phi) Phi_2``."""
    field, law = sol.field, sol.law
    n = law.n

    def flux(x):
        rho = math.exp(x)
        phi, a, t, d = (float(v) for v in sol.state(rho))
        return field.f(rho) ** (n - 1) * Phi1_Phi2(law, a, t)[0]

    worst = 0.0
    for x in np.linspace(math.log(max(sol.rho_start, 1e-4)) + 0.01, -0.01, num):
        rho = math.exp(x)
        phi, a, t, d = (float(v) for v in sol.state(rho))
        G, Gp = field.f_fp(phi)
        f = field.f(rho)
        p1, p2 = Phi1_Phi2(law, a, t)
        rhs = (n - 1) * f ** (n - 2) * Gp * p2
        lhs = _fd5(lambda e: flux(x + e), 1e-3) / rho
        worst = max(worst, abs(lhs - rhs) / (1.0 + abs(rhs) + abs(f ** (n - 1) * p1) / rho))
    return worst


# ---------------------------------------------------------------------------
# a-priori envelopes


def _q_inverses(law):
    if law.q1_inv is not None and law.q0_inv is not None:
        return law.q1_inv, law.q0_inv
    grid = np.concatenate([np.geomspace(1e-4, 1.0, 60), np.geomspace(1.0, 1e4, 60)[1:]])
    q = sampled_envelopes(law, grid)
    hi, lo = grid > 1, grid <= 1
    g1, v1 = grid[hi], q[hi]
    g0, v0 = grid[lo], q[lo]

    def q1_inv(y):
        return float(np.exp(np.interp(np.log(y), np.log(v1[::-1]), np.log(g1[::-1]))))

    def q0_inv(y):
        return float(np.exp(np.interp(np.log(y), np.log(v0[::-1]), np.log(g0[::-1]))))

    return q1_inv, q0_inv


def envelope_constants(field: JacobiField, law, lam: float):
    """``(mu0, mu1, eta0, eta1, c0, c1)`` for the power-law bounds on ``phi``.

    ``mu0, mu1`` bound ``f'`` on ``[0, max(lam, 1)]``, the range the
    bounds actually use.
    """
    q1_inv, q0_inv = _q_inverses(law)
    mu0, mu1 = f_bounds(field, max(lam, 1.0))
    eta0 = min(mu0 / mu1, q0_inv(mu1 / mu0))
    eta1 = max(mu1 / mu0, q1_inv(mu0 / mu1))
    return mu0, mu1, eta0, eta1, eta0 * mu0 / mu1, eta1 * mu1 / mu0


@dataclass
class EnvelopeReport:
    rho: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    dphi: np.ndarray
    power_lower: np.ndarray
    power_upper: np.ndarray
    phi: np.ndarray
    constants: tuple
    ok: bool
    cavity_trigger: bool


def check_envelopes(field: JacobiField, law, sol: EquilibriumSolution, checkpoints: int = 50,
                    rtol: float = 1e-7) -> EnvelopeReport:
    """Pointwise ``alpha0 tau <= phi' <= alpha1 tau`` and ``lam rho^c1 <= phi <= lam rho^c0``."""
    q1_inv, q0_inv = _q_inverses(law)
    lam = sol.lam
    rho = np.linspace(1.0 / checkpoints, 1.0, checkpoints)
    phi, a, t, d = sol.state(rho)
    lo = np.empty_like(rho)
    up = np.empty_like(rho)
    for i, (r, s) in enumerate(zip(rho, phi)):
        b0r, b1r = field.fp_running_bounds(float(r))
        b0s, b1s = field.fp_running_bounds(float(s))
        up[i] = max(b1r / b0s, q1_inv(b0r / b1s)) * t[i]
        lo[i] = min(b0r / b1s, q0_inv(b1r / b0s)) * t[i]
    consts = envelope_constants(field, law, lam)
    c0, c1 = consts[4], consts[5]
    pl, pu = lam * rho ** c1, lam * rho ** c0
    ok = bool(np.all(a <= up * (1 + rtol)) and np.all(a >= lo * (1 - rtol))
              and np.all(phi >= pl * (1 - rtol)) and np.all(phi <= pu * (1 + rtol)))
    trigger = bool(np.any(a < lo * (1 - rtol)))
    return EnvelopeReport(rho, lo, up, a, pl, pu, phi, consts, ok, trigger)


# ---------------------------------------------------------------------------
# global minimization


@dataclass
class MinimizerReport:
    lam: float
    best: EquilibriumSolution
    regular_energy: float
    best_cavitating_energy: Optional[float]
    direct_min_energy: float
    verdict: str
    direct_coarse_energy: float = math.nan
    grid_error_bound: float = math.nan
    direct_converged: bool = False
    direct_cavity: float = math.nan
    energy_tol: float = 0.0
    regular: Optional[EquilibriumSolution] = None
    cavitating: Optional[EquilibriumSolution] = None


def _direct(field, law, lam, cells, inits):
    from ._reduced import ReducedFunctional
    from .jacobi import _sigma_inverse_array

    red = ReducedFunctional(field, law, lam, cells)
    rho = _sigma_inverse_array(field, np.linspace(0.0, red.p_end, cells + 1))
    best = None
    for sol in inits:
        u0 = field.sigma(sol.state(rho)[0])
        u0[-1] = red.u_end
        res, u = red.minimize(u0)
        if best is None or res.fun < best[0].fun:
            best = (res, u)
    return best


def minimize_energy(field: JacobiField, law, lam: float, grid_size: int = 256,
                    tol: float = 1e-10, energy_tol: Optional[float] = None) -> MinimizerReport:
    """Compare the regular branch, the cavitating branch and a direct minimization.

    The direct minimization of the discretized ``J(u)`` is started from each
    branch solution; its value on ``grid_size`` and ``grid_size/2`` cells
    gives a discretization error bound.  The verdict is the lower of the two
    branch energies.
    """
    reg = solve_regular(field, law, lam, tol, check=False)
    cav = solve_cavitating(field, law, lam, tol)
    if energy_tol is None:
        energy_tol = 1e3 * tol * (1.0 + abs(reg.energy))
    if cav is not None and cav.kind == "cavitating" and cav.energy < reg.energy - energy_tol:
        verdict, best = "cavitating", cav
    else:
        verdict, best = "regular", reg
    inits = [reg] + ([cav] if cav is not None else [])
    fine, u = _direct(field, law, lam, grid_size, inits)
    coarse, _ = _direct(field, law, lam, max(grid_size // 2, 2), inits)
    bound = 4.0 / 3.0 * abs(fine.fun - coarse.fun) + energy_tol
    if not fine.success:
        log.warning("direct minimization stopped early: %s", fine.message)
    return MinimizerReport(float(lam), best, reg.energy,
                           None if cav is None else cav.energy, float(fine.fun), verdict,
                           float(coarse.fun), float(bound), bool(fine.success),
                           float(field.sigma_inv(u[0])) if u[0] > 0 else 0.0, energy_tol,
                           reg, cav)
