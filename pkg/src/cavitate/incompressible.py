"""Incompressible radial deformations and the cavitation load ``chi(A)``.

Incompressibility forces ``phi(rho) = sigma^-1(sigma(rho) + sigma(A))``
where ``A = phi(0)`` is the cavity radius.  Equilibrium with a dead load
``P`` at ``rho = 1`` and a stress-free cavity reduces to ``P = chi(A)``.

Integrals over ``rho`` near the cavity are rewritten in the hoop stretch
``tau = f(phi)/f(rho)``, which tends to infinity as ``rho -> 0``; the
inverse map ``rho(A, tau)`` is obtained by a safeguarded Newton iteration.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad

from .constitutive import omega, phi_hat_ratio
from .errors import AdmissibilityError, ConvergenceError
from .jacobi import JacobiField

__all__ = [
    "IncompressibleSolution",
    "BifurcationDiagram",
    "TailReport",
    "incompressible_deformation",
    "admissibility_42",
    "pcr",
    "chi",
    "cauchy_stress_T",
    "energy_E",
    "energy_I",
    "bifurcation_diagram",
    "slope_integral",
]

log = logging.getLogger(__name__)

QUAD = dict(epsabs=1e-13, epsrel=1e-11, limit=400)


def _quad(fun, a, b, **kw):
    opts = dict(QUAD)
    opts.update(kw)
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            val, err = quad(fun, a, b, **opts)
        except IntegrationWarning as exc:
            warnings.simplefilter("ignore", IntegrationWarning)
            val, err = quad(fun, a, b, **opts)
            if not np.isfinite(val) or err > 1e-6 * (1 + abs(val)):
                raise ConvergenceError(f"quadrature on [{a:g}, {b:g}] failed: {exc}") from None
            log.debug("quadrature warning on [%g, %g]: err %.2e", a, b, err)
    return val


# ---------------------------------------------------------------------------
# deformation


@dataclass
class IncompressibleSolution:
    field: JacobiField
    A: float
    lam: float
    sigma_A: float
    gates: dict
    P: Optional[float] = None

    @property
    def n(self):
        return self.field.n

    def phi(self, rho):
        F = self.field
        if np.ndim(rho) == 0:
            return F.sigma_inv(F.sigma(float(rho)) + self.sigma_A)
        return F.sigma_inv(F.sigma(np.asarray(rho, dtype=float)) + self.sigma_A)

    def profile(self, rho):
        """``(phi, phi', tau)`` at ``rho > 0``."""
        F = self.field
        r = self.phi(rho)
        fr, fpr = F.f_fp(rho)
        fphi = F.f(r)
        tau = fphi / fr
        return r, tau ** (1 - self.n), tau

    def tau(self, rho):
        return self.profile(rho)[2]


def incompressible_deformation(field: JacobiField, A: float) -> IncompressibleSolution:
    """Closed-form incompressible deformation with cavity radius ``A``."""
    A = float(A)
    if A < 0:
        raise ValueError("A must be nonnegative")
    F = field
    if F.t_max < 1.0:
        raise AdmissibilityError(f"Jacobi field only valid up to {F.t_max:g} < 1")
    mp1 = F.mu_plus(1.0)
    if mp1 > 1.0:
        raise AdmissibilityError(f"gate failed: mu_plus(1) = {mp1:.6g} > 1")
    sA = F.sigma(A) if A <= F.t_max else math.inf
    s_end = F.sigma(1.0) + sA
    if s_end > F.sigma_max:
        raise AdmissibilityError(
            f"sigma(1) + sigma(A) = {s_end:.6g} exceeds sigma(t_max) = {F.sigma_max:.6g}")
    lam = F.sigma_inv(s_end)
    mpl = F.mu_plus(lam)
    if mpl > 1.0:
        raise AdmissibilityError(f"gate failed: mu_plus(phi(1)) = {mpl:.6g} > 1")
    gates = {"mu_plus(1)": mp1, "mu_plus(phi(1))": mpl}
    if max(mp1, mpl) == 1.0:
        log.warning("mu_plus equals 1: admissible but on the boundary")
    return IncompressibleSolution(F, A, lam, sA, gates)


# ---------------------------------------------------------------------------
# improper tails


@dataclass
class TailReport:
    converged: bool
    value: float
    pieces: list = field(default_factory=list)
    note: str = ""


def _tail(fun, start, tol=1e-10, max_doublings=80):
    """``int_start^inf fun`` with a doubling-cutoff convergence verdict.

    The value comes from one adaptive quadrature after ``tau = 1/w``; the
    verdict from the sequence of pieces over ``[T, 2T]``.
    """
    pieces = []
    T = start
    total = 0.0
    converged = False
    for _ in range(max_doublings):
        piece = _quad(fun, T, 2 * T, epsrel=1e-12)
        pieces.append(piece)
        total += piece
        T *= 2
        if len(pieces) >= 4:
            last = [abs(p) for p in pieces[-4:]]
            shrinking = last[3] <= last[2] <= last[1] or max(last) == 0.0
            if shrinking and last[3] <= 10 * tol * (1 + abs(total)):
                converged = True
                break
    if not converged:
        return TailReport(False, math.nan, pieces, "pieces do not decay under cutoff doubling")
    upper = 1.0 / start
    val = _quad(lambda w: fun(1.0 / w) / (w * w), 0.0, upper)
    return TailReport(True, val, pieces)


def admissibility_42(law, tol: float = 1e-10, delta: float = 2.0):
    """Integrability of ``tau^(n-1) Phi_hat'(tau) / (tau^n - 1)^2`` on ``(delta, inf)``.

    Returns ``(ok, value, report)``.
    """
    n = law.n

    def g(t):
        return t ** (n - 1) * law.phi_hat_prime(t) / (t ** n - 1) ** 2

    rep = _tail(g, delta, tol)
    return rep.converged, rep.value, rep


def pcr(law, tol: float = 1e-10, report: bool = False):
    """Critical load ``int_1^inf Phi_hat'(tau) / (tau^n - 1) d tau``.

    Near ``tau = 1`` the integrand is evaluated through ``Phi_hat'/(tau-1)``
    whose limit is ``Phi_hat''(1)``, so the value there is ``Phi_hat''(1)/n``.
    """
    n = law.n

    def near(t):
        return phi_hat_ratio(law, t) / sum(t ** k for k in range(n))

    def far(t):
        return law.phi_hat_prime(t) / (t ** n - 1)

    head = _quad(near, 1.0, 2.0)
    rep = _tail(far, 2.0, tol)
    if not rep.converged:
        raise AdmissibilityError("P_cr tail diverges: " + rep.note)
    val = head + rep.value
    if report:
        return val, {"head": head, "tail": rep.value, "converged": rep.converged,
                     "pieces": len(rep.pieces)}
    return val


# ---------------------------------------------------------------------------
# chi(A) and the tau-substitution


class _Cavity:
    """Quantities for fixed ``A``: the split point and the map ``tau -> rho``."""

    def __init__(self, field: JacobiField, A: float, rho0: Optional[float] = None):
        self.F = field
        self.sol = incompressible_deformation(field, A)
        self.A = A
        self.n = field.n
        self.rho0 = self._choose_rho0() if rho0 is None else float(rho0)
        if self.rho0 is not None:
            self.tau0 = self.state(self.rho0)[2]

    def state(self, rho):
        F = self.F
        r = F.sigma_inv(F.sigma(rho) + self.sol.sigma_A)
        f, fp = F.f_fp(rho)
        fr, fpr = F.f_fp(r)
        return r, f, fr / f, fp, fpr

    def _choose_rho0(self, default=0.1):
        F = self.F
        # keep tau(rho0) away from 1 so that rho(A, tau) stays well conditioned
        default = min(default, 4.0 * self.A)
        # kappa f^2 + n f'^2 > 0 on (0, phi(rho0)] makes tau decrease on (0, rho0]
        t = F.grid
        crit = F.kappa(t) * F.f_nodes ** 2 + self.n * F.fp_nodes ** 2
        bad = np.nonzero(crit[1:] <= 0)[0]
        rho1 = t[bad[0] + 1] if bad.size else F.t_max
        rho0 = default
        while rho0 > 1e-3 * default:
            if self.sol.phi(rho0) < rho1 and self._tau_decreasing(rho0):
                return rho0
            rho0 *= 0.5
        return None

    def _tau_decreasing(self, rho0):
        pts = np.geomspace(rho0 * 1e-4, rho0, 25)
        taus = [self.state(p)[2] for p in pts]
        return all(a > b for a, b in zip(taus, taus[1:]))

    def rho_of_tau(self, tau):
        """Solve ``f(phi(rho)) = tau f(rho)`` for ``rho`` in ``(0, rho0]``."""
        n = self.n
        A = self.A
        lo, hi = -745.0, math.log(self.rho0)
        guess = A / max(tau ** n - 1.0, 1e-300) ** (1.0 / n)
        u = math.log(min(max(guess, 1e-300), self.rho0))
        lt = math.log(tau)
        for _ in range(100):
            rho = math.exp(u)
            r, f, t, fp, fpr = self.state(rho)
            res = math.log(t) - lt
            if abs(res) <= 1e-15 * max(1.0, abs(lt)):
                return rho
            if res > 0:
                lo = max(lo, u)
            else:
                hi = min(hi, u)
            fr = t * f
            dphi = t ** (1 - n)
            slope = rho * (fpr * dphi / fr - fp / f)
            u_new = u - res / slope if slope < 0 else 0.5 * (lo + hi)
            if not (lo <= u_new <= hi):
                u_new = 0.5 * (lo + hi)
            if abs(u_new - u) < 1e-13 or hi - lo < 1e-13:
                return math.exp(u_new)
            u = u_new
        raise ConvergenceError(f"rho(A, tau) did not converge at A={A:g}, tau={tau:g}")


def _rho_integrand(cav, law):
    n = cav.n

    def g(rho):
        r, f, t, fp, fpr = cav.state(rho)
        return fpr / (t * f) * t ** (2 - n) * law.phi_hat_prime(t)

    return g


def _tau_integrand(cav, law):
    n = cav.n

    def g(t):
        rho = cav.rho_of_tau(t)
        r, f, tt, fp, fpr = cav.state(rho)
        denom = fp * t ** n - fpr
        if t - 1.0 < 1e-4:
            # denom ~ (tau - 1); combine with Phi_hat'(tau)/(tau - 1)
            return fpr * phi_hat_ratio(law, t) * (t - 1.0) / denom
        return fpr / denom * law.phi_hat_prime(t)

    return g


def _tau_quad(g, tau0):
    """``int_tau0^inf g`` via ``w = 1/tau``."""
    return _quad(lambda w: g(1.0 / w) / (w * w), 0.0, 1.0 / tau0)


def chi(field: JacobiField, law, A: float, tol: float = 1e-10, method: str = "split",
        rho0: Optional[float] = None) -> float:
    """Load ``P`` at which a cavity of radius ``A`` is stress free.

    ``method="split"`` integrates over ``rho`` on ``[rho0, 1]`` and over
    ``tau`` beyond ``tau(rho0)``; ``method="direct"`` integrates over
    ``rho`` only, refining towards the singular endpoint.
    """
    A = float(A)
    if not A > 0:
        raise ValueError("A must be positive")
    cav = _Cavity(field, A, rho0)
    n = field.n
    tau1 = cav.state(1.0)[2]
    g = _rho_integrand(cav, law)
    if method == "direct" or cav.rho0 is None:
        if method == "split":
            log.info("no valid split point for A=%g; using direct quadrature", A)
        # dyadic panels towards rho = 0 resolve the endpoint singularity
        edges = [1.0]
        while edges[-1] > 1e-12:
            edges.append(edges[-1] * 0.25)
        total = sum(_quad(g, b, a) for a, b in zip(edges, edges[1:]))
        total += _quad(g, 0.0, edges[-1])
    elif method == "split":
        total = _quad(g, cav.rho0, 1.0) + _tau_quad(_tau_integrand(cav, law), cav.tau0)
    else:
        raise ValueError(f"unknown method {method!r}")
    return tau1 ** (n - 1) * total


class StressT:
    """Radial Cauchy stress ``T(rho)`` of an incompressible cavitated ball."""

    def __init__(self, cav: _Cavity, law, P: float, chi_value: float):
        self.cav = cav
        self.law = law
        self.P = P
        self.chi = chi_value
        n = cav.n
        self.tau1 = cav.state(1.0)[2]
        self.at_one = P / self.tau1 ** (n - 1)
        self.at_zero = (P - chi_value) / self.tau1 ** (n - 1)
        self._g = _rho_integrand(cav, law)

    def __call__(self, rho):
        if np.ndim(rho):
            return np.array([self(float(r)) for r in np.ravel(rho)]).reshape(np.shape(rho))
        rho = float(rho)
        if rho <= 0:
            return self.at_zero
        cav = self.cav
        if cav.rho0 is not None and rho < cav.rho0:
            tau = cav.state(rho)[2]
            return self.at_zero + _tau_quad(_tau_integrand(cav, self.law), tau)
        return self.at_one - _quad(self._g, rho, 1.0)


def cauchy_stress_T(field: JacobiField, law, sol: IncompressibleSolution, P: float,
                    chi_value: Optional[float] = None) -> StressT:
    """Evaluator for ``T(rho) = P/tau^(n-1)(1) - int_rho^1 (f'(phi)/f(phi)) tau^(2-n) Phi_hat'(tau)``."""
    if not sol.A > 0:
        raise ValueError("stress requires a cavity A > 0")
    cav = _Cavity(field, sol.A)
    if chi_value is None:
        chi_value = chi(field, law, sol.A)
    return StressT(cav, law, float(P), chi_value)


# ---------------------------------------------------------------------------
# energies


def energy_E(field: JacobiField, law, A: float) -> float:
    """``E(A) = omega_n int_0^1 f^(n-1) Phi_hat(tau) d rho``."""
    n = field.n
    w = omega(n)
    A = float(A)
    if A == 0.0:
        incompressible_deformation(field, 0.0)
        return w * field.sigma(1.0) * law.phi_hat(1.0)
    cav = _Cavity(field, A)

    def g(rho):
        r, f, t, fp, fpr = cav.state(rho)
        return f ** (n - 1) * law.phi_hat(t)

    if cav.rho0 is None:
        edges = [1.0]
        while edges[-1] > 1e-12:
            edges.append(edges[-1] * 0.25)
        total = sum(_quad(g, b, a) for a, b in zip(edges, edges[1:]))
        total += _quad(g, 0.0, edges[-1])
        return w * total

    def gt(t):
        return field.sigma(cav.rho_of_tau(t)) * law.phi_hat_prime(t)

    total = (_quad(g, cav.rho0, 1.0) + field.sigma(cav.rho0) * law.phi_hat(cav.tau0)
             + _tau_quad(gt, cav.tau0))
    return w * total


def energy_I(field: JacobiField, law, A: float, P: float) -> float:
    """``I(A) = E(A) - omega_n f^(n-1)(1) P phi(1)``."""
    n = field.n
    sol = incompressible_deformation(field, A)
    return energy_E(field, law, A) - omega(n) * field.f(1.0) ** (n - 1) * P * sol.lam


def energy_I_prime(field: JacobiField, law, A: float, P: float,
                   chi_value: Optional[float] = None) -> float:
    """``I'(A) = omega_n f^(n-1)(A) tau^(1-n)(1) [chi(A) - P]``."""
    n = field.n
    sol = incompressible_deformation(field, A)
    tau1 = sol.tau(1.0)
    c = chi(field, law, A) if chi_value is None else chi_value
    return omega(n) * field.f(A) ** (n - 1) * tau1 ** (1 - n) * (c - P)


# ---------------------------------------------------------------------------
# bifurcation diagram


def slope_integral(law, tol: float = 1e-10) -> float:
    """``int_1^inf (tau^2 - 1) tau^n Phi_hat'(tau) / (tau^n - 1)^(2 + 2/n) d tau`` (n >= 3)."""
    n = law.n
    if n < 3:
        raise ValueError("the slope integral diverges at tau = 1 for n = 2")
    p = 2.0 + 2.0 / n

    def near(t):
        # (tau^2-1)/(tau^n-1)^p * Phi_hat' = (tau+1) ratio (tau-1)^(2-p) / S^p
        s = sum(t ** k for k in range(n))
        return (t + 1) * t ** n * phi_hat_ratio(law, t) * (t - 1) ** (2 - p) / s ** p

    def far(t):
        return (t * t - 1) * t ** n * law.phi_hat_prime(t) / (t ** n - 1) ** p

    head = _quad(near, 1.0, 2.0)
    rep = _tail(far, 2.0, tol)
    if not rep.converged:
        raise AdmissibilityError("slope integral tail diverges")
    return head + rep.value


def _flat_core_radius(field: JacobiField, cap: float = 1.0) -> float:
    t = field.grid[field.grid <= cap]
    k = np.abs(np.asarray(field.kappa(t), dtype=float))
    nz = np.nonzero(k > 1e-14)[0]
    if nz.size == 0:
        return float(min(cap, field.t_max))
    return float(t[nz[0] - 1]) if nz[0] > 0 else 0.0


@dataclass
class BifurcationDiagram:
    A_grid: np.ndarray
    chi_values: np.ndarray
    P_cr: float
    gap: float
    slope_diag: dict
    P_probe: Optional[float] = None
    E_values: Optional[np.ndarray] = None
    I_values: Optional[np.ndarray] = None
    T0_residuals: Optional[np.ndarray] = None


def bifurcation_diagram(field: JacobiField, law, A_grid, P_probe: Optional[float] = None,
                        energies: bool = False) -> BifurcationDiagram:
    """Tabulate ``chi`` and collect the small-``A`` slope diagnostics."""
    A_grid = np.asarray(A_grid, dtype=float)
    if A_grid.size == 0 or np.any(np.diff(A_grid) <= 0) or A_grid[0] <= 0:
        raise ValueError("A_grid must be positive and increasing")
    n = field.n
    P_cr = pcr(law)
    chis = np.array([chi(field, law, A) for A in A_grid])
    gap = abs(chis[0] - P_cr)
    diag = {"n": n, "kappa0": field.curv.kappa0, "phi_hat_pp1": float(law.phi_hat_second(1.0))}
    if A_grid.size >= 2:
        fd = np.gradient(chis, A_grid)
        diag["chi_prime_fd"] = fd.tolist()
        diag["chi_prime_over_f"] = (fd / np.asarray(field.f(A_grid))).tolist()
    k0 = diag["kappa0"]
    eps = _flat_core_radius(field)
    diag["flat_core_radius"] = eps
    if n >= 3 and k0 != 0.0:
        K = slope_integral(law)
        diag["slope_integral"] = K
        diag["predicted_limit_chi_prime_over_f"] = -k0 * K
        diag["predicted_sign"] = int(np.sign(-k0 * K))
    elif eps > 0:
        f1, fp1 = field.f_fp(1.0)
        integral = 0.0
        if eps < 1.0:
            integral = _quad(lambda r: field.kappa(r) / field.f(r) ** (n - 1), eps, 1.0)
        crit = P_cr - (1.0 / (n * (n - 1))) * (1 + f1 ** n / fp1 * integral) * diag["phi_hat_pp1"]
        diag["flat_core_criterion"] = crit
        diag["predicted_sign"] = int(np.sign(crit)) if abs(crit) > 1e-12 * (1 + abs(P_cr)) else 0
        if diag["predicted_sign"] == 0:
            diag["verdict"] = "indeterminate"
    elif n == 2 and k0 != 0.0:
        diag["predicted_sign"] = -int(np.sign(k0))
    out = BifurcationDiagram(A_grid, chis, P_cr, gap, diag, P_probe)
    if energies:
        P = P_cr if P_probe is None else P_probe
        out.E_values = np.array([energy_E(field, law, A) for A in A_grid])
        lam = np.array([incompressible_deformation(field, A).lam for A in A_grid])
        out.I_values = out.E_values - omega(n) * field.f(1.0) ** (n - 1) * P * lam
        tau1 = np.array([incompressible_deformation(field, A).tau(1.0) for A in A_grid])
        out.T0_residuals = (P - chis) / tau1 ** (n - 1)
    return out
