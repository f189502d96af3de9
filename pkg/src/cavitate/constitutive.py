"""Isotropic stored energies ``Phi(v) = sum_i phi(v_i) + h(v_1 ... v_n)``.

Besides the energy and its radial partials ``Phi_1``, ``Phi_2`` this module
provides the incompressible reduction ``Phi_hat(v) = Phi(v^(1-n), v, ..., v)``
and sampled checks of the growth and convexity hypotheses (A1)-(A9) and of
the Baker-Ericksen inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "ConstitutiveLaw",
    "ReducedLaw",
    "AssumptionReport",
    "example42",
    "power_function",
    "custom_law",
    "Phi",
    "Phi1_Phi2",
    "phi_hat",
    "phi_hat_prime",
    "phi_hat_second",
    "phi_hat_ratio",
    "varpi",
    "t_zero",
    "check_assumptions",
    "baker_ericksen",
]


@dataclass(frozen=True, eq=False)
class ConstitutiveLaw:
    """``phi`` and ``h`` with their first two derivatives, in dimension ``n``.

    ``q1`` and ``q0`` optionally carry closed forms of the (A6) envelopes;
    otherwise they are sampled by :func:`check_assumptions`.
    """

    n: int
    phi: Callable
    phi_p: Callable
    phi_pp: Callable
    h: Callable
    h_p: Callable
    h_pp: Callable
    params: dict = field(default_factory=dict)
    name: str = "custom"
    q1: Optional[Callable] = None
    q0: Optional[Callable] = None
    q1_inv: Optional[Callable] = None
    q0_inv: Optional[Callable] = None

    def phi_hat(self, v):
        n = self.n
        return self.phi(v ** (1 - n)) + (n - 1) * self.phi(v) + self.h(1.0)

    def phi_hat_prime(self, v):
        n = self.n
        return (1 - n) * v ** (-n) * self.phi_p(v ** (1 - n)) + (n - 1) * self.phi_p(v)

    def phi_hat_second(self, v):
        n = self.n
        w = v ** (1 - n)
        return (n * (n - 1) * v ** (-n - 1) * self.phi_p(w)
                + (n - 1) ** 2 * v ** (-2 * n) * self.phi_pp(w)
                + (n - 1) * self.phi_pp(v))


@dataclass(frozen=True, eq=False)
class ReducedLaw:
    """Incompressible-only material given directly through ``Phi_hat'``."""

    n: int
    dphi_hat: Callable
    phi_hat_fn: Optional[Callable] = None
    d2phi_hat: Optional[Callable] = None
    name: str = "reduced"

    def phi_hat(self, v):
        if self.phi_hat_fn is None:
            raise NotImplementedError("energy not supplied for this reduced law")
        return self.phi_hat_fn(v)

    def phi_hat_prime(self, v):
        return self.dphi_hat(v)

    def phi_hat_second(self, v):
        if self.d2phi_hat is not None:
            return self.d2phi_hat(v)
        eps = 1e-5 * max(1.0, abs(v))
        return (self.dphi_hat(v + eps) - self.dphi_hat(v - eps)) / (2 * eps)


# ---------------------------------------------------------------------------
# built-in family


def example42(n: int, mu: float = 1.0, nu: float = 0.0, alpha: float = 2.0,
              beta: float = 0.0, k: float = 2.0, c1: Optional[float] = None) -> ConstitutiveLaw:
    """``phi(v) = mu (v^alpha - n) + nu v^-beta`` and ``h = H - n`` with
    ``H(d) = k (d - 1 - 1/k)^2`` for ``d >= 1/2``.

    Below ``1/2`` the term ``c1 (1/2 - d)^3 / d`` is added, which keeps ``H``
    twice continuously differentiable, strictly convex and unbounded at 0.
    """
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    if not mu > 0:
        raise ValueError("mu must be positive")
    if nu < 0:
        raise ValueError("nu must be nonnegative")
    if not 1 < alpha < n:
        raise ValueError(f"alpha must lie in (1, n) = (1, {n})")
    if not 0 <= beta < 1 + 1 / (n - 1):
        raise ValueError(f"beta must lie in [0, {1 + 1 / (n - 1):g})")
    if not k > 1:
        raise ValueError("k must exceed 1")
    c1 = float(k if c1 is None else c1)
    if not c1 > 0:
        raise ValueError("c1 must be positive")
    mu, nu, alpha, beta, k = map(float, (mu, nu, alpha, beta, k))
    d_min = 1.0 + 1.0 / k

    def phi(v):
        return mu * (v ** alpha - n) + nu * v ** (-beta)

    def phi_p(v):
        return mu * alpha * v ** (alpha - 1) - beta * nu * v ** (-beta - 1)

    def phi_pp(v):
        return mu * alpha * (alpha - 1) * v ** (alpha - 2) + beta * (beta + 1) * nu * v ** (-beta - 2)

    def _h(d):
        u = 0.5 - d
        base = k * (d - d_min) ** 2 - n
        if u > 0:
            base += c1 * u ** 3 / d
        return base

    def _hp(d):
        u = 0.5 - d
        base = 2 * k * (d - d_min)
        if u > 0:
            base += c1 * (-3 * u * u / d - u ** 3 / (d * d))
        return base

    def _hpp(d):
        u = 0.5 - d
        base = 2 * k
        if u > 0:
            base += c1 * (6 * u / d + 6 * u * u / (d * d) + 2 * u ** 3 / d ** 3)
        return base

    def _h_arr(d):
        u = np.maximum(0.5 - d, 0.0)
        return k * (d - d_min) ** 2 - n + c1 * u ** 3 / d

    def _hp_arr(d):
        u = np.maximum(0.5 - d, 0.0)
        return 2 * k * (d - d_min) + c1 * (-3 * u * u / d - u ** 3 / (d * d))

    def _hpp_arr(d):
        u = np.maximum(0.5 - d, 0.0)
        return 2 * k + c1 * (6 * u / d + 6 * u * u / (d * d) + 2 * u ** 3 / d ** 3)

    h, h_p, h_pp = (_vectorize(g, ga) for g, ga in
                    ((_h, _h_arr), (_hp, _hp_arr), (_hpp, _hpp_arr)))
    e = 1.0 - alpha

    params = dict(mu=mu, nu=nu, alpha=alpha, beta=beta, k=k, c1=c1)
    return ConstitutiveLaw(n, phi, phi_p, phi_pp, h, h_p, h_pp, params, "example42",
                           q1=lambda s: s ** e, q0=lambda s: s ** e,
                           q1_inv=lambda y: y ** (1.0 / e), q0_inv=lambda y: y ** (1.0 / e))


def _vectorize(g, g_arr):
    def wrapped(x):
        if np.ndim(x) == 0:
            return g(float(x))
        return g_arr(np.asarray(x, dtype=float))

    wrapped.__name__ = g.__name__
    return wrapped


def power_function(terms=(), log: float = 0.0, const: float = 0.0):
    """``g(v) = const + sum c v^p + log * ln v`` and its two derivatives."""
    terms = [(float(c), float(p)) for c, p in terms]

    def g(v):
        out = const + log * np.log(v)
        for c, p in terms:
            out = out + c * v ** p
        return out

    def gp(v):
        out = log / v
        for c, p in terms:
            if p != 0:
                out = out + c * p * v ** (p - 1)
        return out

    def gpp(v):
        out = -log / (v * v)
        for c, p in terms:
            if p not in (0.0, 1.0):
                out = out + c * p * (p - 1) * v ** (p - 2)
        return out

    return g, gp, gpp


def custom_law(n: int, phi_spec: dict, h_spec: dict) -> ConstitutiveLaw:
    """Law from power-and-log specifications of ``phi`` and ``h``."""
    phi = power_function(phi_spec.get("terms", ()), phi_spec.get("log", 0.0),
                         phi_spec.get("const", 0.0))
    h = power_function(h_spec.get("terms", ()), h_spec.get("log", 0.0),
                       h_spec.get("const", 0.0))
    return ConstitutiveLaw(int(n), *phi, *h, {"phi": phi_spec, "h": h_spec}, "custom")


# ---------------------------------------------------------------------------
# energy and partials


def Phi(law: ConstitutiveLaw, v) -> float:
    v = np.asarray(v, dtype=float)
    if v.shape != (law.n,):
        raise ValueError(f"expected {law.n} stretches")
    if np.any(v <= 0):
        raise ValueError("stretches must be positive")
    return float(sum(law.phi(float(x)) for x in v) + law.h(float(np.prod(v))))


def Phi1_Phi2(law: ConstitutiveLaw, a, t):
    """Partials in the radial and a hoop slot at ``(a, t, ..., t)``."""
    if np.any(np.asarray(a) <= 0) or np.any(np.asarray(t) <= 0):
        raise ValueError("stretches must be positive")
    n = law.n
    tn2 = t ** (n - 2)
    hd = law.h_p(a * tn2 * t)
    return law.phi_p(a) + hd * tn2 * t, law.phi_p(t) + hd * a * tn2


def phi_hat(law, v):
    if np.any(np.asarray(v) <= 0):
        raise ValueError("stretch must be positive")
    return law.phi_hat(v)


def phi_hat_prime(law, v):
    if np.any(np.asarray(v) <= 0):
        raise ValueError("stretch must be positive")
    return law.phi_hat_prime(v)


def phi_hat_second(law, v):
    return law.phi_hat_second(v)


def _phi_hat_third_at_one(law):
    e = 1e-3
    return (law.phi_hat_second(1 + e) - law.phi_hat_second(1 - e)) / (2 * e)


def phi_hat_ratio(law, tau, cut: float = 1e-4):
    """``Phi_hat'(tau) / (tau - 1)``, by a two-term series when ``|tau - 1| < cut``."""
    d = tau - 1.0
    if abs(d) < cut:
        c2 = law.phi_hat_second(1.0)
        c3 = getattr(law, "_c3", None)
        if c3 is None:
            c3 = _phi_hat_third_at_one(law)
            try:
                object.__setattr__(law, "_c3", c3)
            except AttributeError:
                pass
        return c2 + 0.5 * c3 * d
    return law.phi_hat_prime(tau) / d


# ---------------------------------------------------------------------------
# roots and assumption checks


def _log_grid_root(g, lo=1e-8, hi=1e8, num=321):
    v = np.logspace(np.log10(lo), np.log10(hi), num)
    vals = np.array([g(x) for x in v])
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]
    if idx.size == 0:
        return None
    i = idx[0]
    if vals[i] == 0:
        return float(v[i])
    return brentq(g, v[i], v[i + 1], xtol=1e-14, rtol=1e-15)


def varpi(law: ConstitutiveLaw) -> float:
    """Root of ``h'``: the limit of ``phi' tau^(n-1)`` at a cavity surface."""
    r = _log_grid_root(law.h_p)
    if r is None:
        raise ValueError("h' has no positive root")
    return r


def t_zero(law: ConstitutiveLaw) -> float:
    """Root ``t0`` of ``phi'``, or 0 when ``phi' > 0`` everywhere sampled."""
    r = _log_grid_root(law.phi_p)
    return 0.0 if r is None else r


@dataclass
class AssumptionReport:
    status: dict
    witnesses: dict
    t0: float
    varpi: Optional[float]
    q_grid: np.ndarray
    q1_samples: np.ndarray
    q0_samples: np.ndarray
    theta: dict
    constants: dict
    notes: list

    @property
    def ok(self) -> bool:
        return all(s != "fail" for s in self.status.values())


def sampled_envelopes(law: ConstitutiveLaw, s_grid, v_hi=1e8, num=400):
    """Sampled ``q1(s)`` for ``s > 1`` and ``q0(s)`` for ``s <= 1``."""
    t0 = t_zero(law)
    q = np.empty(len(s_grid))
    for j, s in enumerate(s_grid):
        v_lo = max(t0, t0 / s, 1e-8) * (1 + 1e-6)
        v = np.logspace(np.log10(v_lo), np.log10(v_hi), num)
        ratio = law.phi_p(v) / law.phi_p(s * v)
        q[j] = ratio.max() if s > 1 else ratio.min()
    return q


def check_assumptions(law: ConstitutiveLaw, sample_budget: int = 200) -> AssumptionReport:
    """Sampled verification of (A1)-(A9).

    A status of ``sampled-pass`` means no counterexample on the grid; it is
    not a proof.
    """
    n = law.n
    V = np.logspace(-4, 6, sample_budget)
    status, wit, notes, const = {}, {}, [], {}

    def mark(key, bad_mask, values=V):
        if np.any(bad_mask):
            status[key] = "fail"
            wit[key] = float(values[np.argmax(bad_mask)])
        else:
            status[key] = "sampled-pass"

    hpp = np.asarray(law.h_pp(V), dtype=float)
    mark("A1", ~(hpp > 0))

    h = law.h
    small = [h(1.0), h(1e-2), h(1e-4)]
    big = [h(1e2) / 1e2, h(1e4) / 1e4, h(1e6) / 1e6]
    a2 = small[2] > small[1] > small[0] and big[2] > big[1] > big[0] and big[2] > 0
    status["A2"] = "sampled-pass" if a2 else "fail"
    if not a2:
        wit["A2"] = {"h_small": small, "h_over_v_large": big}

    big_v = np.array([1e2, 1e4, 1e6])
    ratios = big_v * law.h_p(big_v) / law.h(big_v)
    const["A3_vh'/h"] = ratios.tolist()
    status["A3"] = "sampled-pass" if ratios[-1] > 1 else "fail"
    s_theta = [0.25, 0.5, 2.0, 4.0]
    theta = {s: float(h(s * 1e6) / h(1e6)) for s in s_theta}

    phipp = np.asarray(law.phi_pp(V), dtype=float)
    mark("A4", phipp < -1e-12 * (1 + np.abs(phipp)))
    if np.any(np.asarray(law.phi(V)) <= 0):
        notes.append("phi takes nonpositive values; only convexity is checked for A4")

    vpp = V * law.phi_p(V)
    dv = np.diff(vpp)
    mark("A5", np.concatenate([[False], dv < -1e-12 * (1 + np.abs(vpp[1:]))]))

    t0 = t_zero(law)
    q_grid = np.concatenate([np.logspace(-3, 0, 13)[:-1], np.logspace(0, 3, 13)[1:]])
    q = sampled_envelopes(law, q_grid)
    q0s, q1s = q[q_grid <= 1], q[q_grid > 1]
    a6 = (np.all(np.diff(q1s) < 0) and np.all(np.diff(q0s) < 0)
          and q1s[-1] < q1s[0] and q0s[0] > q0s[-1])
    status["A6"] = "sampled-pass" if a6 else "fail"

    pos = np.asarray(law.phi(V)) > 0
    if np.any(pos):
        vv = V[pos]
        worst = max(np.max(np.abs(law.phi_p(s * vv)) * vv / law.phi(vv)) for s in (0.9, 1.0, 1.1))
        const["A7_delta1"] = float(worst)
        status["A7"] = "sampled-pass" if np.isfinite(worst) else "fail"
    else:
        status["A7"] = "fail"

    a, b = _growth_exponents(law)
    bound = np.asarray(law.phi(V)) / (1 + V ** a + V ** (-b))
    const["A8_delta2"] = float(np.max(bound))
    const["A8_alpha_beta"] = (a, b)
    status["A8"] = ("sampled-pass" if a < n and b < 1 + 1 / (n - 1)
                    and np.isfinite(const["A8_delta2"]) else "fail")

    p = [law.phi(1e2), law.phi(1e4), law.phi(1e6)]
    status["A9"] = "sampled-pass" if p[2] > p[1] > p[0] else "fail"

    try:
        w = varpi(law)
    except ValueError:
        w = None
        notes.append("h' has no positive root")
    return AssumptionReport(status, wit, t0, w, q_grid, q1s, q0s, theta, const, notes)


def _growth_exponents(law):
    if law.name == "example42":
        return law.params["alpha"], law.params["beta"]
    spec = law.params.get("phi", {})
    powers = [float(p) for c, p in spec.get("terms", ()) if c != 0]
    a = max([p for p in powers if p > 0], default=0.0)
    b = max([-p for p in powers if p < 0], default=0.0)
    if spec.get("log", 0.0):
        a, b = a + 1e-3, b + 1e-3
    return a, b


def baker_ericksen(law: ConstitutiveLaw, samples=None, lo=0.1, hi=10.0, num=41):
    """Check ``(a Phi_1 - t Phi_2)/(a - t) >= -1e-12`` on a grid of radial points.

    Returns ``(ok, witnesses)``; witnesses lists up to five violating
    ``(a, t, value)`` triples.
    """
    if samples is None:
        g = np.logspace(np.log10(lo), np.log10(hi), num)
        A, T = np.meshgrid(g, g, indexing="ij")
        samples = np.column_stack([A.ravel(), T.ravel()])
    wit = []
    for a, t in np.asarray(samples, dtype=float).reshape(-1, 2):
        if a == t:
            continue
        p1, p2 = Phi1_Phi2(law, a, t)
        val = (a * p1 - t * p2) / (a - t)
        if val < -1e-12:
            wit.append((float(a), float(t), float(val)))
            if len(wit) >= 5:
                break
    return len(wit) == 0, wit


def natural_state_residual(law: ConstitutiveLaw) -> float:
    """``phi'(1) + h'(1)``, zero for a stress-free reference configuration."""
    return float(law.phi_p(1.0) + law.h_p(1.0))


def omega(n: int) -> float:
    """Area of the unit (n-1)-sphere."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)
