"""Jacobi coefficient ``f'' + kappa f = 0``, ``f(0) = 0``, ``f'(0) = 1``.

The solution ``f`` fixes the model metric ``d rho^2 + f(rho)^2 d theta^2``.
Alongside ``f`` we carry ``sigma(t) = int_0^t f^(n-1)``, the volume
coordinate, and provide its inverse.  Near ``t = 0`` the interpolants work
with ``g = f/t`` so that relative accuracy survives as ``f -> 0``.
"""

from __future__ import annotations

import bisect
import logging
import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from ._interp import UniformQuintic, uniform_nodes
from .errors import AdmissibilityError, ConvergenceError
from .geometry import CurvatureProfile

__all__ = [
    "JacobiField",
    "solve_jacobi",
    "curvature_moments",
    "moment_tail_bound",
    "sigma_inverse",
    "f_bounds",
]

log = logging.getLogger(__name__)

T_START = 1e-6
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W


@lru_cache(maxsize=4096)
def _moments_cached(curv: CurvatureProfile, lam: float):
    if lam == 0.0:
        return 0.0, 0.0
    upper = lam
    if math.isinf(lam):
        upper = curv.t_max
        if math.isinf(upper):
            return _moments_unbounded(curv)
    pts = _sign_changes(curv, upper)

    def plus(s):
        k = curv.kappa(s)
        return s * k if k > 0 else 0.0

    def minus(s):
        k = curv.kappa(s)
        return -s * k if k < 0 else 0.0

    kw = dict(epsabs=1e-13, epsrel=1e-11, limit=500)
    if pts:
        kw["points"] = pts
    mp, _ = quad(plus, 0.0, upper, **kw)
    mm, _ = quad(minus, 0.0, upper, **kw)
    if math.isinf(lam):
        log.debug("moments at infinity truncated at t=%g, tail bound %g",
                  upper, moment_tail_bound(curv))
    return mp, mm


def _moments_unbounded(curv):
    if curv.kind == "zero":
        return 0.0, 0.0
    if curv.kind == "constant":
        c = curv.params["value"]
        return (math.inf if c > 0 else 0.0), (math.inf if c < 0 else 0.0)
    if curv.kind == "tabulated":
        t, k = curv.params["t"], curv.params["kappa"]
        if k[-1] == 0.0:
            return _moments_cached(
                type(curv)(curv.kind, curv.kappa, float(t[-1]), curv.params), math.inf)
        return (math.inf if k[-1] > 0 else 0.0), (math.inf if k[-1] < 0 else 0.0)
    raise ValueError("moment at infinity of a profile without finite t_max "
                     "cannot be bounded")


def _sign_changes(curv, upper, cells=2000):
    """Zeros of kappa on [0, upper], located on a sample grid and refined."""
    if math.isinf(upper):
        return []
    if curv.kind == "tabulated":
        t = curv.params["t"]
        extra = t[(t > 0) & (t < upper)].tolist()
    else:
        extra = []
    s = np.linspace(0.0, upper, cells + 1)
    k = np.asarray(curv.kappa(s), dtype=float)
    out = []
    for i in np.nonzero(np.sign(k[:-1]) * np.sign(k[1:]) < 0)[0]:
        out.append(brentq(curv.kappa, s[i], s[i + 1], xtol=1e-14))
    pts = sorted(set(out + extra))
    return pts[:90]


def curvature_moments(curv: CurvatureProfile, lam: float):
    """Return ``(mu_plus, mu_minus)`` with ``mu_pm(lam) = int_0^lam s kappa_pm(s) ds``.

    ``lam = inf`` integrates to ``curv.t_max``; the neglected tail can be
    estimated with :func:`moment_tail_bound`.
    """
    lam = float(lam)
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    if not math.isinf(lam) and lam > curv.t_max * (1 + 1e-12):
        raise ValueError(f"lam={lam:g} exceeds the curvature domain t_max={curv.t_max:g}")
    return _moments_cached(curv, lam)


def moment_tail_bound(curv: CurvatureProfile) -> float:
    """Estimate of ``int_T^inf s |kappa(s)| ds`` at ``T = t_max``.

    Fits ``|kappa| ~ C s^-p`` through the last two tenths of the domain.
    Returns ``inf`` when the fitted decay is too slow to be integrable.
    """
    T = curv.t_max
    if math.isinf(T):
        return 0.0 if curv.kind == "zero" else math.inf
    t1, t2 = 0.8 * T, T
    k1, k2 = abs(float(curv.kappa(t1))), abs(float(curv.kappa(t2)))
    if k2 == 0.0:
        return 0.0
    if k1 <= k2:
        return math.inf
    p = math.log(k1 / k2) / math.log(t2 / t1)
    if p <= 2.0:
        return math.inf
    return k2 * T * T / (p - 2.0)


class JacobiField:
    """Dense solution of the Jacobi problem with ``sigma`` and its inverse."""

    def __init__(self, curv, n, t_max, tol, nodes, f, fp, sigma, truncated=False):
        self.curv = curv
        self.n = int(n)
        self.t_max = float(t_max)
        self.tol = tol
        self.grid = nodes
        self.f_nodes = f
        self.fp_nodes = fp
        self.sigma_nodes = sigma
        self.truncated = truncated
        t = nodes
        kap = np.asarray(curv.kappa(t), dtype=float)
        g = np.empty_like(t)
        g1 = np.empty_like(t)
        g2 = np.empty_like(t)
        g[0], g1[0], g2[0] = 1.0, 0.0, -kap[0] / 3.0
        tt = t[1:]
        g[1:] = f[1:] / tt
        g1[1:] = (fp[1:] - g[1:]) / tt
        g2[1:] = (-kap[1:] * f[1:] - 2.0 * g1[1:]) / tt
        h = t[1] - t[0]
        self._h = h
        self._g = UniformQuintic(0.0, h, g, g1, g2)
        m = self.n - 1
        s1 = f ** m
        s2 = m * f ** (m - 1) * fp
        self._sig = UniformQuintic(0.0, h, sigma, s1, s2)
        self._sig_list = sigma.tolist()
        self.sigma_max = float(sigma[-1])
        self._crit = None

    # -- pointwise evaluation ------------------------------------------------

    def _check(self, t):
        if t < 0 or t > self.t_max * (1 + 1e-10) + 1e-14:
            raise ValueError(f"t={t!r} outside [0, {self.t_max:g}]")

    def f_fp(self, t):
        """``(f(t), f'(t))`` for scalar or array ``t``."""
        if np.ndim(t) == 0:
            t = float(t)
            self._check(t)
            g, gp = self._g.value_and_derivative(t)
            return t * g, g + t * gp
        t = np.asarray(t, dtype=float)
        if t.size and (t.min() < 0 or t.max() > self.t_max * (1 + 1e-10) + 1e-14):
            raise ValueError("t outside the solved range")
        g, gp = self._g.evaluate(t)
        return t * g, g + t * gp

    def f(self, t):
        return self.f_fp(t)[0]

    def fp(self, t):
        return self.f_fp(t)[1]

    def kappa(self, t):
        return self.curv.kappa(t)

    def sigma(self, t):
        """``sigma(t) = int_0^t f^(n-1)``."""
        if np.ndim(t) == 0:
            t = float(t)
            self._check(t)
            if t < self._h:
                return self._sigma_small(t)
            return self._sig.value(t)
        t = np.asarray(t, dtype=float)
        out = self._sig.evaluate(t)[0]
        small = t < self._h
        if np.any(small):
            out[small] = [self._sigma_small(x) for x in t[small]]
        return out

    def _sigma_small(self, t):
        # sigma(t) = t^n int_0^1 u^(n-1) g(t u)^(n-1) du keeps relative accuracy
        if t == 0.0:
            return 0.0
        m = self.n - 1
        gv = self._g.evaluate(t * _GL_X)[0]
        return t ** self.n * float(np.sum(_GL_W * _GL_X ** m * gv ** m))

    def sigma_inv(self, s):
        return sigma_inverse(self, s)

    # -- bounds ----------------------------------------------------------------

    def mu_plus(self, lam):
        return curvature_moments(self.curv, lam)[0]

    def mu_minus(self, lam):
        return curvature_moments(self.curv, lam)[1]

    def critical_points(self):
        """Interior points where ``f'`` may attain an extremum (zeros of kappa)."""
        if self._crit is None:
            pts = _sign_changes(self.curv, self.t_max)
            self._crit = (np.asarray(pts, dtype=float),
                          np.asarray([self.fp(p) for p in pts], dtype=float))
        return self._crit

    def fp_running_bounds(self, rho):
        """``(b0, b1) = (min, max)`` of ``f'`` over ``[0, rho]``."""
        pts, vals = self.critical_points()
        fr = self.fp(rho)
        inside = vals[pts <= rho]
        lo = min(1.0, fr, *inside) if inside.size else min(1.0, fr)
        hi = max(1.0, fr, *inside) if inside.size else max(1.0, fr)
        return lo, hi

    def to_dict(self):
        return {"n": self.n, "t_max": self.t_max, "grid": self.grid.tolist(),
                "f": self.f_nodes.tolist(), "f_prime": self.fp_nodes.tolist(),
                "sigma": self.sigma_nodes.tolist()}


def solve_jacobi(curv: CurvatureProfile, n: int, t_max: float, tol: float = 1e-10,
                 h_max: float = 0.01) -> JacobiField:
    """Integrate the Jacobi problem on ``[0, t_max]``.

    Starts at ``t = 1e-6`` from the series ``f = t - kappa(0) t^3/6``.  If
    ``f`` reaches zero (a conjugate point) the field is truncated there,
    unless ``mu_plus(t_max) <= 1``, in which case that would contradict
    positivity and is reported as an error.
    """
    n = int(n)
    if n < 2:
        raise ValueError("n must be >= 2")
    if not (1e-14 < tol < 1e-4):
        raise ValueError("tol must lie in (1e-14, 1e-4)")
    if not t_max > 0:
        raise ValueError("t_max must be positive")
    if t_max > curv.t_max * (1 + 1e-12):
        raise ValueError(f"t_max={t_max:g} exceeds the curvature domain {curv.t_max:g}")
    t_max = min(float(t_max), curv.t_max)
    m = n - 1
    k0 = curv.kappa0
    t0 = min(T_START, 1e-3 * t_max)
    y0 = [t0 - k0 * t0 ** 3 / 6.0,
          1.0 - k0 * t0 ** 2 / 2.0,
          t0 ** n / n - m * k0 * t0 ** (n + 2) / (6.0 * (n + 2))]

    kappa = curv.kappa

    def rhs(t, y):
        return [y[1], -kappa(t) * y[0], y[0] ** m if y[0] > 0 else 0.0]

    def hit_zero(t, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1

    # f' is recovered by differentiating the nodal interpolant, which
    # amplifies node-to-node noise by 1/h; integrate well below tol
    rtol = max(1e-3 * tol, 3e-14)
    sol = solve_ivp(rhs, (t0, t_max), y0, method="DOP853", rtol=rtol,
                    atol=[1e-300, rtol * 1e-8, 1e-300], dense_output=True,
                    events=hit_zero)
    if sol.status == -1:
        raise ConvergenceError(f"Jacobi integration failed: {sol.message}")
    truncated = False
    t_end = t_max
    if sol.status == 1:
        t_end = float(sol.t_events[0][0])
        if curvature_moments(curv, t_max)[0] <= 1.0:
            raise AdmissibilityError("f lost positivity although mu_plus(t_max) <= 1")
        truncated = True
        log.info("conjugate point at t=%.6g; Jacobi field truncated", t_end)
        t_end = t_end * (1 - 1e-9)
    nodes = uniform_nodes(t_end, h_max=h_max)
    vals = np.empty((3, nodes.size))
    inner = nodes >= t0
    vals[:, inner] = sol.sol(nodes[inner])
    for j in np.nonzero(~inner)[0]:
        t = nodes[j]
        vals[:, j] = [t - k0 * t ** 3 / 6.0, 1.0 - k0 * t ** 2 / 2.0,
                      t ** n / n - m * k0 * t ** (n + 2) / (6.0 * (n + 2))]
    vals[:, 0] = [0.0, 1.0, 0.0]
    f, fp, sig = vals
    if not truncated and np.any(f[1:] <= 0):
        raise AdmissibilityError("f lost positivity")
    mp = curvature_moments(curv, t_end)[0]
    if mp <= 1.0 and np.any(fp <= 0):
        raise AdmissibilityError("f' lost positivity although mu_plus <= 1")
    if mp == 1.0:
        log.warning("mu_plus(t_max) equals 1: admissible but on the boundary")
    return JacobiField(curv, n, t_end, tol, nodes, f, fp, sig, truncated)


def sigma_inverse(field: JacobiField, s, rtol: float = 2e-15):
    """Solve ``sigma(t) = s`` for ``t`` (scalar or array)."""
    if np.ndim(s) != 0:
        return _sigma_inverse_array(field, np.asarray(s, dtype=float))
    s = float(s)
    if s < 0 or s > field.sigma_max * (1 + 1e-12):
        raise ValueError(f"s={s!r} outside [0, sigma(t_max)={field.sigma_max:g}]")
    if s == 0.0:
        return 0.0
    n = field.n
    m = n - 1
    nodes = field._sig_list
    i = bisect.bisect_left(nodes, s)
    h = field._h
    if i <= 1:
        lo, hi = 0.0, h
        t = min((n * s) ** (1.0 / n), h)
    else:
        i = min(i, len(nodes) - 1)
        lo, hi = (i - 1) * h, min(i * h, field.t_max)
        s0, s1 = nodes[i - 1], nodes[i]
        t = lo + (hi - lo) * (s - s0) / (s1 - s0)
    for _ in range(60):
        val = field.sigma(t)
        r = val - s
        if abs(r) <= 4e-16 * s:
            return t
        if r > 0:
            hi = min(hi, t)
        else:
            lo = max(lo, t)
        fv = field.f(t)
        d = fv ** m
        step = r / d if d > 0 else math.inf
        t_new = t - step
        if not (lo <= t_new <= hi):
            t_new = 0.5 * (lo + hi)
        if abs(t_new - t) <= rtol * t or hi - lo <= 2e-15 * hi:
            return t_new
        t = t_new
    raise ConvergenceError(f"sigma inverse failed to converge at s={s!r}")


def _sigma_inverse_array(field, s):
    flat = s.ravel()
    if flat.size and (flat.min() < 0 or flat.max() > field.sigma_max * (1 + 1e-12)):
        raise ValueError("s outside the range of sigma")
    n = field.n
    m = n - 1
    h = field._h
    sig = field.sigma_nodes
    idx = np.clip(np.searchsorted(sig, flat), 1, sig.size - 1)
    lo = (idx - 1) * h
    hi = np.minimum(idx * h, field.t_max)
    s0, s1 = sig[idx - 1], sig[idx]
    t = lo + (hi - lo) * (flat - s0) / (s1 - s0)
    first = idx == 1
    t[first] = np.minimum((n * flat[first]) ** (1.0 / n), h)
    for _ in range(60):
        val = field.sigma(t)
        r = val - flat
        hi = np.where(r > 0, np.minimum(hi, t), hi)
        lo = np.where(r <= 0, np.maximum(lo, t), lo)
        d = field.f(t) ** m
        with np.errstate(divide="ignore", invalid="ignore"):
            t_new = t - r / d
        bad = ~((t_new >= lo) & (t_new <= hi)) | ~np.isfinite(t_new)
        t_new = np.where(bad, 0.5 * (lo + hi), t_new)
        done = ((np.abs(t_new - t) <= 1e-15 * np.maximum(t, 1e-300))
                | (np.abs(r) <= 4e-16 * flat) | (hi - lo <= 2e-15 * hi))
        t = t_new
        if np.all(done | (flat == 0)):
            break
    else:
        raise ConvergenceError("vectorized sigma inverse failed to converge")
    t[flat == 0] = 0.0
    return t.reshape(s.shape)


def f_bounds(field: JacobiField, lam: float, samples: int = 4001):
    """Sampled ``(min f', max f')`` over ``[0, lam]``."""
    lam = float(lam)
    if lam > field.t_max * (1 + 1e-12):
        raise ValueError("lam beyond the solved range")
    t = np.linspace(0.0, min(lam, field.t_max), samples)
    fp = field.fp(t)
    pts, vals = field.critical_points()
    vals = vals[pts <= lam]
    mu0 = float(min(fp.min(), vals.min() if vals.size else np.inf))
    mu1 = float(max(fp.max(), vals.max() if vals.size else -np.inf))
    if mu0 <= 0:
        raise AdmissibilityError(f"min f' = {mu0:.3g} <= 0 on [0, {lam:g}]")
    return mu0, mu1
