"""Radial curvature profiles of model manifolds.

A model is described entirely by its radial curvature ``kappa(t)`` as a
function of geodesic distance ``t`` from the base point.  This module builds
profiles for constant and tabulated curvature, for surfaces of revolution
``z = psi(|x|)`` in R^3, and for ellipsoid-type metrics on R^n.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from ._interp import UniformQuintic, uniform_nodes

__all__ = [
    "CurvatureProfile",
    "RevolutionSurface",
    "RadialFunction",
    "EllipsoidMetric",
    "QuadricSphere",
    "zero_curvature",
    "constant_curvature",
    "tabulated_curvature",
    "log_bump_surface",
    "polynomial_surface",
    "zeta",
    "arclength",
    "curvature_of_revolution",
    "ellipsoid_metric",
    "ellipsoid_geodesic_sphere",
    "prescribed_curvature_metric",
]


@dataclass(frozen=True, eq=False)
class CurvatureProfile:
    """Radial curvature ``kappa`` on ``[0, t_max]``.

    ``kappa`` accepts scalars or arrays.  ``kappa0`` is the value at the
    base point, used by the series start of the Jacobi solver.
    """

    kind: str
    kappa: Callable
    t_max: float = np.inf
    params: dict = field(default_factory=dict)

    def __call__(self, t):
        return self.kappa(t)

    @property
    def kappa0(self) -> float:
        return float(self.kappa(0.0))


def zero_curvature() -> CurvatureProfile:
    def kappa(t):
        return np.zeros_like(t, dtype=float) if np.ndim(t) else 0.0

    return CurvatureProfile("zero", kappa, np.inf, {})


def constant_curvature(value: float) -> CurvatureProfile:
    value = float(value)
    if not np.isfinite(value):
        raise ValueError("curvature value must be finite")

    def kappa(t):
        return np.full(np.shape(t), value) if np.ndim(t) else value

    return CurvatureProfile("constant", kappa, np.inf, {"value": value})


class _TableKappa:
    def __init__(self, t, k):
        self.t = t
        self.k = k
        self.warned = False

    def __call__(self, s):
        if not self.warned and np.any(np.asarray(s) > self.t[-1]):
            warnings.warn("tabulated curvature extrapolated beyond last sample "
                          f"t={self.t[-1]:g} as a constant", RuntimeWarning,
                          stacklevel=2)
            self.warned = True
        out = np.interp(s, self.t, self.k)
        return float(out) if np.ndim(s) == 0 else out


def tabulated_curvature(t, kappa, t_max: Optional[float] = None) -> CurvatureProfile:
    """Piecewise-linear curvature through samples, constant beyond the last one."""
    t = np.asarray(t, dtype=float)
    k = np.asarray(kappa, dtype=float)
    if t.ndim != 1 or t.shape != k.shape or t.size < 2:
        raise ValueError("table needs matching 1-d arrays with at least two samples")
    if t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("table abscissae must start at 0 and increase strictly")
    if not np.all(np.isfinite(k)):
        raise ValueError("table curvature values must be finite")
    t_max = np.inf if t_max is None else float(t_max)
    return CurvatureProfile("tabulated", _TableKappa(t, k), t_max,
                            {"t": t.copy(), "kappa": k.copy()})


# ---------------------------------------------------------------------------
# surfaces of revolution


@dataclass(frozen=True, eq=False)
class RevolutionSurface:
    """Surface ``z = psi(r)`` with ``psi'(0) = 0``, valid on ``[0, r_max]``."""

    psi: Callable[[float], float]
    dpsi: Callable[[float], float]
    ddpsi: Callable[[float], float]
    r_max: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        d0 = float(self.dpsi(0.0))
        if abs(d0) > 1e-10:
            raise ValueError(f"psi'(0) must vanish, got {d0:.3e}")
        for r in (0.0, 0.5 * self.r_max, self.r_max):
            vals = (self.psi(r), self.dpsi(r), self.ddpsi(r))
            if not np.all(np.isfinite(vals)):
                raise ValueError(f"psi or its derivatives not finite at r={r:g}")


def log_bump_surface(a: float, r_max: float = 50.0) -> RevolutionSurface:
    """``psi(s) = a log(1 + s^2)``."""
    a = float(a)

    def psi(s):
        return a * np.log1p(s * s)

    def dpsi(s):
        return 2.0 * a * s / (1.0 + s * s)

    def ddpsi(s):
        return 2.0 * a * (1.0 - s * s) / (1.0 + s * s) ** 2

    return RevolutionSurface(psi, dpsi, ddpsi, r_max,
                             {"form": "alog1p_sq", "a": a})


def polynomial_surface(coeffs, r_max: float = 10.0) -> RevolutionSurface:
    """``psi(s) = sum_k coeffs[k] s^k``; ``coeffs[1]`` must be zero."""
    c = np.asarray(coeffs, dtype=float)
    if c.size == 0:
        c = np.zeros(1)
    p = np.polynomial.Polynomial(c)
    dp = p.deriv(1)
    ddp = p.deriv(2)
    return RevolutionSurface(p, dp, ddp, r_max, {"form": "poly", "coeffs": c.tolist()})


def _speed(surface: RevolutionSurface, s):
    d = surface.dpsi(s)
    return np.sqrt(1.0 + d * d)


def arclength(surface: RevolutionSurface, r: float) -> float:
    """Meridian arclength from the apex to radius ``r``."""
    if r == 0.0:
        return 0.0
    val, _ = quad(lambda s: _speed(surface, s), 0.0, r, epsabs=1e-13,
                  epsrel=1e-13, limit=200)
    return val


def zeta(surface: RevolutionSurface, t: float, tol: float = 1e-13) -> float:
    """Radius ``zeta(t)`` reached after meridian arclength ``t``.

    Brent bracketing on ``[0, min(t, r_max)]`` (the integrand is at least
    one, so ``zeta(t) <= t``) followed by Newton polishing.
    """
    t = float(t)
    if t < 0:
        raise ValueError("arclength must be nonnegative")
    if t == 0.0:
        return 0.0
    hi = min(t, surface.r_max)
    g_hi = arclength(surface, hi) - t
    if g_hi < 0 and hi == t:
        # arclength(t) >= t; a negative value here is rounding
        return hi
    if g_hi < 0:
        raise ValueError(f"t={t:g} lies beyond the surface domain r_max={surface.r_max:g}")
    if g_hi == 0:
        return hi
    z = brentq(lambda r: arclength(surface, r) - t, 0.0, hi, xtol=1e-14, rtol=1e-15,
               maxiter=200)
    for _ in range(3):
        step = (arclength(surface, z) - t) / float(_speed(surface, z))
        z -= step
        if abs(step) <= tol * max(1.0, abs(z)):
            break
    return z


class _RevolutionKappa:
    """kappa(t) = psi' psi'' / (zeta (1 + psi'^2)^2) evaluated at zeta(t)."""

    def __init__(self, surface: RevolutionSurface, t_max: float):
        self.surface = surface
        dp, ddp = surface.dpsi, surface.ddpsi

        def rhs(t, y):
            d = dp(y[0])
            return [1.0 / np.sqrt(1.0 + d * d)]

        nodes = uniform_nodes(t_max, h_max=0.01, min_cells=400)
        sol = solve_ivp(rhs, (0.0, t_max), [0.0], method="DOP853", rtol=1e-13,
                        atol=1e-15, dense_output=True)
        if not sol.success:
            raise RuntimeError(f"arclength inversion failed: {sol.message}")
        z = sol.sol(nodes)[0]
        z[0] = 0.0
        d = dp(z)
        zp = 1.0 / np.sqrt(1.0 + d * d)
        zpp = -d * ddp(z) * zp ** 4
        self.zeta = UniformQuintic(0.0, nodes[1] - nodes[0], z, zp, zpp)
        self.ddpsi0 = float(ddp(0.0))
        self.t_max = t_max

    def zeta_of(self, t):
        if np.ndim(t) == 0:
            return self.zeta.value(float(t))
        return self.zeta.evaluate(t)[0]

    def __call__(self, t):
        z = self.zeta_of(t)
        s = self.surface
        if np.ndim(z) == 0:
            if z == 0.0:
                return self.ddpsi0 ** 2
            d = s.dpsi(z)
            return float(d * s.ddpsi(z) / (z * (1.0 + d * d) ** 2))
        z = np.asarray(z, dtype=float)
        out = np.empty_like(z)
        zero = z == 0.0
        out[zero] = self.ddpsi0 ** 2
        zz = z[~zero]
        d = s.dpsi(zz)
        out[~zero] = d * s.ddpsi(zz) / (zz * (1.0 + d * d) ** 2)
        return out


def curvature_of_revolution(surface: RevolutionSurface) -> CurvatureProfile:
    """Radial curvature of the surface along meridian geodesics from the apex.

    At the apex the removable singularity is resolved by
    ``psi'(r)/r -> psi''(0)``, giving ``kappa(0) = psi''(0)^2``.
    """
    t_max = arclength(surface, surface.r_max)
    kap = _RevolutionKappa(surface, t_max)
    return CurvatureProfile("revolution", kap, t_max, dict(surface.params))


# ---------------------------------------------------------------------------
# ellipsoid metrics on R^n


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """A scalar function of ``eta >= 0`` with two derivatives."""

    value: Callable
    d1: Callable
    d2: Callable
    params: dict = field(default_factory=dict)

    def __call__(self, eta):
        return self.value(eta)

    @classmethod
    def from_spec(cls, spec: dict) -> "RadialFunction":
        form = spec.get("form", "one")
        if form == "one":
            return cls(lambda e: np.ones_like(e, dtype=float) if np.ndim(e) else 1.0,
                       lambda e: np.zeros_like(e, dtype=float) if np.ndim(e) else 0.0,
                       lambda e: np.zeros_like(e, dtype=float) if np.ndim(e) else 0.0,
                       {"form": "one"})
        if form == "exp":
            c = float(spec["c"])
            return cls(lambda e: np.exp(c * e), lambda e: c * np.exp(c * e),
                       lambda e: c * c * np.exp(c * e), {"form": "exp", "c": c})
        if form == "exp_sq":
            c = float(spec["c"])

            def v(e):
                return np.exp(c * e * e)

            return cls(v, lambda e: 2 * c * e * v(e),
                       lambda e: (2 * c + 4 * c * c * e * e) * v(e),
                       {"form": "exp_sq", "c": c})
        if form == "poly":
            coeffs = [1.0] + [float(x) for x in spec["coeffs"]]
            p = np.polynomial.Polynomial(coeffs)
            return cls(p, p.deriv(1), p.deriv(2), {"form": "poly", "coeffs": coeffs[1:]})
        raise ValueError(f"unknown radial function form {form!r}")


@dataclass(frozen=True)
class QuadricSphere:
    """The level set ``{y : <A y, y> = radius**2}``."""

    A: np.ndarray
    radius: float

    @property
    def level(self) -> float:
        return self.radius ** 2

    def residual(self, y) -> np.ndarray:
        y = np.atleast_2d(np.asarray(y, dtype=float))
        return np.einsum("ij,jk,ik->i", y, self.A, y) - self.level

    def points(self, directions) -> np.ndarray:
        """Points of the sphere along the given (nonzero) directions."""
        v = np.atleast_2d(np.asarray(directions, dtype=float))
        norms = np.sqrt(np.einsum("ij,jk,ik->i", v, self.A, v))
        return self.radius * v / norms[:, None]

    def semi_axes(self):
        w, vecs = np.linalg.eigh(self.A)
        return self.radius / np.sqrt(w), vecs


def _check_spd(A, n):
    A = np.asarray(A, dtype=float)
    if A.shape != (n, n):
        raise ValueError(f"A must be {n}x{n}")
    scale = max(1.0, float(np.max(np.abs(A))))
    if np.max(np.abs(A - A.T)) > 1e-12 * scale:
        raise ValueError("A must be symmetric")
    if np.min(np.linalg.eigvalsh(A)) <= 0:
        raise ValueError("A must be positive definite")
    return 0.5 * (A + A.T)


class EllipsoidMetric:
    """Metric ``G`` on R^n aligned with the quadratic form of ``A``.

    Either ``b`` is given, describing the family ``G(x) x = b(eta) A x``
    with ``eta = sqrt(<A x, x>)`` (realized here by the conformal choice
    ``G = b(eta) A``), or ``field`` is a Jacobi field ``f`` and
    ``G = (f^2/eta^2) A + eta^-2 (1 - f^2/eta^2) A x (A x)^T``.
    """

    def __init__(self, n: int, A, b: Optional[RadialFunction] = None, field=None,
                 t_max: float = 20.0):
        if (b is None) == (field is None):
            raise ValueError("give exactly one of b or field")
        self.n = int(n)
        if self.n < 2:
            raise ValueError("n must be >= 2")
        self.A = _check_spd(A, self.n)
        self.b = b
        self.field = field
        if b is not None:
            b0 = float(b(0.0))
            if abs(b0 - 1.0) > 1e-12:
                raise ValueError(f"b(0) must equal 1, got {b0!r}")
            self._eta = self._solve_radius(b, t_max)
            self.t_max = float(t_max)
        else:
            self._eta = None
            self.t_max = float(field.t_max)

    @staticmethod
    def _solve_radius(b, t_max):
        sol = solve_ivp(lambda t, y: [1.0 / np.sqrt(b(y[0]))], (0.0, t_max), [0.0],
                        method="DOP853", rtol=1e-13, atol=1e-15, dense_output=True)
        if not sol.success:
            # b decaying fast enough puts the metric boundary at finite t
            raise ValueError(f"geodesic radius does not reach t_max={t_max:g}; "
                             f"the metric is incomplete ({sol.message})")
        return sol.sol

    def eta(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sqrt(x @ self.A @ x))

    def radius(self, t):
        """A-radius ``eta`` of the geodesic sphere of radius ``t``."""
        if self.field is not None:
            return t
        if np.any(np.asarray(t) > self.t_max * (1 + 1e-12)) or np.any(np.asarray(t) < 0):
            raise ValueError("t outside the integrated range")
        out = self._eta(t)[0]
        return float(out) if np.ndim(t) == 0 else out

    def G(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        eta = self.eta(x)
        if self.b is not None:
            return float(self.b(eta)) * self.A
        if eta == 0.0:
            return self.A.copy()
        q = self.field.f(eta) / eta
        Ax = self.A @ x
        return q * q * self.A + (1.0 - q * q) / eta ** 2 * np.outer(Ax, Ax)

    def curvature(self) -> CurvatureProfile:
        if self.field is not None:
            c = self.field.curv
            return CurvatureProfile("prescribed", c.kappa, min(c.t_max, self.field.t_max),
                                    {"source": c.kind, **c.params})
        b = self.b
        if abs(float(b.d1(0.0))) > 1e-12:
            raise ValueError("b'(0) must vanish for a curvature bounded at the origin")
        b_dd0 = float(b.d2(0.0))

        def k_eta(e):
            # conformal factor b = exp(2u): kappa = -(u' + eta u'')/(eta b)
            bv, b1, b2 = b(e), b.d1(e), b.d2(e)
            u1 = b1 / (2 * bv)
            u2 = (b2 * bv - b1 * b1) / (2 * bv * bv)
            return -(u1 + e * u2) / (e * bv)

        def kappa(t):
            e = self.radius(t)
            if np.ndim(e) == 0:
                return -b_dd0 if e == 0.0 else float(k_eta(e))
            e = np.asarray(e, dtype=float)
            out = np.full(e.shape, -b_dd0)
            nz = e > 0
            out[nz] = k_eta(e[nz])
            return out

        return CurvatureProfile("prescribed", kappa, self.t_max, {"b": dict(b.params)})


def ellipsoid_metric(n: int, A, b: RadialFunction, t_max: float = 20.0) -> EllipsoidMetric:
    return EllipsoidMetric(n, A, b=b, t_max=t_max)


def ellipsoid_geodesic_sphere(metric: EllipsoidMetric, t: float) -> QuadricSphere:
    """Geodesic sphere of radius ``t`` about the origin, ``<A y, y> = sigma(t)^2``."""
    if t < 0:
        raise ValueError("radius must be nonnegative")
    return QuadricSphere(metric.A, float(metric.radius(t)))


def prescribed_curvature_metric(n: int, A, f) -> EllipsoidMetric:
    """Metric on R^n whose radial curvature is that of the Jacobi field ``f``."""
    return EllipsoidMetric(n, A, field=f)
