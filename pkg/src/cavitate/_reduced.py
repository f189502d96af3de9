"""Discretized reduced functional ``J(u) = int_0^sigma(1) wp(p, u, u') dp``.

``u = sigma(phi(rho))`` as a function of ``p = sigma(rho)``; ``u'`` is the
volume ratio ``d = phi' tau^(n-1)``.  ``u`` is piecewise linear on a uniform
grid in ``p``; each cell is integrated with Gauss-Legendre nodes, and the
first cell through ``p = P1 s^n`` so that the cavity singularity
``p^(-alpha/n)`` becomes smooth in ``s``.
"""

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, softmax

from .jacobi import _sigma_inverse_array


class ReducedFunctional:
    def __init__(self, field, law, lam, cells=256, order=4, first_order=12):
        self.F = field
        self.law = law
        self.n = n = law.n
        self.cells = cells
        self.p_end = field.sigma(1.0)
        self.u_end = field.sigma(lam)
        h = self.p_end / cells
        self.h = h
        x, w = np.polynomial.legendre.leggauss(order)
        x, w = 0.5 * (x + 1), 0.5 * w
        xs, ws = np.polynomial.legendre.leggauss(first_order)
        xs, ws = 0.5 * (xs + 1), 0.5 * ws
        # (cell index, local coordinate in [0, 1], weight in p)
        cell = [np.zeros(first_order, dtype=int)]
        loc = [xs ** n]
        wt = [h * n * xs ** (n - 1) * ws]
        for i in range(1, cells):
            cell.append(np.full(order, i))
            loc.append(x)
            wt.append(h * w)
        self.cell = np.concatenate(cell)
        self.loc = np.concatenate(loc)
        self.wt = np.concatenate(wt)
        p = (self.cell + self.loc) * h
        rho = _sigma_inverse_array(field, p)
        fr = field.f(rho)
        self.fr = fr
        self.frn = fr ** (n - 1)

    # u from unconstrained weights: u0 = U softmax_0, u_i - u_{i-1} = U softmax_i
    def nodes(self, z):
        w = softmax(z)
        return self.u_end * np.cumsum(w)

    def from_nodes(self, u):
        inc = np.diff(np.concatenate([[0.0], u]))
        inc = np.maximum(inc, 1e-300)
        return np.log(inc)

    def value_grad_u(self, u):
        """``J`` and ``dJ/du`` at node values ``u[0..cells]``."""
        n = self.n
        law, F = self.law, self.F
        h = self.h
        q = np.diff(u) / h
        qi = q[self.cell]
        uq = u[self.cell] + self.loc * (u[self.cell + 1] - u[self.cell])
        r = _sigma_inverse_array(F, uq)
        G, Gp = F.f_fp(r)
        Gn = G ** (n - 1)
        X = qi * self.frn / Gn
        Y = G / self.fr
        val = law.phi(X) + (n - 1) * law.phi(Y) + law.h(qi)
        J = float(np.dot(self.wt, val))
        dX, dY, dh = law.phi_p(X), law.phi_p(Y), law.h_p(qi)
        dr = 1.0 / Gn
        dw_du = dX * (-X * (n - 1) * Gp * dr / G) + (n - 1) * dY * Gp * dr / self.fr
        dw_dq = dX * self.frn / Gn + dh
        g = np.zeros(self.cells + 1)
        a = self.wt * dw_du
        np.add.at(g, self.cell, a * (1 - self.loc))
        np.add.at(g, self.cell + 1, a * self.loc)
        b = self.wt * dw_dq / h
        np.add.at(g, self.cell + 1, b)
        np.add.at(g, self.cell, -b)
        return J, g

    def value_grad_z(self, z):
        w = softmax(z)
        u = self.u_end * np.cumsum(w)
        J, gu = self.value_grad_u(u)
        # u_i = U sum_{j<=i} w_j, dw_j/dz_k = w_j (delta_jk - w_k)
        gw = self.u_end * np.cumsum(gu[::-1])[::-1]
        gz = w * (gw - np.dot(w, gw))
        return J, gz

    def minimize(self, u0, gtol=1e-8, maxiter=5000):
        z0 = self.from_nodes(u0)
        z0 = z0 - logsumexp(z0)
        z0 = np.maximum(z0, -700.0)
        res = minimize(self.value_grad_z, z0, jac=True, method="L-BFGS-B",
                       options={"gtol": gtol, "maxiter": maxiter, "maxcor": 30,
                                "ftol": 1e-15})
        return res, self.nodes(res.x)
