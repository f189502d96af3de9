"""Quintic Hermite interpolation on a uniform grid.

Values, first and second derivatives at the nodes determine a C^2
piecewise quintic.  Scalar evaluation avoids numpy overhead because the
solvers call these interpolants inside tight root-finding loops.
"""

from __future__ import annotations

import numpy as np


class UniformQuintic:
    """Piecewise quintic Hermite interpolant on ``x0 + h*k``, ``k = 0..N-1``."""

    def __init__(self, x0, h, y, dy, ddy):
        self.x0 = float(x0)
        self.h = float(h)
        self.y = np.asarray(y, dtype=float)
        self.dy = np.asarray(dy, dtype=float)
        self.ddy = np.asarray(ddy, dtype=float)
        self.n_cells = len(self.y) - 1
        if self.n_cells < 1:
            raise ValueError("need at least two nodes")
        self.x_end = self.x0 + self.h * self.n_cells
        # plain lists are faster to index from Python scalars
        self._y = self.y.tolist()
        self._dy = self.dy.tolist()
        self._ddy = self.ddy.tolist()

    def _locate(self, x):
        u = (x - self.x0) / self.h
        i = int(u)
        if i < 0:
            i = 0
        elif i >= self.n_cells:
            i = self.n_cells - 1
        return i, u - i

    def value_and_derivative(self, x):
        """Return ``(p(x), p'(x))`` for a scalar ``x``."""
        i, s = self._locate(x)
        h = self.h
        y0, y1 = self._y[i], self._y[i + 1]
        d0, d1 = self._dy[i] * h, self._dy[i + 1] * h
        e0, e1 = self._ddy[i] * h * h, self._ddy[i + 1] * h * h
        s2 = s * s
        s3 = s2 * s
        s4 = s3 * s
        s5 = s4 * s
        val = (y0 * (1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5)
               + d0 * (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5)
               + e0 * (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5)
               + e1 * (0.5 * s3 - s4 + 0.5 * s5)
               + d1 * (-4.0 * s3 + 7.0 * s4 - 3.0 * s5)
               + y1 * (10.0 * s3 - 15.0 * s4 + 6.0 * s5))
        der = ((y1 - y0) * (30.0 * s2 - 60.0 * s3 + 30.0 * s4)
               + d0 * (1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4)
               + e0 * (s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4)
               + e1 * (1.5 * s2 - 4.0 * s3 + 2.5 * s4)
               + d1 * (-12.0 * s2 + 28.0 * s3 - 15.0 * s4)) / h
        return val, der

    def value(self, x):
        return self.value_and_derivative(x)[0]

    def evaluate(self, x):
        """Vectorized ``(p(x), p'(x))`` for array input."""
        x = np.asarray(x, dtype=float)
        u = (x - self.x0) / self.h
        i = np.clip(np.floor(u).astype(np.intp), 0, self.n_cells - 1)
        s = u - i
        h = self.h
        y0, y1 = self.y[i], self.y[i + 1]
        d0, d1 = self.dy[i] * h, self.dy[i + 1] * h
        e0, e1 = self.ddy[i] * h * h, self.ddy[i + 1] * h * h
        s2 = s * s
        s3 = s2 * s
        s4 = s3 * s
        s5 = s4 * s
        val = (y0 * (1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5)
               + d0 * (s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5)
               + e0 * (0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5)
               + e1 * (0.5 * s3 - s4 + 0.5 * s5)
               + d1 * (-4.0 * s3 + 7.0 * s4 - 3.0 * s5)
               + y1 * (10.0 * s3 - 15.0 * s4 + 6.0 * s5))
        der = ((y1 - y0) * (30.0 * s2 - 60.0 * s3 + 30.0 * s4)
               + d0 * (1.0 - 18.0 * s2 + 32.0 * s3 - 15.0 * s4)
               + e0 * (s - 4.5 * s2 + 6.0 * s3 - 2.5 * s4)
               + e1 * (1.5 * s2 - 4.0 * s3 + 2.5 * s4)
               + d1 * (-12.0 * s2 + 28.0 * s3 - 15.0 * s4)) / h
        return val, der


def uniform_nodes(t_max, h_max=0.01, min_cells=200):
    """Uniform nodes on ``[0, t_max]`` with spacing at most ``h_max``."""
    cells = max(min_cells, int(np.ceil(t_max / h_max)))
    return np.linspace(0.0, t_max, cells + 1)
