"""Value of the stopping problem built from a solved boundary.

The state space ``{(x, m): x <= m}`` splits into four regions:

* ``Stop`` (``m >= m_low``, ``x_R <= x <= b(m)``): ``W = (1 - F(m)) R(x)``
* ``LeftOfStop`` (``m >= m_low``, ``x < x_R``): wait for ``x_R``
* ``RightOfStop`` (``m >= m_low``, ``x > b(m)``): ``W = A(m) h1(x) + B(m) h2(x)``
* ``BelowMlow`` (``m < m_low``): ``W = C(m) h1(x)``
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad_vec

from .boundary import FreeBoundary, TransformCache
from .diffusion import DomainError
from .problem import Problem

STOP, LEFT_OF_STOP, RIGHT_OF_STOP, BELOW_MLOW = 0, 1, 2, 3
REGION_NAMES = ("Stop", "LeftOfStop", "RightOfStop", "BelowMlow")


def _vec(*args):
    arrs = np.broadcast_arrays(*[np.asarray(a, dtype=float) for a in args])
    return [a.ravel() for a in arrs], arrs[0].shape


def _out(values, shape):
    return float(values[0]) if shape == () else values.reshape(shape)


class ValueSurface:
    """Piecewise value function ``W(x, m)`` and its partial derivatives."""

    def __init__(self, problem: Problem, boundary: FreeBoundary, c_nodes: int = 200):
        self.problem = problem
        self.boundary = boundary
        self.model = problem.model
        self.payoffs = problem.payoffs
        self.law = problem.law
        self.x_R = problem.x_R
        self.m_low = boundary.m_low
        h1 = self.model.h1
        self._left_coef = self.payoffs.R(self.x_R) / h1(self.x_R)
        self._build_c_table(c_nodes)

    # coefficients -----------------------------------------------------------

    def _c_integrand(self, y):
        return self.law.pdf(y) * self.payoffs.G(y) / self.model.h1(y)

    def _build_c_table(self, n):
        pts = np.geomspace(self.m_low * 1e-4, self.m_low, n)
        kinks = [k for k in (self.payoffs.x_U, self.x_R) if k < self.m_low]
        self._nodes = np.unique(np.concatenate([pts, kinks, [self.m_low]]))
        pieces = self._integrate(self._nodes[:-1], self._nodes[1:])
        tail = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        self._c_low = (1.0 - self.law.cdf(self.m_low)) * self._left_coef
        self._c_nodes = self._c_low + tail

    def _integrate(self, a, b):
        # integral of f G / h1 over [a_i, b_i] for all i at once
        a, b = np.asarray(a, float), np.asarray(b, float)
        if a.size == 0:
            return np.zeros(0)
        width = b - a

        def g(t):
            return self._c_integrand(a + t * width) * width

        val, _ = quad_vec(g, 0.0, 1.0, epsrel=1e-10, epsabs=0.0)
        return np.atleast_1d(val)

    def coefficient_A(self, m):
        (m,), shape = _vec(m)
        b = self.boundary(m)
        model, R = self.model, self.payoffs.R
        h2 = model.h2
        sf = 1.0 - self.law.cdf(m)
        val = sf / (model.gamma * model.scale_deriv(b)) * (R.d1(b) * h2(b) - R(b) * h2.d1(b))
        return _out(val, shape)

    def coefficient_A_transformed(self, m):
        """``(1 - F(m)) R_hat'(zeta(b(m)))``, an alternative form of ``A``."""
        t = TransformCache(self.problem)
        (m,), shape = _vec(m)
        y = t.zeta(self.boundary(m))
        return _out((1.0 - self.law.cdf(m)) * t.R_hat_d1(y), shape)

    def coefficient_B(self, m):
        (m,), shape = _vec(m)
        b = self.boundary(m)
        model, R = self.model, self.payoffs.R
        h1 = model.h1
        sf = 1.0 - self.law.cdf(m)
        val = -sf / (model.gamma * model.scale_deriv(b)) * (R.d1(b) * h1(b) - R(b) * h1.d1(b))
        return _out(val, shape)

    def coefficient_C(self, m):
        (m,), shape = _vec(m)
        if np.any(m > self.m_low) or np.any(m <= 0):
            raise DomainError(f"C is defined for 0 < m <= m_low={self.m_low}")
        k = np.searchsorted(self._nodes, m, side="left")
        below = k == 0
        upper = np.where(below, self._nodes[0], self._nodes[np.minimum(k, len(self._nodes) - 1)])
        base = np.where(below, self._c_nodes[0], self._c_nodes[np.minimum(k, len(self._nodes) - 1)])
        need = upper > m
        val = base.copy()
        if np.any(need):
            val[need] += self._integrate(m[need], upper[need])
        return _out(val, shape)

    def coefficient_derivatives(self, m):
        """``(A'(m), B'(m))`` from the Neumann and vertical smooth-fit conditions."""
        (m,), shape = _vec(m)
        b = self.boundary(m)
        h1, h2 = self.model.h1, self.model.h2
        R, G = self.payoffs.R(b), self.payoffs.G(m)
        f = self.law.pdf(m)
        D = h1(m) * h2(b) - h1(b) * h2(m)
        dA = f / D * (R * h2(m) - G * h2(b))
        dB = -f / D * (R * h1(m) - G * h1(b))
        return _out(dA, shape), _out(dB, shape)

    # regions and values -----------------------------------------------------

    def _regions(self, x, m):
        if np.any(x > m):
            raise DomainError("value needs x <= m")
        if np.any(x <= 0):
            raise DomainError("value needs x > 0")
        above = m >= self.m_low
        b = np.full_like(m, np.nan)
        b[above] = self.boundary(m[above])
        reg = np.full(m.shape, BELOW_MLOW)
        reg[above & (x < self.x_R)] = LEFT_OF_STOP
        reg[above & (x >= self.x_R) & (x <= b)] = STOP
        reg[above & (x > b)] = RIGHT_OF_STOP
        return reg

    def region(self, x, m):
        """Region code (index into ``REGION_NAMES``) of each point."""
        (x, m), shape = _vec(x, m)
        reg = self._regions(x, m)
        return int(reg[0]) if shape == () else reg.reshape(shape)

    def _eval(self, x, m, order, reg=None):
        # order 0: W, 1: dW/dx, 2: d2W/dx2
        if reg is None:
            reg = self._regions(x, m)
        model, pay = self.model, self.payoffs
        h1, h2 = model.h1, model.h2
        deriv = {0: lambda f: f, 1: lambda f: f.d1, 2: lambda f: f.d2}[order]
        out = np.empty_like(x)
        sf = 1.0 - self.law.cdf(m)
        i = reg == STOP
        out[i] = sf[i] * deriv(pay.R)(x[i])
        i = reg == LEFT_OF_STOP
        out[i] = sf[i] * self._left_coef * deriv(h1)(x[i])
        i = reg == RIGHT_OF_STOP
        if np.any(i):
            out[i] = (self.coefficient_A(m[i]) * deriv(h1)(x[i])
                      + self.coefficient_B(m[i]) * deriv(h2)(x[i]))
        i = reg == BELOW_MLOW
        if np.any(i):
            out[i] = self.coefficient_C(m[i]) * deriv(h1)(x[i])
        return out

    def value(self, x, m):
        (x, m), shape = _vec(x, m)
        return _out(self._eval(x, m, 0), shape)

    def __call__(self, x, m):
        return self.value(x, m)

    def formula(self, x, m, region: int, order: int = 0):
        """Evaluate one region's expression regardless of where ``(x, m)`` lies.

        Used to compare neighbouring regions on their common interface.
        """
        (x, m), shape = _vec(x, m)
        if region == RIGHT_OF_STOP and np.any(m < self.m_low):
            raise DomainError("RightOfStop formula needs m >= m_low")
        if region == BELOW_MLOW and np.any(m > self.m_low):
            raise DomainError("BelowMlow formula needs m <= m_low")
        return _out(self._eval(x, m, order, np.full(x.shape, region)), shape)

    def partial_x(self, x, m):
        (x, m), shape = _vec(x, m)
        return _out(self._eval(x, m, 1), shape)

    def partial_xx(self, x, m):
        (x, m), shape = _vec(x, m)
        return _out(self._eval(x, m, 2), shape)

    def partial_m(self, x, m, side: str = "right"):
        """``dW/dm``; at ``m = m_low`` ``side`` picks the regime above or below."""
        if side not in ("left", "right"):
            raise ValueError("side must be 'left' or 'right'")
        (x, m), shape = _vec(x, m)
        reg = self._regions(x, m)
        if side == "left":
            reg[(m == self.m_low)] = BELOW_MLOW
        h1, h2 = self.model.h1, self.model.h2
        pay = self.payoffs
        f = self.law.pdf(m)
        out = np.empty_like(x)
        i = reg == STOP
        out[i] = -f[i] * pay.R(x[i])
        i = reg == LEFT_OF_STOP
        out[i] = -f[i] * self._left_coef * h1(x[i])
        i = reg == RIGHT_OF_STOP
        if np.any(i):
            dA, dB = self.coefficient_derivatives(m[i])
            out[i] = dA * h1(x[i]) + dB * h2(x[i])
        i = reg == BELOW_MLOW
        if np.any(i):
            out[i] = -f[i] * pay.G(m[i]) * h1(x[i]) / h1(m[i])
        return _out(out, shape)

    def initial_value(self, x):
        """Value before any breakthrough information: ``W(x, x) + F(x) G(x)``."""
        (x,), shape = _vec(x)
        val = self._eval(x, x.copy(), 0) + self.law.cdf(x) * self.payoffs.G(x)
        return _out(val, shape)

    # independent reconstruction used by the smooth-fit check ----------------

    def neumann_coefficients(self, m):
        """``(A, B)`` rebuilt by integrating ``A'``, ``B'`` upward from ``m_low``.

        Starts from ``A(m_low) = C(m_low)``, ``B(m_low) = 0``.  Unlike
        :meth:`coefficient_A` this does not impose smooth fit, so comparing the
        two tests the boundary itself.
        """
        (m,), shape = _vec(m)
        order = np.argsort(m)
        ms = m[order]
        edges = np.concatenate([[self.m_low], ms])

        def g(t):
            a, b = edges[:-1], edges[1:]
            y = a + t * (b - a)
            dA, dB = self.coefficient_derivatives(y)
            return np.concatenate([dA * (b - a), dB * (b - a)])

        inc, _ = quad_vec(g, 0.0, 1.0, epsrel=1e-12, epsabs=0.0)
        n = len(ms)
        A = self._c_low + np.cumsum(inc[:n])
        B = np.cumsum(inc[n:])
        outA, outB = np.empty(n), np.empty(n)
        outA[order], outB[order] = A, B
        return _out(outA, shape), _out(outB, shape)
