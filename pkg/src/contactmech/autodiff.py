"""Forward-mode automatic differentiation with nested dual numbers.

First derivatives come from a single evaluation on duals seeded with unit
perturbation vectors; second derivatives from duals whose real part is
itself a dual.  Everything is plain Python arithmetic so the same code path
evaluates on floats, duals and nested duals.
"""

from __future__ import annotations

import math


class Dual:
    """Truncated first-order jet ``re + sum_k eps[k] * e_k``.

    ``re`` and the entries of ``eps`` may themselves be duals, which yields
    exact second (and higher) derivatives by nesting.
    """

    __slots__ = ("re", "eps")

    def __init__(self, re, eps):
        self.re = re
        self.eps = tuple(eps)

    def __repr__(self):
        return f"Dual({self.re!r}, {self.eps!r})"

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re + other.re,
                        tuple(a + b for a, b in zip(self.eps, other.eps)))
        return Dual(self.re + other, self.eps)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.re, tuple(-a for a in self.eps))

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re - other.re,
                        tuple(a - b for a, b in zip(self.eps, other.eps)))
        return Dual(self.re - other, self.eps)

    def __rsub__(self, other):
        return Dual(other - self.re, tuple(-a for a in self.eps))

    def __mul__(self, other):
        if isinstance(other, Dual):
            sr, orr = self.re, other.re
            return Dual(sr * orr,
                        tuple(sr * b + orr * a
                              for a, b in zip(self.eps, other.eps)))
        return Dual(self.re * other, tuple(a * other for a in self.eps))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            q = self.re / other.re
            return Dual(q, tuple((a - q * b) / other.re
                                 for a, b in zip(self.eps, other.eps)))
        return Dual(self.re / other, tuple(a / other for a in self.eps))

    def __rtruediv__(self, other):
        q = other / self.re
        return Dual(q, tuple(-q * a / self.re for a in self.eps))

    def __pow__(self, q):
        if isinstance(q, Dual):
            return (q * self.log()).exp()
        if q == 2 or q == 2.0:
            r = self.re
            d = r + r
            return Dual(r * r, tuple(d * a for a in self.eps))
        if q == 0:
            return Dual(self.re ** 0, tuple(0.0 * a for a in self.eps))
        if q == 1:
            return self
        d = q * self.re ** (q - 1)
        return Dual(self.re ** q, tuple(d * a for a in self.eps))

    def __rpow__(self, base):
        return (self * math.log(base)).exp()

    # -- elementary functions ---------------------------------------------

    def exp(self):
        e = exp(self.re)
        return Dual(e, tuple(e * a for a in self.eps))

    def log(self):
        return Dual(log(self.re), tuple(a / self.re for a in self.eps))

    def sin(self):
        c = cos(self.re)
        return Dual(sin(self.re), tuple(c * a for a in self.eps))

    def cos(self):
        s = sin(self.re)
        return Dual(cos(self.re), tuple(-s * a for a in self.eps))


def exp(x):
    return x.exp() if isinstance(x, Dual) else math.exp(x)


def log(x):
    return x.log() if isinstance(x, Dual) else math.log(x)


def sin(x):
    return x.sin() if isinstance(x, Dual) else math.sin(x)


def cos(x):
    return x.cos() if isinstance(x, Dual) else math.cos(x)


def value(x):
    """Strip all dual layers, returning the underlying float."""
    while isinstance(x, Dual):
        x = x.re
    return x


def _eps(x, n):
    return x.eps if isinstance(x, Dual) else (0.0,) * n


def _re(x):
    return x.re if isinstance(x, Dual) else x


_UNIT_CACHE = {}


def _units(n):
    units = _UNIT_CACHE.get(n)
    if units is None:
        units = tuple(tuple(1.0 if k == j else 0.0 for k in range(n))
                      for j in range(n))
        _UNIT_CACHE[n] = units
    return units


def _unit(j, n):
    return _units(n)[j]


def seed(coords):
    """Wrap coordinates in duals carrying unit perturbation vectors.

    Entries of ``coords`` may themselves be duals; the new layer sits on top,
    so seeding twice gives second derivatives.
    """
    return [Dual(c, u) for c, u in zip(coords, _units(len(coords)))]


def value_and_grad(f, coords):
    """Value and gradient of ``f`` (a callable on a coordinate sequence)."""
    out = f(seed(coords))
    if isinstance(out, Dual):
        return out.re, list(out.eps)
    return out, [0.0] * len(coords)


def grad(f, coords):
    return value_and_grad(f, coords)[1]


def jacobian(fs, coords):
    """Rows of first derivatives for a callable returning a sequence."""
    n = len(coords)
    outs = fs(seed(coords))
    return [list(_eps(o, n)) for o in outs]


def value_grad_hessian(f, coords):
    """Value, gradient and symmetric Hessian from one nested evaluation."""
    n = len(coords)
    out = f(seed(seed(coords)))
    hess = [list(_eps(o, n)) for o in _eps(out, n)]
    inner = _re(out)
    if isinstance(inner, Dual):
        return inner.re, list(inner.eps), hess
    return inner, [0.0] * n, hess
