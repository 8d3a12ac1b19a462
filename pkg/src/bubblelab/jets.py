"""Hyper-dual numbers for exact first and mixed second derivatives.

A ``Jet`` carries f, d1 f, d2 f and d1 d2 f along two seed directions.  Used to
differentiate the adapted bubble with respect to position and scale without
finite differences.
"""
from __future__ import annotations

import numpy as np


class Jet:
    __slots__ = ("v", "a", "b", "ab")
    __array_priority__ = 1000

    def __init__(self, v, a=0.0, b=0.0, ab=0.0):
        self.v = np.asarray(v, dtype=float)
        self.a = np.broadcast_to(np.asarray(a, dtype=float), self.v.shape)
        self.b = np.broadcast_to(np.asarray(b, dtype=float), self.v.shape)
        self.ab = np.broadcast_to(np.asarray(ab, dtype=float), self.v.shape)

    @staticmethod
    def lift(x):
        return x if isinstance(x, Jet) else Jet(x)

    def apply(self, f0, f1, f2):
        """Chain rule for a scalar function with value f0, f' = f1, f'' = f2 at self.v."""
        return Jet(f0, f1 * self.a, f1 * self.b, f1 * self.ab + f2 * self.a * self.b)

    # arithmetic
    def __add__(self, o):
        o = Jet.lift(o)
        return Jet(self.v + o.v, self.a + o.a, self.b + o.b, self.ab + o.ab)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.v, -self.a, -self.b, -self.ab)

    def __sub__(self, o):
        return self + (-Jet.lift(o))

    def __rsub__(self, o):
        return Jet.lift(o) + (-self)

    def __mul__(self, o):
        o = Jet.lift(o)
        return Jet(
            self.v * o.v,
            self.a * o.v + self.v * o.a,
            self.b * o.v + self.v * o.b,
            self.ab * o.v + self.a * o.b + self.b * o.a + self.v * o.ab,
        )

    __rmul__ = __mul__

    def reciprocal(self):
        r = 1.0 / self.v
        return self.apply(r, -(r**2), 2 * r**3)

    def __truediv__(self, o):
        return self * Jet.lift(o).reciprocal()

    def __rtruediv__(self, o):
        return Jet.lift(o) * self.reciprocal()

    def __pow__(self, p: float):
        v = self.v
        return self.apply(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def sqrt(self):
        s = np.sqrt(self.v)
        return self.apply(s, 0.5 / s, -0.25 / (s * self.v))

    def exp(self):
        e = np.exp(self.v)
        return self.apply(e, e, e)

    # array plumbing
    def __getitem__(self, idx):
        return Jet(self.v[idx], self.a[idx], self.b[idx], self.ab[idx])

    def sum(self, axis=None):
        return Jet(self.v.sum(axis), self.a.sum(axis), self.b.sum(axis), self.ab.sum(axis))

    @property
    def shape(self):
        return self.v.shape

    def matmul_left(self, M):
        """Apply a constant matrix to the trailing vector axis."""
        return Jet(self.v @ M.T, self.a @ M.T, self.b @ M.T, self.ab @ M.T)

    def parts(self):
        return self.v, self.a, self.b, self.ab


def stack(jets, axis=-1) -> Jet:
    jets = [Jet.lift(j) for j in jets]
    shape = np.broadcast_shapes(*[j.v.shape for j in jets])
    return Jet(*[np.stack([np.broadcast_to(getattr(j, f), shape) for j in jets], axis=axis)
                 for f in ("v", "a", "b", "ab")])


def dot(u: Jet, w: Jet) -> Jet:
    return (u * w).sum(axis=-1)


def where(mask, x: Jet, y: Jet) -> Jet:
    x, y = Jet.lift(x), Jet.lift(y)
    m = np.asarray(mask)
    return Jet(*[np.where(m, getattr(x, f), getattr(y, f)) for f in ("v", "a", "b", "ab")])
