"""2x2 matrices over a field, stored row-major as 4-tuples ``(m11, m12, m21, m22)``."""

from __future__ import annotations


class SingularMatrix(ValueError):
    pass


def mul(x, y):
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def det(m):
    return m[0] * m[3] - m[1] * m[2]


def inv(m):
    dt = det(m)
    if not dt:
        raise SingularMatrix("matrix is not invertible")
    a, b, c, d = m
    return (d / dt, -b / dt, -c / dt, a / dt)


def apply(m, vec):
    x, y = vec
    return (m[0] * x + m[1] * y, m[2] * x + m[3] * y)


def entries(g):
    """Accept a 4-tuple, a nested 2x2 sequence or anything with an ``m`` attribute."""
    m = getattr(g, "m", g)
    if len(m) == 2:
        (a, b), (c, d) = m
        return (a, b, c, d)
    return tuple(m)
