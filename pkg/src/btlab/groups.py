"""Subgroups of GL2(F), their finite quotients mod congruence subgroups, generators and cosets."""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from btlab import mat2
from btlab.localfield import PLUS_INFINITY, RATIONAL, Field, QuotientRing
from btlab.mat2 import SingularMatrix

FULL_G = "FullG"
G0DET = "G0det"
MAX_COMPACT = "MaxCompact"
CONJ_MAX_COMPACT = "ConjMaxCompact"
IWAHORI = "Iwahori"
CONGRUENCE = "Congruence"
UPPER_BOREL = "UpperBorel"

TAGS = (FULL_G, G0DET, MAX_COMPACT, CONJ_MAX_COMPACT, IWAHORI, CONGRUENCE, UPPER_BOREL)

QUOTIENT_GUARD = 10**6


class TooLarge(RuntimeError):
    pass


class GroupElement:
    """An invertible 2x2 matrix over F."""

    __slots__ = ("field", "m", "_vdet")

    def __init__(self, fld: Field, m):
        m = tuple(fld.coerce(x) for x in mat2.entries(m))
        if not mat2.det(m):
            raise SingularMatrix("group elements must be invertible")
        self.field, self.m, self._vdet = fld, m, None

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.field, mat2.mul(self.m, other.m))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.field, mat2.inv(self.m))

    def det(self):
        return mat2.det(self.m)

    @property
    def det_valuation(self) -> int:
        if self._vdet is None:
            self._vdet = self.field.valuation(self.det())
        return self._vdet

    def adjunct(self) -> "GroupElement":
        """det(g) * g^-1."""
        a, b, c, d = self.m
        return GroupElement(self.field, (d, -b, -c, a))

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self.m == other.m

    def __hash__(self):
        return hash(self.m)

    def __repr__(self):
        f = self.field.to_str
        a, b, c, d = self.m
        return f"[[{f(a)}, {f(b)}], [{f(c)}, {f(d)}]]"

    def reduce(self, N: int) -> tuple[int, int, int, int]:
        """Codes of the entries in O/pi^N (entries must be integral)."""
        ring = self.field.quotient_ring(N)
        return tuple(ring.reduce(x) for x in self.m)


# ---------------------------------------------------------------------------
# constructors


def element(fld: Field, a, b, c, d) -> GroupElement:
    return GroupElement(fld, (a, b, c, d))


def identity(fld: Field) -> GroupElement:
    return element(fld, 1, 0, 0, 1)


def s_matrix(fld: Field) -> GroupElement:
    return GroupElement(fld, (fld.zero, fld.one, fld.uniformizer, fld.zero))


def e12(fld: Field, r) -> GroupElement:
    return GroupElement(fld, (fld.one, r, fld.zero, fld.one))


def e21(fld: Field, r) -> GroupElement:
    return GroupElement(fld, (fld.one, fld.zero, r, fld.one))


def diag(fld: Field, x, y) -> GroupElement:
    return GroupElement(fld, (x, fld.zero, fld.zero, y))


# ---------------------------------------------------------------------------
# membership


def member(g: GroupElement, tag: str, n: int | None = None) -> bool:
    """Exact membership test from entry valuations."""
    fld = g.field
    v = fld.valuation
    a, b, c, d = g.m
    if tag == FULL_G:
        return True
    if tag == G0DET:
        return g.det_valuation == 0
    integral = min(v(a), v(b), v(c), v(d)) >= 0 and g.det_valuation == 0
    if tag == MAX_COMPACT:
        return integral
    if tag == IWAHORI:
        return integral and v(c) >= 1
    if tag == UPPER_BOREL:
        return integral and not c
    if tag == CONJ_MAX_COMPACT:
        # s^-1 g s = [[d, c/pi], [pi b, a]]
        return g.det_valuation == 0 and v(a) >= 0 and v(d) >= 0 and v(c) >= 1 and v(b) >= -1
    if tag == CONGRUENCE:
        if n is None:
            raise ValueError("Congruence needs a level n")
        if n == 0:
            return integral
        return integral and min(v(a - 1), v(b), v(c), v(d - 1)) >= n
    raise ValueError(f"unknown subgroup tag {tag!r}")


# ---------------------------------------------------------------------------
# random elements


def _random_g0(fld: Field, rng, size_bound, iwahori=False):
    pi = fld.uniformizer
    while True:
        a, b, c, d = (fld.random_integral(rng, size_bound) for _ in range(4))
        if iwahori:
            c = c * pi
        g = (a, b, c, d)
        dt = mat2.det(g)
        if dt and fld.valuation(dt) == 0:
            return GroupElement(fld, g)


def random_element(fld: Field, tag: str, seed, size_bound: int = 20, n: int | None = None) -> GroupElement:
    """Deterministic random member of the tagged subgroup; ``seed`` may be an int or a Random."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    if tag == MAX_COMPACT:
        return _random_g0(fld, rng, size_bound)
    if tag == IWAHORI:
        return _random_g0(fld, rng, size_bound, iwahori=True)
    if tag == CONJ_MAX_COMPACT:
        s = s_matrix(fld)
        return s * _random_g0(fld, rng, size_bound) * s.inverse()
    if tag == UPPER_BOREL:
        u, w = fld.random_unit(rng, size_bound), fld.random_unit(rng, size_bound)
        return element(fld, u, fld.random_integral(rng, size_bound), 0, w)
    if tag == CONGRUENCE:
        if n is None:
            raise ValueError("Congruence needs a level n")
        if n == 0:
            return _random_g0(fld, rng, size_bound)
        pn = fld.pi_power(n)
        a, b, c, d = (fld.random_integral(rng, size_bound) * pn for _ in range(4))
        return element(fld, 1 + a, b, c, 1 + d)
    k = rng.randint(0, 2)
    if tag == G0DET:
        t = diag(fld, fld.pi_power(k), fld.pi_power(-k))
    elif tag == FULL_G:
        t = diag(fld, fld.pi_power(k), fld.pi_power(rng.randint(-2, 2)))
    else:
        raise ValueError(f"unknown subgroup tag {tag!r}")
    return _random_g0(fld, rng, size_bound) * t * _random_g0(fld, rng, size_bound)


# ---------------------------------------------------------------------------
# finite quotients


class FiniteQuotient:
    """Image of G_0 (or of the Iwahori subgroup) in GL2(O/pi^N).

    Elements are 4-tuples of ring codes; ``index`` maps them to positions.
    """

    def __init__(self, fld: Field, tag: str, N: int, elements: Sequence[tuple[int, int, int, int]]):
        self.field, self.tag, self.N = fld, tag, N
        self.ring: QuotientRing = fld.quotient_ring(N)
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.identity = self.index[(1, 0, 0, 1)]
        self._mul_table: list[list[int]] | None = None

    def __len__(self):
        return len(self.elements)

    def product(self, x, y):
        R = self.ring
        a, b, c, d = x
        e, f, g, h = y
        return (
            R.add(R.mul(a, e), R.mul(b, g)),
            R.add(R.mul(a, f), R.mul(b, h)),
            R.add(R.mul(c, e), R.mul(d, g)),
            R.add(R.mul(c, f), R.mul(d, h)),
        )

    def mul(self, i: int, j: int) -> int:
        if self._mul_table is not None:
            return self._mul_table[i][j]
        return self.index[self.product(self.elements[i], self.elements[j])]

    def mul_table(self) -> list[list[int]]:
        if self._mul_table is None:
            els, idx, prod = self.elements, self.index, self.product
            self._mul_table = [[idx[prod(x, y)] for y in els] for x in els]
        return self._mul_table

    def inverse(self, i: int) -> int:
        for j in range(len(self)):
            if self.mul(i, j) == self.identity:
                return j
        raise AssertionError("no inverse")  # pragma: no cover

    def lift(self, i: int) -> GroupElement:
        lift = self.ring.lift
        return GroupElement(self.field, tuple(lift(x) for x in self.elements[i]))

    def image(self, g: GroupElement) -> int:
        return self.index[g.reduce(self.N)]


def quotient_order(q: int, N: int, tag: str = MAX_COMPACT) -> int:
    full = q ** (4 * (N - 1)) * (q * q - 1) * (q * q - q)
    return full if tag == MAX_COMPACT else full // (q + 1)


def quotient_enumerate(fld: Field, tag: str, N: int) -> FiniteQuotient:
    """All elements of the image of G_0 or I in GL2(O/pi^N), lifted from GL2(F_q)."""
    if tag not in (MAX_COMPACT, IWAHORI):
        raise ValueError("only MaxCompact and Iwahori quotients are enumerated")
    if N < 1:
        raise ValueError("level must be at least 1")
    q = fld.q
    size = quotient_order(q, N, tag)
    if size > QUOTIENT_GUARD:
        raise TooLarge(f"quotient of order {size} exceeds the guard {QUOTIENT_GUARD}")
    F = fld.residue
    ring = fld.quotient_ring(N)
    base = []
    for a, b, c, d in itertools.product(range(q), repeat=4):
        if tag == IWAHORI and c:
            continue
        if F.sub(F.mul(a, d), F.mul(b, c)):
            base.append((a, b, c, d))
    highs = range(q ** (N - 1))
    elements = []
    for a, b, c, d in base:
        for ha, hb, hc, hd in itertools.product(highs, repeat=4):
            elements.append((a + q * ha, b + q * hb, c + q * hc, d + q * hd))
    out = FiniteQuotient(fld, tag, N, elements)
    assert len(out) == size and ring.size == q**N
    return out


def closure(fld: Field, gens: Sequence[GroupElement], N: int) -> set[tuple[int, int, int, int]]:
    """Subgroup of GL2(O/pi^N) generated by the images of ``gens``."""
    images = [g.reduce(N) for g in gens]
    Q = FiniteQuotient(fld, MAX_COMPACT, N, [(1, 0, 0, 1)])
    seen = {(1, 0, 0, 1)}
    queue = deque(seen)
    while queue:
        x = queue.popleft()
        for g in images:
            y = Q.product(x, g)
            if y not in seen:
                if len(seen) > QUOTIENT_GUARD:
                    raise TooLarge("closure exceeds the guard")
                seen.add(y)
                queue.append(y)
    return seen


# ---------------------------------------------------------------------------
# generators


def _primitive_root_mod_p2(p: int) -> int:
    for g in range(2, p * p):
        if g % p == 0:
            continue
        x, order = g, 1
        while x != 1:
            x = x * g % (p * p)
            order += 1
        if order == p * (p - 1):
            return g
    raise AssertionError("no primitive root")  # pragma: no cover


def unit_generators(fld: Field, N: int) -> list:
    """Elements of O^x whose images generate (O/pi^N)^x."""
    if fld.backend == RATIONAL:
        p = fld.p
        if p == 2:
            return [fld.from_int(-1), fld.from_int(5)]
        return [fld.from_int(_primitive_root_mod_p2(p))]
    out = [fld.from_residue(fld.residue.multiplicative_generator)]
    for j in range(1, N):
        for eps in fld.residue.additive_basis():
            out.append(fld.one + fld.from_residue(eps) * fld.pi_power(j))
    return out


def additive_generators(fld: Field, N: int) -> list:
    """Elements of O whose images generate O/pi^N additively."""
    if fld.backend == RATIONAL:
        return [fld.one]
    return [fld.from_residue(eps) * fld.pi_power(j) for j in range(N) for eps in fld.residue.additive_basis()]


def generators(fld: Field, tag: str, N: int) -> list[GroupElement]:
    """Generators of G_0 or I modulo G_N: elementary matrices and diagonal units."""
    if tag not in (MAX_COMPACT, IWAHORI):
        raise ValueError("generators exist for MaxCompact and Iwahori only")
    if N < 1:
        raise ValueError("level must be at least 1")
    low = fld.uniformizer if tag == IWAHORI else fld.one
    gens = [e12(fld, r) for r in additive_generators(fld, N)]
    gens += [e21(fld, low * r) for r in additive_generators(fld, N)]
    for u in unit_generators(fld, N):
        gens.append(diag(fld, u, 1))
        gens.append(diag(fld, 1, u))
    return gens


# ---------------------------------------------------------------------------
# cosets


def coset_reps_G0_mod_GnB0(fld: Field, n: int) -> list[GroupElement]:
    """Representatives of G_0 / G_{n+1} B_0, one per point of P^1(O/pi^{n+1}).

    ``[1 : y]`` gives ``[[1, 0], [y, 1]]`` and ``[pi x : 1]`` gives ``[[pi x, 1], [1, 0]]``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    ring = fld.quotient_ring(n + 1)
    out = [element(fld, 1, 0, ring.lift(y), 1) for y in range(ring.size)]
    sub = fld.quotient_ring(n)
    pi = fld.uniformizer
    out += [element(fld, pi * sub.lift(x), 1, 1, 0) for x in range(sub.size)]
    return out


def same_coset_GnB0(g: GroupElement, h: GroupElement, n: int) -> bool:
    """True iff g^-1 h lies in G_{n+1} B_0."""
    x = g.inverse() * h
    return member(x, MAX_COMPACT) and g.field.valuation(x.m[2]) >= n + 1
