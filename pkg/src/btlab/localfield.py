"""Exact arithmetic in the local field F, its integers O, residue field and the rings O/pi^N.

Two backends are provided.

* ``rational``: F is represented by the rationals inside Q_p.  Elements are
  :class:`fractions.Fraction`, the uniformiser is ``p`` and ``q = p``.
* ``laurent``: F is represented by rational functions inside F_q((t)).  Elements
  are :class:`LaurentScalar` values ``t^k * num/den`` with ``num`` and ``den``
  polynomials over F_q having nonzero constant term; the uniformiser is ``t``.

Everything is exact.  Values are global objects (rationals, rational functions),
never truncated expansions, so no precision bookkeeping is needed.
"""

from __future__ import annotations

import itertools
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence, Union

PLUS_INFINITY = math.inf

RATIONAL = "rational"
LAURENT = "laurent"

_BACKEND_ALIASES = {
    "rational": RATIONAL,
    "rationalp": RATIONAL,
    "laurent": LAURENT,
    "laurentq": LAURENT,
}

# Documented default moduli, coefficients listed from the constant term upwards.
DEFAULT_MODULI = {
    4: (1, 1, 1),  # x^2 + x + 1
    8: (1, 1, 0, 1),  # x^3 + x + 1
    9: (1, 0, 1),  # x^2 + 1
}


class FieldError(ValueError):
    pass


class NegativeValuation(FieldError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for d in range(2, math.isqrt(n) + 1):
        if n % d == 0:
            return False
    return True


# ---------------------------------------------------------------------------
# polynomials over F_p (used only to build and check the residue field)


def _fp_strip(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _fp_divides(d: Sequence[int], a: Sequence[int], p: int) -> bool:
    """Return True if the monic polynomial ``d`` divides ``a`` over F_p."""
    r = [x % p for x in a]
    _fp_strip(r)
    n = len(d) - 1
    while len(r) - 1 >= n and r:
        c = r[-1]
        shift = len(r) - 1 - n
        for i, di in enumerate(d):
            r[shift + i] = (r[shift + i] - c * di) % p
        _fp_strip(r)
    return not r


def is_irreducible_fp(coeffs: Sequence[int], p: int) -> bool:
    """Trial factorisation of a monic polynomial over F_p."""
    deg = len(coeffs) - 1
    if deg < 1 or coeffs[-1] % p != 1:
        return False
    for d in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if _fp_divides(list(low) + [1], coeffs, p):
                return False
    return True


def first_irreducible(p: int, f: int) -> tuple[int, ...]:
    for low in itertools.product(range(p), repeat=f):
        cand = tuple(reversed(low)) + (1,)
        if is_irreducible_fp(cand, p):
            return cand
    raise FieldError(f"no irreducible polynomial of degree {f} over F_{p}")


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FieldConfig:
    """Which local field to compute in.

    ``modulus`` lists the coefficients of the monic irreducible polynomial
    defining F_q over F_p, constant term first.  It only matters for the
    ``laurent`` backend with ``f > 1``.
    """

    backend: str = RATIONAL
    p: int = 2
    f: int = 1
    modulus: tuple[int, ...] | None = None

    def __post_init__(self):
        backend = _BACKEND_ALIASES.get(str(self.backend).lower())
        if backend is None:
            raise FieldError(f"unknown backend {self.backend!r}")
        object.__setattr__(self, "backend", backend)
        if not is_prime(self.p):
            raise FieldError(f"p = {self.p} is not prime")
        if self.f < 1:
            raise FieldError("residue degree f must be positive")
        if backend == RATIONAL and self.f != 1:
            raise FieldError("the rational backend only supports f = 1")
        if self.modulus is None:
            if self.f == 1:
                mod = (0, 1)
            else:
                mod = DEFAULT_MODULI.get(self.p**self.f) or first_irreducible(self.p, self.f)
        else:
            mod = tuple(int(c) % self.p for c in self.modulus)
        if len(mod) != self.f + 1 or not is_irreducible_fp(mod, self.p):
            raise FieldError(f"modulus {list(mod)} is not an irreducible monic polynomial of degree {self.f}")
        object.__setattr__(self, "modulus", mod)

    @property
    def q(self) -> int:
        return self.p**self.f

    def to_json(self) -> dict:
        return {"backend": self.backend, "p": self.p, "f": self.f, "modulus": list(self.modulus)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: dict | str) -> "FieldConfig":
        if isinstance(data, str):
            data = json.loads(data)
        mod = data.get("modulus")
        return cls(data["backend"], int(data["p"]), int(data.get("f", 1)), tuple(mod) if mod else None)

    @classmethod
    def for_q(cls, q: int, backend: str | None = None) -> "FieldConfig":
        """Smallest sensible configuration with residue field of order ``q``."""
        for p in range(2, q + 1):
            if not is_prime(p):
                continue
            f = round(math.log(q, p))
            if p**f == q:
                if backend is None:
                    backend = RATIONAL if f == 1 else LAURENT
                return cls(backend, p, f)
        raise FieldError(f"{q} is not a prime power")


# ---------------------------------------------------------------------------


class ResidueField:
    """F_q in a polynomial basis over F_p.

    Elements are integer codes ``sum c_i p^i`` with ``0 <= c_i < p``; the code of
    a constant ``c`` in F_p is ``c`` itself, so 0 and 1 are the usual ones.
    """

    def __init__(self, p: int, f: int, modulus: Sequence[int]):
        self.p, self.f, self.q = p, f, p**f
        self.modulus = tuple(modulus)
        q = self.q
        if q > 1024:
            raise FieldError("residue fields larger than 1024 elements are not supported")
        self.add_table = [[self._encode([(a + b) % p for a, b in zip(self.coeffs(x), self.coeffs(y))]) for y in range(q)] for x in range(q)]
        self.mul_table = [[self._poly_mul(x, y) for y in range(q)] for x in range(q)]
        self.neg_table = [self._encode([(-a) % p for a in self.coeffs(x)]) for x in range(q)]
        self.inv_table = [0] * q
        for x in range(1, q):
            for y in range(1, q):
                if self.mul_table[x][y] == 1:
                    self.inv_table[x] = y
                    break

    def coeffs(self, x: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.f):
            x, r = divmod(x, self.p)
            out.append(r)
        return tuple(out)

    def _encode(self, coeffs: Iterable[int]) -> int:
        code = 0
        for c in reversed(list(coeffs)):
            code = code * self.p + c
        return code

    def _poly_mul(self, x: int, y: int) -> int:
        p, f = self.p, self.f
        a, b = self.coeffs(x), self.coeffs(y)
        prod = [0] * (2 * f - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    prod[i + j] = (prod[i + j] + ai * bj) % p
        mod = self.modulus
        for k in range(len(prod) - 1, f - 1, -1):
            c = prod[k]
            if c:
                for i in range(f + 1):
                    prod[k - f + i] = (prod[k - f + i] - c * mod[i]) % p
        return self._encode(prod[:f])

    def add(self, x: int, y: int) -> int:
        return self.add_table[x][y]

    def sub(self, x: int, y: int) -> int:
        return self.add_table[x][self.neg_table[y]]

    def mul(self, x: int, y: int) -> int:
        return self.mul_table[x][y]

    def neg(self, x: int) -> int:
        return self.neg_table[x]

    def inv(self, x: int) -> int:
        if x == 0:
            raise ZeroDivisionError("inverse of 0 in the residue field")
        return self.inv_table[x]

    def power(self, x: int, e: int) -> int:
        r = 1
        for _ in range(e):
            r = self.mul_table[r][x]
        return r

    def elements(self) -> range:
        return range(self.q)

    def additive_basis(self) -> list[int]:
        return [self.p**i for i in range(self.f)]

    @cached_property
    def multiplicative_generator(self) -> int:
        for g in range(1, self.q):
            x, order = g, 1
            while x != 1:
                x = self.mul_table[x][g]
                order += 1
            if order == self.q - 1:
                return g
        raise FieldError("no generator of the unit group")  # pragma: no cover


# ---------------------------------------------------------------------------
# polynomials over F_q: tuples of codes, constant term first, no trailing zeros


class _PolyOps:
    def __init__(self, F: ResidueField):
        self.F = F

    @staticmethod
    def strip(c: list[int]) -> tuple[int, ...]:
        while c and c[-1] == 0:
            c.pop()
        return tuple(c)

    def add(self, a, b):
        F = self.F
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, x in enumerate(b):
            out[i] = F.add_table[out[i]][x]
        return self.strip(out)

    def neg(self, a):
        return tuple(self.F.neg_table[x] for x in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if not a or not b:
            return ()
        F = self.F
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                row = F.mul_table[x]
                for j, y in enumerate(b):
                    if y:
                        out[i + j] = F.add_table[out[i + j]][row[y]]
        return self.strip(out)

    def scale(self, a, c):
        row = self.F.mul_table[c]
        return self.strip([row[x] for x in a])

    def divmod(self, a, b):
        F = self.F
        if not b:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(a)
        inv_lead = F.inv(b[-1])
        db = len(b) - 1
        quot = [0] * max(len(a) - db, 0)
        while len(r) - 1 >= db and r:
            c = F.mul(r[-1], inv_lead)
            shift = len(r) - 1 - db
            quot[shift] = c
            for i, bi in enumerate(b):
                r[shift + i] = F.sub(r[shift + i], F.mul(c, bi))
            while r and r[-1] == 0:
                r.pop()
        return self.strip(quot), tuple(r)

    def gcd(self, a, b):
        while b:
            a, b = b, self.divmod(a, b)[1]
        if not a:
            return a
        return self.scale(a, self.F.inv(a[-1]))

    def series_inverse(self, d, n):
        """First ``n`` coefficients of 1/d for d with nonzero constant term."""
        F = self.F
        inv0 = F.inv(d[0])
        out = []
        for k in range(n):
            s = 1 if k == 0 else 0
            for i in range(1, min(k, len(d) - 1) + 1):
                s = F.sub(s, F.mul(d[i], out[k - i]))
            out.append(F.mul(s, inv0))
        return out


class LaurentScalar:
    """Element ``t^k * num/den`` of F_q(t) viewed inside F_q((t)).

    ``num`` and ``den`` are coprime, both have nonzero constant term and ``den``
    has constant term 1, which makes the representation unique.  Zero has
    ``num == ()``.
    """

    __slots__ = ("k", "num", "den", "_ops")

    def __init__(self, ops: _PolyOps, k: int, num: tuple, den: tuple, _canonical: bool = False):
        self._ops = ops
        if _canonical:
            self.k, self.num, self.den = k, num, den
            return
        num = _PolyOps.strip(list(num))
        den = _PolyOps.strip(list(den))
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            self.k, self.num, self.den = 0, (), (1,)
            return
        while num[0] == 0:
            num = num[1:]
            k += 1
        while den[0] == 0:
            den = den[1:]
            k -= 1
        g = ops.gcd(num, den) if len(den) > 1 else ()
        if len(g) > 1:
            num = ops.divmod(num, g)[0]
            den = ops.divmod(den, g)[0]
        c = ops.F.inv(den[0])
        if c != 1:
            num, den = ops.scale(num, c), ops.scale(den, c)
        self.k, self.num, self.den = k, num, den

    def _make(self, k, num, den):
        return LaurentScalar(self._ops, k, num, den)

    def _coerce(self, other):
        if isinstance(other, LaurentScalar):
            return other
        if isinstance(other, int):
            return self._make(0, (other % self._ops.F.p,), (1,))
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.k, self.num, self.den) == (other.k, other.num, other.den)

    def __hash__(self):
        return hash((self.k, self.num, self.den))

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num:
            return other
        if not other.num:
            return self
        ops = self._ops
        a, b = (self, other) if self.k <= other.k else (other, self)
        shift = (0,) * (b.k - a.k)
        if a.den == (1,) and b.den == (1,):
            return self._make(a.k, ops.add(a.num, shift + b.num), (1,))
        left = ops.mul(a.num, b.den)
        right = ops.mul(shift + b.num, a.den)
        return self._make(a.k, ops.add(left, right), ops.mul(a.den, b.den))

    __radd__ = __add__

    def __neg__(self):
        return LaurentScalar(self._ops, self.k, self._ops.neg(self.num), self.den, _canonical=True)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.num or not other.num:
            return LaurentScalar(self._ops, 0, (), (1,), _canonical=True)
        ops = self._ops
        if self.den == (1,) and other.den == (1,):
            # product of polynomials with nonzero constant terms: already canonical
            if self.num == (1,):
                return LaurentScalar(ops, self.k + other.k, other.num, (1,), _canonical=True)
            if other.num == (1,):
                return LaurentScalar(ops, self.k + other.k, self.num, (1,), _canonical=True)
            return LaurentScalar(ops, self.k + other.k, ops.mul(self.num, other.num), (1,), _canonical=True)
        return self._make(self.k + other.k, ops.mul(self.num, other.num), ops.mul(self.den, other.den))

    __rmul__ = __mul__

    def inverse(self):
        if not self.num:
            raise ZeroDivisionError("inverse of zero")
        return self._make(-self.k, self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self._make(0, (1,), (1,))
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def __repr__(self):
        if not self.num:
            return "0"
        return f"t^{self.k}*{list(self.num)}/{list(self.den)}"


Scalar = Union[Fraction, LaurentScalar]


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientElement:
    """Element of O/pi^N given by its pi-adic digits (residue codes), lowest first."""

    digits: tuple[int, ...]
    ring: "QuotientRing" = field(compare=False, hash=False, repr=False)

    @property
    def level(self) -> int:
        return len(self.digits)

    @property
    def code(self) -> int:
        return self.ring.encode(self.digits)

    def truncate(self, m: int) -> "QuotientElement":
        if m > self.level:
            raise ValueError("cannot truncate to a higher level")
        return self.ring.field.quotient_ring(m).element(self.digits[:m])

    def valuation(self):
        for i, d in enumerate(self.digits):
            if d:
                return i
        return PLUS_INFINITY

    def _binop(self, other, op):
        if not isinstance(other, QuotientElement) or other.level != self.level:
            return NotImplemented
        r = self.ring
        return r.element_from_code(op(self.code, other.code))

    def __add__(self, other):
        return self._binop(other, self.ring.add)

    def __sub__(self, other):
        return self._binop(other, self.ring.sub)

    def __mul__(self, other):
        return self._binop(other, self.ring.mul)

    def __neg__(self):
        return self.ring.element_from_code(self.ring.neg(self.code))


class QuotientRing:
    """O/pi^N with elements coded as integers ``sum digit_i * q^i``."""

    def __init__(self, fld: "Field", N: int):
        if N < 0:
            raise ValueError("level must be nonnegative")
        self.field, self.N = fld, N
        self.q = fld.q
        self.size = fld.q**N
        self._rational = fld.backend == RATIONAL

    def encode(self, digits: Sequence[int]) -> int:
        code = 0
        for d in reversed(digits):
            code = code * self.q + d
        return code

    def decode(self, code: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.N):
            code, r = divmod(code, self.q)
            out.append(r)
        return tuple(out)

    def element(self, digits: Sequence[int]) -> QuotientElement:
        return QuotientElement(tuple(digits), self)

    def element_from_code(self, code: int) -> QuotientElement:
        return QuotientElement(self.decode(code), self)

    def add(self, x: int, y: int) -> int:
        if self._rational:
            return (x + y) % self.size
        F = self.field.residue
        a, b = self.decode(x), self.decode(y)
        return self.encode([F.add(u, v) for u, v in zip(a, b)])

    def neg(self, x: int) -> int:
        if self._rational:
            return (-x) % self.size
        F = self.field.residue
        return self.encode([F.neg(u) for u in self.decode(x)])

    def sub(self, x: int, y: int) -> int:
        return self.add(x, self.neg(y))

    def mul(self, x: int, y: int) -> int:
        if self._rational:
            return (x * y) % self.size
        F = self.field.residue
        a, b = self.decode(x), self.decode(y)
        out = [0] * self.N
        for i, u in enumerate(a):
            if u:
                for j in range(self.N - i):
                    if b[j]:
                        out[i + j] = F.add(out[i + j], F.mul(u, b[j]))
        return self.encode(out)

    def is_unit(self, x: int) -> bool:
        return self.N > 0 and x % self.q != 0

    def lift(self, x: int) -> Scalar:
        return self.field.lift_digits(self.decode(x))

    def reduce(self, x: Scalar) -> int:
        return self.encode(self.field.reduce(x, self.N).digits)


# ---------------------------------------------------------------------------


class Field:
    """Arithmetic context for one :class:`FieldConfig`."""

    def __init__(self, config: FieldConfig | None = None):
        self.config = config or FieldConfig()
        self.backend = self.config.backend
        self.p, self.f, self.q = self.config.p, self.config.f, self.config.q
        self.residue = ResidueField(self.p, self.f, self.config.modulus)
        self._ops = _PolyOps(self.residue)
        self._qrings: dict[int, QuotientRing] = {}
        if self.backend == RATIONAL:
            self.zero, self.one = Fraction(0), Fraction(1)
            self.uniformizer = Fraction(self.p)
        else:
            self.zero = LaurentScalar(self._ops, 0, (), (1,))
            self.one = LaurentScalar(self._ops, 0, (1,), (1,))
            self.uniformizer = LaurentScalar(self._ops, 1, (1,), (1,))

    def __repr__(self):
        return f"Field({self.config.backend}, q={self.q})"

    def __eq__(self, other):
        return isinstance(other, Field) and other.config == self.config

    def __hash__(self):
        return hash(self.config)

    # construction ---------------------------------------------------------

    def from_int(self, n: int) -> Scalar:
        if self.backend == RATIONAL:
            return Fraction(n)
        return LaurentScalar(self._ops, 0, (n % self.p,), (1,))

    def from_residue(self, code: int) -> Scalar:
        """Canonical lift of a residue code: an integer for ``rational``, a constant for ``laurent``."""
        if self.backend == RATIONAL:
            return Fraction(code)
        return LaurentScalar(self._ops, 0, (code,), (1,))

    def laurent(self, k: int, num: Sequence[int], den: Sequence[int] = (1,)) -> LaurentScalar:
        if self.backend != LAURENT:
            raise FieldError("laurent() needs the laurent backend")
        return LaurentScalar(self._ops, k, tuple(num), tuple(den))

    def pi_power(self, k: int) -> Scalar:
        if self.backend == RATIONAL:
            return Fraction(self.p) ** k
        return LaurentScalar(self._ops, k, (1,), (1,), _canonical=True)

    def lift_digits(self, digits: Sequence[int]) -> Scalar:
        if self.backend == RATIONAL:
            v = 0
            for d in reversed(digits):
                v = v * self.p + d
            return Fraction(v)
        return LaurentScalar(self._ops, 0, tuple(digits), (1,))

    def coerce(self, x) -> Scalar:
        if isinstance(x, int):
            return self.from_int(x)
        if self.backend == RATIONAL and isinstance(x, Fraction):
            return x
        if self.backend == LAURENT and isinstance(x, LaurentScalar):
            return x
        raise TypeError(f"cannot coerce {x!r} into {self}")

    # valuations ------------------------------------------------------------

    def valuation(self, x: Scalar):
        if not x:
            return PLUS_INFINITY
        if self.backend == RATIONAL:
            return _vp(x.numerator, self.p) - _vp(x.denominator, self.p)
        return x.k

    def unit_part(self, x: Scalar) -> Scalar:
        return x / self.pi_power(self.valuation(x))

    def residue_of(self, x: Scalar) -> int:
        """Image of an integral element in F_q."""
        return self.reduce(x, 1).digits[0]

    def quotient_ring(self, N: int) -> QuotientRing:
        ring = self._qrings.get(N)
        if ring is None:
            ring = self._qrings[N] = QuotientRing(self, N)
        return ring

    def reduce(self, x: Scalar, N: int) -> QuotientElement:
        ring = self.quotient_ring(N)
        v = self.valuation(x)
        if v < 0:
            raise NegativeValuation(f"{x!r} has negative valuation {v}")
        if N == 0:
            return ring.element(())
        if v >= N:
            return ring.element((0,) * N)
        if self.backend == RATIONAL:
            mod = self.p**N
            val = x.numerator * pow(x.denominator, -1, mod) % mod
            digits = []
            for _ in range(N):
                val, r = divmod(val, self.p)
                digits.append(r)
            return ring.element(digits)
        if x.den == (1,):
            series = x.num
        else:
            series = self._ops.mul(x.num, tuple(self._ops.series_inverse(x.den, N - x.k)))
        digits = [0] * x.k + list(series[: N - x.k])
        digits += [0] * (N - len(digits))
        return ring.element(digits)

    def reduce_quotient(self, x: Scalar, y: Scalar, N: int) -> tuple[int, ...]:
        """Digits of x / y mod pi^N, avoiding a canonical-form division on the laurent backend."""
        if self.backend == RATIONAL or not x:
            return self.reduce(x / y, N).digits
        shift = x.k - y.k
        if shift < 0:
            raise NegativeValuation("quotient has negative valuation")
        M = N - shift
        if M <= 0:
            return (0,) * N
        ops = self._ops
        num = ops.mul(x.num, y.den)[:M]
        den = ops.mul(x.den, y.num)[:M]
        series = ops.mul(num, tuple(ops.series_inverse(den, M)))[:M]
        digits = [0] * shift + list(series)
        return tuple(digits + [0] * (N - len(digits)))

    def unit_representatives(self) -> list[Scalar]:
        """Lifts of F_q^x: integers 1..p-1 (``rational``) or the nonzero constants (``laurent``)."""
        return [self.from_residue(c) for c in range(1, self.q)]

    # random sampling ---------------------------------------------------------

    def random_integral(self, rng, size_bound: int = 20) -> Scalar:
        """A random element of O with small numerator/denominator data."""
        if self.backend == RATIONAL:
            num = rng.randint(-size_bound, size_bound)
            while True:
                den = rng.randint(1, max(1, size_bound // 4) + 1)
                if den % self.p:
                    break
            return Fraction(num, den)
        deg = rng.randint(0, 3)
        num = [rng.randrange(self.q) for _ in range(deg + 1)]
        den = [rng.randrange(1, self.q)] + [rng.randrange(self.q) for _ in range(rng.randint(0, 2))]
        return LaurentScalar(self._ops, 0, tuple(num), tuple(den))

    def random_unit(self, rng, size_bound: int = 20) -> Scalar:
        while True:
            x = self.random_integral(rng, size_bound)
            if x and self.valuation(x) == 0:
                return x

    def random_scalar(self, rng, size_bound: int = 20, vrange: tuple[int, int] = (-3, 3)) -> Scalar:
        """A random nonzero element of F."""
        while True:
            x = self.random_integral(rng, size_bound)
            if x:
                return x * self.pi_power(rng.randint(*vrange))

    # text I/O -----------------------------------------------------------------

    def to_str(self, x: Scalar) -> str:
        if self.backend == RATIONAL:
            return str(x)
        if not x:
            return "0"
        return f"t^{x.k}*({_poly_str(x.num)})/({_poly_str(x.den)})"

    def parse(self, text: str) -> Scalar:
        """Parse ``a`` or ``a/b`` (rational) or a polynomial such as ``1+2*t^3`` (laurent).

        Laurent coefficients are integers reduced into F_p, or ``[c]`` for a residue code;
        ``num/den`` quotients of such polynomials are accepted too.
        """
        text = text.strip().replace(" ", "")
        if self.backend == RATIONAL:
            return Fraction(text)
        m = re.fullmatch(r"t\^(-?\d+)\*\((.*)\)/\((.*)\)", text)
        if m:  # the to_str form
            return self.pi_power(int(m.group(1))) * self.parse(m.group(2)) / self.parse(m.group(3))
        if "/" in text:
            num, den = text.split("/", 1)
            return self.parse(num.strip("()")) / self.parse(den.strip("()"))
        coeffs: dict[int, int] = {}
        for sign, term in re.findall(r"([+-]?)([^+-]+)", text):
            m = re.fullmatch(r"(?:(\[\d+\]|\d+)\*?)?(?:(t)(?:\^(\d+))?)?", term)
            if not m or (m.group(1) is None and m.group(2) is None):
                raise FieldError(f"cannot parse {term!r}")
            c = m.group(1)
            if c is None:
                code = 1
            elif c.startswith("["):
                code = int(c[1:-1])
            else:
                code = int(c) % self.p
            if sign == "-":
                code = self.residue.neg(code)
            e = 0 if m.group(2) is None else int(m.group(3) or 1)
            coeffs[e] = self.residue.add(coeffs.get(e, 0), code)
        if not coeffs:
            return self.zero
        poly = [coeffs.get(i, 0) for i in range(max(coeffs) + 1)]
        return LaurentScalar(self._ops, 0, tuple(poly), (1,))


def _vp(n: int, p: int) -> int:
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _poly_str(c: Sequence[int]) -> str:
    terms = []
    for i, x in enumerate(c):
        if x:
            coef = f"[{x}]"
            terms.append(coef if i == 0 else f"{coef}*t^{i}")
    return "+".join(terms) or "0"


def field_for(q: int, backend: str | None = None) -> Field:
    return Field(FieldConfig.for_q(q, backend))
