"""Exact scalar arithmetic: rational functions in q with integer coefficients.

A :class:`QScalar` is a reduced fraction ``q^off * num / den`` where ``num``
and ``den`` are ordinary integer polynomials in q, ``den`` has a nonzero
constant term and positive leading coefficient, and ``gcd(num, den) = 1``.
Negative powers of q live in the offset, so the bulk of the arithmetic
(anything produced by shuffle products) never touches polynomial gcd's.

q is never specialized to a number anywhere in the package.
"""

from __future__ import annotations

from math import gcd as _int_gcd

Poly = tuple  # integer coefficients, lowest degree first, no trailing zeros

_ZERO: Poly = ()
_ONE: Poly = (1,)


def _trim(cs) -> Poly:
    n = len(cs)
    while n and cs[n - 1] == 0:
        n -= 1
    return tuple(cs[:n])


def poly_add(a: Poly, b: Poly) -> Poly:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def poly_neg(a: Poly) -> Poly:
    return tuple(-c for c in a)


def poly_mul(a: Poly, b: Poly) -> Poly:
    if not a or not b:
        return _ZERO
    if len(a) == 1:
        ca = a[0]
        return tuple(ca * c for c in b)
    if len(b) == 1:
        cb = b[0]
        return tuple(c * cb for c in a)
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                if cb:
                    out[i + j] += ca * cb
    return _trim(out)


def poly_content(a: Poly) -> int:
    g = 0
    for c in a:
        g = _int_gcd(g, c)
        if g == 1:
            return 1
    return g


def poly_primitive(a: Poly) -> tuple[int, Poly]:
    """Split a nonzero polynomial into content * primitive part (positive lead)."""
    g = poly_content(a)
    if a[-1] < 0:
        g = -g
    if g == 1:
        return 1, a
    return g, tuple(c // g for c in a)


def _prem_primitive(a: Poly, b: Poly) -> Poly:
    """Primitive part of a remainder of a by b (content stripped eagerly)."""
    db = len(b) - 1
    lb = b[-1]
    a = list(a)
    while len(a) - 1 >= db:
        la = a[-1]
        g = _int_gcd(la, lb)
        m1 = lb // g
        m2 = la // g
        shift = len(a) - 1 - db
        if m1 != 1:
            a = [c * m1 for c in a]
        for i, cb in enumerate(b):
            a[shift + i] -= m2 * cb
        n = len(a)
        while n and a[n - 1] == 0:
            n -= 1
        del a[n:]
        if not a:
            return _ZERO
        c = poly_content(a)
        if c > 1:
            a = [x // c for x in a]
    return tuple(a)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Primitive gcd over Z (positive leading coefficient)."""
    if not a:
        return poly_primitive(b)[1] if b else _ZERO
    if not b:
        return poly_primitive(a)[1]
    ca, a = poly_primitive(a)
    cb, b = poly_primitive(b)
    if len(a) < len(b):
        a, b = b, a
    while b:
        if len(b) == 1:  # b is a nonzero constant: primitive => 1
            a = _ONE
            break
        r = _prem_primitive(a, b)
        a, b = b, r
    if a[-1] < 0:
        a = poly_neg(a)
    cg = _int_gcd(abs(ca), abs(cb))
    return tuple(c * cg for c in a) if cg != 1 else a


def poly_divexact(a: Poly, b: Poly) -> Poly:
    """Exact division a / b; raises ValueError if not exact."""
    if not a:
        return _ZERO
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    if b == _ONE:
        return a
    if len(b) == 1:
        d = b[0]
        if any(c % d for c in a):
            raise ValueError("inexact polynomial division")
        return tuple(c // d for c in a)
    a = list(a)
    out = [0] * (len(a) - len(b) + 1)
    lb = b[-1]
    for k in range(len(out) - 1, -1, -1):
        c = a[k + len(b) - 1]
        if c % lb:
            raise ValueError("inexact polynomial division")
        d = c // lb
        out[k] = d
        if d:
            for i, cb in enumerate(b):
                a[k + i] -= d * cb
    if any(a[: len(b) - 1]):
        raise ValueError("inexact polynomial division")
    return _trim(out)


class QScalar:
    """An exact rational function in q, kept in canonical reduced form."""

    __slots__ = ("off", "num", "den")

    def __init__(self, num: Poly = _ZERO, den: Poly = _ONE, off: int = 0, _reduced=False):
        if not den:
            raise ZeroDivisionError("zero denominator")
        if not num:
            self.off, self.num, self.den = 0, _ZERO, _ONE
            return
        if not _reduced:
            # strip monomial factors into the offset
            k = 0
            while num[k] == 0:
                k += 1
            if k:
                num = num[k:]
                off += k
            j = 0
            while den[j] == 0:
                j += 1
            if j:
                den = den[j:]
                off -= j
            if den != _ONE and den != (-1,):
                g = poly_gcd(num, den)
                if g != _ONE:
                    num = poly_divexact(num, g)
                    den = poly_divexact(den, g)
            if den[-1] < 0:
                num, den = poly_neg(num), poly_neg(den)
        self.off, self.num, self.den = off, num, den

    # -- constructors ---------------------------------------------------

    @staticmethod
    def from_int(n: int) -> "QScalar":
        return QScalar((n,) if n else _ZERO)

    @staticmethod
    def q_power(k: int) -> "QScalar":
        return QScalar(_ONE, _ONE, k, _reduced=True)

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_one(self) -> bool:
        return self.off == 0 and self.num == _ONE and self.den == _ONE

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "QScalar") -> "QScalar":
        if not self.num:
            return other
        if not other.num:
            return self
        off = min(self.off, other.off)
        d1, d2 = self.den, other.den
        if d1 == _ONE and d2 == _ONE:
            num = poly_add(self._shifted(off), other._shifted(off))
            return QScalar(num, _ONE, off) if num else _Q_ZERO
        if d1 == d2:
            num = poly_add(self._shifted(off), other._shifted(off))
            return QScalar(num, d1, off) if num else _Q_ZERO
        g = poly_gcd(d1, d2)
        if g == _ONE:
            num = poly_add(poly_mul(self._shifted(off), d2),
                           poly_mul(other._shifted(off), d1))
            if not num:
                return _Q_ZERO
            # coprime denominators: result is already reduced
            return QScalar(num, poly_mul(d1, d2), off, _reduced=True)._restrip()
        d2r = poly_divexact(d2, g)
        num = poly_add(poly_mul(self._shifted(off), d2r),
                       poly_mul(other._shifted(off), poly_divexact(d1, g)))
        if not num:
            return _Q_ZERO
        return QScalar(num, poly_mul(d1, d2r), off)

    def _restrip(self) -> "QScalar":
        # re-normalize monomial factors after a _reduced construction
        num, den, off = self.num, self.den, self.off
        k = 0
        while num[k] == 0:
            k += 1
        if k:
            return QScalar(num[k:], den, off + k, _reduced=True)
        return self

    def _shifted(self, off: int) -> Poly:
        d = self.off - off
        return (0,) * d + self.num if d else self.num

    def __neg__(self) -> "QScalar":
        return QScalar(poly_neg(self.num), self.den, self.off, _reduced=True)

    def __sub__(self, other: "QScalar") -> "QScalar":
        return self + (-other)

    def __mul__(self, other: "QScalar") -> "QScalar":
        n1, d1 = self.num, self.den
        n2, d2 = other.num, other.den
        if not n1 or not n2:
            return _Q_ZERO
        off = self.off + other.off
        if d1 == _ONE and d2 == _ONE:
            return QScalar(poly_mul(n1, n2), _ONE, off, _reduced=True)
        # cross-reduce before multiplying: results stay canonical
        if d2 != _ONE:
            g = poly_gcd(n1, d2)
            if g != _ONE:
                n1 = poly_divexact(n1, g)
                d2 = poly_divexact(d2, g)
        if d1 != _ONE:
            g = poly_gcd(n2, d1)
            if g != _ONE:
                n2 = poly_divexact(n2, g)
                d1 = poly_divexact(d1, g)
        den = poly_mul(d1, d2)
        if den[-1] < 0:
            den = poly_neg(den)
            n1 = poly_neg(n1)
        return QScalar(poly_mul(n1, n2), den, off, _reduced=True)._restrip()

    def mul_qpow(self, k: int) -> "QScalar":
        if not self.num or not k:
            return self
        return QScalar(self.num, self.den, self.off + k, _reduced=True)

    def __truediv__(self, other: "QScalar") -> "QScalar":
        if not other.num:
            raise ZeroDivisionError("division by zero QScalar")
        if not self.num:
            return _Q_ZERO
        inv = QScalar(other.den, other.num, -other.off)
        return self * inv

    def __eq__(self, other) -> bool:
        if not isinstance(other, QScalar):
            return NotImplemented
        return (self.off == other.off and self.num == other.num
                and self.den == other.den)

    def __hash__(self):
        return hash((self.off, self.num, self.den))

    # -- output -----------------------------------------------------------

    def as_poly_pair(self) -> tuple[list, list]:
        """(num, den) as coefficient lists, lowest degree first, offset cleared."""
        if not self.num:
            return [0], [1]
        if self.off >= 0:
            return [0] * self.off + list(self.num), list(self.den)
        return list(self.num), [0] * (-self.off) + list(self.den)

    def __repr__(self):
        num, den = self.as_poly_pair()

        def fmt(p):
            terms = []
            for k, c in enumerate(p):
                if not c:
                    continue
                if k == 0:
                    terms.append(f"{c}")
                else:
                    mon = "q" if k == 1 else f"q^{k}"
                    if c == 1:
                        terms.append(mon)
                    elif c == -1:
                        terms.append(f"-{mon}")
                    else:
                        terms.append(f"{c}*{mon}")
            return " + ".join(terms).replace("+ -", "- ") or "0"

        if den == [1]:
            return fmt(num)
        return f"({fmt(num)})/({fmt(den)})"


_Q_ZERO = QScalar()

ZERO = _Q_ZERO
ONE = QScalar.from_int(1)


def q_int(n: int, d: int = 1) -> QScalar:
    """The balanced q-integer [n] in q_i = q^d: q^{d(n-1)} + q^{d(n-3)} + ...."""
    if n < 0:
        return -q_int(-n, d)
    if n == 0:
        return _Q_ZERO
    coeffs = [0] * (2 * d * (n - 1) + 1)
    for k in range(n):
        coeffs[2 * d * k] = 1
    return QScalar(tuple(coeffs), _ONE, -d * (n - 1))


def q_factorial(n: int, d: int = 1) -> QScalar:
    out = ONE
    for k in range(2, n + 1):
        out = out * q_int(k, d)
    return out


def q_hat() -> QScalar:
    """q - q^{-1}."""
    return QScalar((-1, 0, 1), _ONE, -1)
