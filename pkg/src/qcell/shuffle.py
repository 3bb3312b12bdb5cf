"""Canonical forms for the positive part of the quantized enveloping algebra.

Elements are represented through the braided shuffle model: the generator
E_i maps to the one-letter word (i), products map to braided shuffle
products, and two expressions are equal in the algebra iff their canonical
forms (word-coefficient maps) coincide.  The braiding exponent convention
(a global sign on <a, b> per transposition) is selected at startup as the
one that kills the q-Serre relators, and is recorded on the algebra object.

Words are tuples of 1-based simple-root indices; coefficients are QScalar.
"""

from __future__ import annotations

from functools import lru_cache

from qcell.qpoly import QScalar, q_factorial, ZERO, ONE
from qcell.rootsys import CartanType, bilinear_matrix, cartan_matrix, symmetrizers, pair


class NotHomogeneousError(ValueError):
    pass


def word_content(ct: CartanType, word):
    v = [0] * ct.rank
    for i in word:
        v[i - 1] += 1
    return tuple(v)


class ShuffleAlgebra:
    """Shuffle-model arithmetic for one Cartan type.

    Carries the per-type memo tables; instances are cached by
    :func:`shuffle_algebra`, so all elements of one type share them.
    """

    def __init__(self, ct: CartanType, sign: int | None = None):
        self.ct = ct
        self.B = bilinear_matrix(ct)
        self._memo = {}
        self.sign = sign if sign is not None else self._select_sign()

    # -- convention selection --------------------------------------------

    def _select_sign(self) -> int:
        if self.ct.rank == 1:
            return -1
        C = cartan_matrix(self.ct)
        i, j = next((a + 1, b + 1) for a in range(self.ct.rank)
                    for b in range(self.ct.rank) if a != b and C[a][b])
        for sign in (-1, 1):
            probe = ShuffleAlgebra(self.ct, sign=sign)
            if probe.serre_relator(i, j).is_zero() and probe.serre_relator(j, i).is_zero():
                return sign
        raise AssertionError("no braiding convention kills the q-Serre relators")

    # -- word-level shuffle ------------------------------------------------

    def _shuffle_words(self, u, v):
        """Braided shuffle of two words: dict word -> QScalar."""
        key = (u, v)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if not u:
            out = {v: ONE}
        elif not v:
            out = {u: ONE}
        else:
            acc = {}
            a, b = u[0], v[0]
            for w, c in self._shuffle_words(u[1:], v).items():
                w2 = (a,) + w
                acc[w2] = acc.get(w2, ZERO) + c
            e = self.sign * sum(self.B[x - 1][b - 1] for x in u)
            for w, c in self._shuffle_words(u, v[1:]).items():
                w2 = (b,) + w
                acc[w2] = acc.get(w2, ZERO) + c.mul_qpow(e)
            out = {w: c for w, c in acc.items() if not c.is_zero()}
        self._memo[key] = out
        return out

    # -- element constructors ----------------------------------------------

    def zero(self) -> "ShuffleElement":
        return ShuffleElement(self, {})

    def one(self) -> "ShuffleElement":
        return ShuffleElement(self, {(): ONE})

    def letter(self, i: int) -> "ShuffleElement":
        if not 1 <= i <= self.ct.rank:
            raise IndexError(f"generator index {i} out of range")
        return ShuffleElement(self, {(i,): ONE})

    def from_terms(self, terms) -> "ShuffleElement":
        return ShuffleElement(self, {w: c for w, c in terms.items() if not c.is_zero()})

    # -- operators -----------------------------------------------------------

    def ad(self, x: "ShuffleElement", y: "ShuffleElement") -> "ShuffleElement":
        """q-commutator [x, y] = xy - q^{<deg x, deg y>} yx for homogeneous x, y."""
        e = pair(self.ct, x.content(), y.content())
        return x * y - (y * x).scaled(QScalar.q_power(e))

    def ad_power(self, i: int, n: int, y: "ShuffleElement") -> "ShuffleElement":
        out = y
        for _ in range(n):
            out = self.ad(self.letter(i), out)
        return out

    def ad_divided_power(self, i: int, n: int, y: "ShuffleElement") -> "ShuffleElement":
        d = symmetrizers(self.ct)[i - 1]
        return self.ad_power(i, n, y).scaled(ONE / q_factorial(n, d))

    def serre_relator(self, i: int, j: int) -> "ShuffleElement":
        """(ad_q E_i)^{1 - c_ij}(E_j); zero iff the embedding convention holds."""
        c = cartan_matrix(self.ct)[i - 1][j - 1]
        return self.ad_power(i, 1 - c, self.letter(j))

    def nested_bracket(self, letters) -> "ShuffleElement":
        """Left-nested bracket of single letters: [[...[E_a, E_b], ...], E_z]."""
        out = self.letter(letters[0])
        for i in letters[1:]:
            out = self.ad(out, self.letter(i))
        return out


@lru_cache(maxsize=None)
def shuffle_algebra(ct: CartanType) -> ShuffleAlgebra:
    return ShuffleAlgebra(ct)


class ShuffleElement:
    """A canonical-form element: finite map from words to nonzero QScalars."""

    __slots__ = ("alg", "terms")

    def __init__(self, alg: ShuffleAlgebra, terms: dict):
        self.alg = alg
        self.terms = terms

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return (isinstance(other, ShuffleElement) and self.alg is other.alg
                and self.terms == other.terms)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def content(self):
        """Common Q-degree of the words, in root coordinates."""
        it = iter(self.terms)
        try:
            first = next(it)
        except StopIteration:
            raise NotHomogeneousError("Q-degree of the zero element is undefined")
        v = word_content(self.alg.ct, first)
        for w in it:
            if word_content(self.alg.ct, w) != v:
                raise NotHomogeneousError("element is not Q-homogeneous")
        return v

    def is_homogeneous(self) -> bool:
        if not self.terms:
            return True
        try:
            self.content()
            return True
        except NotHomogeneousError:
            return False

    def __add__(self, other: "ShuffleElement") -> "ShuffleElement":
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w, ZERO) + c
            if s.is_zero():
                out.pop(w, None)
            else:
                out[w] = s
        return ShuffleElement(self.alg, out)

    def __neg__(self):
        return ShuffleElement(self.alg, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c: QScalar) -> "ShuffleElement":
        if c.is_zero():
            return ShuffleElement(self.alg, {})
        if c.is_one():
            return self
        return ShuffleElement(self.alg, {w: x * c for w, x in self.terms.items()})

    def __mul__(self, other: "ShuffleElement") -> "ShuffleElement":
        alg = self.alg
        out = {}
        for u, cu in self.terms.items():
            for v, cv in other.terms.items():
                c = cu * cv
                for w, f in alg._shuffle_words(u, v).items():
                    s = out.get(w, ZERO) + c * f
                    if s.is_zero():
                        out.pop(w, None)
                    else:
                        out[w] = s
        return ShuffleElement(alg, out)

    def bracket(self, other: "ShuffleElement") -> "ShuffleElement":
        return self.alg.ad(self, other)

    def __len__(self):
        return len(self.terms)

    def to_json(self):
        items = sorted(self.terms.items())
        out = []
        for w, c in items:
            num, den = c.as_poly_pair()
            out.append({"word": list(w), "coef": {"num": num, "den": den}})
        return out

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for w, c in sorted(self.terms.items()):
            bits.append(f"({c!r})*{''.join(map(str, w))}")
        return " + ".join(bits)


def monomial_element(alg: ShuffleAlgebra, letters) -> ShuffleElement:
    """Canonical form of the product E_{letters[0]} ... E_{letters[-1]}."""
    out = alg.one()
    for i in letters:
        out = out * alg.letter(i)
    return out
