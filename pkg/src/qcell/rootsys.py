"""Exact root-system and Weyl-group combinatorics for the finite simple types.

Everything is computed in the simple-root basis.  Roots are integer tuples,
weights and coweights are tuples of :class:`fractions.Fraction`.  The bilinear
form is normalized so that short roots have squared length 2; simple-root
labelling follows the standard numbering for each family (chains for A/B/C/F,
the fork at the high end for D, branch node 2 attached to node 4 for E).

All operations are pure functions on immutable values; the per-type tables
are cached at first use.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, cached_property

RANK_BOUNDS = {"A": (1, None), "B": (2, None), "C": (2, None), "D": (4, None),
               "E": (6, 8), "F": (4, 4), "G": (2, 2)}


class InvalidCartanType(ValueError):
    pass


class NotReducedError(ValueError):
    """Raised when a word fails the distinct-positive radical-root test."""


@dataclass(frozen=True)
class CartanType:
    family: str
    rank: int

    def __post_init__(self):
        lo, hi = RANK_BOUNDS.get(self.family, (None, None))
        if lo is None:
            raise InvalidCartanType(f"unknown family {self.family!r}")
        if self.rank < lo or (hi is not None and self.rank > hi):
            raise InvalidCartanType(f"rank {self.rank} invalid for family {self.family}")

    @staticmethod
    def parse(s: str) -> "CartanType":
        s = s.strip()
        if len(s) < 2 or not s[1:].isdigit():
            raise InvalidCartanType(f"cannot parse Cartan type {s!r}")
        return CartanType(s[0].upper(), int(s[1:]))

    def __str__(self):
        return f"{self.family}{self.rank}"

    def to_json(self):
        return {"family": self.family, "rank": self.rank}


def _edges(ct: CartanType):
    """Dynkin diagram edges as (i, j, <a_i, a_j>) with 1-based nodes."""
    n = ct.rank
    f = ct.family
    chain = [(i, i + 1) for i in range(1, n)]
    if f == "A":
        return [(i, j, -1) for i, j in chain]
    if f == "B":  # node n short
        return [(i, j, -2) for i, j in chain]
    if f == "C":  # node n long
        return [(i, j, -1) for i, j in chain[:-1]] + [(n - 1, n, -2)]
    if f == "D":
        return ([(i, j, -1) for i, j in chain[:-1]] + [(n - 2, n, -1)])
    if f == "E":
        edges = [(1, 3), (3, 4), (4, 5), (5, 6), (2, 4)]
        if n >= 7:
            edges.append((6, 7))
        if n == 8:
            edges.append((7, 8))
        return [(i, j, -1) for i, j in edges]
    if f == "F":  # nodes 1,2 long; 3,4 short
        return [(1, 2, -2), (2, 3, -2), (3, 4, -1)]
    if f == "G":  # node 1 short, node 2 long
        return [(1, 2, -3)]
    raise InvalidCartanType(ct.family)


def _norms(ct: CartanType):
    """Squared lengths <a_i, a_i> of the simple roots (2, 4 or 6)."""
    n = ct.rank
    f = ct.family
    if f in ("A", "D", "E"):
        return [2] * n
    if f == "B":
        return [4] * (n - 1) + [2]
    if f == "C":
        return [2] * (n - 1) + [4]
    if f == "F":
        return [4, 4, 2, 2]
    if f == "G":
        return [2, 6]
    raise InvalidCartanType(f)


@lru_cache(maxsize=None)
def bilinear_matrix(ct: CartanType):
    """B with B[i][j] = <a_{i+1}, a_{j+1}> (0-based storage)."""
    n = ct.rank
    B = [[0] * n for _ in range(n)]
    for i, v in enumerate(_norms(ct)):
        B[i][i] = v
    for i, j, v in _edges(ct):
        B[i - 1][j - 1] = v
        B[j - 1][i - 1] = v
    return tuple(tuple(row) for row in B)


@lru_cache(maxsize=None)
def cartan_matrix(ct: CartanType):
    """c_ij = 2 <a_i, a_j> / <a_i, a_i>."""
    B = bilinear_matrix(ct)
    n = ct.rank
    C = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            num = 2 * B[i][j]
            assert num % B[i][i] == 0
            C[i][j] = num // B[i][i]
    return tuple(tuple(row) for row in C)


def symmetrizers(ct: CartanType):
    """d_i = <a_i, a_i>/2, in {1, 2, 3}."""
    return tuple(v // 2 for v in _norms(ct))


def pair(ct: CartanType, x, y):
    """<x, y> for vectors in simple-root coordinates (int or Fraction entries)."""
    B = bilinear_matrix(ct)
    total = 0
    for i, xi in enumerate(x):
        if xi:
            row = B[i]
            total += xi * sum(row[j] * yj for j, yj in enumerate(y) if yj)
    return total


def reflect(ct: CartanType, i: int, v):
    """Simple reflection s_i(v) = v - <v, a_i^vee> a_i; 1-based i."""
    if not 1 <= i <= ct.rank:
        raise IndexError(f"reflection index {i} out of range for {ct}")
    C = cartan_matrix(ct)
    c = sum(C[i - 1][j] * vj for j, vj in enumerate(v) if vj)
    if not c:
        return tuple(v)
    out = list(v)
    out[i - 1] -= c
    return tuple(out)


def height(v) -> int:
    return sum(v)


def is_positive(v) -> bool:
    return any(v) and all(c >= 0 for c in v)


@lru_cache(maxsize=None)
def positive_roots(ct: CartanType):
    """All positive roots, sorted by (height, coordinates)."""
    n = ct.rank
    simples = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
    seen = set(simples)
    frontier = list(simples)
    while frontier:
        new = []
        for v in frontier:
            for i in range(1, n + 1):
                w = reflect(ct, i, v)
                if w not in seen and is_positive(w):
                    seen.add(w)
                    new.append(w)
        frontier = new
    return tuple(sorted(seen, key=lambda v: (height(v), v)))


def simple_root(ct: CartanType, i: int):
    return tuple(1 if j == i - 1 else 0 for j in range(ct.rank))


# ---------------------------------------------------------------------------
# Weyl group elements, stored by their action on the simple roots.
# ---------------------------------------------------------------------------

class WeylElement:
    """A Weyl group element together with its inverse, both as column tables.

    ``cols[j]`` is w(a_{j+1}) in root coordinates.  Multiplication composes
    actions: (u * v)(x) = u(v(x)).
    """

    __slots__ = ("ct", "cols", "inv_cols")

    def __init__(self, ct, cols, inv_cols):
        self.ct = ct
        self.cols = cols
        self.inv_cols = inv_cols

    @staticmethod
    def identity(ct: CartanType) -> "WeylElement":
        cols = tuple(simple_root(ct, i) for i in range(1, ct.rank + 1))
        return WeylElement(ct, cols, cols)

    @staticmethod
    def simple(ct: CartanType, i: int) -> "WeylElement":
        cols = tuple(reflect(ct, i, simple_root(ct, j)) for j in range(1, ct.rank + 1))
        return WeylElement(ct, cols, cols)

    def apply(self, v):
        n = self.ct.rank
        out = [0] * n
        for j, vj in enumerate(v):
            if vj:
                col = self.cols[j]
                for k in range(n):
                    if col[k]:
                        out[k] += vj * col[k]
        return tuple(out)

    def apply_inverse(self, v):
        return self.inverse().apply(v)

    def __mul__(self, other: "WeylElement") -> "WeylElement":
        cols = tuple(self.apply(c) for c in other.cols)
        inv = tuple(other.inverse().apply(c) for c in self.inv_cols)
        return WeylElement(self.ct, cols, inv)

    def inverse(self) -> "WeylElement":
        return WeylElement(self.ct, self.inv_cols, self.cols)

    def is_identity(self) -> bool:
        return self.cols == WeylElement.identity(self.ct).cols

    def key(self):
        return self.cols

    def __eq__(self, other):
        return isinstance(other, WeylElement) and self.cols == other.cols

    def __hash__(self):
        return hash(self.cols)

    def length(self) -> int:
        inv = self.inverse()
        return sum(1 for b in positive_roots(self.ct) if not is_positive(inv.apply(b)))

    def right_descents(self):
        """Letters b with w(a_b) < 0, i.e. l(w s_b) < l(w)."""
        return [b for b in range(1, self.ct.rank + 1)
                if not is_positive(self.apply(simple_root(self.ct, b)))]

    def left_descents(self):
        return [b for b in range(1, self.ct.rank + 1)
                if not is_positive(self.apply_inverse(simple_root(self.ct, b)))]


@lru_cache(maxsize=None)
def _simple_elements(ct: CartanType):
    return tuple(WeylElement.simple(ct, i) for i in range(1, ct.rank + 1))


def element_of_word(ct: CartanType, letters) -> WeylElement:
    simples = _simple_elements(ct)
    w = WeylElement.identity(ct)
    for i in letters:
        w = w * simples[i - 1]
    return w


def canonical_word(w: WeylElement):
    """The reduced word taking the smallest left descent first."""
    ct = w.ct
    simples = _simple_elements(ct)
    letters = []
    while True:
        ds = w.left_descents()
        if not ds:
            break
        i = ds[0]
        letters.append(i)
        w = simples[i - 1] * w
    return tuple(letters)


@lru_cache(maxsize=None)
def longest_element(ct: CartanType, allowed: frozenset) -> WeylElement:
    """Longest element of the parabolic subgroup on the given letters."""
    # Send a vector strictly dominant on `allowed` to its antidominant chamber.
    v = [Fraction(0)] * ct.rank
    for i in allowed:
        fw = fundamental_weight(ct, i)
        v = [a + b for a, b in zip(v, fw)]
    v = tuple(v)
    C = cartan_matrix(ct)
    w = WeylElement.identity(ct)
    simples = _simple_elements(ct)
    while True:
        for i in sorted(allowed):
            c = sum(C[i - 1][j] * vj for j, vj in enumerate(v) if vj)
            if c > 0:
                v = reflect(ct, i, v)
                w = simples[i - 1] * w
                break
        else:
            return w


# ---------------------------------------------------------------------------
# Reduced words and radical roots
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedWord:
    """A reduced word with its radical roots b_1..b_N cached on first use."""

    ct: CartanType
    letters: tuple

    def __post_init__(self):
        for i in self.letters:
            if not 1 <= i <= self.ct.rank:
                raise IndexError(f"letter {i} out of range for {self.ct}")
        self.betas  # force the reducedness check

    @cached_property
    def betas(self):
        """b_k = s_{i_1} ... s_{i_{k-1}}(a_{i_k}); all positive and distinct."""
        ct = self.ct
        simples = _simple_elements(ct)
        out = []
        prefix = WeylElement.identity(ct)
        for i in self.letters:
            b = prefix.apply(simple_root(ct, i))
            if not is_positive(b):
                raise NotReducedError(f"word {self.letters} is not reduced: "
                                      f"negative radical root at position {len(out) + 1}")
            out.append(b)
            prefix = prefix * simples[i - 1]
        if len(set(out)) != len(out):
            raise NotReducedError(f"word {self.letters} is not reduced: repeated radical root")
        return tuple(out)

    @cached_property
    def prefixes(self):
        """prefixes[k] = s_{i_1} ... s_{i_k} as an element (prefixes[0] = e)."""
        ct = self.ct
        simples = _simple_elements(ct)
        out = [WeylElement.identity(ct)]
        for i in self.letters:
            out.append(out[-1] * simples[i - 1])
        return tuple(out)

    @property
    def element(self) -> WeylElement:
        return self.prefixes[-1]

    @cached_property
    def support(self):
        return frozenset(self.letters)

    def __len__(self):
        return len(self.letters)

    def subword(self, a: int, b: int) -> "ReducedWord":
        """Letters a..b inclusive, 1-based."""
        return ReducedWord(self.ct, self.letters[a - 1:b])

    def to_json(self):
        return list(self.letters)


def apply_word(ct: CartanType, letters, v):
    """w(v) for w = s_{i_1} ... s_{i_N} (reflections applied right to left)."""
    for i in reversed(letters):
        v = reflect(ct, i, v)
    return v


def longest_word(ct: CartanType, exclude=()) -> ReducedWord:
    """Canonical reduced word for w_o, or for the longest element of the
    parabolic subgroup on the letters outside `exclude`."""
    allowed = frozenset(range(1, ct.rank + 1)) - frozenset(exclude)
    w = longest_element(ct, allowed)
    return ReducedWord(ct, canonical_word(w))


def parabolic_element(ct: CartanType, J) -> WeylElement:
    J = frozenset(J)
    if not J:
        raise ValueError("J must be nonempty")
    w_o = longest_element(ct, frozenset(range(1, ct.rank + 1)))
    w_oJ = longest_element(ct, frozenset(range(1, ct.rank + 1)) - J)
    return w_oJ * w_o


def parabolic_word(ct: CartanType, J) -> ReducedWord:
    """Canonical reduced word for w_o^J w_o."""
    return ReducedWord(ct, canonical_word(parabolic_element(ct, J)))


def radical_roots(ct: CartanType, letters):
    return ReducedWord(ct, tuple(letters)).betas


def eta_and_px(word: ReducedWord):
    """eta(k) = i_k and the positions whose letter occurs exactly once."""
    eta = word.letters
    counts = {}
    for i in eta:
        counts[i] = counts.get(i, 0) + 1
    px = frozenset(k + 1 for k, i in enumerate(eta) if counts[i] == 1)
    return eta, px


# ---------------------------------------------------------------------------
# Weights, coweights, gradings
# ---------------------------------------------------------------------------

def _solve(mat, rhs):
    """Exact Gaussian solve of mat * x = rhs over Fractions."""
    n = len(mat)
    M = [[Fraction(mat[i][j]) for j in range(n)] + [Fraction(rhs[i])] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if M[r][col])
        M[col], M[piv] = M[piv], M[col]
        pv = M[col][col]
        M[col] = [c / pv for c in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return tuple(M[i][n] for i in range(n))


@lru_cache(maxsize=None)
def fundamental_weight(ct: CartanType, i: int):
    """w_i in root coordinates: <w_i, a_j^vee> = delta_ij."""
    n = ct.rank
    C = cartan_matrix(ct)
    rhs = [1 if j == i - 1 else 0 for j in range(n)]
    return _solve(C, rhs)


@lru_cache(maxsize=None)
def fundamental_coweight(ct: CartanType, i: int):
    """w_i^vee in root coordinates: <w_i^vee, a_j> = delta_ij."""
    n = ct.rank
    B = bilinear_matrix(ct)
    rhs = [1 if j == i - 1 else 0 for j in range(n)]
    return _solve(B, rhs)


def j_degree(beta, J) -> int:
    """Degree of a root under the coweight sum_{j in J} w_j^vee."""
    return sum(beta[j - 1] for j in J)


def one_plus_w_weight(ct: CartanType, w: WeylElement, i: int):
    fw = fundamental_weight(ct, i)
    return tuple(a + b for a, b in zip(fw, w.apply(fw)))


def one_minus_w_weight(ct: CartanType, w: WeylElement, i: int):
    fw = fundamental_weight(ct, i)
    return tuple(a - b for a, b in zip(fw, w.apply(fw)))


def commutation_exponent(ct: CartanType, w, i: int, mu) -> int:
    """m with X Theta_i = q^m Theta_i X for X of Q-degree mu: m = -<(1+w)w_i, mu>.

    `w` may be a WeylElement or a ReducedWord; with a word, i must lie in its
    support.
    """
    if isinstance(w, ReducedWord):
        if i not in w.support:
            raise ValueError(f"index {i} not in the support of the word")
        w = w.element
    val = -pair(ct, one_plus_w_weight(ct, w, i), mu)
    assert val.denominator == 1, "commutation exponent must be an integer"
    return int(val)


def theta_degrees(ct: CartanType, J, word: ReducedWord | None = None) -> dict:
    """Degrees d_i = <sum_{j in J} w_j^vee, (1 - w_J) w_i> for i in supp(w_J)."""
    if word is None:
        w = parabolic_element(ct, J)
        supp = _support_of_element(ct, w)
    else:
        w = word.element
        supp = sorted(word.support)
    out = {}
    for i in supp:
        v = one_minus_w_weight(ct, w, i)
        d = sum(v[j - 1] for j in J)
        assert d.denominator == 1 and d > 0, "theta degree must be a positive integer"
        out[i] = int(d)
    return out


def _support_of_element(ct: CartanType, w: WeylElement):
    inv = w.inverse()
    supp = set()
    for b in positive_roots(ct):
        if not is_positive(inv.apply(b)):
            for j, c in enumerate(b):
                if c:
                    supp.add(j + 1)
    return sorted(supp)


def inversion_set(ct: CartanType, w: WeylElement):
    """{b > 0 : w^{-1} b < 0} computed directly from the root list."""
    inv = w.inverse()
    return frozenset(b for b in positive_roots(ct) if not is_positive(inv.apply(b)))


# ---------------------------------------------------------------------------
# Braid moves and random words (used by the property suites)
# ---------------------------------------------------------------------------

def braid_order(ct: CartanType, i: int, j: int) -> int:
    C = cartan_matrix(ct)
    m = C[i - 1][j - 1] * C[j - 1][i - 1]
    return {0: 2, 1: 3, 2: 4, 3: 6}[m]


def braid_moves(word: ReducedWord):
    """All words obtained by one braid move, as letter tuples."""
    ct = word.ct
    letters = word.letters
    out = []
    for start in range(len(letters)):
        for m in (2, 3, 4, 6):
            if start + m > len(letters):
                continue
            seg = letters[start:start + m]
            i, j = seg[0], seg[1] if len(seg) > 1 else None
            if j is None or i == j:
                continue
            if braid_order(ct, i, j) != m:
                continue
            alt = tuple(i if k % 2 == 0 else j for k in range(m))
            if seg != alt:
                continue
            rep = tuple(j if k % 2 == 0 else i for k in range(m))
            out.append(letters[:start] + rep + letters[start + m:])
    return out


def random_braid_variant(word: ReducedWord, rng: random.Random, steps: int = 40) -> ReducedWord:
    letters = word.letters
    cur = word
    for _ in range(steps):
        moves = braid_moves(cur)
        if not moves:
            break
        cur = ReducedWord(word.ct, rng.choice(moves))
    return cur


def random_reduced_word(ct: CartanType, rng: random.Random, max_len: int | None = None) -> ReducedWord:
    """A random reduced word, grown by length-increasing right multiplications."""
    if max_len is None:
        max_len = len(positive_roots(ct))
    target = rng.randint(1, max_len)
    simples = _simple_elements(ct)
    w = WeylElement.identity(ct)
    letters = []
    while len(letters) < target:
        ups = [i for i in range(1, ct.rank + 1)
               if is_positive(w.apply(simple_root(ct, i)))]
        if not ups:
            break
        i = rng.choice(ups)
        letters.append(i)
        w = w * simples[i - 1]
    return ReducedWord(ct, tuple(letters))


def vec_to_json(v):
    out = []
    for c in v:
        f = Fraction(c)
        out.append(f"{f.numerator}/{f.denominator}" if f.denominator != 1 else f"{f.numerator}")
    return out


def all_simple_types(max_rank: int):
    """Every valid (family, rank) with 2 <= rank <= max_rank, in stable order."""
    out = []
    for rank in range(2, max_rank + 1):
        for fam in "ABCDEFG":
            lo, hi = RANK_BOUNDS[fam]
            if rank >= lo and (hi is None or rank <= hi):
                out.append(CartanType(fam, rank))
    return out
