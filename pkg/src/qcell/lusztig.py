"""Braid-group symmetries, Lusztig root vectors and PBW expansion.

Elements of the full quantized enveloping algebra are kept in triangular
coordinates: finite sums  c * (m, mu, p)  where m is a word coordinate of
the minus part (shuffle model over F-letters), K_mu the torus part, and p a
word coordinate of the plus part.  Commuting a generator across a canonical
form uses content-scaled letter-removal skew derivations; all four removal
operators act wordwise on the coordinates, so products against single
generators never leave the coordinate representation.

The braid symmetry engine computes T_w(E_j) (and T_w(F_j)) by peeling
reduced words of w, with two shortcuts: letters commuting with j peel for
free, and w(alpha_j) simple collapses the whole composition to a Chevalley
generator.  A node budget guards against expression swell; exceeding it
raises BudgetExceededError rather than degrading silently.
"""

from __future__ import annotations

from functools import lru_cache

from qcell.qpoly import QScalar, q_factorial, ZERO, ONE
from qcell.rootsys import (CartanType, ReducedWord, WeylElement, bilinear_matrix,
                           cartan_matrix, symmetrizers, simple_root, is_positive,
                           pair, _simple_elements)
from qcell.shuffle import (NotHomogeneousError, ShuffleElement, shuffle_algebra,
                           word_content)


class BudgetExceededError(RuntimeError):
    """The symbolic computation outgrew its node budget (not a wrong answer)."""


class PBWSpanError(ValueError):
    def __init__(self, residual):
        super().__init__("element lies outside the span of the given PBW monomials")
        self.residual = residual


class Budget:
    __slots__ = ("limit", "used")

    def __init__(self, limit: int = 20_000_000):
        self.limit = limit
        self.used = 0

    def charge(self, n: int):
        self.used += n
        if self.used > self.limit:
            raise BudgetExceededError(
                f"node budget exceeded ({self.used} > {self.limit})")


def _zero_mu(rank):
    return (0,) * rank


_DEN_ONE = ()


def _den_mul(d1, d2):
    if not d1:
        return d2
    if not d2:
        return d1
    acc = dict(d1)
    for k, m in d2:
        acc[k] = acc.get(k, 0) + m
    return tuple(sorted(acc.items()))


def _den_key(c: QScalar):
    """Factor key for a Laurent scalar used as a denominator factor."""
    return (c.off, c.num)


def _den_factor_value(key) -> QScalar:
    off, num = key
    return QScalar(num, off=off, _reduced=True)


def _den_lcm_cofactors(d1, d2):
    """(lcm, lcm/d1, lcm/d2) with the cofactors as Laurent QScalars."""
    m1, m2 = dict(d1), dict(d2)
    lcm = {}
    for k in set(m1) | set(m2):
        lcm[k] = max(m1.get(k, 0), m2.get(k, 0))
    c1 = c2 = ONE
    for k, m in lcm.items():
        e1 = m - m1.get(k, 0)
        e2 = m - m2.get(k, 0)
        if e1 or e2:
            f = _den_factor_value(k)
            for _ in range(e1):
                c1 = c1 * f
            for _ in range(e2):
                c2 = c2 * f
    return tuple(sorted(lcm.items())), c1, c2


def _den_value(d) -> QScalar:
    out = ONE
    for k, m in d:
        f = _den_factor_value(k)
        for _ in range(m):
            out = out * f
    return out


class MixedElement:
    """Triangular coordinates with a shared, factored denominator.

    The element represented is (1/den) * sum of terms, den kept as a
    multiset of Laurent factors; coefficients stay Laurent, so the hot loops
    never reduce polynomial fractions.  Additions use the lcm of the two
    denominators, which keeps the shared factor from compounding.
    :meth:`normalized` clears the denominator into the coefficients at
    representation boundaries.
    """

    __slots__ = ("alg", "terms", "den")

    def __init__(self, alg, terms, den=_DEN_ONE):
        self.alg = alg
        self.terms = terms
        self.den = den if terms else _DEN_ONE

    def is_zero(self):
        return not self.terms

    def normalized(self) -> "MixedElement":
        if not self.den:
            return self
        inv = ONE / _den_value(self.den)
        terms = {}
        for k, v in self.terms.items():
            c = v * inv
            if not c.is_zero():
                terms[k] = c
        return MixedElement(self.alg, terms)

    def __eq__(self, other):
        if not isinstance(other, MixedElement):
            return NotImplemented
        return (self - other).is_zero()

    def __add__(self, other):
        d1, d2 = self.den, other.den
        if d1 == d2:
            out = dict(self.terms)
            for k, c in other.terms.items():
                s = out.get(k, ZERO) + c
                if s.is_zero():
                    out.pop(k, None)
                else:
                    out[k] = s
            return MixedElement(self.alg, out, d1)
        lcm, c1, c2 = _den_lcm_cofactors(d1, d2)
        out = self.terms if c1.is_one() else {k: v * c1 for k, v in self.terms.items()}
        out = dict(out)
        for k, c in other.terms.items():
            s = out.get(k, ZERO) + c * c2
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return MixedElement(self.alg, out, lcm)

    def scaled(self, c):
        """Multiply by an arbitrary QScalar, folding its denominator into den."""
        if c.is_zero():
            return MixedElement(self.alg, {})
        if c.is_one():
            return self
        num = QScalar(c.num, off=c.off, _reduced=True)
        den = self.den if c.den == (1,) else _den_mul(self.den, (((0, c.den), 1),))
        if num.is_one():
            return MixedElement(self.alg, self.terms, den)
        return MixedElement(self.alg, {k: v * num for k, v in self.terms.items()}, den)

    def __neg__(self):
        return MixedElement(self.alg, {k: -v for k, v in self.terms.items()}, self.den)

    def __sub__(self, other):
        return self + (-other)

    def q_degree(self):
        """Common Q-degree (-content(m) + content(p)); asserts homogeneity."""
        deg = None
        ct = self.alg.ct
        for (m, mu, p) in self.terms:
            cm = word_content(ct, m)
            cp = word_content(ct, p)
            d = tuple(b - a for a, b in zip(cm, cp))
            if deg is None:
                deg = d
            elif deg != d:
                raise ValueError("mixed element is not Q-homogeneous")
        return deg

    def is_plus(self):
        rank = self.alg.ct.rank
        z = _zero_mu(rank)
        return all(m == () and mu == z for (m, mu, p) in self.terms)

    def plus_part(self) -> ShuffleElement:
        """The element as a canonical plus form; requires a pure plus element."""
        if not self.is_plus():
            raise ValueError("element has minus or torus components")
        norm = self.normalized()
        salg = shuffle_algebra(self.alg.ct)
        return ShuffleElement(salg, {p: c for (m, mu, p), c in norm.terms.items()})

    def is_minus(self):
        rank = self.alg.ct.rank
        z = _zero_mu(rank)
        return all(p == () and mu == z for (m, mu, p) in self.terms)


class MixedAlgebra:
    """Arithmetic on triangular coordinates for one Cartan type."""

    def __init__(self, ct: CartanType):
        self.ct = ct
        self.B = bilinear_matrix(ct)
        self.C = cartan_matrix(ct)
        self.d = symmetrizers(ct)
        self.salg = shuffle_algebra(ct)
        self.sign = self.salg.sign
        self._qhat = {a: QScalar.q_power(self.d[a - 1]) - QScalar.q_power(-self.d[a - 1])
                      for a in range(1, ct.rank + 1)}
        self._qhat_den = {a: (((q.off, q.num), 1),) for a, q in self._qhat.items()}
        self._memo = {}

    # -- constructors -------------------------------------------------------

    def zero(self):
        return MixedElement(self, {})

    def unit(self):
        return MixedElement(self, {((), _zero_mu(self.ct.rank), ()): ONE})

    def gen_E(self, i):
        return MixedElement(self, {((), _zero_mu(self.ct.rank), (i,)): ONE})

    def gen_F(self, i):
        return MixedElement(self, {((i,), _zero_mu(self.ct.rank), ()): ONE})

    def gen_K(self, mu):
        return MixedElement(self, {((), tuple(mu), ()): ONE})

    # -- pairing helpers ----------------------------------------------------

    def _pair_word_letter(self, word, a):
        """<content(word), alpha_a>."""
        B = self.B
        return sum(B[x - 1][a - 1] for x in word)

    def _pair_mu_letter(self, mu, a):
        B = self.B
        return sum(mu[x] * B[x][a - 1] for x in range(len(mu)) if mu[x])

    # -- one-generator multiplications ---------------------------------------

    def _accumulate(self, out, key, val):
        if val.is_zero():
            return
        s = out.get(key, ZERO) + val
        if s.is_zero():
            out.pop(key, None)
        else:
            out[key] = s

    def rightmul_E(self, elt: MixedElement, a: int, budget: Budget) -> MixedElement:
        out = {}
        sh = self.salg._shuffle_words
        for (m, mu, p), c in elt.terms.items():
            res = sh(p, (a,))
            budget.charge(len(res))
            for w, f in res.items():
                self._accumulate(out, (m, mu, w), c * f)
        return MixedElement(self, out, elt.den)

    def rightmul_F(self, elt: MixedElement, a: int, budget: Budget) -> MixedElement:
        # e F_a = F_a e + (Xa(e) K_a - K_{-a} Xb(e)) / qhat_a;  the division is
        # cleared into the shared denominator so coefficients stay Laurent.
        touches = any(p and (p[0] == a or p[-1] == a) for (_, _, p) in elt.terms)
        qhat = self._qhat[a]
        out = {}
        sh = self.salg._shuffle_words
        alpha_a = simple_root(self.ct, a)
        for (m, mu, p), c in elt.terms.items():
            c1 = c.mul_qpow(-self._pair_mu_letter(mu, a))
            if touches:
                c1 = c1 * qhat
            res = sh(m, (a,))
            budget.charge(len(res))
            for w, f in res.items():
                self._accumulate(out, (w, mu, p), c1 * f)
            if p and p[0] == a:
                mu2 = tuple(x + y for x, y in zip(mu, alpha_a))
                self._accumulate(out, (m, mu2, p[1:]), c)
            if p and p[-1] == a:
                s = self._pair_word_letter(p, a) - self.B[a - 1][a - 1]
                mu2 = tuple(x - y for x, y in zip(mu, alpha_a))
                self._accumulate(out, (m, mu2, p[:-1]), -c.mul_qpow(s))
        return MixedElement(self, out, _den_mul(elt.den, self._qhat_den[a])
                            if touches else elt.den)

    def rightmul_K(self, elt: MixedElement, nu, budget: Budget) -> MixedElement:
        out = {}
        nu = tuple(nu)
        for (m, mu, p), c in elt.terms.items():
            e = -sum(nu[x] * self._pair_word_letter(p, x + 1) for x in range(len(nu))
                     if nu[x]) if p else 0
            # <nu, content(p)> via symmetry of the form
            mu2 = tuple(x + y for x, y in zip(mu, nu))
            self._accumulate(out, (m, mu2, p), c.mul_qpow(e))
        return MixedElement(self, out, elt.den)

    def leftmul_E(self, elt: MixedElement, a: int, budget: Budget) -> MixedElement:
        # E_a f = f E_a + (K_a A_a(f) - B_a(f) K_{-a}) / qhat_a
        touches = any(m and (m[0] == a or m[-1] == a) for (m, _, _) in elt.terms)
        qhat = self._qhat[a]
        out = {}
        sh = self.salg._shuffle_words
        alpha_a = simple_root(self.ct, a)
        for (m, mu, p), c in elt.terms.items():
            c1 = c.mul_qpow(-self._pair_mu_letter(mu, a))
            if touches:
                c1 = c1 * qhat
            res = sh((a,), p)
            budget.charge(len(res))
            for w, f in res.items():
                self._accumulate(out, (m, mu, w), c1 * f)
            if m and m[-1] == a:
                mu2 = tuple(x + y for x, y in zip(mu, alpha_a))
                self._accumulate(out, (m[:-1], mu2, p), c)
            if m and m[0] == a:
                s = self._pair_word_letter(m, a) - self.B[a - 1][a - 1]
                mu2 = tuple(x - y for x, y in zip(mu, alpha_a))
                self._accumulate(out, (m[1:], mu2, p), -c.mul_qpow(s))
        return MixedElement(self, out, _den_mul(elt.den, self._qhat_den[a])
                            if touches else elt.den)

    def leftmul_F(self, elt: MixedElement, a: int, budget: Budget) -> MixedElement:
        out = {}
        sh = self.salg._shuffle_words
        for (m, mu, p), c in elt.terms.items():
            res = sh((a,), m)
            budget.charge(len(res))
            for w, f in res.items():
                self._accumulate(out, (w, mu, p), c * f)
        return MixedElement(self, out, elt.den)

    def leftmul_K(self, elt: MixedElement, nu, budget: Budget) -> MixedElement:
        out = {}
        nu = tuple(nu)
        for (m, mu, p), c in elt.terms.items():
            e = -sum(nu[x] * self._pair_word_letter(m, x + 1) for x in range(len(nu))
                     if nu[x]) if m else 0
            mu2 = tuple(x + y for x, y in zip(mu, nu))
            self._accumulate(out, (m, mu2, p), c.mul_qpow(e))
        return MixedElement(self, out, elt.den)

    def leftmul_atom(self, elt, atom, budget):
        kind, val = atom
        if kind == "E":
            return self.leftmul_E(elt, val, budget)
        if kind == "F":
            return self.leftmul_F(elt, val, budget)
        return self.leftmul_K(elt, val, budget)

    def rightmul_atom(self, elt, atom, budget):
        kind, val = atom
        if kind == "E":
            return self.rightmul_E(elt, val, budget)
        if kind == "F":
            return self.rightmul_F(elt, val, budget)
        return self.rightmul_K(elt, val, budget)

    def eval_free(self, free, budget: Budget) -> MixedElement:
        """Evaluate a free expression (list of (coef, atom tuple)) to coordinates."""
        total = self.zero()
        for c, atoms in free:
            cur = self.unit()
            for atom in atoms:
                cur = self.rightmul_atom(cur, atom, budget)
            total = total + cur.scaled(c)
        return total


@lru_cache(maxsize=None)
def mixed_algebra(ct: CartanType) -> MixedAlgebra:
    return MixedAlgebra(ct)


# ---------------------------------------------------------------------------
# Free expressions and braid symmetry expansions of generators
# ---------------------------------------------------------------------------

def _free_scaled(free, c: QScalar):
    return [(x * c, atoms) for x, atoms in free]


def _free_product(f1, f2):
    return [(c1 * c2, a1 + a2) for c1, a1 in f1 for c2, a2 in f2]


def _ad_power_words(ct: CartanType, i: int, j: int, n: int):
    """(ad_q E_i)^n (E_j) as a free expression over E-letter words."""
    B = bilinear_matrix(ct)
    terms = [(ONE, (j,))]
    deg = list(simple_root(ct, j))
    for _ in range(n):
        e = sum(B[i - 1][k] * deg[k] for k in range(ct.rank))
        nxt = {}
        for c, w in terms:
            w1 = (i,) + w
            nxt[w1] = nxt.get(w1, ZERO) + c
            w2 = w + (i,)
            nxt[w2] = nxt.get(w2, ZERO) - c.mul_qpow(e)
        deg[i - 1] += 1
        terms = [(c, w) for w, c in nxt.items() if not c.is_zero()]
    return terms


def t_expansion(ct: CartanType, i: int, atom):
    """T_i applied to a single generator, as a free expression."""
    kind, val = atom
    d = symmetrizers(ct)
    if kind == "K":
        si = _simple_elements(ct)[i - 1]
        return [(ONE, (("K", si.apply(val)),))]
    if kind == "E":
        j = val
        if i == j:
            alpha = simple_root(ct, i)
            return [(-ONE, (("F", i), ("K", alpha)))]
        n = -cartan_matrix(ct)[i - 1][j - 1]
        scale = ONE / q_factorial(n, d[i - 1])
        return [(c * scale, tuple(("E", x) for x in w))
                for c, w in _ad_power_words(ct, i, j, n)]
    # kind == "F"
    j = val
    if i == j:
        alpha = tuple(-x for x in simple_root(ct, i))
        return [(-ONE, (("K", alpha), ("E", i)))]
    n = -cartan_matrix(ct)[i - 1][j - 1]
    # [F_i, y] = F_i y - q^{<alpha_i, content(y)>} y F_i on minus-part words,
    # and the overall scalar (-q_i)^n / [n]_{q_i}!.
    B = bilinear_matrix(ct)
    terms = [(ONE, (j,))]
    deg = list(simple_root(ct, j))
    for _ in range(n):
        e = sum(B[i - 1][k] * deg[k] for k in range(ct.rank))
        nxt = {}
        for c, w in terms:
            w1 = (i,) + w
            nxt[w1] = nxt.get(w1, ZERO) + c
            w2 = w + (i,)
            nxt[w2] = nxt.get(w2, ZERO) - c.mul_qpow(e)
        deg[i - 1] += 1
        terms = [(c, w) for w, c in nxt.items() if not c.is_zero()]
    scale = (QScalar.q_power(d[i - 1] * n) / q_factorial(n, d[i - 1]))
    if n % 2:
        scale = -scale
    return [(c * scale, tuple(("F", x) for x in w)) for c, w in terms]


class TElem:
    """A mixed element paired with a free expression that evaluates to it."""

    __slots__ = ("mixed", "free")

    def __init__(self, mixed: MixedElement, free):
        self.mixed = mixed
        self.free = free

    def scaled(self, c):
        return TElem(self.mixed.scaled(c), _free_scaled(self.free, c))

    def __add__(self, other):
        return TElem(self.mixed + other.mixed, self.free + other.free)

    def free_size(self):
        return sum(len(atoms) + 1 for _, atoms in self.free)


def _multiset_words(content):
    """All distinct words with the given letter multiset (1-based letters)."""
    letters = []
    for i, c in enumerate(content):
        letters.extend([i + 1] * c)
    out = []

    def rec(remaining, acc):
        if not remaining:
            out.append(tuple(acc))
            return
        seen = set()
        for k, x in enumerate(remaining):
            if x in seen:
                continue
            seen.add(x)
            rec(remaining[:k] + remaining[k + 1:], acc + [x])

    rec(letters, [])
    return out


def _word_space_size(content):
    from math import factorial
    n = factorial(sum(content))
    for c in content:
        n //= factorial(c)
    return n


@lru_cache(maxsize=None)
def kostant_dim(ct: CartanType, content):
    """dim of the plus part in one Q-degree: multisets of positive roots
    summing to the content."""
    from qcell.rootsys import positive_roots
    roots = positive_roots(ct)
    n = len(roots)

    def rec(k, remaining):
        if not any(remaining):
            return 1
        if k == n:
            return 0
        total = 0
        beta = roots[k]
        cap = min((r // b for r, b in zip(remaining, beta) if b), default=0)
        for m in range(cap + 1):
            nxt = tuple(r - m * b for r, b in zip(remaining, beta))
            if all(c >= 0 for c in nxt):
                total += rec(k + 1, nxt)
        return total

    return rec(0, tuple(content))


@lru_cache(maxsize=None)
def _monomial_form(ct: CartanType, w):
    alg = shuffle_algebra(ct)
    if not w:
        return alg.one()
    return _monomial_form(ct, w[:-1]) * alg.letter(w[-1])


@lru_cache(maxsize=None)
def _root_spelling(ct: CartanType, gamma):
    """A fixed letter word with content gamma, peeled along the root poset."""
    if sum(gamma) == 1:
        return (gamma.index(1) + 1,)
    from qcell.rootsys import positive_roots
    roots = set(positive_roots(ct))
    for i in range(1, ct.rank + 1):
        rest = list(gamma)
        rest[i - 1] -= 1
        rest = tuple(rest)
        if rest[i - 1] >= 0 and tuple(rest) in roots:
            return _root_spelling(ct, rest) + (i,)
    # fall back to any nonnegative peel (gamma need not be a root here)
    for i in range(1, ct.rank + 1):
        if gamma[i - 1] > 0:
            rest = list(gamma)
            rest[i - 1] -= 1
            return _root_spelling(ct, tuple(rest)) + (i,)
    raise ValueError("empty content")


def _kostant_multisets(ct: CartanType, content):
    from qcell.rootsys import positive_roots
    roots = sorted(positive_roots(ct), key=lambda b: (-sum(b), b))
    out = []

    def rec(k, remaining, acc):
        if not any(remaining):
            out.append(tuple(acc))
            return
        if k == len(roots):
            return
        beta = roots[k]
        cap = min((r // b for r, b in zip(remaining, beta) if b), default=0)
        for m in range(cap, -1, -1):
            nxt = tuple(r - m * b for r, b in zip(remaining, beta))
            if all(c >= 0 for c in nxt):
                rec(k + 1, nxt, acc + [beta] * m)

    rec(0, tuple(content), [])
    return out


def _candidate_words(ct: CartanType, content):
    """Kostant-shaped words first (usually already spanning), then the rest."""
    seen = set()
    for ms in _kostant_multisets(ct, content):
        w = ()
        for gamma in ms:
            w = w + _root_spelling(ct, gamma)
        if w not in seen:
            seen.add(w)
            yield w
    for w in _multiset_words(content):
        if w not in seen:
            yield w


_EVAL_POINT = 7
_EVAL_MOD = (1 << 61) - 1


def _eval_qscalar(c: QScalar, x, mod=_EVAL_MOD):
    """Evaluate at q = x over F_mod (used only to pick candidates)."""
    num = 0
    for co in reversed(c.num):
        num = (num * x + co) % mod
    den = 0
    for co in reversed(c.den):
        den = (den * x + co) % mod
    if den == 0:
        raise ZeroDivisionError
    val = num * pow(den, -1, mod) % mod
    return val * pow(x, c.off, mod) % mod if c.off >= 0 else \
        val * pow(pow(x, -c.off, mod), -1, mod) % mod


@lru_cache(maxsize=None)
def _content_rows(ct: CartanType, content):
    """An exact solver for one graded component, built in two passes.

    A numeric pass (q evaluated at an integer) discovers a spanning set of
    candidate monomials and a matching set of pivot words; the exact pass
    then eliminates only over those pivot coordinates.  Restricting the
    coordinates is sound because the chosen words already separate the
    component, and every solve target is known to lie in it.
    """
    target_rank = kostant_dim(ct, content)
    chosen, pivots = _discover_candidates(ct, content, target_rank, _EVAL_POINT)
    pivset = frozenset(pivots)
    rows = []
    for w in chosen:
        vec = {x: c for x, c in _monomial_form(ct, w).terms.items() if x in pivset}
        combo = {w: ONE}
        for pw, pvec, pcombo in rows:
            c = vec.get(pw)
            if c is not None and not c.is_zero():
                _submul(vec, pvec, c)
                _submul(combo, pcombo, c)
        vec = {x: c for x, c in vec.items() if not c.is_zero()}
        assert vec, "numeric candidate pass selected a dependent monomial"
        pw = min(vec.items(), key=lambda kv: (len(kv[1].num) + len(kv[1].den), kv[0]))[0]
        inv = ONE / vec[pw]
        rows.append((pw, {x: c * inv for x, c in vec.items()},
                     {k: c * inv for k, c in combo.items() if not c.is_zero()}))
    return pivset, tuple(rows)


def _discover_candidates(ct, content, target_rank, point):
    """Modular elimination to pick independent monomials and pivot words.

    Independence mod p implies independence over the exact field, so any set
    reaching full rank here is a valid spanning set for the exact pass.
    """
    mod = _EVAL_MOD
    rows = []           # (pivot word, dict word -> residue)
    chosen = []
    for w in _candidate_words(ct, content):
        if len(chosen) == target_rank:
            return chosen, [pw for pw, _ in rows]
        vec = {}
        for x, c in _monomial_form(ct, w).terms.items():
            v = _eval_qscalar(c, point)
            if v:
                vec[x] = v
        for pw, pvec in rows:
            c = vec.get(pw)
            if c:
                for k, v in pvec.items():
                    s = (vec.get(k, 0) - v * c) % mod
                    if s:
                        vec[k] = s
                    else:
                        vec.pop(k, None)
        if not vec:
            continue
        pw = min(vec)
        inv = pow(vec[pw], -1, mod)
        rows.append((pw, {x: c * inv % mod for x, c in vec.items()}))
        chosen.append(w)
    if len(chosen) == target_rank:
        return chosen, [pw for pw, _ in rows]
    raise AssertionError("numeric pass failed to span the graded component")


def plus_to_free(element: ShuffleElement):
    """A free E-monomial expression with the given canonical plus form.

    Solves against the canonical forms of the content words, independent of
    the braid engine; intended for contents of moderate size.
    """
    if element.is_zero():
        return []
    content = element.content()
    pivset, rows = _content_rows(element.alg.ct, content)
    tvec = {x: c for x, c in element.terms.items() if x in pivset}
    tcombo = {}
    for pw, pvec, pcombo in rows:
        c = tvec.get(pw)
        if c is not None and not c.is_zero():
            _submul(tvec, pvec, c)
            for k, v in pcombo.items():
                tcombo[k] = tcombo.get(k, ZERO) + v * c
    assert not any(not c.is_zero() for c in tvec.values()), \
        "canonical form escaped the span of its content words"
    return [(c, tuple(("E", i) for i in w)) for w, c in tcombo.items() if not c.is_zero()]


class BraidEngine:
    """Computes T_w(E_j) and T_w(F_j) with memoization and peel shortcuts."""

    def __init__(self, ct: CartanType, budget: Budget | None = None, use_prop1: bool = True):
        self.ct = ct
        self.alg = mixed_algebra(ct)
        self.budget = budget if budget is not None else Budget()
        self.use_prop1 = use_prop1
        self._memo = {}

    # -- public entry points ---------------------------------------------

    def apply_T(self, i: int, elem: TElem) -> TElem:
        """T_i applied to an arbitrary element carried as a free expression."""
        alg = self.alg
        budget = self.budget
        total = alg.zero()
        free = []
        for c, atoms in elem.free:
            # evaluate with branch merging: expansions collapse into one
            # mixed element per step instead of a cartesian product of chains
            val = alg.unit()
            for atom in atoms:
                exp = t_expansion(self.ct, i, atom)
                acc = alg.zero()
                for cb, batoms in exp:
                    cur = val
                    for b in batoms:
                        cur = alg.rightmul_atom(cur, b, budget)
                    acc = acc + cur.scaled(cb)
                val = acc
            total = total + val.scaled(c)
            curf = [(c, ())]
            for atom in atoms:
                curf = _free_product(curf, t_expansion(self.ct, i, atom))
                budget.charge(len(curf))
            free.extend(curf)
        return TElem(total, free)

    def apply_T_word(self, letters, elem: TElem) -> TElem:
        for i in reversed(tuple(letters)):
            elem = self.compact(self.apply_T(i, elem))
        return elem

    def _compactable(self, content) -> bool:
        words = _word_space_size(content)
        if words > 80_000:
            return False
        if words <= 400:
            return True
        return kostant_dim(self.ct, content) * words <= 3_000_000

    def compact(self, elem: TElem) -> TElem:
        """Rebuild the free expression from coordinates when the element has a
        recognizable triangular shape whose content space is affordable."""
        if elem.mixed.den:
            elem = TElem(elem.mixed.normalized(), elem.free)
        terms = elem.mixed.terms
        if not terms:
            return TElem(elem.mixed, [])
        mus = {mu for (_, mu, _) in terms}
        if len(mus) != 1:
            return elem
        mu = next(iter(mus))
        all_m_empty = all(m == () for (m, _, _) in terms)
        all_p_empty = all(p == () for (_, _, p) in terms)
        salg = self.alg.salg
        try:
            if all_m_empty:
                plus = ShuffleElement(salg, {p: c for (_, _, p), c in terms.items()})
                if not self._compactable(plus.content()):
                    return elem
                atoms_free = plus_to_free(plus)
                if any(mu):
                    atoms_free = [(c, (("K", mu),) + atoms) for c, atoms in atoms_free]
                return TElem(elem.mixed, atoms_free)
            if all_p_empty:
                minus = ShuffleElement(salg, {m: c for (m, _, _), c in terms.items()})
                if not self._compactable(minus.content()):
                    return elem
                atoms_free = plus_to_free(minus)
                atoms_free = [(c, tuple(("F", i) for _, i in atoms))
                              for c, atoms in atoms_free]
                if any(mu):
                    atoms_free = [(c, atoms + (("K", mu),)) for c, atoms in atoms_free]
                return TElem(elem.mixed, atoms_free)
        except NotHomogeneousError:
            pass
        return elem

    def generator(self, kind: str, val) -> TElem:
        alg = self.alg
        if kind == "E":
            return TElem(alg.gen_E(val), [(ONE, (("E", val),))])
        if kind == "F":
            return TElem(alg.gen_F(val), [(ONE, (("F", val),))])
        return TElem(alg.gen_K(tuple(val)), [(ONE, (("K", tuple(val)),))])

    def root_vector_elem(self, u: WeylElement, j: int, world: str = "+") -> TElem:
        """T_u(E_j) for world '+', T_u(F_j) for world '-'; u(alpha_j) must be > 0."""
        key = (u.key(), j, world)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        val = self._compute(u, j, world)
        if val.free_size() > 64:
            val = self.compact(val)
        self._memo[key] = val
        return val

    def root_vector(self, u: WeylElement, j: int) -> ShuffleElement:
        elem = self.root_vector_elem(u, j, "+")
        assert elem.mixed.is_plus(), "braid image of E_j failed to land in the plus part"
        return elem.mixed.plus_part()

    # -- the peel recursion -------------------------------------------------

    def _compute(self, u: WeylElement, j: int, world: str) -> TElem:
        ct = self.ct
        gamma = u.apply(simple_root(ct, j))
        assert is_positive(gamma), "root vector recursion left the positive cone"
        descents = u.right_descents()
        if not descents:
            return self.generator("E" if world == "+" else "F", j)
        if self.use_prop1 and sum(gamma) == 1:
            m = gamma.index(1) + 1
            return self.generator("E" if world == "+" else "F", m)
        C = cartan_matrix(ct)
        simples = _simple_elements(ct)

        # free peels: letters orthogonal to j strip without changing the fiber
        for b in descents:
            if b != j and C[b - 1][j - 1] == 0:
                return self.root_vector_elem(u * simples[b - 1], j, world)

        b = self._choose_peel(u, j, descents)
        u2 = u * simples[b - 1]
        n = -C[b - 1][j - 1]
        vb = self.root_vector_elem(u2, b, world)
        vj = self._image_of_letter(u2, j, world)

        # (ad_q X_b)^{(n)}(X_j) with exponents taken from the actual Q-degrees
        d_b = symmetrizers(ct)[b - 1]
        out = vj
        for _ in range(n):
            out = self._bracket(vb, out)
        out = out.scaled(ONE / q_factorial(n, d_b))
        if world == "-":
            s = QScalar.q_power(d_b * n)
            out = out.scaled(-s if n % 2 else s)
        return out

    def _choose_peel(self, u, j, descents):
        ct = self.ct
        simples = _simple_elements(ct)
        best, best_score = None, None
        for b in descents:
            if b == j:
                continue
            u2 = u * simples[b - 1]
            gj = u2.apply(simple_root(ct, j))
            gb = u2.apply(simple_root(ct, b))
            neg = not is_positive(gj)
            score = (neg, sum(gb) + abs(sum(gj)))
            if best_score is None or score < best_score:
                best, best_score = b, score
        assert best is not None, "reduced word peel found no usable letter"
        return best

    def _image_of_letter(self, u2: WeylElement, j: int, world: str) -> TElem:
        """T_{u2} applied to E_j (or F_j), allowing u2(alpha_j) < 0."""
        ct = self.ct
        gj = u2.apply(simple_root(ct, j))
        if is_positive(gj):
            return self.root_vector_elem(u2, j, world)
        simples = _simple_elements(ct)
        v = u2 * simples[j - 1]
        vaj = v.apply(simple_root(ct, j))
        budget = self.budget
        if world == "+":
            # T_{u2}(E_j) = -T_v(F_j) K_{v(alpha_j)}
            inner = self.root_vector_elem(v, j, "-")
            mixed = self.alg.rightmul_K(inner.mixed, vaj, budget)
            free = [(-c, atoms + (("K", vaj),)) for c, atoms in inner.free]
            return TElem(-mixed, free)
        # T_{u2}(F_j) = -K_{-v(alpha_j)} T_v(E_j)
        inner = self.root_vector_elem(v, j, "+")
        neg = tuple(-x for x in vaj)
        mixed = self.alg.leftmul_K(inner.mixed, neg, budget)
        free = [(-c, (("K", neg),) + atoms) for c, atoms in inner.free]
        return TElem(-mixed, free)

    # -- products -------------------------------------------------------------

    def _product(self, a: TElem, b: TElem) -> TElem:
        alg = self.alg
        budget = self.budget
        total = alg.zero()
        for c, atoms in a.free:
            cur = b.mixed
            for atom in reversed(atoms):
                cur = alg.leftmul_atom(cur, atom, budget)
            total = total + cur.scaled(c)
        return TElem(total, _free_product(a.free, b.free))

    def _bracket(self, a: TElem, b: TElem) -> TElem:
        e = pair(self.ct, a.mixed.q_degree(), b.mixed.q_degree())
        ab = self._product(a, b)
        ba = self._product(b, a).scaled(QScalar.q_power(e))
        return TElem(ab.mixed - ba.mixed, ab.free + _free_scaled(ba.free, -ONE))


def root_vectors(ct: CartanType, word: ReducedWord, budget: Budget | None = None,
                 engine: BraidEngine | None = None, positions=None):
    """Lusztig root vectors X_{b_1}, ..., X_{b_N} as canonical plus forms.

    Computed by the shifted-word recurrence: the root vectors of
    (i_1, ..., i_N) at position k equal T_{i_1} applied to position k-1 of
    (i_2, ..., i_N).  Each level applies one braid symmetry to an already
    compacted element, which keeps expression swell polynomial while the
    content height stays within compaction range.
    """
    if engine is None:
        engine = BraidEngine(ct, budget)
    letters = word.letters
    N = len(letters)
    wanted = set(range(1, N + 1)) if positions is None else set(positions)
    maxpos = max(wanted, default=0)
    # level[m][j-1] = root vector j of the m-shifted word, as a TElem
    level = []
    for m in range(N - 1, -1, -1):
        depth = min(N - m, maxpos)
        nxt = [engine.generator("E", letters[m])]
        for j in range(2, depth + 1):
            img = engine.apply_T(letters[m], level[j - 2])
            nxt.append(engine.compact(img))
        level = nxt
    out = {}
    for k in sorted(wanted):
        elem = level[k - 1]
        assert elem.mixed.is_plus(), "root vector failed to land in the plus part"
        vec = elem.mixed.plus_part()
        assert vec.content() == word.betas[k - 1], "root vector degree mismatch"
        out[k] = vec
    if positions is None:
        return [out[k] for k in range(1, N + 1)]
    return out


# ---------------------------------------------------------------------------
# PBW expansion
# ---------------------------------------------------------------------------

def _exponent_tuples(betas, target):
    """All m >= 0 with sum m_k beta_k = target, DFS with remainder pruning."""
    n = len(betas)
    out = []

    def rec(k, remaining, acc):
        if not any(remaining):
            out.append(tuple(acc) + (0,) * (n - k))
            return
        if k == n:
            return
        beta = betas[k]
        cap = min((r // b for r, b in zip(remaining, beta) if b), default=0)
        for m in range(cap, -1, -1):
            nxt = tuple(r - m * b for r, b in zip(remaining, beta))
            if all(c >= 0 for c in nxt):
                rec(k + 1, nxt, acc + [m])

    rec(0, tuple(target), [])
    return out


def _pbw_monomial_form(vectors, exps):
    out = None
    for vec, m in zip(vectors, exps):
        for _ in range(m):
            out = vec if out is None else out * vec
    if out is None:
        out = vectors[0].alg.one()
    return out


def pbw_expand(vectors, element: ShuffleElement):
    """Write `element` in the ordered monomials of `vectors`.

    Returns a dict exponent-tuple -> QScalar; raises PBWSpanError when the
    element is not in the span (the residual rides on the exception).
    """
    if element.is_zero():
        return {}
    alg = element.alg
    betas = [v.content() for v in vectors]
    # split into Q-degree components
    components = {}
    for w, c in element.terms.items():
        mu = word_content(alg.ct, w)
        components.setdefault(mu, {})[w] = c
    result = {}
    for mu, comp in components.items():
        exps = _exponent_tuples(betas, mu)
        if not exps:
            raise PBWSpanError(ShuffleElement(alg, comp))
        forms = [(e, _pbw_monomial_form(vectors, e)) for e in exps]
        coeffs, residual = _solve_in_span(alg, forms, comp)
        if residual:
            raise PBWSpanError(ShuffleElement(alg, residual))
        for e, c in coeffs.items():
            if not c.is_zero():
                result[e] = result.get(e, ZERO) + c
    return {e: c for e, c in result.items() if not c.is_zero()}


def _solve_in_span(alg, forms, target):
    """Gaussian elimination: express target in the span of the given forms."""
    rows = []  # (pivot word, coeff dict, combo dict exp->QScalar)
    for e, f in forms:
        vec = dict(f.terms)
        combo = {e: ONE}
        for pw, pvec, pcombo in rows:
            c = vec.get(pw)
            if c is not None and not c.is_zero():
                _submul(vec, pvec, c)
                _submul(combo, pcombo, c)
        vec = {w: c for w, c in vec.items() if not c.is_zero()}
        if not vec:
            continue
        pw = min(vec)
        inv = ONE / vec[pw]
        vec = {w: c * inv for w, c in vec.items()}
        combo = {k: c * inv for k, c in combo.items() if not c.is_zero()}
        rows.append((pw, vec, combo))
    tvec = dict(target)
    tcombo = {}
    for pw, pvec, pcombo in rows:
        c = tvec.get(pw)
        if c is not None and not c.is_zero():
            _submul(tvec, pvec, c)
            for k, v in pcombo.items():
                tcombo[k] = tcombo.get(k, ZERO) + v * c
    tvec = {w: c for w, c in tvec.items() if not c.is_zero()}
    return tcombo, tvec


def _submul(acc, sub, c):
    for k, v in sub.items():
        acc[k] = acc.get(k, ZERO) - v * c


class IntervalSubalgebra:
    """The subalgebra on root vectors X_i..X_j of a reduced word, with its
    own PBW expansion; root vectors are computed on demand."""

    def __init__(self, ct: CartanType, word: ReducedWord, lo: int, hi: int,
                 engine: BraidEngine | None = None):
        if not 1 <= lo <= hi <= len(word.letters):
            raise IndexError("interval out of range")
        self.ct = ct
        self.word = word
        self.lo = lo
        self.hi = hi
        self.engine = engine if engine is not None else BraidEngine(ct)
        self._vectors = None

    @property
    def vectors(self):
        if self._vectors is None:
            got = root_vectors(self.ct, self.word, engine=self.engine,
                               positions=range(self.lo, self.hi + 1))
            self._vectors = [got[k] for k in range(self.lo, self.hi + 1)]
        return self._vectors

    def expand(self, element: ShuffleElement):
        return pbw_expand(self.vectors, element)

    def monomial(self, exps) -> ShuffleElement:
        return _pbw_monomial_form(self.vectors, exps)

    def basis_independent(self, max_height: int) -> bool:
        """Linear independence of the ordered monomials up to the given total
        root height (a spot check of the PBW basis property)."""
        vecs = self.vectors
        betas = [v.content() for v in vecs]
        by_content = {}
        heights = [sum(b) for b in betas]

        def rec(k, h, acc):
            if k == len(vecs):
                if any(acc):
                    mu = tuple(sum(m * b[i] for m, b in zip(acc, betas))
                               for i in range(self.ct.rank))
                    by_content.setdefault(mu, []).append(tuple(acc))
                return
            m = 0
            while h + m * heights[k] <= max_height:
                rec(k + 1, h + m * heights[k], acc + [m])
                m += 1

        rec(0, 0, [])
        for mu, exps in by_content.items():
            forms = [(e, _pbw_monomial_form(vecs, e)) for e in exps]
            rank = 0
            rows = []
            for e, f in forms:
                vec = dict(f.terms)
                for pw, pvec in rows:
                    c = vec.get(pw)
                    if c is not None and not c.is_zero():
                        _submul(vec, pvec, c)
                vec = {w: c for w, c in vec.items() if not c.is_zero()}
                if not vec:
                    return False
                pw = min(vec)
                inv = ONE / vec[pw]
                rows.append((pw, {w: c * inv for w, c in vec.items()}))
                rank += 1
        return True
