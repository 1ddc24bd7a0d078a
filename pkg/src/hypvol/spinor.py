"""Spin representation on the exterior algebra and the supertrace/Pfaffian
identity, all in exact rational arithmetic (the identity is polynomial, so
no floats belong in this module).

An element of o(2n) in a split basis (e_i spanning the isotropic W, f_i the
dual isotropic U) is the block matrix [[A, B], [C, -A^t]] with B, C skew.
Its image on Lambda* W, spanned by subset monomials xi_S, is

    s(X) = -1/2 tr A + sum a_ij xi_i d_j
           + sum_{i<j} (b_ij xi_i xi_j + c_ij d_i d_j)

with xi_i the left wedge and d_i the graded left contraction (sign
(-1)^{#{j in S : j < i}} for both).  With these conventions s is an exact
Lie-algebra homomorphism, which the tests check on random samples.

The supertrace is Str = Tr|even - Tr|odd.  Str(s(X)^n) is an invariant
polynomial of degree n and equals c_n * n! * Pf_split(X) with a sample
independent sign c_n; the constant is measured from the Cartan sample
rather than asserted (c_2 = +1, c_3 = -1 under these conventions).
Pf_split is the Pfaffian normalized by Pf_split(Cartan(t)) = t_1 ... t_n;
concretely Pf(G X)/kappa_n with G the split Gram matrix [[0, I], [I, 0]].
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, IndeterminateSampleError


def _frac_matrix(rows, n=None):
    m = tuple(tuple(Fraction(x) for x in row) for row in rows)
    size = n or len(m)
    if len(m) != size or any(len(r) != size for r in m):
        raise DomainError(f"expected a {size}x{size} matrix")
    return m


def _matmul(a, b):
    size = len(a)
    bt = list(zip(*b))
    return tuple(tuple(sum(ra[k] * cb[k] for k in range(size)) for cb in bt)
                 for ra in a)


def _identity(size):
    return tuple(tuple(Fraction(1 if i == j else 0) for j in range(size))
                 for i in range(size))


def _is_skew(m):
    return all(m[i][j] == -m[j][i] for i in range(len(m)) for j in range(len(m)))


@dataclass(frozen=True)
class SplitSoElement:
    """Blocks (A, B, C) of [[A, B], [C, -A^t]] in o(2n), exact rationals."""
    a: tuple
    b: tuple
    c: tuple

    def __post_init__(self):
        n = len(self.a)
        object.__setattr__(self, "a", _frac_matrix(self.a, n))
        object.__setattr__(self, "b", _frac_matrix(self.b, n))
        object.__setattr__(self, "c", _frac_matrix(self.c, n))
        if not _is_skew(self.b) or not _is_skew(self.c):
            raise DomainError("blocks B and C must be skew-symmetric")

    @property
    def n(self):
        return len(self.a)

    def block_matrix(self):
        n = self.n
        rows = []
        for i in range(n):
            rows.append(tuple(self.a[i]) + tuple(self.b[i]))
        for i in range(n):
            rows.append(tuple(self.c[i]) + tuple(-self.a[j][i] for j in range(n)))
        return tuple(rows)

    def commutator(self, other):
        x, y = self.block_matrix(), other.block_matrix()
        n = self.n
        z = _matmul(x, y)
        w = _matmul(y, x)
        m = [[z[i][j] - w[i][j] for j in range(2 * n)] for i in range(2 * n)]
        a = [row[:n] for row in m[:n]]
        b = [row[n:] for row in m[:n]]
        c = [row[:n] for row in m[n:]]
        return SplitSoElement(a, b, c)

    @classmethod
    def cartan(cls, ts):
        n = len(ts)
        a = [[Fraction(ts[i]) if i == j else Fraction(0) for j in range(n)]
             for i in range(n)]
        z = [[Fraction(0)] * n for _ in range(n)]
        return cls(a, z, z)

    @classmethod
    def random(cls, n, rng, bound=9):
        a = [[Fraction(rng.randint(-bound, bound)) for _ in range(n)] for _ in range(n)]
        b = [[Fraction(0)] * n for _ in range(n)]
        c = [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                v = Fraction(rng.randint(-bound, bound))
                w = Fraction(rng.randint(-bound, bound))
                b[i][j], b[j][i] = v, -v
                c[i][j], c[j][i] = w, -w
        return cls(a, b, c)

    @classmethod
    def from_json(cls, obj):
        conv = lambda rows: [[Fraction(str(x)) for x in row] for row in rows]
        return cls(conv(obj["A"]), conv(obj["B"]), conv(obj["C"]))


class SuperOperator:
    """Exact matrix on the 2^n subset basis of Lambda*(xi_1..xi_n), graded
    by subset parity."""

    __slots__ = ("n", "matrix")

    def __init__(self, n, matrix):
        self.n = n
        self.matrix = _frac_matrix(matrix, 2 ** n)

    def __matmul__(self, other):
        if not isinstance(other, SuperOperator) or other.n != self.n:
            return NotImplemented
        return SuperOperator(self.n, _matmul(self.matrix, other.matrix))

    def power(self, k):
        out = SuperOperator(self.n, _identity(2 ** self.n))
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out

    def parity_signature(self):
        """'even' if every nonzero entry connects equal-parity subsets,
        'odd' for strictly parity-flipping, 'mixed' otherwise."""
        even = odd = False
        for si in range(2 ** self.n):
            for sj in range(2 ** self.n):
                if self.matrix[si][sj] != 0:
                    if (bin(si).count("1") - bin(sj).count("1")) % 2 == 0:
                        even = True
                    else:
                        odd = True
        if even and odd:
            return "mixed"
        return "odd" if odd else "even"


def _sign_below(mask, i):
    return -1 if bin(mask & ((1 << i) - 1)).count("1") % 2 else 1


def _wedge_matrix(n, i):
    size = 2 ** n
    m = [[Fraction(0)] * size for _ in range(size)]
    for s in range(size):
        if not (s >> i) & 1:
            m[s | (1 << i)][s] = Fraction(_sign_below(s, i))
    return m


def _contract_matrix(n, i):
    size = 2 ** n
    m = [[Fraction(0)] * size for _ in range(size)]
    for s in range(size):
        if (s >> i) & 1:
            m[s & ~(1 << i)][s] = Fraction(_sign_below(s, i))
    return m


@lru_cache(maxsize=None)
def _generators(n):
    return ([_wedge_matrix(n, i) for i in range(n)],
            [_contract_matrix(n, i) for i in range(n)])


def spin_rep(x):
    """Image of a SplitSoElement under the spin representation: an exact
    even superoperator on the 2^n-dimensional exterior algebra."""
    n = x.n
    size = 2 ** n
    wedges, contracts = _generators(n)
    m = [[Fraction(0)] * size for _ in range(size)]
    tr_a = sum(x.a[i][i] for i in range(n))
    for d in range(size):
        m[d][d] -= Fraction(1, 2) * tr_a
    def accumulate(op, coeff):
        for r in range(size):
            row = op[r]
            for c in range(size):
                if row[c]:
                    m[r][c] += coeff * row[c]
    for i in range(n):
        for j in range(n):
            if x.a[i][j]:
                accumulate(_matmul(wedges[i], contracts[j]), x.a[i][j])
    for i in range(n):
        for j in range(i + 1, n):
            if x.b[i][j]:
                accumulate(_matmul(wedges[i], wedges[j]), x.b[i][j])
            if x.c[i][j]:
                accumulate(_matmul(contracts[i], contracts[j]), x.c[i][j])
    return SuperOperator(n, m)


def supertrace(op):
    """Str = trace over even-subset basis minus trace over odd-subset basis."""
    total = Fraction(0)
    for s in range(2 ** op.n):
        d = op.matrix[s][s]
        total += d if bin(s).count("1") % 2 == 0 else -d
    return total


def pfaffian(a):
    """Pfaffian of a skew-symmetric matrix in the standard convention
    (Pf [[0, a], [-a, 0]] = a), by recursive first-row expansion; exact.
    Pf(A)^2 = det(A), which the tests verify against an exact determinant."""
    m = _frac_matrix(a, len(a))
    if not _is_skew(m):
        raise DomainError("pfaffian needs an exactly skew-symmetric matrix")
    size = len(m)
    if size % 2:
        return Fraction(0)

    def expand(rows):
        if not rows:
            return Fraction(1)
        r0 = rows[0]
        total = Fraction(0)
        for k in range(1, len(rows)):
            rj = rows[k]
            if m[r0][rj]:
                rest = rows[1:k] + rows[k + 1:]
                total += (-1) ** (k - 1) * m[r0][rj] * expand(rest)
        return total

    return expand(tuple(range(size)))


def determinant(a):
    """Exact determinant by fraction-free Gaussian elimination."""
    m = [list(row) for row in _frac_matrix(a, len(a))]
    size = len(m)
    det = Fraction(1)
    for col in range(size):
        pivot = next((r for r in range(col, size) if m[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, size):
            f = m[r][col] * inv
            if f:
                for c in range(col, size):
                    m[r][c] -= f * m[col][c]
    return det


def _split_gram_times(x):
    """G X with G = [[0, I], [I, 0]]: swap the two row blocks; G X is skew
    exactly when X is in o(2n) for this split form."""
    m = x.block_matrix()
    n = x.n
    return tuple(m[n + i] if i < n else m[i - n] for i in range(2 * n))


@lru_cache(maxsize=None)
def _kappa(n):
    return pfaffian(_split_gram_times(SplitSoElement.cartan([1] * n)))


def pf_split(x):
    """Pfaffian in the split normalization: Pf_split(Cartan(t)) = prod t_i."""
    return pfaffian(_split_gram_times(x)) / _kappa(x.n)


@dataclass(frozen=True)
class PfIdentityResult:
    lhs: Fraction          # Str(spin_rep(X)^n)
    rhs: Fraction          # n! * Pf_split(X)
    ratio: Fraction        # the constant c_n, +-1

    def to_json(self):
        f = lambda q: [q.numerator, q.denominator]
        return {"lhs": f(self.lhs), "rhs": f(self.rhs), "c_n": f(self.ratio)}


def pf_identity_check(n, x):
    """Compare Str(spin_rep(X)^n) with n! Pf_split(X), exactly.

    Returns (lhs, rhs, ratio); the ratio is the constant c_n and must not
    depend on the sample.  Raises IndeterminateSampleError when the
    Pfaffian vanishes on the sample (0/0 ratio: resample)."""
    if n not in (2, 3):
        raise DomainError("identity check implemented for n = 2 and 3")
    if x.n != n:
        raise DomainError(f"element has n = {x.n}, expected {n}")
    lhs = supertrace(spin_rep(x).power(n))
    rhs = math.factorial(n) * pf_split(x)
    if rhs == 0:
        raise IndeterminateSampleError("Pf(X) = 0: indeterminate sample")
    return PfIdentityResult(lhs, rhs, lhs / rhs)
