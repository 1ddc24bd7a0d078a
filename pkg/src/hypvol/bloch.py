"""Exact pre-Bloch / Bloch-group computations.

Elements of the multiplicative group F* are words over a caller-declared
generator set (each generator carries a complex embedding and an order,
finite or infinite).  The wedge square Lambda^2 F* is taken tensored with Q,
so anything involving a finite-order generator is torsion and dropped.  The
two maps implemented on top of this arithmetic:

    delta2:  sum n_i {z_i}  ->  sum n_i (1 - z_i) ^ z_i   in Lambda^2 F* (x) Q
    delta_n: {x}_n          ->  {x}_{n-1} (x) x            (purely formal)

plus the five-term relator whose delta2 image vanishes identically.
Rational points are factored automatically over declared prime generators;
anything else needs caller-supplied words (no algebraic-number factorization
is attempted).
"""

import cmath
from dataclasses import dataclass
from fractions import Fraction

from .errors import (DegenerateConfigurationError, DomainError,
                     InexpressibleElementError, MixedGroupError)
from .projective import cross_ratio

EMBEDDING_TOL = 1e-10


@dataclass(frozen=True)
class Generator:
    name: str
    value: complex
    order: int | None = None   # None = infinite order

    def __post_init__(self):
        if self.value == 0:
            raise DomainError("generator embedding must be nonzero")
        if self.order is not None and self.order < 1:
            raise DomainError("generator order must be positive or None")


class GeneratorSet:
    """Declared finitely generated subgroup of C*."""

    def __init__(self, generators):
        self.generators = tuple(generators)
        self._by_name = {g.name: i for i, g in enumerate(self.generators)}
        if len(self._by_name) != len(self.generators):
            raise DomainError("duplicate generator names")

    def index(self, name):
        if name not in self._by_name:
            raise InexpressibleElementError(name, f"unknown generator {name!r}")
        return self._by_name[name]

    def element(self, word, value=None):
        """Element from a word {name: exponent}; the embedding is computed
        from the word and, when a value is supplied, verified against it."""
        exps = [0] * len(self.generators)
        for name, e in word.items():
            exps[self.index(name)] = int(e)
        emb = 1.0 + 0.0j
        for g, e in zip(self.generators, exps):
            if e:
                emb *= complex(g.value) ** e
        if value is not None:
            ref = complex(value)
            if abs(emb - ref) > EMBEDDING_TOL * max(1.0, abs(ref)):
                raise InexpressibleElementError(
                    value, f"word embeds to {emb}, expected {ref}")
        return MultiplicativeElement(self, tuple(exps), emb)

    def express_rational(self, value):
        """Factor a nonzero rational over the declared generators.

        Requires each prime factor (and -1 for negative values) to appear as
        a generator whose embedding is that integer.  Raises
        InexpressibleElementError naming the offending value.
        """
        v = Fraction(value)
        if v == 0:
            raise InexpressibleElementError(value, "0 is not a unit")
        word = {}
        if v < 0:
            name = self._rational_generator(-1, value)
            word[name] = word.get(name, 0) + 1
            v = -v
        for n, sign in ((v.numerator, 1), (v.denominator, -1)):
            for p, e in _factorize(n):
                name = self._rational_generator(p, value)
                word[name] = word.get(name, 0) + sign * e
        return self.element(word, float(Fraction(value)))

    def _rational_generator(self, target, original):
        for g in self.generators:
            if g.value == target:
                return g.name
        raise InexpressibleElementError(
            original, f"needs generator {target}, not in the declared set")

    def express(self, value, word=None):
        if word is not None:
            return self.element(word, value)
        if isinstance(value, (int, Fraction)) or (
                isinstance(value, float) and float(value).is_integer()):
            return self.express_rational(Fraction(value))
        raise InexpressibleElementError(value, f"no word supplied for {value!r}")

    @classmethod
    def rational_base(cls, primes):
        """Convenience: generators -1 (order 2) and the given primes."""
        gens = [Generator("-1", -1.0 + 0j, 2)]
        gens += [Generator(str(p), complex(p), None) for p in primes]
        return cls(gens)

    @classmethod
    def from_json(cls, obj):
        gens = [Generator(g["name"], complex(g["value_re"], g.get("value_im", 0.0)),
                          g.get("order")) for g in obj]
        return cls(gens)


def _factorize(n):
    """Trial-division prime factorization of a positive integer."""
    n = int(n)
    out = []
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            out.append((d, e))
        d += 1 if d == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


class MultiplicativeElement:
    """Word over a GeneratorSet, with its complex embedding (the embedding is
    re-verified after every product, to 1e-10)."""

    __slots__ = ("group", "exponents", "value")

    def __init__(self, group, exponents, value):
        self.group = group
        self.exponents = tuple(int(e) for e in exponents)
        self.value = complex(value)
        check = 1.0 + 0.0j
        for g, e in zip(group.generators, self.exponents):
            if e:
                check *= complex(g.value) ** e
        if abs(check - self.value) > EMBEDDING_TOL * max(1.0, abs(check)):
            raise InexpressibleElementError(value, "embedding/word mismatch")

    def __mul__(self, other):
        if not isinstance(other, MultiplicativeElement):
            return NotImplemented
        if other.group is not self.group:
            raise MixedGroupError("elements over different generator sets")
        exps = tuple(a + b for a, b in zip(self.exponents, other.exponents))
        return MultiplicativeElement(self.group, exps, self.value * other.value)

    def inverse(self):
        return MultiplicativeElement(
            self.group, tuple(-e for e in self.exponents), 1.0 / self.value)

    def __repr__(self):
        parts = [f"{g.name}^{e}" for g, e in zip(self.group.generators, self.exponents) if e]
        return " * ".join(parts) if parts else "1"


class WedgeElement:
    """Rational combination of ordered generator pairs g_i ^ g_j (i < j),
    over the infinite-order generators only (torsion is killed)."""

    __slots__ = ("group", "terms")

    def __init__(self, group, terms=None):
        self.group = group
        self.terms = {}
        for key, coeff in (terms or {}).items():
            self._add(key, Fraction(coeff))

    def _add(self, key, coeff):
        i, j = key
        if i == j or coeff == 0:
            return
        gens = self.group.generators
        if gens[i].order is not None or gens[j].order is not None:
            return  # torsion pair dies in Lambda^2 (x) Q
        if i > j:
            i, j, coeff = j, i, -coeff
        new = self.terms.get((i, j), Fraction(0)) + coeff
        if new == 0:
            self.terms.pop((i, j), None)
        else:
            self.terms[(i, j)] = new

    def __add__(self, other):
        if other.group is not self.group:
            raise MixedGroupError("wedge elements over different generator sets")
        out = WedgeElement(self.group, dict(self.terms))
        for key, c in other.terms.items():
            out._add(key, c)
        return out

    def scaled(self, c):
        return WedgeElement(self.group,
                            {k: v * Fraction(c) for k, v in self.terms.items()})

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, WedgeElement) and self.group is other.group \
            and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "0"
        gens = self.group.generators
        return " + ".join(f"{c}*({gens[i].name}^{gens[j].name})"
                          for (i, j), c in sorted(self.terms.items()))


def wedge(a, b):
    """Bilinear wedge of two multiplicative elements: expand over generator
    pairs and canonicalize (g^g = 0, antisymmetry, torsion dropped)."""
    if a.group is not b.group:
        raise MixedGroupError("wedge of elements over different generator sets")
    out = WedgeElement(a.group)
    for i, ei in enumerate(a.exponents):
        if not ei:
            continue
        for j, ej in enumerate(b.exponents):
            if not ej:
                continue
            out._add((i, j), Fraction(ei * ej))
    return out


class PreBlochElement:
    """Integer combination of points {z}, z not in {0, 1, infinity}.

    Points are exact Fractions or complex numbers; optional words over a
    generator set for z and 1 - z ride along for delta2.  Equal points merge;
    zero coefficients drop.
    """

    def __init__(self):
        self.terms = {}       # key -> coeff
        self.words = {}       # key -> (z_word, one_minus_z_word) or None

    @staticmethod
    def _key(z):
        if isinstance(z, (int, Fraction)):
            return Fraction(z)
        return complex(z)

    def add(self, z, coeff=1, z_word=None, one_minus_z_word=None):
        key = self._key(z)
        if key == 0 or key == 1:
            raise DomainError("pre-Bloch points must avoid 0, 1, infinity")
        new = self.terms.get(key, 0) + int(coeff)
        if new == 0:
            self.terms.pop(key, None)
            self.words.pop(key, None)
        else:
            self.terms[key] = new
            if z_word is not None or one_minus_z_word is not None:
                self.words[key] = (z_word, one_minus_z_word)
        return self

    def items(self):
        return self.terms.items()

    def __len__(self):
        return len(self.terms)

    def bloch_wigner_sum(self, d_func):
        """sum n_i D(z_i) for any real-valued function of complex argument."""
        return sum(c * d_func(complex(z)) for z, c in self.terms.items())

    @classmethod
    def from_json(cls, obj):
        out = cls()
        for item in obj:
            z = item["z"]
            if isinstance(z, str):
                z = Fraction(z)
            elif isinstance(z, list):
                z = complex(z[0], z[1])
            out.add(z, item.get("coeff", 1), item.get("z_word"),
                    item.get("one_minus_z_word"))
        return out

    def __repr__(self):
        return " + ".join(f"{c}*{{{z}}}" for z, c in self.terms.items()) or "0"


def delta2(p, group):
    """delta2(sum n_i {z_i}) = sum n_i (1 - z_i) ^ z_i in Lambda^2 (x) Q.

    Every point and its complement 1 - z must be expressible over the
    declared group: rational points factor automatically, others need the
    words stored on the element.
    """
    out = WedgeElement(group)
    for key, coeff in p.terms.items():
        z_word, omz_word = p.words.get(key, (None, None))
        if isinstance(key, Fraction):
            ez = group.express(key, z_word)
            eomz = group.express(1 - key, omz_word)
        else:
            if z_word is None or omz_word is None:
                raise InexpressibleElementError(
                    key, f"non-rational point {key} needs explicit words")
            ez = group.element(z_word, key)
            eomz = group.element(omz_word, 1 - key)
        out = out + wedge(eomz, ez).scaled(coeff)
    return out


def five_term_relator(x1, x2, x3, x4, x5):
    """sum_{i=1}^{5} (-1)^i { r(x_1, ..., omit x_i, ..., x_5) }.

    Exact over Fractions for rational input; degenerate configurations
    raise from the cross-ratio layer.
    """
    pts = (x1, x2, x3, x4, x5)
    out = PreBlochElement()
    for i in range(5):
        rest = [p for j, p in enumerate(pts) if j != i]
        r = cross_ratio(*rest)
        if r == 0 or r == 1:
            raise DegenerateConfigurationError("cross-ratio hit {0, 1}")
        out.add(r, (-1) ** (i + 1))
    return out


@dataclass(frozen=True)
class FormalTensorTerm:
    """One term n * ({x}_{level} (x) x) of a formal B_{level} (x) F* sum."""
    point: object
    level: int
    coeff: int

    def __repr__(self):
        return f"{self.coeff}*({{{self.point}}}_{self.level} (x) {self.point})"


def delta_n(terms, n):
    """Formal delta_n on sum n_i {x_i}_n: each {x} goes to {x}_{n-1} (x) x.

    `terms` is a mapping point -> coefficient (or an iterable of (point,
    coeff) pairs); equal symbols merge, nothing else is quotiented.
    """
    if n < 2:
        raise DomainError("delta_n needs n >= 2")
    merged = {}
    items = terms.items() if hasattr(terms, "items") else terms
    for point, coeff in items:
        key = PreBlochElement._key(point)
        merged[key] = merged.get(key, 0) + int(coeff)
    return [FormalTensorTerm(point, n - 1, c)
            for point, c in merged.items() if c != 0]
