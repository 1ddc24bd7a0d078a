"""Classical polylogarithms Li_n and their single-valued versions.

Everything here works in IEEE double precision on the principal branch
(cut along the real ray z > 1).  Evaluation strategy for Li_n:

  * |z| <= 1/2           direct series  sum z^k / k^n
  * 1/2 < |z| < 2        expansion in mu = log z (valid for |mu| < 2pi),
                         except n = 2 close to z = 1 where the reflection
                         z -> 1 - z reuses the direct series
  * |z| >= 2             inversion z -> 1/z (classical identities for
                         n = 2, 3; Bernoulli-polynomial form in general)

The single-valued combinations are

    D(z)   = Im Li_2(z) + arg(1 - z) log|z|
    L_3(z) = Re(Li_3(z) - log|z| Li_2(z) + 1/3 log^2|z| Li_1(z))
    L_n(z) = R_n( sum_{k=0}^{n-1} (B_k 2^k / k!) Li_{n-k}(z) log^k|z| )

with R_n = Re for odd n and Im for even n.  The k = 0 term is included in
the L_n sum; with it L_2 and L_3 reproduce the two displayed formulas above,
which the test suite checks on random points.
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import DomainError, PrecisionError
from .projective import INFINITY, cross_ratio

# switchover radii of the continuation ladder; the band between them is
# covered by the log-series, whose worst-case ratio |log z|/2pi stays < 0.52
SERIES_RADIUS = 0.5
INVERSION_RADIUS = 2.0
_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class Precision:
    """Accuracy request for series evaluation.

    target_rel_error may not undercut the machine epsilon of the working
    double precision; the extended-precision oracle used by the tests is a
    separate implementation.
    """
    target_rel_error: float = 1e-15
    max_terms: int = 100000

    def __post_init__(self):
        if not self.target_rel_error > 0 or not self.max_terms > 0:
            raise ValueError("precision parameters must be positive")
        if self.target_rel_error < _EPS:
            raise ValueError("target error below machine epsilon of the working precision")


DEFAULT_PRECISION = Precision()


def _check_finite(z):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise DomainError(f"non-finite argument {z!r}")
    return z


@lru_cache(maxsize=None)
def bernoulli(k):
    """Bernoulli number B_k as an exact Fraction.

    Convention fixed by sum B_k 2^k x^k / k! = 2x/(e^{2x} - 1), i.e. the
    standard x/(e^x - 1) generating function; B_1 = -1/2.
    """
    if k < 0:
        raise DomainError("Bernoulli index must be >= 0")
    if k == 0:
        return Fraction(1)
    if k % 2 == 1:
        return Fraction(-1, 2) if k == 1 else Fraction(0)
    acc = Fraction(0)
    for j in range(k):
        acc += Fraction(math.comb(k + 1, j)) * bernoulli(j)
    return -acc / (k + 1)


@lru_cache(maxsize=None)
def _zeta(m):
    """zeta(m) for integer m != 1, as a float.

    m >= 2 by Euler-Maclaurin on the tail beyond N = 18; m <= 0 exactly via
    zeta(-j) = (-1)^j B_{j+1}/(j+1).
    """
    if m == 1:
        raise DomainError("zeta(1) pole")
    if m <= 0:
        j = -m
        return float((-1) ** j * bernoulli(j + 1) / (j + 1))
    N = 18
    s = sum(k ** -float(m) for k in range(1, N))
    s += N ** (1.0 - m) / (m - 1) + 0.5 * N ** (-float(m))
    fact = float(m)          # rising product m (m+1) ... (m+2j-2)
    power = N ** (-float(m) - 1)
    for j in range(1, 8):
        s += float(bernoulli(2 * j)) / math.factorial(2 * j) * fact * power
        fact *= (m + 2 * j - 1) * (m + 2 * j)
        power /= N * N
    return s


def _li_series(n, z, precision):
    """Direct sum z^k / k^n for |z| <= 1/2 (also fine slightly beyond)."""
    total = 0.0 + 0.0j
    term = complex(z)
    k = 1
    while k <= precision.max_terms:
        total += term / k ** n
        if abs(term) <= precision.target_rel_error * max(abs(total), 1e-300) * k ** n:
            return total
        k += 1
        term *= z
    raise PrecisionError(f"Li_{n} series did not converge in {precision.max_terms} terms")


def _li_log_series(n, z, precision):
    """Expansion of Li_n(e^mu) around mu = 0, valid for |mu| < 2 pi:

        sum_{k >= 0, k != n-1} zeta(n-k) mu^k / k!
        + mu^{n-1}/(n-1)! (H_{n-1} - log(-mu))

    Continuous onto both sides of the cut with principal logs.
    """
    mu = cmath.log(z)
    h = sum(1.0 / j for j in range(1, n))
    if mu == 0:
        return complex(_zeta(n))
    total = (h - cmath.log(-mu)) * mu ** (n - 1) / math.factorial(n - 1)
    mu_pow = 1.0 + 0.0j
    small_streak = 0
    for k in range(0, precision.max_terms):
        if k != n - 1:
            term = _zeta(n - k) * mu_pow / math.factorial(k) if k < 171 else 0.0
            if k >= 171:
                # factorial overflow guard; terms this deep are negligible
                break
            total += term
            if abs(term) <= precision.target_rel_error * max(abs(total), 1e-300):
                small_streak += 1
                if small_streak >= 3 and k > n:
                    return total
            else:
                small_streak = 0
        mu_pow *= mu
    if small_streak:
        return total
    raise PrecisionError(f"Li_{n} log-series did not converge near |z| = 1")


def _li_inversion(n, z, precision):
    """Map |z| >= 2 into the series disk through z -> 1/z."""
    w = li(n, 1.0 / z, precision)
    lg = cmath.log(-z)
    if n == 2:
        return -w - math.pi ** 2 / 6 - 0.5 * lg ** 2
    if n == 3:
        return w - lg ** 3 / 6 - math.pi ** 2 / 6 * lg
    # general n: Li_n(z) + (-1)^n Li_n(1/z) = -(2 pi i)^n / n! B_n(1/2 + log(-z)/(2 pi i))
    u = 0.5 + lg / (2j * math.pi)
    bpoly = sum(
        complex(Fraction(math.comb(n, j)) * bernoulli(j)) * u ** (n - j)
        for j in range(n + 1))
    return -((2j * math.pi) ** n / math.factorial(n)) * bpoly - (-1) ** n * w


def li(n, z, precision=DEFAULT_PRECISION):
    """Principal-branch polylogarithm Li_n(z), n >= 1.

    Raises DomainError at the Li_1 pole z = 1 and on non-finite input;
    PrecisionError if the term budget runs out.
    """
    if n < 1:
        raise DomainError("Li_n needs n >= 1")
    z = _check_finite(z)
    if n == 1:
        if z == 1:
            raise DomainError("Li_1(1) diverges")
        return -cmath.log(1.0 - z)
    if z == 0:
        return 0.0 + 0.0j
    r = abs(z)
    if r <= SERIES_RADIUS:
        return _li_series(n, z, precision)
    if r >= INVERSION_RADIUS:
        return _li_inversion(n, z, precision)
    if n == 2 and abs(1.0 - z) <= SERIES_RADIUS:
        # reflection Li_2(z) = pi^2/6 - log(z) log(1-z) - Li_2(1-z)
        w = 1.0 - z
        head = math.pi ** 2 / 6 - cmath.log(z) * cmath.log(w)
        return head - _li_series(2, w, precision)
    return _li_log_series(n, z, precision)


def bloch_wigner(z, precision=DEFAULT_PRECISION):
    """Bloch-Wigner function D(z) = Im Li_2(z) + arg(1-z) log|z|.

    Single-valued and continuous on the whole sphere; 0 at 0, 1, infinity
    and on the real line.  Total function: no domain errors.
    """
    if z is INFINITY:
        return 0.0
    z = _check_finite(z)
    if z.imag == 0.0:
        return 0.0
    if z == 0 or z == 1:
        return 0.0
    val = (li(2, z, precision)).imag + cmath.phase(1.0 - z) * math.log(abs(z))
    return val


def sv_l3(z, precision=DEFAULT_PRECISION):
    """Single-valued trilogarithm
    L_3(z) = Re(Li_3(z) - log|z| Li_2(z) + 1/3 log^2|z| Li_1(z)),
    extended by continuity with L_3(0) = 0 and L_3(1) = zeta(3).
    """
    if z is INFINITY:
        return 0.0
    z = _check_finite(z)
    if z == 0:
        return 0.0
    if z == 1:
        return _zeta(3)
    lg = math.log(abs(z))
    val = li(3, z, precision) - lg * li(2, z, precision) \
        + (lg * lg / 3.0) * li(1, z, precision)
    return val.real


def sv_ln(n, z, precision=DEFAULT_PRECISION):
    """Zagier's single-valued L_n(z), n >= 2:

        R_n( sum_{k=0}^{n-1} (B_k 2^k / k!) Li_{n-k}(z) log^k|z| )

    R_n = Re for odd n, Im for even n.  The k = 0 term is included so that
    sv_ln(2, .) == bloch_wigner and sv_ln(3, .) == sv_l3.
    """
    if n < 2:
        raise DomainError("sv_ln needs n >= 2")
    if z is INFINITY:
        return 0.0
    z = _check_finite(z)
    if z == 0:
        return 0.0
    part = (lambda w: w.real) if n % 2 else (lambda w: w.imag)
    if z == 1:
        return part(complex(_zeta(n)))
    lg = math.log(abs(z))
    total = 0.0 + 0.0j
    lg_pow = 1.0
    for k in range(n):
        if k == n - 1 and lg == 0.0:
            break  # log|z| = 0 kills the Li_1 term; avoid Li_1(1) on |z| = 1
        coeff = float(bernoulli(k) * 2 ** k) / math.factorial(k)
        total += coeff * li(n - k, z, precision) * lg_pow
        lg_pow *= lg
    return part(total)


def lobachevsky(theta, precision=DEFAULT_PRECISION):
    """Lobachevsky function as the boundary dilogarithm slice,
    lob(theta) = D(e^{2 i theta}) / 2: odd, pi-periodic, used as the
    independent route on ideal-tetrahedron volumes.
    """
    return 0.5 * bloch_wigner(cmath.exp(2j * theta), precision)


def five_term_defect(z0, z1, z2, z3, z4, precision=DEFAULT_PRECISION):
    """Residual of the five-term relation of D on one configuration:

        | sum_{i=1}^{5} (-1)^i D(r(z_1, ..., omit i, ..., z_5)) |

    Zero in exact arithmetic for any five distinct points; the returned
    number is the accumulated roundoff.  Degenerate configurations (two
    equal points, or a cross-ratio at 0, 1, infinity) raise
    DegenerateConfigurationError from the cross-ratio layer.
    """
    pts = (z0, z1, z2, z3, z4)
    acc = 0.0
    for i in range(5):
        rest = [p for j, p in enumerate(pts) if j != i]
        r = cross_ratio(*rest)
        acc += (-1) ** (i + 1) * bloch_wigner(complex(r), precision)
    return abs(acc)
