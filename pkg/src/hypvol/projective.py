"""Points of the projective line and the cross-ratio.

A point of P^1 is held in homogeneous form (a, b) ~ (la, lb), which keeps
infinity unexceptional and lets the cross-ratio run exactly over Fractions
when the inputs are rational.  The cross-ratio convention is

    r(x1, x2, x3, x4) = (x1 - x3)(x2 - x4) / ((x1 - x4)(x2 - x3))

so r(oo, 0, 1, z) = z.
"""

from fractions import Fraction

from .errors import DegenerateConfigurationError

INFINITY = object()  #: sentinel accepted wherever a P^1 point is expected


def as_projective(x):
    """Coerce x to a homogeneous pair (a, b), b = 0 meaning infinity.

    Accepts the INFINITY sentinel, float/complex/int/Fraction scalars, the
    strings "inf"/"oo", or an (a, b) pair already in homogeneous form.
    """
    if x is INFINITY or (isinstance(x, str) and x in ("inf", "oo")):
        return (1, 0)
    if isinstance(x, tuple) and len(x) == 2:
        a, b = x
        if a == 0 and b == 0:
            raise DegenerateConfigurationError("(0, 0) is not a projective point")
        return x
    if isinstance(x, complex) and (x.real in (float("inf"), float("-inf"))
                                   or x.imag in (float("inf"), float("-inf"))):
        return (1, 0)
    return (x, 1)


def _cross(p, q):
    """Determinant | p q | of two homogeneous pairs; zero iff p ~ q."""
    return p[0] * q[1] - q[0] * p[1]


def cross_ratio_projective(p1, p2, p3, p4):
    """Cross-ratio of four homogeneous pairs, returned as a homogeneous pair."""
    num = _cross(p1, p3) * _cross(p2, p4)
    den = _cross(p1, p4) * _cross(p2, p3)
    return (num, den)


def cross_ratio(x1, x2, x3, x4):
    """Cross-ratio (x1-x3)(x2-x4)/((x1-x4)(x2-x3)) with limits at infinity.

    The value is exact (Fraction or exact complex) when all inputs are;
    otherwise a complex float.  Raises DegenerateConfigurationError when two
    points coincide, or when the configuration sends the value to 0, 1 or
    infinity (all of which mean a repeated point among the four).
    """
    pts = [as_projective(x) for x in (x1, x2, x3, x4)]
    for i in range(4):
        for j in range(i + 1, 4):
            if _cross(pts[i], pts[j]) == 0:
                raise DegenerateConfigurationError(
                    f"cross-ratio of coincident points (slots {i + 1} and {j + 1})")
    num, den = cross_ratio_projective(*pts)
    if isinstance(num, Fraction) or isinstance(den, Fraction) or (
            isinstance(num, int) and isinstance(den, int)):
        return Fraction(num, den)
    return complex(num) / complex(den)
