"""Klein-model hyperbolic geometry in dimension 3.

Points live in the closed unit ball (interior = finite, sphere = ideal);
geodesics are chords.  Metric quantities (distance, angles, truncated
lengths) are computed in floats through the Lorentzian lift

    x in B^3  ->  X = (1, x) / sqrt(1 - |x|^2),   B(X, X) = -1,

with B the signature (3,1) form -x0 y0 + x.y, while incidence and polarity
run exactly over Fractions whenever the input coordinates are rational.

Conventions fixed here and relied on by the tests:

  * curvature -1, i.e. distance = 1/2 |log r| in the chord cross-ratio
    convention (tested against the hyperboloid formula acosh(-B(X, Y)));
  * the absolute is identified with the projective line through the
    conjugated stereographic chart zeta(u) = (u_x - i u_y)/(1 - u_z) from
    the north pole, which makes positively oriented ideal simplices have
    shape with positive imaginary part;
  * a horoball at an ideal vertex with lifted null vector V = (1, u) is the
    region B(X, V) >= -c for a size parameter c > 0 (Busemann level e^t = c);
    truncated lengths are log(-B(P, V)/c) and log(-B(V, W)/(2 c_v c_w)).
"""

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (DegenerateConfigurationError, DomainError, FlatSimplexError,
                     MissingHoroballError, TangencyError)
from .polylog import bloch_wigner
from .projective import INFINITY, cross_ratio, cross_ratio_projective

IDEAL_TOL = 1e-12
DEGENERACY_TOL = 1e-12

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])


def minkowski_dot(x, y):
    """Signature (3,1) pairing -x0 y0 + x1 y1 + x2 y2 + x3 y3."""
    return -x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3]


def _is_exact_seq(coords):
    return all(isinstance(c, (int, Fraction)) for c in coords)


class HPoint:
    """A point of the Klein ball: finite (|x| < 1), ideal (|x| = 1) or,
    for polarity bookkeeping only, hyperideal (|x| > 1).

    Coordinates are kept as Fractions when constructed from rationals, which
    gives polar_dual its exact path; metric operations coerce to floats.
    """

    __slots__ = ("coords", "kind")

    def __init__(self, coords, kind=None):
        coords = tuple(Fraction(c) if isinstance(c, int) else c for c in coords)
        if len(coords) != 3:
            raise DomainError("HPoint needs 3 coordinates")
        self.coords = coords
        n2 = self.norm2()
        if kind is None:
            if _is_exact_seq(coords):
                kind = "finite" if n2 < 1 else ("ideal" if n2 == 1 else "hyperideal")
            else:
                d = float(n2) - 1.0
                kind = "ideal" if abs(d) <= IDEAL_TOL else ("finite" if d < 0 else "hyperideal")
        self.kind = kind
        self._validate(n2)

    def _validate(self, n2):
        if self.kind == "finite":
            if (n2 >= 1) if self.is_exact() else (float(n2) >= 1.0):
                raise DomainError(f"finite point outside the ball: |x|^2 = {float(n2)}")
        elif self.kind == "ideal":
            if self.is_exact():
                if n2 != 1:
                    raise DomainError(f"ideal point must satisfy |x| = 1 exactly, got |x|^2 = {n2}")
            elif abs(float(n2) - 1.0) > IDEAL_TOL:
                raise DomainError(f"ideal point off the sphere: |x|^2 = {float(n2)}")
        elif self.kind != "hyperideal":
            raise DomainError(f"unknown point kind {self.kind!r}")

    def norm2(self):
        return sum(c * c for c in self.coords)

    def is_exact(self):
        return _is_exact_seq(self.coords)

    def is_ideal(self):
        return self.kind == "ideal"

    def as_array(self):
        return np.array([float(c) for c in self.coords])

    def lift(self):
        """Lorentzian representative: (1, x)/sqrt(1-|x|^2) on the hyperboloid
        for finite points, the null ray (1, x) for ideal points."""
        x = self.as_array()
        v = np.concatenate(([1.0], x))
        if self.kind == "ideal":
            return v
        if self.kind == "hyperideal":
            raise DomainError("hyperideal points have no hyperboloid lift")
        return v / math.sqrt(1.0 - float(x @ x))

    def homogeneous(self):
        """Exact projective representative (1, x), Fractions when possible."""
        return (Fraction(1),) + tuple(
            c if isinstance(c, Fraction) else Fraction(c) for c in self.coords)

    def __eq__(self, other):
        return isinstance(other, HPoint) and self.kind == other.kind \
            and all(a == b for a, b in zip(self.coords, other.coords))

    def __hash__(self):
        return hash((self.kind, tuple(float(c) for c in self.coords)))

    def __repr__(self):
        return f"HPoint({[float(c) for c in self.coords]}, {self.kind!r})"


@dataclass(frozen=True)
class HoroballAssignment:
    """Horoball size parameters per ideal-vertex index (all > 0)."""
    sizes: dict

    def __post_init__(self):
        for k, v in self.sizes.items():
            if not v > 0:
                raise DomainError(f"horoball parameter at vertex {k} must be positive")

    def get(self, index):
        if index not in self.sizes:
            raise MissingHoroballError(f"ideal vertex {index} has no horoball assigned")
        return self.sizes[index]


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, cyc = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            cyc += 1
        if cyc % 2 == 0:
            sign = -sign
    return sign


class GeodesicSimplex:
    """Ordered 4 vertices in the Klein ball plus an orientation sign."""

    __slots__ = ("vertices", "orientation")

    def __init__(self, vertices, orientation=1):
        vertices = tuple(v if isinstance(v, HPoint) else HPoint(v) for v in vertices)
        if len(vertices) != 4:
            raise DomainError("a 3-simplex needs 4 vertices")
        if orientation not in (1, -1):
            raise DomainError("orientation must be +1 or -1")
        self.vertices = vertices
        self.orientation = orientation

    def affine_matrix(self):
        v = np.array([p.as_array() for p in self.vertices])
        return v[1:] - v[0]

    def euclidean_volume(self):
        return abs(float(np.linalg.det(self.affine_matrix()))) / 6.0

    def is_degenerate(self, tol=DEGENERACY_TOL):
        m = self.affine_matrix()
        scale = max(np.max(np.abs(m)), 1e-30) ** 3
        return abs(float(np.linalg.det(m))) <= tol * scale

    def permuted(self, perm):
        """Relabel vertices; the orientation flag picks up the permutation sign
        (relation: swapping two vertices flips orientation)."""
        verts = tuple(self.vertices[perm[i]] for i in range(4))
        return GeodesicSimplex(verts, self.orientation * _perm_sign(list(perm)))

    def ideal_indices(self):
        return [i for i, v in enumerate(self.vertices) if v.is_ideal()]

    def to_json(self):
        return {
            "vertices": [[float(c) for c in v.coords] for v in self.vertices],
            "kinds": [v.kind for v in self.vertices],
            "orientation": self.orientation,
        }

    @classmethod
    def from_json(cls, obj):
        kinds = obj.get("kinds") or [None] * 4
        verts = []
        for raw, kind in zip(obj["vertices"], kinds):
            coords = [Fraction(c) if isinstance(c, (int, str)) else c for c in raw]
            verts.append(HPoint(coords, kind))
        return cls(verts, obj.get("orientation", 1))

    def __repr__(self):
        return f"GeodesicSimplex({list(self.vertices)!r}, orientation={self.orientation})"


def hyperbolic_distance(p, q):
    """Distance through the chord cross-ratio: the chord through p, q meets
    the sphere at Q1 (behind p) and Q2 (beyond q), and

        rho = 1/2 |log r(Q1, Q2, P1, P2)|.

    Returns 0 for p = q (documented choice instead of an error).
    """
    p = p if isinstance(p, HPoint) else HPoint(p)
    q = q if isinstance(q, HPoint) else HPoint(q)
    if p.kind != "finite" or q.kind != "finite":
        raise DomainError("distance needs two finite points")
    a, b = p.as_array(), q.as_array()
    d = b - a
    dd = float(d @ d)
    if dd == 0.0:
        return 0.0
    # |a + t d|^2 = 1: roots t- < 0 <= 1 < t+
    ad = float(a @ d)
    disc = ad * ad - dd * (float(a @ a) - 1.0)
    root = math.sqrt(disc)
    t1 = (-ad - root) / dd   # Q1 side of p
    t2 = (-ad + root) / dd   # Q2 side of q
    r = ((t1 - 0.0) * (t2 - 1.0)) / ((t1 - 1.0) * (t2 - 0.0))
    return 0.5 * abs(math.log(r))


def hyperboloid_distance(p, q):
    """Independent route: acosh(-B(X, Y)) on the hyperboloid lift."""
    p = p if isinstance(p, HPoint) else HPoint(p)
    q = q if isinstance(q, HPoint) else HPoint(q)
    c = -minkowski_dot(p.lift(), q.lift())
    return math.acosh(max(c, 1.0))


def _cofactor_covector(rows):
    """Covector n with n . x = det([x; rows]) for three 4-vectors `rows`;
    kills exactly the span of the rows.  Pure products and sums, so sign
    symmetries of the input survive bitwise (needed for exact cancellation
    of mirror-image simplices in Dehn tensors)."""
    n = []
    for mu in range(4):
        cols = [c for c in range(4) if c != mu]
        m = [[rows[r][c] for c in cols] for r in range(3)]
        det3 = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
        n.append((-1) ** mu * det3)
    return n


def _face_normal(lifts, opposite):
    """Outward spacelike normal of the face skipping vertex `opposite`:
    B(N, X_i) = 0 on the face, B(N, X_opposite) < 0."""
    rows = [lifts[i] for i in range(4) if i != opposite]
    n = _cofactor_covector(rows)
    scale = max(max(abs(x) for x in row) for row in rows) ** 3
    if max(abs(x) for x in n) <= 1e-12 * max(scale, 1e-30):
        raise DegenerateConfigurationError("face vertices nearly dependent")
    nvec = [-n[0], n[1], n[2], n[3]]                 # raise index: B(N, X) = n . X
    norm2 = minkowski_dot(nvec, nvec)
    if norm2 <= 0:
        raise DegenerateConfigurationError("face plane does not meet the ball")
    inv = 1.0 / math.sqrt(norm2)
    nvec = [x * inv for x in nvec]
    if minkowski_dot(nvec, lifts[opposite]) > 0:
        nvec = [-x for x in nvec]
    return nvec


def dihedral_angles(s):
    """Interior dihedral angle at each of the 6 edges, from the Lorentzian
    inner product of outward face normals: cos theta = -B(N_a, N_b).

    Edge (i, j) is shared by the two faces opposite the other two vertices.
    """
    if s.is_degenerate():
        raise DegenerateConfigurationError("degenerate simplex has no dihedral angles")
    lifts = [v.lift() for v in s.vertices]
    normals = [_face_normal(lifts, k) for k in range(4)]
    angles = {}
    for i in range(4):
        for j in range(i + 1, 4):
            k, l = [m for m in range(4) if m not in (i, j)]
            c = -minkowski_dot(normals[k], normals[l])
            angles[(i, j)] = math.acos(max(-1.0, min(1.0, c)))
    return angles


def edge_length(s, edge, horoballs=None):
    """Length of edge (i, j); ideal endpoints are truncated at their assigned
    horospheres (signed: large horoballs can overlap and give negative
    lengths).  Raises MissingHoroballError for an unassigned ideal endpoint.
    """
    i, j = edge
    p, q = s.vertices[i], s.vertices[j]
    if p.kind == "hyperideal" or q.kind == "hyperideal":
        raise DomainError("edge lengths are not defined for hyperideal vertices")
    if not p.is_ideal() and not q.is_ideal():
        return hyperbolic_distance(p, q)
    if horoballs is None:
        horoballs = HoroballAssignment({})
    X, Y = p.lift(), q.lift()
    if p.is_ideal() and q.is_ideal():
        cv, cw = horoballs.get(i), horoballs.get(j)
        return math.log(-minkowski_dot(X, Y) / (2.0 * cv * cw))
    if q.is_ideal():       # orient so X is the ideal one
        X, Y = Y, X
        i, j = j, i
    c = horoballs.get(i)
    return math.log(-minkowski_dot(Y, X) / c)


def _boundary_chart_pair(u):
    """Ideal point -> homogeneous point of CP^1 in the conjugated
    stereographic chart zeta = (x - i y)/(1 - z), north pole -> infinity.

    The two equivalent pairs (x - iy, 1 - z) ~ (1 + z, x + iy) are switched
    on hemispheres for stability.
    """
    x, y, z = (float(c) for c in u.coords)
    if z <= 0.0:
        return (complex(x, -y), complex(1.0 - z))
    return (complex(1.0 + z), complex(x, y))


def boundary_point(zeta):
    """Inverse chart: complex number (or INFINITY) -> ideal HPoint."""
    if zeta is INFINITY:
        return HPoint((0.0, 0.0, 1.0), "ideal")
    zeta = complex(zeta)
    m2 = zeta.real ** 2 + zeta.imag ** 2
    s = m2 + 1.0
    return HPoint((2.0 * zeta.real / s, -2.0 * zeta.imag / s, (m2 - 1.0) / s), "ideal")


def ideal_shape(v0, v1, v2, v3):
    """Shape parameter of an ideal simplex: the cross-ratio of its four
    boundary points in the fixed chart.  Positively oriented simplices give
    Im(shape) > 0; a real shape means a flat (coplanar) configuration.
    """
    verts = []
    for v in (v0, v1, v2, v3):
        v = v if isinstance(v, HPoint) else HPoint(v)
        if not v.is_ideal():
            raise DomainError("ideal_shape needs four ideal points")
        verts.append(v)
    pairs = [_boundary_chart_pair(v) for v in verts]
    num, den = cross_ratio_projective(*pairs)
    if abs(den) == 0.0:
        raise DegenerateConfigurationError("coincident ideal points")
    z = num / den
    if not (math.isfinite(z.real) and math.isfinite(z.imag)) or z == 0 or z == 1:
        raise DegenerateConfigurationError("degenerate ideal configuration")
    if abs(z.imag) <= DEGENERACY_TOL * max(1.0, abs(z.real)):
        raise FlatSimplexError("coplanar ideal vertices: flat simplex")
    return z


def shape_triple(z):
    """The three opposite-edge-pair parameters (z, 1/(1-z), (z-1)/z)."""
    z = complex(z)
    return (z, 1.0 / (1.0 - z), (z - 1.0) / z)


def shape_angles(z):
    """Dihedral angles of the ideal simplex with shape z (Im z > 0):
    (arg z, arg 1/(1-z), arg (z-1)/z), one per opposite-edge pair; they sum
    to pi."""
    if complex(z).imag <= 0:
        raise FlatSimplexError("shape angles need Im z > 0")
    return tuple(cmath.phase(w) for w in shape_triple(z))


# edge pairs of the simplex (v0,v1,v2,v3) carrying each shape-triple slot:
# slot 0 <-> edges (0,1),(2,3); slot 1 <-> (0,2),(1,3); slot 2 <-> (0,3),(1,2)
SLOT_EDGES = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


def ideal_simplex_from_shape(z, orientation=1):
    """Ideal simplex with boundary points (infinity, 0, 1, z) in the chart."""
    z = complex(z)
    if z.imag == 0:
        raise FlatSimplexError("flat shape")
    verts = [boundary_point(INFINITY), boundary_point(0j),
             boundary_point(1 + 0j), boundary_point(z)]
    return GeodesicSimplex(verts, orientation)


def ideal_volume(z):
    """Volume of the ideal simplex of shape z: D(z), positive iff Im z > 0."""
    z = complex(z)
    if z.imag == 0.0:
        raise FlatSimplexError("flat simplex has orientation-ambiguous zero volume")
    return bloch_wigner(z)


def _exact_nullspace_vector(rows):
    """One exact kernel vector of a 3x4 Fraction matrix of full rank 3."""
    rows = [list(r) for r in rows]
    # vector of signed 3x3 minors: w_k = (-1)^k det(columns except k)
    def det3(cols):
        m = [[rows[r][c] for c in cols] for r in range(3)]
        return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    w = []
    for k in range(4):
        cols = [c for c in range(4) if c != k]
        w.append((-1) ** k * det3(cols))
    if all(x == 0 for x in w):
        raise DegenerateConfigurationError("rank-deficient plane intersection")
    return w


def polar_dual(s, q_form=None):
    """Polar-dual simplex with respect to a quadric: vertex x_i goes to its
    polar hyperplane (the plane of the tangency locus of lines through x_i),
    and dual vertex j is the common point of the polars of all x_i, i != j.

    Exact over Fractions for rational input; an involution:
    polar_dual(polar_dual(s)) == s.  Raises TangencyError for a vertex on
    the quadric or a face tangent to it.
    """
    if q_form is None:
        q = [[Fraction(-1 if i == 0 else 0) if i == j else Fraction(0) for j in range(4)]
             for i in range(4)]
        for i in range(1, 4):
            q[i][i] = Fraction(1)
    else:
        q = [[Fraction(x) if not isinstance(x, Fraction) else x for x in row]
             for row in q_form]
    xs = [v.homogeneous() for v in s.vertices]
    polars = []
    for x in xs:
        m = [sum(q[r][c] * x[c] for c in range(4)) for r in range(4)]
        quad_val = sum(m[c] * x[c] for c in range(4))
        if quad_val == 0:
            raise TangencyError("vertex lies on the quadric")
        polars.append(m)
    duals = []
    for j in range(4):
        rows = [polars[i] for i in range(4) if i != j]
        w = _exact_nullspace_vector(rows)
        if w[0] == 0:
            raise DegenerateConfigurationError("dual vertex at projective infinity")
        coords = [Fraction(w[k], 1) / w[0] for k in range(1, 4)]
        # face tangent to the quadric <=> its pole lies on the quadric
        wq = sum(sum(q[r][c] * w[c] for c in range(4)) * w[r] for r in range(4))
        if wq == 0:
            raise TangencyError("face tangent to the quadric")
        duals.append(HPoint(coords))
    return GeodesicSimplex(duals, s.orientation)


def random_lorentz(rng, rapidity=0.8):
    """Random ball-preserving Lorentz map: rotation x boost x rotation."""
    def rot():
        m, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        if np.linalg.det(m) < 0:
            m[:, 0] = -m[:, 0]
        out = np.eye(4)
        out[1:, 1:] = m
        return out
    t = rng.uniform(-rapidity, rapidity)
    boost = np.eye(4)
    boost[0, 0] = boost[1, 1] = math.cosh(t)
    boost[0, 1] = boost[1, 0] = math.sinh(t)
    return rot() @ boost @ rot()


def apply_lorentz(mat, point):
    """Image of an HPoint under a Lorentz matrix, reprojected to the ball."""
    point = point if isinstance(point, HPoint) else HPoint(point)
    v = np.concatenate(([1.0], point.as_array()))
    w = np.asarray(mat) @ v
    coords = tuple(w[1:] / w[0])
    return HPoint(coords, "ideal" if point.is_ideal() else "finite")


def transform_simplex(mat, s):
    return GeodesicSimplex([apply_lorentz(mat, v) for v in s.vertices], s.orientation)
