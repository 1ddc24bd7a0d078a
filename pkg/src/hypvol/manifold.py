"""Shaped ideal triangulations: gluing checks, volume, Bloch and Dehn
conditions.

A ShapedTriangulation is the Neumann-Zagier style data of an oriented cusped
hyperbolic 3-manifold at its complete structure: one shape parameter with
positive imaginary part per ideal tetrahedron, and edge classes listing
which tetrahedron edges glue around each edge of the manifold.  The three
opposite-edge pairs of a tetrahedron of shape z carry the slot parameters

    slot 0: z        slot 1: 1/(1 - z)        slot 2: (z - 1)/z

and every (tetrahedron, slot) pair appears in the edge classes exactly
twice (once per edge of the pair).  Around each edge class the slot values
must multiply to 1 with arguments summing to 2 pi.

Census triangulations (figure-eight knot complement, Whitehead link
complement, and a 2-3-move retriangulation of the figure-eight) ship as
package data so the tests are hermetic.  Shapes there come with exact words
over small generator sets, which is what lets the Bloch condition and the
Dehn invariant vanish in exact arithmetic.
"""

import cmath
import importlib.resources
import json
import math

from .bloch import GeneratorSet, PreBlochElement, delta2
from .errors import GluingToleranceError, TriangulationError
from .hypgeom import ideal_simplex_from_shape, shape_triple
from .polylog import bloch_wigner
from .scissors import ScissorSum, dehn3

CENSUS_NAMES = ("figure8", "whitehead", "figure8_23")
DEFAULT_GLUING_TOL = 1e-9


class ShapedTriangulation:

    def __init__(self, shapes, edges, cusps, generators=None, shape_words=None,
                 name=""):
        self.shapes = [complex(z) for z in shapes]
        for z in self.shapes:
            if not z.imag > 0:
                raise TriangulationError("shape parameters need Im z > 0")
        self.edges = [[(int(t), int(s)) for t, s in cls_] for cls_ in edges]
        self.cusps = int(cusps)
        self.generators = generators
        self.shape_words = shape_words or [None] * len(self.shapes)
        self.name = name
        self._validate_slots()

    def _validate_slots(self):
        counts = {}
        for cls_ in self.edges:
            for t, s in cls_:
                if not (0 <= t < len(self.shapes)) or s not in (0, 1, 2):
                    raise TriangulationError(f"bad edge slot ({t}, {s})")
                counts[(t, s)] = counts.get((t, s), 0) + 1
        for t in range(len(self.shapes)):
            for s in range(3):
                if counts.get((t, s), 0) != 2:
                    raise TriangulationError(
                        f"tetrahedron {t} slot {s} appears {counts.get((t, s), 0)} "
                        "times; each opposite-edge pair must contribute twice")

    def slot_value(self, tet, slot):
        return shape_triple(self.shapes[tet])[slot]

    def gluing_defect(self):
        """Per edge class: (|product of slot shapes - 1|, |sum of slot
        arguments - 2 pi|)."""
        out = []
        for cls_ in self.edges:
            prod = 1.0 + 0.0j
            angle = 0.0
            for t, s in cls_:
                w = self.slot_value(t, s)
                prod *= w
                angle += cmath.phase(w)
            out.append((abs(prod - 1.0), abs(angle - 2.0 * math.pi)))
        return out

    def max_defect(self):
        defects = self.gluing_defect()
        return max((max(c, a) for c, a in defects), default=0.0)

    def volume(self, tol=DEFAULT_GLUING_TOL, override=False):
        """vol = sum of Bloch-Wigner values of the shapes; refuses when the
        gluing conditions fail beyond tol unless override is set."""
        worst = self.max_defect()
        if worst > tol and not override:
            raise GluingToleranceError(
                f"gluing defect {worst:.3e} exceeds {tol:.1e}; override=True to force")
        return sum(bloch_wigner(z) for z in self.shapes)

    def bloch_element(self, generators=None):
        """The pre-Bloch element sum {z_i} and its delta2 image; the image
        must vanish exactly for a genuine manifold (the Bloch condition)."""
        group = generators or self.generators
        if group is None:
            raise TriangulationError("no generator set declared for the Bloch check")
        element = PreBlochElement()
        for z, words in zip(self.shapes, self.shape_words):
            z_word, omz_word = words if words else (None, None)
            element.add(z, 1, z_word, omz_word)
        return element, delta2(element, group)

    def realized_sum(self, horoball_size=1.0):
        """Realize every shaped tetrahedron as an ideal simplex with the
        uniform-per-cusp horoball policy (a single size everywhere)."""
        total = ScissorSum("hyperbolic")
        for z in self.shapes:
            simplex = ideal_simplex_from_shape(z)
            total.add(simplex, 1, {k: horoball_size for k in range(4)})
        return total

    def dehn_check(self, horoball_size=1.0, tol=DEFAULT_GLUING_TOL,
                   precision=1e-10, override=False):
        """Reduced extended Dehn invariant of the realized triangulation;
        zero expected (Dehn invariant of a closed scissor class vanishes)."""
        worst = self.max_defect()
        if worst > tol and not override:
            raise GluingToleranceError(
                f"gluing defect {worst:.3e} exceeds {tol:.1e}; override=True to force")
        tensor = dehn3(self.realized_sum(horoball_size))
        return tensor.reduce(precision)

    def integrated_volume(self, tol=1e-4, max_evals=4_000_000):
        """Independent route: Klein-model quadrature over the realized
        simplices (slow; used to cross-check the dilogarithm sum)."""
        from .period import klein_volume
        total = 0.0
        err = 0.0
        for z in self.shapes:
            report = klein_volume(ideal_simplex_from_shape(z), tol=tol,
                                  max_evals=max_evals)
            total += report.value
            err += report.error
        return total, err

    def to_json(self):
        return {
            "name": self.name,
            "cusps": self.cusps,
            "shapes": [{"re": z.real, "im": z.imag} for z in self.shapes],
            "edges": [[[t, s] for t, s in cls_] for cls_ in self.edges],
        }

    @classmethod
    def from_json(cls, obj):
        generators = None
        if obj.get("generators"):
            generators = GeneratorSet.from_json(obj["generators"])
        shapes = []
        words = []
        for item in obj["shapes"]:
            if isinstance(item, dict):
                shapes.append(complex(item["re"], item["im"]))
                if "word" in item and "one_minus_word" in item:
                    words.append((item["word"], item["one_minus_word"]))
                else:
                    words.append(None)
            else:
                shapes.append(complex(item[0], item[1]))
                words.append(None)
        return cls(shapes, obj["edges"], obj.get("cusps", 1), generators,
                   words, obj.get("name", ""))


def census(name):
    """Load one of the embedded census triangulations by name."""
    if name not in CENSUS_NAMES:
        raise TriangulationError(f"unknown census manifold {name!r}; "
                                 f"available: {', '.join(CENSUS_NAMES)}")
    path = importlib.resources.files("hypvol").joinpath(f"data/{name}.json")
    return ShapedTriangulation.from_json(json.loads(path.read_text()))
