"""Exception types shared across the package."""


class HypvolError(Exception):
    """Base class for all errors raised by hypvol."""


class DomainError(HypvolError):
    """Input outside the mathematical domain of an operation (e.g. Li_1(1))."""


class PrecisionError(HypvolError):
    """The requested accuracy could not be reached within the term budget."""


class DegenerateConfigurationError(HypvolError):
    """Coincident / collinear / coplanar input where general position is required."""


class FlatSimplexError(DegenerateConfigurationError):
    """Ideal simplex shape on the real axis: zero volume, orientation undefined."""


class MissingHoroballError(HypvolError):
    """An ideal vertex needs a horoball assignment and none was given."""


class TangencyError(HypvolError):
    """Polarity input touches the quadric (vertex on Q or tangent face)."""


class OnQuadricError(HypvolError):
    """Evaluation point lies on the quadric where omega_Q has its pole."""


class ConvergenceError(HypvolError):
    """Adaptive integration failed to meet the tolerance within its budget."""


class NonRealPeriodError(HypvolError):
    """Period integral came out non-real beyond tolerance: chart or sign bug."""


class MixedGroupError(HypvolError):
    """Attempt to combine multiplicative elements over different generator sets."""


class InexpressibleElementError(HypvolError):
    """A point (or 1 - point) has no word over the declared generator set."""

    def __init__(self, value, message=None):
        self.value = value
        super().__init__(message or f"not expressible over the declared generators: {value!r}")


class IndeterminateSampleError(HypvolError):
    """Pfaffian vanished on a sample: the identity ratio is 0/0, resample."""


class TriangulationError(HypvolError):
    """Malformed triangulation data: bad edge classes or slot bookkeeping."""


class GluingToleranceError(HypvolError):
    """Gluing defects exceed tolerance; pass override=True to force."""
