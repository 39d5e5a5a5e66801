"""Exception types raised by the library."""


class AnisotubeError(Exception):
    """Base class for all library errors."""


class DegenerateBody(AnisotubeError):
    """Vertex list spans a lower-dimensional hull."""


class OriginNotInterior(AnisotubeError):
    """The origin is not strictly inside the convex hull."""


class NonPositiveScale(AnisotubeError):
    """Scaling factor must be positive."""


class DepthTooLarge(AnisotubeError):
    """Requested iteration depth would exhaust memory."""


class EmptySet(AnisotubeError):
    """Operation requires a nonempty compact set."""


class SelfIntersecting(AnisotubeError):
    """Polygon ring intersects itself."""


class GridTooSmall(AnisotubeError):
    """Grid does not contain the dilated set for the requested radius."""


class RadiusBelowResolution(AnisotubeError):
    """Radius is below the grid / prefractal resolution guard."""


class RadiusExceedsPadding(AnisotubeError):
    """Radius (plus derivative step) exceeds the grid padding."""


class RadiusOutsideValidity(AnisotubeError):
    """Radius is outside the validity window of a closed-form expression."""


class NonPositiveRadius(AnisotubeError):
    """Radius must be positive."""


class InsufficientOctaves(AnisotubeError):
    """Profile does not span enough dyadic octaves."""


class SOutOfRange(AnisotubeError):
    """Content exponent s is outside its admissible range."""


class RangeTooNarrow(AnisotubeError):
    """Radius range is too narrow to sample scaling triples."""


class MismatchedReports(AnisotubeError):
    """Content reports do not refer to the same set, body and method."""


class OverlappingParts(AnisotubeError):
    """Decomposition parts are not pairwise disjoint at positive distance."""
