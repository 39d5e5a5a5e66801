"""Anisotropic tube volumes, contents and dimensions of compact sets.

The library measures how the volume of E + r*C grows with r for a compact set
E and a convex body C with 0 in its interior, estimates the associated
lower-dimensional contents and dimensions from grid profiles, and
cross-validates against exact closed forms (triangle tubes, the Sierpinski
gasket) and the inequalities the theory guarantees.
"""

from .bodies import ConvexBody, body_from_spec, make_body, preset_body, regular_polygon
from .contents import (
    ContentReport,
    DimensionReport,
    content_estimate,
    decomposition_check,
    dimension_estimate,
    inequality_ledger,
    kneser_check,
    standard_reports,
)
from .errors import AnisotubeError
from .exact import (
    GasketLimits,
    GasketProfile,
    TriangleAnisotropy,
    gasket_content_limits,
    gasket_profile,
    polygon_aniso_perimeter,
    triangle_tube_volume,
)
from .field import (
    DistanceField,
    Grid,
    VolumeProfile,
    distance_field,
    dyadic_radii,
    grid_for,
    load_field_dump,
    merge_profiles,
    minkowski_sum_oracle,
    profile_by_octaves,
    volume_profile,
)
from .sets import (
    GASKET_IFS,
    IFS,
    CompactSet,
    PointCloud,
    PolygonRegion,
    Prefractal,
    SimilarityMap,
    VoxelMask,
    ifs_apply,
    sample_boundary,
    set_from_spec,
    sierpinski_gasket,
    translate,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
