"""Convex bodies with the origin interior: support function, gauge, volume, radii.

Bodies are polytopes given by their hull vertices.  Smooth bodies (disks,
balls) are approximated by regular k-gons; every identity the library checks
is then exact for the polytope actually used, not for the smooth limit.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateBody, NonPositiveScale, OriginNotInterior

_COLLINEAR_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Convex polytope with 0 in its interior.

    ``normals`` are unit outward facet normals and ``offsets`` the facet
    support values, so the body is ``{x : normals @ x <= offsets}`` and the
    gauge (Minkowski functional) is ``max_i (x . normals[i]) / offsets[i]``.
    ``inradius <= |x| / gauge(x) <= outradius`` for every nonzero x.
    Immutable; all operations are pure.
    """

    vertices: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    volume: float
    inradius: float
    outradius: float
    name: str = field(default="", compare=False)

    @property
    def dimension(self) -> int:
        return self.vertices.shape[1]

    @property
    def gauge_normals(self) -> np.ndarray:
        """Facet normals scaled by 1/offset; gauge(x) = max(x @ gauge_normals.T)."""
        return self.normals / self.offsets[:, None]

    def support(self, direction):
        """h(y) = max over the body of x . y.  Vectorized over leading axes."""
        y = np.asarray(direction, dtype=float)
        return (y @ self.vertices.T).max(axis=-1)

    def gauge(self, point):
        """min{t >= 0 : x in t*body}, the ray-exit scale through the facet planes.

        Equals the dual form max_i (x . normal_i) / offset_i; positively
        homogeneous, gauge(0) = 0.  Vectorized over leading axes.
        """
        x = np.asarray(point, dtype=float)
        return np.maximum((x @ self.gauge_normals.T).max(axis=-1), 0.0)

    def contains(self, point, tol: float = 0.0) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        return (x @ self.normals.T <= self.offsets + tol).all(axis=-1)

    def scale(self, r: float) -> "ConvexBody":
        """The dilate r*body, r > 0."""
        if not r > 0:
            raise NonPositiveScale(f"scale factor must be > 0, got {r}")
        return ConvexBody(
            vertices=self.vertices * r,
            normals=self.normals,
            offsets=self.offsets * r,
            volume=self.volume * r**self.dimension,
            inradius=self.inradius * r,
            outradius=self.outradius * r,
            name=f"{self.name}*{r:g}" if self.name else "",
        )

    def descriptor(self) -> dict:
        return {"dimension": self.dimension, "vertices": self.vertices.tolist()}


def make_body(vertices, name: str = "") -> ConvexBody:
    """Build a ConvexBody from a vertex list, reducing to hull extreme points.

    Raises DegenerateBody if the hull is lower-dimensional and
    OriginNotInterior if 0 is not strictly inside.
    """
    pts = np.asarray(vertices, dtype=float)
    if pts.ndim != 2 or pts.shape[1] not in (2, 3):
        raise DegenerateBody(f"expected an (m, n) vertex array with n in {{2, 3}}, got shape {pts.shape}")
    n = pts.shape[1]
    if pts.shape[0] < n + 1:
        raise DegenerateBody(f"need at least {n + 1} vertices in dimension {n}")
    try:
        hull = ConvexHull(pts)
    except QhullError as exc:
        raise DegenerateBody(f"vertex list spans a degenerate hull: {exc}") from exc

    # qhull facet planes: eq[:n] . x + eq[n] <= 0 with unit eq[:n]
    normals = hull.equations[:, :n].copy()
    offsets = -hull.equations[:, n].copy()
    if offsets.min() <= _COLLINEAR_TOL:
        raise OriginNotInterior(
            f"origin is not strictly interior (min facet offset {offsets.min():.3g})"
        )
    verts = pts[hull.vertices]  # CCW in 2D
    return ConvexBody(
        vertices=verts,
        normals=normals,
        offsets=offsets,
        volume=float(hull.volume),
        inradius=float(offsets.min()),
        outradius=float(np.linalg.norm(verts, axis=1).max()),
        name=name,
    )


def regular_polygon(k: int, radius: float = 1.0) -> ConvexBody:
    """Regular k-gon inscribed in the circle of the given radius (vertex at angle 0)."""
    if k < 3:
        raise DegenerateBody("regular polygon needs k >= 3")
    ang = 2.0 * np.pi * np.arange(k) / k
    verts = radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return make_body(verts, name=f"disk{k}" if radius == 1.0 else f"disk{k}*{radius:g}")


_PRESETS = {
    "square": lambda: make_body([[1, 1], [-1, 1], [-1, -1], [1, -1]], name="square"),
    "triangle": lambda: make_body([[2, 0], [-1, np.sqrt(3)], [-1, -np.sqrt(3)]], name="triangle"),
    "cross": lambda: make_body([[1, 0], [-1, 0], [0, 1], [0, -1]], name="cross"),
}


def preset_body(name: str) -> ConvexBody:
    """Resolve a named preset: 'square', 'triangle', 'cross' or 'disk<k>'."""
    m = re.fullmatch(r"disk(\d+)", name)
    if m:
        return regular_polygon(int(m.group(1)))
    try:
        return _PRESETS[name]()
    except KeyError:
        raise KeyError(f"unknown body preset {name!r}; use square, triangle, cross or disk<k>") from None


def body_from_spec(spec) -> ConvexBody:
    """Build a body from a preset name, a JSON string, or a dict with 'vertices'."""
    if isinstance(spec, ConvexBody):
        return spec
    if isinstance(spec, str):
        s = spec.strip()
        if s.startswith("{"):
            spec = json.loads(s)
        else:
            return preset_body(s)
    verts = np.asarray(spec["vertices"], dtype=float)
    if "dimension" in spec and verts.shape[1] != int(spec["dimension"]):
        raise DegenerateBody(
            f"vertex dimension {verts.shape[1]} does not match declared {spec['dimension']}"
        )
    return make_body(verts, name=str(spec.get("name", "")))
