"""Compact sets: point clouds, polygon regions, voxel masks and IFS prefractals."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .errors import DepthTooLarge, EmptySet, SelfIntersecting

MAX_PIECES = 20_000_000  # guard for IFS explosion


# ---------------------------------------------------------------------------
# similarity maps / IFS


@dataclass(frozen=True)
class SimilarityMap:
    """Planar similarity x -> ratio * R(angle) x + shift with ratio in (0, 1)."""

    ratio: float
    angle: float
    shift: tuple

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"similarity ratio must be in (0,1), got {self.ratio}")
        object.__setattr__(self, "shift", tuple(float(v) for v in self.shift))

    def apply(self, pts: np.ndarray) -> np.ndarray:
        c, s = np.cos(self.angle), np.sin(self.angle)
        rot = np.array([[c, -s], [s, c]])
        return self.ratio * (pts @ rot.T) + np.asarray(self.shift)


@dataclass(frozen=True)
class IFS:
    maps: tuple

    def __post_init__(self):
        if not self.maps:
            raise ValueError("IFS needs at least one map")


GASKET_IFS = IFS(
    (
        SimilarityMap(0.5, 0.0, (0.0, 0.0)),
        SimilarityMap(0.5, 0.0, (0.5, 0.0)),
        SimilarityMap(0.5, 0.0, (0.25, np.sqrt(3.0) / 4.0)),
    )
)


# ---------------------------------------------------------------------------
# set kinds


@dataclass(frozen=True, eq=False)
class PointCloud:
    points: np.ndarray  # (k, n)

    def __post_init__(self):
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, dtype=float)))


@dataclass(frozen=True, eq=False)
class PolygonRegion:
    """Simple polygon with optional holes; ``filled`` marks interior occupancy.

    The outer ring is stored counterclockwise and holes clockwise, so that the
    right-hand edge normal always points out of the region.
    """

    outer: np.ndarray
    holes: tuple = ()
    filled: bool = True

    def __post_init__(self):
        outer = _oriented_ring(np.asarray(self.outer, dtype=float), ccw=True)
        holes = tuple(_oriented_ring(np.asarray(h, dtype=float), ccw=False) for h in self.holes)
        for ring in (outer, *holes):
            _check_simple(ring)
        for h in holes:
            if not _points_in_ring(h, outer).all():
                raise SelfIntersecting("hole ring is not strictly inside the outer ring")
        object.__setattr__(self, "outer", outer)
        object.__setattr__(self, "holes", holes)

    @property
    def rings(self) -> tuple:
        return (self.outer, *self.holes)


@dataclass(frozen=True, eq=False)
class VoxelMask:
    origin: np.ndarray
    cell: float
    mask: np.ndarray  # bool occupancy, n-dimensional

    def __post_init__(self):
        if not self.cell > 0:
            raise ValueError("voxel cell size must be > 0")
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        object.__setattr__(self, "mask", np.asarray(self.mask, dtype=bool))


@dataclass(frozen=True, eq=False)
class Prefractal:
    """Finite-depth IFS approximant stored as its boundary segment skeleton."""

    ifs: IFS
    depth: int
    segments: np.ndarray  # (s, 2, 2)


CompactSet = Union[PointCloud, PolygonRegion, VoxelMask, Prefractal]


# ---------------------------------------------------------------------------
# polygon helpers


def ring_area(ring: np.ndarray) -> float:
    """Signed shoelace area (positive for counterclockwise)."""
    x, y = ring[:, 0], ring[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def _oriented_ring(ring: np.ndarray, ccw: bool) -> np.ndarray:
    if ring.ndim != 2 or ring.shape[0] < 3 or ring.shape[1] != 2:
        raise SelfIntersecting(f"ring must be an (m>=3, 2) array, got shape {ring.shape}")
    if np.allclose(ring[0], ring[-1]):
        ring = ring[:-1]
    if (ring_area(ring) > 0) != ccw:
        ring = ring[::-1].copy()
    return ring


def _cross2(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _segments_cross(p1, p2, q1, q2) -> bool:
    d1 = _cross2(p2 - p1, q1 - p1)
    d2 = _cross2(p2 - p1, q2 - p1)
    d3 = _cross2(q2 - q1, p1 - q1)
    d4 = _cross2(q2 - q1, p2 - q1)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def _check_simple(ring: np.ndarray):
    m = len(ring)
    for i in range(m):
        p1, p2 = ring[i], ring[(i + 1) % m]
        for j in range(i + 2, m):
            if i == 0 and j == m - 1:
                continue  # adjacent around the wrap
            q1, q2 = ring[j], ring[(j + 1) % m]
            if _segments_cross(p1, p2, q1, q2):
                raise SelfIntersecting(f"ring edges {i} and {j} intersect")


def _points_in_ring(pts: np.ndarray, ring: np.ndarray) -> np.ndarray:
    """Even-odd crossing test, vectorized over pts."""
    x, y = pts[:, 0], pts[:, 1]
    inside = np.zeros(len(pts), dtype=bool)
    m = len(ring)
    for i in range(m):
        x1, y1 = ring[i]
        x2, y2 = ring[(i + 1) % m]
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(invalid="ignore", divide="ignore"):
            xi = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < np.where(crosses, xi, np.inf))
    return inside


def region_contains(region: PolygonRegion, pts: np.ndarray) -> np.ndarray:
    """Interior membership for a filled region (even-odd over all rings)."""
    pts = np.atleast_2d(pts)
    inside = _points_in_ring(pts, region.outer)
    for h in region.holes:
        inside &= ~_points_in_ring(pts, h)
    return inside


def rings_to_segments(rings) -> np.ndarray:
    segs = []
    for ring in rings:
        nxt = np.roll(ring, -1, axis=0)
        segs.append(np.stack([ring, nxt], axis=1))
    return np.concatenate(segs, axis=0)


# ---------------------------------------------------------------------------
# generators


def sierpinski_gasket(depth: int) -> Prefractal:
    """Level-``depth`` gasket skeleton on the unit triangle with base [(0,0),(1,0)].

    The skeleton is the union of the 3^depth sub-triangle boundaries at scale
    2^-depth (3 * 3^depth segments); depth 0 is the unit triangle boundary.
    """
    if not 0 <= depth <= 14:
        raise DepthTooLarge(f"gasket depth must be in [0, 14], got {depth}")
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3.0) / 2.0]])
    corners = tri[None, :, :]  # (T, 3, 2)
    for _ in range(depth):
        corners = np.concatenate([m.apply(corners.reshape(-1, 2)).reshape(-1, 3, 2) for m in GASKET_IFS.maps])
    segs = np.stack([corners, np.roll(corners, -1, axis=1)], axis=2).reshape(-1, 2, 2)
    return Prefractal(ifs=GASKET_IFS, depth=depth, segments=segs)


def ifs_apply(ifs: IFS, cset: CompactSet, iterations: int) -> CompactSet:
    """Union of all |maps|^iterations composed images of the set."""
    if iterations < 0:
        raise ValueError("iterations must be >= 0")
    if iterations == 0:
        return cset
    if isinstance(cset, PointCloud):
        base = cset.points
        per_piece = len(base)
    elif isinstance(cset, PolygonRegion):
        base = rings_to_segments(cset.rings)
        per_piece = len(base)
    elif isinstance(cset, Prefractal):
        base = cset.segments
        per_piece = len(base)
    else:
        raise TypeError(f"ifs_apply does not support {type(cset).__name__}")
    if len(ifs.maps) ** iterations * per_piece > MAX_PIECES:
        raise DepthTooLarge(
            f"{len(ifs.maps)}^{iterations} images of {per_piece} pieces exceed the {MAX_PIECES} guard"
        )
    flat = base.reshape(-1, 2)
    shape = base.shape[1:]
    for _ in range(iterations):
        flat = np.concatenate([m.apply(flat) for m in ifs.maps])
    out = flat.reshape((-1,) + shape)
    if isinstance(cset, PointCloud):
        return PointCloud(out)
    depth = (cset.depth if isinstance(cset, Prefractal) else 0) + iterations
    return Prefractal(ifs=ifs, depth=depth, segments=out)


def translate(cset: CompactSet, shift) -> CompactSet:
    shift = np.asarray(shift, dtype=float)
    if isinstance(cset, PointCloud):
        return PointCloud(cset.points + shift)
    if isinstance(cset, PolygonRegion):
        return PolygonRegion(cset.outer + shift, tuple(h + shift for h in cset.holes), cset.filled)
    if isinstance(cset, Prefractal):
        return replace(cset, segments=cset.segments + shift)
    if isinstance(cset, VoxelMask):
        return replace(cset, origin=cset.origin + shift)
    raise TypeError(type(cset).__name__)


# ---------------------------------------------------------------------------
# sampling and measures


def _sample_segments(segs: np.ndarray, spacing: float) -> np.ndarray:
    lengths = np.linalg.norm(segs[:, 1] - segs[:, 0], axis=1)
    steps = np.maximum(1, np.ceil(lengths / spacing).astype(np.int64))
    pts = []
    for m in np.unique(steps):
        t = np.linspace(0.0, 1.0, m + 1)
        sel = segs[steps == m]
        pts.append((sel[:, None, 0, :] + t[None, :, None] * (sel[:, 1] - sel[:, 0])[:, None, :]).reshape(-1, 2))
    return np.concatenate(pts)


def _dedup(pts: np.ndarray) -> np.ndarray:
    if pts.shape[1] == 2:
        z = pts[:, 0] + 1j * pts[:, 1]
        _, idx = np.unique(z, return_index=True)
        return pts[np.sort(idx)]
    return np.unique(pts, axis=0)


def sample_boundary(cset: CompactSet, spacing: float) -> np.ndarray:
    """Site set covering the set: every point of E is within spacing/2 of a sample.

    Point clouds pass through unchanged; polygon rings and prefractal segments
    are sampled at pitch <= spacing (interior occupancy of filled regions is
    carried separately by the distance field).
    """
    if spacing <= 0:
        raise ValueError("spacing must be > 0")
    if is_empty(cset):
        raise EmptySet("cannot sample an empty set")
    if isinstance(cset, PointCloud):
        return cset.points.copy()
    if isinstance(cset, PolygonRegion):
        return _dedup(_sample_segments(rings_to_segments(cset.rings), spacing))
    if isinstance(cset, Prefractal):
        return _dedup(_sample_segments(cset.segments, spacing))
    if isinstance(cset, VoxelMask):
        return _dedup(_voxel_boundary_sites(cset, spacing))
    raise TypeError(type(cset).__name__)


def _voxel_boundary_sites(vm: VoxelMask, spacing: float) -> np.ndarray:
    if vm.mask.ndim != 2:
        raise NotImplementedError("voxel boundary sampling is implemented for 2-D masks")
    padded = np.pad(vm.mask, 1)
    segs = []
    h = vm.cell
    idx = np.argwhere(vm.mask)
    for i, j in idx:
        x0, y0 = vm.origin + np.array([i, j]) * h
        if not padded[i, j + 1]:  # -x neighbor empty
            segs.append([[x0, y0], [x0, y0 + h]])
        if not padded[i + 2, j + 1]:
            segs.append([[x0 + h, y0], [x0 + h, y0 + h]])
        if not padded[i + 1, j]:
            segs.append([[x0, y0], [x0 + h, y0]])
        if not padded[i + 1, j + 2]:
            segs.append([[x0, y0 + h], [x0 + h, y0 + h]])
    if not segs:
        raise EmptySet("voxel mask has no occupied cells")
    return _sample_segments(np.asarray(segs, dtype=float), spacing)


def is_empty(cset: CompactSet) -> bool:
    if isinstance(cset, PointCloud):
        return cset.points.size == 0
    if isinstance(cset, PolygonRegion):
        return len(cset.outer) == 0
    if isinstance(cset, Prefractal):
        return cset.segments.size == 0
    if isinstance(cset, VoxelMask):
        return not cset.mask.any()
    raise TypeError(type(cset).__name__)


def bounding_box(cset: CompactSet):
    if is_empty(cset):
        raise EmptySet("empty set has no bounding box")
    if isinstance(cset, PointCloud):
        pts = cset.points
    elif isinstance(cset, PolygonRegion):
        pts = np.concatenate(cset.rings)
    elif isinstance(cset, Prefractal):
        pts = cset.segments.reshape(-1, 2)
    elif isinstance(cset, VoxelMask):
        idx = np.argwhere(cset.mask)
        return (
            cset.origin + idx.min(axis=0) * cset.cell,
            cset.origin + (idx.max(axis=0) + 1) * cset.cell,
        )
    else:
        raise TypeError(type(cset).__name__)
    return pts.min(axis=0), pts.max(axis=0)


def diameter(cset: CompactSet) -> float:
    lo, hi = bounding_box(cset)
    return float(np.linalg.norm(hi - lo))


def lebesgue_measure(cset: CompactSet) -> float:
    """lambda^n(E): exact for polygons and voxel masks, 0 for null sets."""
    if isinstance(cset, (PointCloud, Prefractal)):
        return 0.0
    if isinstance(cset, PolygonRegion):
        if not cset.filled:
            return 0.0
        return abs(ring_area(cset.outer)) - sum(abs(ring_area(h)) for h in cset.holes)
    if isinstance(cset, VoxelMask):
        return float(cset.mask.sum()) * cset.cell**cset.mask.ndim
    raise TypeError(type(cset).__name__)


def dimension_of(cset: CompactSet) -> int:
    if isinstance(cset, PointCloud):
        return cset.points.shape[1]
    if isinstance(cset, (PolygonRegion, Prefractal)):
        return 2
    if isinstance(cset, VoxelMask):
        return cset.mask.ndim
    raise TypeError(type(cset).__name__)


def min_tube_radius(cset: CompactSet) -> float:
    """Scale cutoff below which a prefractal skeleton no longer stands in for its limit set."""
    if isinstance(cset, Prefractal):
        return 4.0 * 2.0 ** -cset.depth
    return 0.0


def descriptor(cset: CompactSet) -> dict:
    if isinstance(cset, PointCloud):
        return {"kind": "points", "points": cset.points.tolist()}
    if isinstance(cset, PolygonRegion):
        return {
            "kind": "polygon",
            "outer": cset.outer.tolist(),
            "holes": [h.tolist() for h in cset.holes],
            "filled": cset.filled,
        }
    if isinstance(cset, Prefractal):
        lo, hi = bounding_box(cset)
        out = {"kind": "gasket" if cset.ifs == GASKET_IFS else "prefractal",
               "depth": cset.depth, "pieces": int(len(cset.segments)),
               "bbox": [lo.tolist(), hi.tolist()]}
        return out
    if isinstance(cset, VoxelMask):
        return {
            "kind": "voxels",
            "origin": cset.origin.tolist(),
            "cell": cset.cell,
            "mask": cset.mask.astype(int).tolist(),
        }
    raise TypeError(type(cset).__name__)


def set_from_spec(spec) -> CompactSet:
    """Build a set from a JSON string/dict or a shortcut name.

    Shortcuts: 'point', 'gasket:<depth>', 'filled-square', 'filled-triangle',
    'triangle-boundary'.
    """
    if isinstance(spec, (PointCloud, PolygonRegion, VoxelMask, Prefractal)):
        return spec
    if isinstance(spec, str):
        s = spec.strip()
        if s.startswith("{"):
            spec = json.loads(s)
        else:
            return _set_shortcut(s)
    kind = spec["kind"]
    if kind == "gasket":
        return sierpinski_gasket(int(spec["depth"]))
    if kind == "points":
        return PointCloud(np.asarray(spec["points"], dtype=float))
    if kind == "polygon":
        return PolygonRegion(
            np.asarray(spec["outer"], dtype=float),
            tuple(np.asarray(h, dtype=float) for h in spec.get("holes", [])),
            bool(spec.get("filled", True)),
        )
    if kind == "voxels":
        return VoxelMask(np.asarray(spec["origin"], float), float(spec["cell"]), np.asarray(spec["mask"], bool))
    raise KeyError(f"unknown set kind {kind!r}")


def _set_shortcut(name: str) -> CompactSet:
    if name == "point":
        return PointCloud(np.zeros((1, 2)))
    if name.startswith("gasket:"):
        return sierpinski_gasket(int(name.split(":", 1)[1]))
    root3 = np.sqrt(3.0)
    tri = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, root3 / 2.0]])
    if name == "filled-square":
        return PolygonRegion(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))
    if name == "filled-triangle":
        return PolygonRegion(tri)
    if name == "triangle-boundary":
        return PolygonRegion(tri, filled=False)
    raise KeyError(f"unknown set shortcut {name!r}")
