"""Anisotropic distance fields on regular grids and the derived volume profiles.

The estimator pipeline is: sample the set into sites, compute the exact
per-cell minimum gauge distance to the sites (pruned bucket search), then read
tube volumes off the sorted cell values.  V(r) counts cells at distance <= r,
S(r) is the right difference quotient of V matching the profile's right
derivative, and kappa(r) = S(r)/r^(n-1).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .bodies import ConvexBody
from .errors import (
    EmptySet,
    GridTooSmall,
    RadiusBelowResolution,
    RadiusExceedsPadding,
)
from .sets import (
    CompactSet,
    PolygonRegion,
    VoxelMask,
    bounding_box,
    descriptor,
    dimension_of,
    is_empty,
    lebesgue_measure,
    min_tube_radius,
    region_contains,
    sample_boundary,
)

_CHUNK = 262_144


@dataclass(frozen=True, eq=False)
class Grid:
    """Regular cell grid: ``origin`` is the lower corner, ``shape`` counts cells.

    ``r_max`` records the dilation radius the padding was sized for.
    """

    origin: np.ndarray
    h: float
    shape: tuple
    r_max: float

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float))
        if self.h <= 0:
            raise GridTooSmall("cell size must be > 0")
        if any(s < 2 for s in self.shape):
            raise GridTooSmall(f"grid needs >= 2 cells per axis, got {self.shape}")

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def upper(self) -> np.ndarray:
        return self.origin + np.asarray(self.shape) * self.h

    @property
    def ncells(self) -> int:
        return int(np.prod(self.shape))

    def axis_centers(self, axis: int) -> np.ndarray:
        return self.origin[axis] + (np.arange(self.shape[axis]) + 0.5) * self.h


def grid_for(cset: CompactSet, body: ConvexBody, r_max: float, h: float, margin_cells: float = 2.0) -> Grid:
    """Grid containing E + r_max*C with a few cells to spare."""
    lo, hi = bounding_box(cset)
    pad = r_max * body.outradius + margin_cells * h
    origin = lo - pad
    shape = tuple(int(np.ceil(v)) for v in (hi + pad - origin) / h)
    return Grid(origin=origin, h=h, shape=shape, r_max=r_max)


def _build_buckets(sites: np.ndarray, h: float):
    lo = sites.min(axis=0) - 1e-9
    hi = sites.max(axis=0)
    extent = float(np.max(hi - lo))
    w = max(4.0 * h, extent / 1024.0, 1e-12)
    bn = np.floor((hi - lo) / w).astype(np.int64) + 1
    idx = np.clip(np.floor((sites - lo) / w).astype(np.int64), 0, bn - 1)
    lin = idx[:, 1] * bn[0] + idx[:, 0]
    order = np.argsort(lin, kind="stable").astype(np.int64)
    counts = np.bincount(lin, minlength=int(bn[0] * bn[1]))
    bstart = np.zeros(counts.size + 1, dtype=np.int64)
    np.cumsum(counts, out=bstart[1:])
    return lo, w, int(bn[0]), int(bn[1]), bstart, order


def _inside_mask(cset: CompactSet, grid: Grid) -> np.ndarray:
    """Cells whose center lies in the interior occupancy of the set (value 0)."""
    inside = np.zeros(grid.ncells, dtype=np.uint8)
    filled_polygon = isinstance(cset, PolygonRegion) and cset.filled
    if not (filled_polygon or isinstance(cset, VoxelMask)):
        return inside
    nx = grid.shape[0]
    xs = grid.axis_centers(0)
    for y0 in range(0, int(np.prod(grid.shape[1:])), max(1, _CHUNK // nx)):
        rows = min(max(1, _CHUNK // nx), int(np.prod(grid.shape[1:])) - y0)
        if grid.ndim == 2:
            ys = grid.axis_centers(1)[y0:y0 + rows]
            pts = np.stack(np.meshgrid(xs, ys, indexing="xy"), axis=-1).reshape(-1, 2)
        else:
            raise NotImplementedError("interior masks are 2-D only")
        if filled_polygon:
            hit = region_contains(cset, pts)
        else:
            ijk = np.floor((pts - cset.origin) / cset.cell).astype(np.int64)
            ok = np.all((ijk >= 0) & (ijk < cset.mask.shape), axis=1)
            hit = np.zeros(len(pts), dtype=bool)
            hit[ok] = cset.mask[tuple(ijk[ok].T)]
        inside[y0 * nx:(y0 + rows) * nx] = hit.astype(np.uint8)
    return inside


@dataclass(eq=False)
class DistanceField:
    """Per-cell anisotropic distance to the set; values above ``clip`` are +inf."""

    grid: Grid
    values: np.ndarray  # flat, row-major with x fastest
    body: ConvexBody
    clip: float
    site_count: int
    spacing: float
    set_measure: float
    set_min_radius: float
    set_desc: dict
    inside_count: int = 0

    @cached_property
    def _sorted(self) -> np.ndarray:
        return np.sort(self.values)

    def volume_at(self, r):
        """Tube volume at radius r (any r <= clip), one histogram lookup."""
        r = np.asarray(r, dtype=float)
        if np.any(r > self.clip):
            raise RadiusExceedsPadding(f"field values are clipped beyond {self.clip:.6g}")
        counts = np.searchsorted(self._sorted, r, side="right")
        out = counts * self.grid.h**self.grid.ndim
        return out if out.ndim else float(out)

    def volume_fn(self):
        return self.volume_at

    def dump(self, path):
        """Binary dump: one JSON header line, then the raw row-major float64 values."""
        header = {
            "origin": self.grid.origin.tolist(),
            "h": self.grid.h,
            "shape": list(self.grid.shape),
            "r_max": self.grid.r_max,
            "clip": self.clip,
            "dtype": "float64",
            "order": "row-major, first axis fastest",
        }
        import json

        with open(path, "wb") as fh:
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
            fh.write(np.ascontiguousarray(self.values, dtype="<f8").tobytes())


def load_field_dump(path):
    """Read a field dump back as (Grid, values)."""
    import json

    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        values = np.frombuffer(fh.read(), dtype="<f8").copy()
    grid = Grid(origin=np.asarray(header["origin"]), h=header["h"],
                shape=tuple(header["shape"]), r_max=header["r_max"])
    if values.size != grid.ncells:
        raise ValueError(f"dump holds {values.size} values for a {grid.shape} grid")
    return grid, values


def distance_field(cset: CompactSet, body: ConvexBody, grid: Grid, *,
                   spacing: float | None = None, workers: int = 1) -> DistanceField:
    """Exact min-gauge distance to the sampled sites at every cell center.

    Pruning uses a bucket structure over the sites with the Euclidean bracket
    |z|/outradius <= gauge(z) <= |z|/inradius; interior cells of filled
    regions are set to 0 directly.
    """
    if is_empty(cset):
        raise EmptySet("distance field of an empty set")
    n = dimension_of(cset)
    if body.dimension != n or grid.ndim != n:
        raise GridTooSmall(f"dimension mismatch: set {n}, body {body.dimension}, grid {grid.ndim}")
    lo, hi = bounding_box(cset)
    pad_needed = grid.r_max * body.outradius
    if np.any(lo - pad_needed < grid.origin) or np.any(hi + pad_needed > grid.upper):
        raise GridTooSmall("grid does not contain the set dilated by r_max")

    spacing = float(spacing if spacing is not None else grid.h)
    sites = sample_boundary(cset, spacing)
    clip = grid.r_max * 1.01 + 3.0 * grid.h / body.inradius
    inside = _inside_mask(cset, grid)

    if n == 2:
        values = _field_numba_2d(sites, body, grid, clip, inside, workers)
    else:
        values = _field_tree(sites, body, grid, clip, inside, workers)

    return DistanceField(
        grid=grid,
        values=values,
        body=body,
        clip=clip,
        site_count=len(sites),
        spacing=spacing,
        set_measure=lebesgue_measure(cset),
        set_min_radius=min_tube_radius(cset),
        set_desc=descriptor(cset),
        inside_count=int(inside.sum()),
    )


def _field_numba_2d(sites, body, grid, clip, inside, workers):
    import numba

    blo, w, bnx, bny, bstart, order = _build_buckets(sites, grid.h)
    out = np.empty(grid.ncells, dtype=np.float64)
    numba.set_num_threads(max(1, min(int(workers) if workers > 0 else numba.config.NUMBA_NUM_THREADS,
                                     numba.config.NUMBA_NUM_THREADS)))
    _kernels.field_2d(
        float(grid.origin[0]), float(grid.origin[1]), float(grid.h),
        int(grid.shape[0]), int(grid.shape[1]),
        np.ascontiguousarray(sites[:, 0]), np.ascontiguousarray(sites[:, 1]),
        np.ascontiguousarray(body.gauge_normals),
        float(body.inradius), float(body.outradius), float(clip),
        float(blo[0]), float(blo[1]), float(w), bnx, bny,
        bstart, order, inside, out,
    )
    return out


def _field_tree(sites, body, grid, clip, inside, workers):
    """k-NN escalation over a kd-tree; exact and dimension-generic."""
    tree = cKDTree(sites)
    nworkers = int(workers) if workers else 1
    axes = [grid.axis_centers(ax) for ax in range(grid.ndim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    # row-major with x fastest: flatten with the last grid axis slowest
    pts = np.stack([m.transpose(*range(grid.ndim - 1, -1, -1)).ravel() for m in mesh], axis=1)
    out = np.empty(grid.ncells, dtype=np.float64)
    nfacets = body.gauge_normals.shape[0]
    for lo_i in range(0, grid.ncells, _CHUNK):
        chunk = pts[lo_i:lo_i + _CHUNK]
        best = np.full(len(chunk), np.inf)
        unresolved = np.arange(len(chunk))
        k = 1
        while unresolved.size:
            kk = min(k, len(sites))
            batch = max(1, 4_000_000 // (kk * nfacets))
            still = []
            for b0 in range(0, len(unresolved), batch):
                sel = unresolved[b0:b0 + batch]
                d, idx = tree.query(chunk[sel], k=kk, workers=nworkers)
                d = d.reshape(len(sel), kk)
                idx = idx.reshape(len(sel), kk)
                z = chunk[sel][:, None, :] - sites[idx]
                g = np.maximum((z @ body.gauge_normals.T).max(axis=-1), 0.0).min(axis=1)
                best[sel] = g
                # unseen sites are at distance >= d_k, hence gauge >= d_k/outradius
                unseen_floor = d[:, -1] / body.outradius
                certain = (unseen_floor >= g) | (kk == len(sites)) | ((unseen_floor > clip) & (g > clip))
                still.append(sel[~certain])
            unresolved = np.concatenate(still) if still else np.empty(0, dtype=int)
            k *= 4
        out[lo_i:lo_i + len(chunk)] = best
    out[inside.astype(bool)] = 0.0
    out[out > clip] = np.inf
    return out


# ---------------------------------------------------------------------------
# volume profiles


@dataclass(eq=False)
class VolumeProfile:
    """Sampled r -> (V, S, kappa) table with per-radius error budgets."""

    radii: np.ndarray
    volume: np.ndarray
    rate: np.ndarray       # right difference quotient of the volume
    kappa: np.ndarray      # rate / r^(n-1)
    err_budget: np.ndarray
    cell_size: np.ndarray  # grid h each radius was evaluated on
    delta: np.ndarray      # right-difference step used for the rate
    n: int
    v0: float              # Lebesgue measure of the set itself
    body_volume: float
    body_inradius: float
    body_outradius: float
    set_desc: dict
    body_desc: dict
    meta: dict = dc_field(default_factory=dict)

    def octave_index(self) -> np.ndarray:
        """0 for the finest dyadic octave [r_min, 2 r_min), increasing upward."""
        return np.floor(np.log2(self.radii / self.radii[0]) * (1 + 1e-12)).astype(int)

    def rel_budget(self) -> np.ndarray:
        return self.err_budget / np.maximum(self.volume, 1e-300)


def volume_profile(field: DistanceField, radii) -> VolumeProfile:
    """Evaluate (V, S, kappa) at the given increasing radii.

    S uses the right difference quotient with step max(h*inradius, r*1e-3);
    radii below the resolution guard 2h/inradius (or below a prefractal's
    scale cutoff) are rejected, as are radii beyond the grid padding.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or len(radii) == 0 or np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be a strictly increasing 1-D sequence")
    h = field.grid.h
    a = field.body.inradius
    guard = max(2.0 * h / a, field.set_min_radius)
    if radii[0] < guard * (1 - 1e-12):
        raise RadiusBelowResolution(
            f"r_min {radii[0]:.6g} is below the resolution guard {guard:.6g}"
        )
    delta = np.maximum(h * a, radii * 1e-3)
    if radii[-1] > field.grid.r_max * (1 + 1e-12) or radii[-1] + delta[-1] > field.clip:
        raise RadiusExceedsPadding(
            f"r_max {radii[-1]:.6g} exceeds the padded radius {field.grid.r_max:.6g}"
        )
    vol = field.volume_at(radii)
    vol_up = field.volume_at(radii + delta)
    rate = (vol_up - vol) / delta
    n = field.grid.ndim
    kappa = rate / radii ** (n - 1)
    err = (np.sqrt(n) * h + field.spacing) / (2.0 * a) * rate
    return VolumeProfile(
        radii=radii,
        volume=vol,
        rate=rate,
        kappa=kappa,
        err_budget=err,
        cell_size=np.full_like(radii, h),
        delta=delta,
        n=n,
        v0=field.set_measure,
        body_volume=field.body.volume,
        body_inradius=a,
        body_outradius=field.body.outradius,
        set_desc=field.set_desc,
        body_desc=field.body.descriptor(),
        meta={
            "h": h,
            "spacing": field.spacing,
            "site_count": field.site_count,
            "grid_shape": list(field.grid.shape),
            "r_max": field.grid.r_max,
        },
    )


def merge_profiles(*profiles: VolumeProfile) -> VolumeProfile:
    """Concatenate profiles of the same set/body (e.g. one grid per octave)."""
    first = profiles[0]
    for p in profiles[1:]:
        if p.n != first.n or p.set_desc != first.set_desc or p.body_desc != first.body_desc:
            raise ValueError("profiles describe different sets or bodies")
    radii = np.concatenate([p.radii for p in profiles])
    order = np.argsort(radii)
    cat = lambda name: np.concatenate([getattr(p, name) for p in profiles])[order]
    return VolumeProfile(
        radii=radii[order],
        volume=cat("volume"),
        rate=cat("rate"),
        kappa=cat("kappa"),
        err_budget=cat("err_budget"),
        cell_size=cat("cell_size"),
        delta=cat("delta"),
        n=first.n,
        v0=first.v0,
        body_volume=first.body_volume,
        body_inradius=first.body_inradius,
        body_outradius=first.body_outradius,
        set_desc=first.set_desc,
        body_desc=first.body_desc,
        meta={"h": max(p.meta.get("h", 0.0) for p in profiles),
              "parts": [p.meta for p in profiles]},
    )


def dyadic_radii(r_min: float, r_max: float, per_octave: int = 4) -> np.ndarray:
    """Geometric radii r_max * 2^(-k/per_octave) down to r_min, ascending."""
    if not 0 < r_min < r_max:
        raise ValueError("need 0 < r_min < r_max")
    count = int(np.floor(np.log2(r_max / r_min) * per_octave + 1e-9)) + 1
    return r_max * 2.0 ** (-np.arange(count)[::-1] / per_octave)


def profile_by_octaves(cset: CompactSet, body: ConvexBody, r_min: float, r_max: float,
                       *, per_octave: int = 8, cells_per_radius: int = 32,
                       spacing_factor: float = 1.0, workers: int = 1) -> VolumeProfile:
    """One grid per dyadic octave, cell size scaled to the octave's r_min.

    Keeps the cell count per octave constant, so fine radii get fine grids
    without paying for fine resolution at coarse radii.
    """
    edges = [r_min]
    while edges[-1] * 2 < r_max * (1 - 1e-12):
        edges.append(edges[-1] * 2)
    parts = []
    for i, lo_r in enumerate(edges):
        hi_r = min(lo_r * 2, r_max)
        h = lo_r / cells_per_radius
        grid = grid_for(cset, body, hi_r, h)
        fld = distance_field(cset, body, grid, spacing=spacing_factor * h, workers=workers)
        radii = dyadic_radii(lo_r, hi_r, per_octave)
        if i > 0:
            radii = radii[radii > lo_r * (1 + 1e-12)]  # avoid duplicating octave edges
        parts.append(volume_profile(fld, radii))
    return merge_profiles(*parts)


# ---------------------------------------------------------------------------
# Monte-Carlo oracle


def minkowski_sum_oracle(cset: CompactSet, body: ConvexBody, r: float, samples: int,
                         *, seed: int = 0, spacing: float | None = None) -> float:
    """Monte-Carlo estimate of the tube volume, independent of the grid pipeline.

    Rejection sampling over the padded bounding box; membership is decided
    against every site by brute force (the body's radii give sure-in/sure-out
    shortcuts, ambiguous samples get exact gauge evaluations).
    """
    if is_empty(cset):
        raise EmptySet("oracle of an empty set")
    if samples < 10_000:
        raise ValueError("oracle needs at least 10^4 samples")
    if r <= 0:
        raise ValueError("r must be > 0")
    sites = sample_boundary(cset, spacing if spacing is not None else r / 8.0)
    lo, hi = bounding_box(cset)
    lo = lo - r * body.outradius
    hi = hi + r * body.outradius
    box_vol = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(samples, len(lo)))

    hits = np.zeros(samples, dtype=bool)
    if isinstance(cset, PolygonRegion) and cset.filled:
        hits |= region_contains(cset, pts)
    todo = np.flatnonzero(~hits)
    a, b = body.inradius, body.outradius
    gn_t = body.gauge_normals.T
    site_sq = (sites**2).sum(axis=1)
    for lo_i in range(0, len(todo), 256):
        sel = todo[lo_i:lo_i + 256]
        d2 = (pts[sel] ** 2).sum(axis=1)[:, None] + site_sq[None, :] - 2.0 * (pts[sel] @ sites.T)
        dmin = np.sqrt(np.maximum(d2.min(axis=1), 0.0))
        sure_in = dmin <= a * r
        ambiguous = (~sure_in) & (dmin <= b * r)
        hits[sel[sure_in]] = True
        for j in np.flatnonzero(ambiguous):
            g = np.maximum(((pts[sel[j]] - sites) @ gn_t).max(axis=-1), 0.0).min()
            if g <= r:
                hits[sel[j]] = True
    return box_vol * float(np.count_nonzero(hits)) / samples
