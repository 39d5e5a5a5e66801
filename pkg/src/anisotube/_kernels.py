"""Numba kernel for the anisotropic distance field on a 2-D grid.

For every cell center x the kernel computes the exact minimum of
gauge(x - y) over the site set y, using a bucket grid over the sites and the
Euclidean bracket  |z|/outradius <= gauge(z) <= |z|/inradius  to prune.

The gauge distance is (1/inradius)-Lipschitz in x, so a computed value
brackets its neighbors to within h/inradius.  Cells are swept row by row
carrying that bracket, which confines each lookup to a thin annulus of
buckets; rows are seeded from a serial first-column sweep so the carried
bounds never degenerate.  Cells whose value provably exceeds ``clip`` are
recorded as +inf (and skipped in O(1) while the carried lower bound stays
above ``clip``).

Each cell's result depends only on its own deterministic scan order, so the
output is identical for any thread count.
"""

import numpy as np
from numba import njit, prange

INF = np.inf


@njit(cache=True, inline="always")
def _gauge(zx, zy, gn):
    g = -1e300
    for f in range(gn.shape[0]):
        v = zx * gn[f, 0] + zy * gn[f, 1]
        if v > g:
            g = v
    return g if g > 0.0 else 0.0


@njit(cache=True)
def _scan_bucket(x, y, b0, b1, bsite, sx, sy, gn, best, rr2, b_out):
    for si in range(b0, b1):
        s = bsite[si]
        zx = x - sx[s]
        zy = y - sy[s]
        d2 = zx * zx + zy * zy
        if d2 > rr2:
            continue
        g = _gauge(zx, zy, gn)
        if g < best:
            best = g
            nr = b_out * g
            nr2 = nr * nr
            if nr2 < rr2:
                rr2 = nr2
    return best, rr2


@njit(cache=True)
def _ring_search(x, y, sx, sy, gn, b_out, blox, bloy, w, bnx, bny, bstart, bsite):
    """Exact min gauge by expanding bucket rings (used only to seed sweeps)."""
    cjx = int(np.floor((x - blox) / w))
    cjy = int(np.floor((y - bloy) / w))
    best = INF
    rr2 = 1e300
    kmax = bnx + bny + abs(cjx) + abs(cjy) + 4
    for k in range(kmax + 1):
        low = (k - 1) * w
        if best < INF and low > b_out * best:
            break
        jy0 = cjy - k
        jy1 = cjy + k
        for jy in range(jy0, jy1 + 1):
            if jy < 0 or jy >= bny:
                continue
            on_row_edge = jy == jy0 or jy == jy1
            for jx in range(cjx - k, cjx + k + 1):
                if jx < 0 or jx >= bnx:
                    continue
                if not on_row_edge and jx != cjx - k and jx != cjx + k:
                    continue  # ring interior already visited
                blo_x = blox + jx * w
                blo_y = bloy + jy * w
                dxm = max(blo_x - x, x - (blo_x + w), 0.0)
                dym = max(blo_y - y, y - (blo_y + w), 0.0)
                if dxm * dxm + dym * dym > rr2:
                    continue
                bi = jy * bnx + jx
                best, rr2 = _scan_bucket(x, y, bstart[bi], bstart[bi + 1], bsite, sx, sy, gn, best, rr2, b_out)
    return best


@njit(cache=True)
def _annulus_scan(x, y, ub, lb, a_in, b_out, sx, sy, gn, blox, bloy, w, bnx, bny, bstart, bsite):
    """Exact min gauge given carried bounds lb <= min gauge <= ub (ub finite)."""
    rr = b_out * ub
    rr2 = rr * rr
    hole = a_in * lb  # every site is at Euclidean distance >= inradius * lb
    hole2 = hole * hole
    best = INF
    jy0 = int(np.floor((y - rr - bloy) / w))
    jy1 = int(np.floor((y + rr - bloy) / w))
    if jy0 < 0:
        jy0 = 0
    if jy1 > bny - 1:
        jy1 = bny - 1
    for jy in range(jy0, jy1 + 1):
        rlo = bloy + jy * w
        rhi = rlo + w
        dymin = max(rlo - y, y - rhi, 0.0)
        if dymin * dymin > rr2:
            continue
        dymax = max(y - rlo, rhi - y)
        half = np.sqrt(rr2 - dymin * dymin)
        jx0 = int(np.floor((x - half - blox) / w))
        jx1 = int(np.floor((x + half - blox) / w))
        if jx0 < 0:
            jx0 = 0
        if jx1 > bnx - 1:
            jx1 = bnx - 1
        # columns whose bucket lies fully inside the site-free hole are skipped
        hh2 = hole2 - dymax * dymax
        if hh2 > 0.0:
            hh = np.sqrt(hh2)
            left_hi = int(np.floor((x - hh - blox) / w))
            right_lo = int(np.ceil((x + hh - blox) / w - 1.0))
            if right_lo <= left_hi + 1:
                for jx in range(jx0, jx1 + 1):
                    bi = jy * bnx + jx
                    best, rr2 = _scan_bucket(x, y, bstart[bi], bstart[bi + 1], bsite, sx, sy, gn, best, rr2, b_out)
            else:
                hi1 = min(left_hi, jx1)
                for jx in range(jx0, hi1 + 1):
                    bi = jy * bnx + jx
                    best, rr2 = _scan_bucket(x, y, bstart[bi], bstart[bi + 1], bsite, sx, sy, gn, best, rr2, b_out)
                lo2 = max(right_lo, jx0)
                for jx in range(lo2, jx1 + 1):
                    bi = jy * bnx + jx
                    best, rr2 = _scan_bucket(x, y, bstart[bi], bstart[bi + 1], bsite, sx, sy, gn, best, rr2, b_out)
        else:
            for jx in range(jx0, jx1 + 1):
                bi = jy * bnx + jx
                best, rr2 = _scan_bucket(x, y, bstart[bi], bstart[bi + 1], bsite, sx, sy, gn, best, rr2, b_out)
    return best


@njit(cache=True, parallel=True)
def field_2d(ox, oy, h, nx, ny, sx, sy, gn, a_in, b_out, clip,
             blox, bloy, w, bnx, bny, bstart, bsite, inside, out):
    step = (h / a_in) * (1.0 + 1e-12)  # per-cell Lipschitz slack
    vstep = step

    # serial first-column sweep seeds the carried bounds of every row
    col0 = np.empty(ny)
    ub = INF
    lb = 0.0
    for iy in range(ny):
        if inside[iy * nx]:
            col0[iy] = 0.0
            ub = 0.0
            lb = 0.0
            continue
        x0 = ox + 0.5 * h
        y0 = oy + (iy + 0.5) * h
        if ub < INF:
            ub += vstep
            lb = max(lb - vstep, 0.0)
            g = _annulus_scan(x0, y0, ub, lb, a_in, b_out, sx, sy, gn,
                              blox, bloy, w, bnx, bny, bstart, bsite)
        else:
            g = _ring_search(x0, y0, sx, sy, gn, b_out,
                             blox, bloy, w, bnx, bny, bstart, bsite)
        col0[iy] = g
        ub = g
        lb = g

    for iy in prange(ny):
        y = oy + (iy + 0.5) * h
        ub = col0[iy]
        lb = col0[iy]
        for ix in range(nx):
            c = iy * nx + ix
            if inside[c]:
                out[c] = 0.0
                ub = 0.0
                lb = 0.0
                continue
            x = ox + (ix + 0.5) * h
            ub += step
            lb = max(lb - step, 0.0)
            if lb > clip:
                out[c] = INF
                continue
            g = _annulus_scan(x, y, ub, lb, a_in, b_out, sx, sy, gn,
                              blox, bloy, w, bnx, bny, bstart, bsite)
            out[c] = g if g <= clip else INF
            ub = g
            lb = g
