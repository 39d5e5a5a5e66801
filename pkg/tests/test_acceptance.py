"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with  pytest tests/test_acceptance.py -v -s  to see the per-criterion
lines as they complete.  The numba kernel is compiled once by a fixture
before anything is timed.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

import anisotube as at
from anisotube.contents import (
    KIND_MINKOWSKI,
    KIND_OUTER,
    KIND_SCONTENT,
    content_estimate,
    decomposition_check,
    dimension_estimate,
    gasket_reports,
    inequality_ledger,
    kappa_monotonic,
    kneser_check,
    standard_reports,
)
from anisotube.exact import GasketProfile, TriangleAnisotropy, gasket_content_limits, triangle_tube_volume
from anisotube.sets import diameter, translate

GOLDEN = (np.sqrt(5) - 1) / 2


def report(num, ok, detail):
    print(f"\n[criterion {num:>2}] {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num}: {detail}"


@pytest.fixture(scope="module")
def gasket12_profile_square(gasket12, kernel_warm):
    body = at.preset_body("square")
    gp = GasketProfile(body)
    return at.profile_by_octaves(gasket12, body, gp.scale / 8, gp.scale * 1.9,
                                 per_octave=8, cells_per_radius=32)


def test_criterion_1_gasket_exact_limits(disk64):
    t0 = time.perf_counter()
    gp = GasketProfile(disk64)
    lim = gasket_content_limits(gp)
    elapsed = time.perf_counter() - t0
    coefs = lim.coefficients()
    targets = (1.107, 1.148, 1.150, 1.170)
    close = all(abs(c - t) <= 1e-3 for c, t in zip(coefs, targets))
    strict = lim.s_lower < lim.m_lower < lim.m_upper < lim.s_upper
    ok = close and strict and elapsed < 1.0
    report(1, ok, "limits (%.4f, %.4f, %.4f, %.4f) vs (1.107, 1.148, 1.150, 1.170), "
           "strict chain %s, %.3f s" % (*coefs, strict, elapsed))


def test_criterion_2_envelope_sweep(disk64):
    gp = GasketProfile(disk64)
    lim = gasket_content_limits(gp)
    d = gp.similarity_dim
    alphas = np.linspace(1.0, 2.0, 10_000)
    rate_q = gp.rate_quotient(alphas, level=40) / (2 - d)
    vol_q = gp.volume_quotient(alphas, level=40)
    pairs = (
        (rate_q.min(), lim.s_lower), (rate_q.max(), lim.s_upper),
        (vol_q.min(), lim.m_lower), (vol_q.max(), lim.m_upper),
    )
    worst = max(abs(a - b) / b for a, b in pairs)
    report(2, worst <= 1e-6, f"10^4-point sweep at level 40, worst relative gap {worst:.2e}")


def test_criterion_3_triangle_grid_vs_closed_form(disk64, kernel_warm):
    E = at.set_from_spec("filled-triangle")
    tri = TriangleAnisotropy.for_body(disk64)
    t0 = time.perf_counter()
    grid = at.grid_for(E, disk64, r_max=0.1, h=1 / 2048)
    fld = at.distance_field(E, disk64, grid, workers=1)
    radii = np.array([0.02, 0.05, 0.1])
    vols = fld.volume_at(radii)
    elapsed = time.perf_counter() - t0
    exact = triangle_tube_volume(tri, radii, "filled")
    rel = np.abs(vols - exact) / exact
    ok = rel.max() <= 0.01 and elapsed < 30.0
    report(3, ok, f"h=1/2048, rel errors {np.array2string(rel, precision=2)}, {elapsed:.1f} s single-threaded")


def test_criterion_4_gasket_grid_vs_closed_form(gasket12_profile_disk64, disk64):
    prof = gasket12_profile_disk64
    gp = GasketProfile(disk64)
    d = gp.similarity_dim
    # eight radii, two per dyadic window from the finest up
    idx = np.unique(np.linspace(0, len(prof.radii) - 1, 8).astype(int))
    rel = np.abs(prof.volume[idx] - gp.volume(prof.radii[idx])) / gp.volume(prof.radii[idx])
    lim = gasket_content_limits(gp)
    rep = content_estimate(prof, d, KIND_MINKOWSKI)
    lo_ok = abs(rep.lower_est - lim.m_lower) <= 0.05 * lim.m_lower
    hi_ok = abs(rep.upper_est - lim.m_upper) <= 0.05 * lim.m_upper
    ok = rel.max() <= 0.01 and lo_ok and hi_ok
    report(4, ok, "depth-12 vs closed form: max rel %.4f over %d radii; envelope "
           "[%.4f, %.4f]u vs [%.4f, %.4f]u" % (rel.max(), len(idx),
           rep.lower_est / lim.unit_factor, rep.upper_est / lim.unit_factor,
           lim.m_lower / lim.unit_factor, lim.m_upper / lim.unit_factor))


def test_criterion_5_kneser(disk64, kernel_warm):
    gp = GasketProfile(disk64)
    closed = kneser_check(gp.volume, 2, (gp.scale * 2.0**-5, gp.scale * 1.9),
                          trials=10_000, seed=11, tol=1e-9)
    rng = np.random.default_rng(2718)
    cloud = at.PointCloud(rng.uniform(0.0, 1.0, (20, 2)))
    while True:
        try:
            body = at.make_body(rng.uniform(-1, 1, (4, 2)) - 0.0)
            break
        except at.AnisotubeError:
            continue
    h = 0.5 / 256
    r_lo = max(0.02, 2.5 * h / body.inradius)
    grid = at.grid_for(cloud, body, 0.5, h)
    fld = at.distance_field(cloud, body, grid)
    prof = at.volume_profile(fld, at.dyadic_radii(r_lo, 0.5, 8))
    tol = 4.0 * float(prof.err_budget.max())
    gridv = kneser_check(fld.volume_at, 2, (r_lo, 0.5), trials=10_000, seed=12, tol=tol)
    step = 0.3 * float(prof.volume[-1])
    corrupted = lambda r: fld.volume_at(r) + step * (np.asarray(r) > 0.2)
    control = kneser_check(corrupted, 2, (r_lo, 0.5), trials=10_000, seed=12, tol=tol)
    ok = closed.passed and gridv.passed and not control.passed
    report(5, ok, "closed-form %d trials: %d violations; grid: %d violations (tol %.3g); "
           "corrupted flagged: %s" % (closed.trials, len(closed.violations),
           len(gridv.violations), tol, not control.passed))


def test_criterion_6_kappa_behavior(kernel_warm):
    rng = np.random.default_rng(31)
    ang = np.sort(rng.uniform(0, 2 * np.pi, 8))
    rad = rng.uniform(0.5, 1.0, 8)
    poly = at.PolygonRegion(np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1))
    body = at.preset_body("square")
    diam = diameter(poly)
    prof = at.profile_by_octaves(poly, body, 0.05 * diam, 50.0 * diam,
                                 per_octave=6, cells_per_radius=48)
    mono = kappa_monotonic(prof)
    kap_end = prof.kappa[-1]
    limit = 2 * body.volume
    rel = abs(kap_end - limit) / limit
    ok = mono["passed"] and rel <= 0.05
    report(6, ok, f"kappa non-increasing: {mono['passed']}; kappa(50 diam) = "
           f"{kap_end:.4f} vs {limit} (rel {rel:.4f})")


def test_criterion_7_zero_dimensional_contents(square, kernel_warm):
    lam = square.volume
    r_min = 0.2
    details = []
    ok = True
    for k in (1, 3, 10):
        cols = int(np.ceil(np.sqrt(k)))
        pts = np.array([[6.5 * r_min * (i % cols) + GOLDEN * i,
                         6.5 * r_min * (i // cols) + GOLDEN**2 * i] for i in range(k)])
        prof = at.profile_by_octaves(at.PointCloud(pts), square, r_min, 8 * r_min,
                                     per_octave=6, cells_per_radius=64)
        rep = content_estimate(prof, 0.0, KIND_MINKOWSKI)
        kap = prof.kappa[0] / prof.n
        mink_err = max(abs(rep.lower_est - k * lam), abs(rep.upper_est - k * lam)) / (k * lam)
        kap_err = abs(kap - k * lam) / (k * lam)
        ok = ok and mink_err <= 0.02 and kap_err <= 0.02
        details.append(f"k={k}: mink {mink_err:.4f}, kappa {kap_err:.4f}")
    report(7, ok, "; ".join(details) + " (all within 2%)")


def test_criterion_8_divergence_sentinel(disk64, kernel_warm):
    sq = at.set_from_spec("filled-square")
    prof = at.profile_by_octaves(sq, disk64, 0.01, 0.1, per_octave=8, cells_per_radius=32)
    reps = {kind: content_estimate(prof, 0.5, kind) for kind in (KIND_SCONTENT, KIND_OUTER)}
    ok = all(math.isinf(rep.lower_est) and math.isinf(rep.upper_est) for rep in reps.values())
    report(8, ok, "filled square at s=0.5: s_content and outer_minkowski both report +inf")


def test_criterion_9_inequality_ledger(disk64, kernel_warm):
    lim = gasket_content_limits(GasketProfile(disk64))
    led = inequality_ledger(gasket_reports(lim, disk64))
    keys = ("content_chain", "upper_ratio", "lower_isoperimetric", "positive_measure")
    closed_ok = all(led[key]["verdict"] == "holds" for key in keys)
    rng = np.random.default_rng(414)
    grid_ok = True
    verdicts = []
    for _ in range(5):
        k = int(rng.integers(2, 9))
        pts = rng.uniform(0, 1, (k, 2)) * 2.5
        while True:
            try:
                verts = rng.uniform(-1, 1, (5, 2))
                body = at.make_body(verts - verts.mean(axis=0))
                break
            except at.AnisotubeError:
                continue
        prof = at.profile_by_octaves(at.PointCloud(pts), body, 0.05, 0.4,
                                     per_octave=6, cells_per_radius=32)
        pair_led = inequality_ledger(standard_reports(prof, 0.0))
        vs = [pair_led[key]["verdict"] for key in keys]
        verdicts.append(vs)
        grid_ok = grid_ok and all(v in ("holds", "inconclusive") for v in vs)
    ok = closed_ok and grid_ok
    n_holds = sum(v == "holds" for vs in verdicts for v in vs)
    report(9, ok, f"closed-form gasket: all hold; 5 random pairs: no violations "
           f"({n_holds}/20 strict holds, rest inconclusive within budget)")


def test_criterion_10_decomposition_additivity(disk64, kernel_warm):
    gp = GasketProfile(disk64)
    d = gp.similarity_dim
    g1 = at.sierpinski_gasket(10)
    g2 = translate(at.sierpinski_gasket(10), (3.0, 0.0))
    out = decomposition_check([g1, g2], d, disk64, r_min=gp.scale / 8,
                              r_max=gp.scale * 1.9, per_octave=8,
                              cells_per_radius=24, rel_tol=0.05)
    lo_gap = abs(out["union"]["lower"] - out["sum_lower"]) / out["sum_lower"]
    hi_gap = abs(out["union"]["upper"] - out["sum_upper"]) / out["sum_upper"]
    ok = out["verdict"] == "holds" and lo_gap <= 0.05 and hi_gap <= 0.05
    report(10, ok, f"union vs sum envelopes: lower gap {lo_gap:.2e}, upper gap {hi_gap:.2e}")


def test_criterion_11_dimension(gasket12_profile_disk64, gasket12_profile_square):
    target = np.log2(3.0)
    rep_disk = dimension_estimate(gasket12_profile_disk64)
    rep_sq = dimension_estimate(gasket12_profile_square)
    gap = abs(rep_disk.dim - rep_sq.dim)
    ok = abs(rep_disk.dim - 1.585) <= 0.05 and gap <= 0.05
    report(11, ok, f"dim(disk64) = {rep_disk.dim:.4f}, dim(square) = {rep_sq.dim:.4f}, "
           f"target 1.585 +- 0.05, body gap {gap:.4f}")


def test_criterion_12_determinism(tmp_path, kernel_warm):
    args = ["profile", "--set", "filled-triangle", "--body", "disk64",
            "--grid-h", str(1 / 2048), "--rmin", "0.02", "--rmax", "0.1",
            "--per-octave", "4", "--seed", "0"]
    files = {}
    for threads in (1, 8):
        out = tmp_path / f"tri{threads}"
        proc = subprocess.run(
            [sys.executable, "-m", "anisotube.cli", *args,
             "--threads", str(threads), "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        files[threads] = (out.with_suffix(".csv")).read_bytes()
    ok = files[1] == files[8]
    report(12, ok, f"criterion-3 pipeline, 1 vs 8 threads: byte-identical CSV ({len(files[1])} bytes)")
