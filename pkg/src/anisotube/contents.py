"""Content and dimension estimates from volume profiles, and the checks the
theory guarantees: the Kneser property of the volume function, the chain and
ratio inequalities between contents, the isoperimetric lower bound, and
additivity over decompositions.

Finite-scale liminf/limsup are always reported as per-octave envelopes, never
as single extrapolated numbers: the quotients may genuinely oscillate (the
gasket does), so the finest octave's [min, max] is the honest proxy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import gamma as _gamma

from .bodies import ConvexBody
from .errors import (
    InsufficientOctaves,
    MismatchedReports,
    OverlappingParts,
    RangeTooNarrow,
    SOutOfRange,
)
from .exact import GasketLimits
from .field import VolumeProfile, profile_by_octaves
from .sets import CompactSet, PointCloud, Prefractal, descriptor, sample_boundary

KIND_MINKOWSKI = "minkowski"
KIND_OUTER = "outer_minkowski"
KIND_SCONTENT = "s_content"

DIVERGENCE_QUOTIENT = 1e6     # hard sentinel threshold
DIVERGENCE_SLOPE = -0.05      # log-log slope bound for the extrapolated sentinel
DIVERGENCE_GROWTH = 1.05      # octave-to-octave envelope growth toward r -> 0

# empirical noise model for the rate (right difference quotient) estimator:
# relative error ~ RATE_NOISE * sqrt(h / (inradius * r))
RATE_NOISE = 0.6


def unit_ball_volume(t: float, convention: str = "unit_ball") -> float:
    """Normalization constant for dimension t.

    ``unit_ball`` is pi^(t/2)/Gamma(1+t/2), the volume of the t-dimensional
    unit ball; ``gamma_full`` is the variant pi^(t/2)/Gamma(1+t).
    """
    if convention == "unit_ball":
        return float(np.pi ** (t / 2.0) / _gamma(1.0 + t / 2.0))
    if convention == "gamma_full":
        return float(np.pi ** (t / 2.0) / _gamma(1.0 + t))
    raise ValueError(f"unknown normalization convention {convention!r}")


@dataclass(eq=False)
class ContentReport:
    """Envelope estimate (or exact value) of one content at one exponent."""

    s: float
    kind: str
    lower_est: float
    upper_est: float
    window: tuple
    method: str
    normalization: float = 1.0
    octave_table: list = dc_field(default_factory=list)
    rel_budget: float = 0.0
    n: int = 2
    v0: float = 0.0
    body_volume: float = 0.0
    set_desc: dict = dc_field(default_factory=dict)
    body_desc: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if not (self.lower_est <= self.upper_est or math.isinf(self.lower_est)):
            raise ValueError("lower_est must not exceed upper_est")

    @property
    def diverges(self) -> bool:
        return math.isinf(self.lower_est)

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "kind": self.kind,
            "lower": self.lower_est,
            "upper": self.upper_est,
            "window": list(self.window),
            "method": self.method,
            "normalization": self.normalization,
            "octave_table": self.octave_table,
            "rel_budget": self.rel_budget,
        }


def _octave_groups(profile: VolumeProfile):
    idx = profile.octave_index()
    return [np.flatnonzero(idx == k) for k in range(idx.max() + 1)]


def _require_octaves(profile: VolumeProfile, min_radii: int = 16, min_octaves: int = 3):
    # "spanning k octaves" = the dyadic indices 0..k-1 are all populated
    span = profile.radii[-1] / profile.radii[0]
    if len(profile.radii) < min_radii or span < 2.0 ** (min_octaves - 1) * (1 - 1e-9):
        raise InsufficientOctaves(
            f"need >= {min_radii} radii spanning >= {min_octaves} octaves, "
            f"got {len(profile.radii)} radii over x{span:.3g}"
        )


def _diverging(radii: np.ndarray, q: np.ndarray, groups) -> bool:
    """True when the quotient is heading to +inf as r -> 0."""
    if np.any(q <= 0):
        return False
    if q[0] > DIVERGENCE_QUOTIENT and q[0] >= q[min(len(q) - 1, groups[0][-1])]:
        return True
    mins = [q[g].min() for g in groups[:3]]
    if len(mins) < 3:
        return False
    growing = mins[0] >= DIVERGENCE_GROWTH * mins[1] and mins[1] >= DIVERGENCE_GROWTH * mins[2]
    fine = np.concatenate(groups[:2])
    slope = np.polyfit(np.log(radii[fine]), np.log(q[fine]), 1)[0]
    return growing and slope <= DIVERGENCE_SLOPE


def content_estimate(profile: VolumeProfile, s: float, kind: str,
                     normalization: float = 1.0) -> ContentReport:
    """Per-octave envelope of the content quotient; headline from the finest octave.

    Quotients: minkowski V/r^(n-s); outer (V - V(0))/r^(n-s); s_content
    S/((n-s) r^(n-s-1)).  A diverging quotient is reported as the +inf
    sentinel.  At s = n the minkowski content is V(r_min) (= lambda^n(E) up to
    grid error) and is returned as both bounds.
    """
    n = profile.n
    if not 0.0 <= s <= n:
        raise SOutOfRange(f"s must lie in [0, {n}], got {s}")
    if kind == KIND_SCONTENT and s >= n:
        raise SOutOfRange("s_content needs s < n")
    _require_octaves(profile)
    r = profile.radii
    if kind == KIND_MINKOWSKI:
        q = profile.volume / r ** (n - s)
        rel = profile.rel_budget()
    elif kind == KIND_OUTER:
        q = (profile.volume - profile.v0) / r ** (n - s)
        rel = profile.err_budget / np.maximum(profile.volume - profile.v0, 1e-300)
    elif kind == KIND_SCONTENT:
        # the difference quotient estimates the rate at the step midpoint
        r_eff = r + 0.5 * profile.delta
        q = profile.rate / ((n - s) * r_eff ** (n - s - 1))
        rel = RATE_NOISE * np.sqrt(profile.cell_size / (profile.body_inradius * r))
    else:
        raise ValueError(f"unknown content kind {kind!r}")
    q = q * normalization
    groups = _octave_groups(profile)
    table = [
        {
            "octave": k,
            "r_lo": float(r[g[0]]),
            "r_hi": float(r[g[-1]]),
            "q_min": float(q[g].min()),
            "q_max": float(q[g].max()),
        }
        for k, g in enumerate(groups)
    ]
    fin = groups[0]
    window = (float(r[fin[0]]), float(r[fin[-1]]))
    if kind == KIND_MINKOWSKI and s == n:
        lower = upper = float(profile.volume[0]) * normalization
    elif _diverging(r, q, groups):
        lower = upper = math.inf
    else:
        lower, upper = float(q[fin].min()), float(q[fin].max())
    return ContentReport(
        s=s,
        kind=kind,
        lower_est=lower,
        upper_est=upper,
        window=window,
        method="grid",
        normalization=normalization,
        octave_table=table,
        rel_budget=float(rel[fin].max()),
        n=n,
        v0=profile.v0,
        body_volume=profile.body_volume,
        set_desc=profile.set_desc,
        body_desc=profile.body_desc,
    )


@dataclass(eq=False)
class DimensionReport:
    dim: float
    dim_lower: float
    dim_upper: float
    slope: float
    intercept: float
    residual: float
    oscillation: list
    window: tuple

    def as_dict(self) -> dict:
        return {
            "dim": self.dim,
            "dim_lower": self.dim_lower,
            "dim_upper": self.dim_upper,
            "slope": self.slope,
            "intercept": self.intercept,
            "residual": self.residual,
            "oscillation": self.oscillation,
            "window": list(self.window),
        }


def dimension_estimate(profile: VolumeProfile) -> DimensionReport:
    """dim = n - slope of log V against log r over the finest two octaves.

    Per-octave slopes give the reported lower/upper spread; the oscillation
    table records each octave's range of V/r^(n-dim).
    """
    _require_octaves(profile, min_radii=6, min_octaves=3)
    n = profile.n
    groups = _octave_groups(profile)
    fine = np.concatenate(groups[:2])
    logr, logv = np.log(profile.radii), np.log(profile.volume)
    (slope, intercept), res, *_ = np.polyfit(logr[fine], logv[fine], 1, full=True)
    dim = float(np.clip(n - slope, 0.0, n))
    per_oct = []
    for g in groups:
        if len(g) >= 2:
            per_oct.append(n - np.polyfit(logr[g], logv[g], 1)[0])
    lo = float(np.clip(min(per_oct), 0.0, n)) if per_oct else dim
    hi = float(np.clip(max(per_oct), 0.0, n)) if per_oct else dim
    osc_q = profile.volume / profile.radii ** (n - dim)
    oscillation = [
        {"octave": k, "q_min": float(osc_q[g].min()), "q_max": float(osc_q[g].max())}
        for k, g in enumerate(groups)
    ]
    return DimensionReport(
        dim=dim,
        dim_lower=min(lo, dim),
        dim_upper=max(hi, dim),
        slope=float(slope),
        intercept=float(intercept),
        residual=float(res[0]) if len(res) else 0.0,
        oscillation=oscillation,
        window=(float(profile.radii[fine[0]]), float(profile.radii[fine[-1]])),
    )


# ---------------------------------------------------------------------------
# Kneser property


@dataclass(eq=False)
class KneserVerdict:
    trials: int
    violations: list
    max_excess: float
    tol: float
    r_range: tuple

    @property
    def passed(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "violations": len(self.violations),
            "max_excess": self.max_excess,
            "tol": self.tol,
            "r_range": list(self.r_range),
            "passed": self.passed,
        }


def kneser_check(volume_fn, n: int, r_range, trials: int = 1000,
                 seed: int = 0, tol: float = 1e-9) -> KneserVerdict:
    """Sample (a, b, t) with 0 < a <= b, t >= 1, t*b in range, and test

        V(t b) - V(t a) <= t^n (V(b) - V(a)) + tol.

    ``volume_fn`` must accept a vector of radii.
    """
    if trials < 100:
        raise ValueError("kneser_check needs at least 100 trials")
    r_lo, r_hi = float(r_range[0]), float(r_range[1])
    if not (0 < r_lo < r_hi) or r_hi / r_lo < 1.05:
        raise RangeTooNarrow(f"range [{r_lo}, {r_hi}] cannot host scaling triples")
    rng = np.random.default_rng(seed)
    la, lh = np.log(r_lo), np.log(r_hi)
    a = np.exp(rng.uniform(la, lh, trials))
    b = np.exp(rng.uniform(np.log(a), lh))
    t = 1.0 + rng.uniform(0.0, 1.0, trials) * (r_hi / b - 1.0)
    excess = (np.asarray(volume_fn(t * b)) - volume_fn(t * a)) - t**n * (
        np.asarray(volume_fn(b)) - volume_fn(a)
    )
    bad = np.flatnonzero(excess > tol)
    violations = [
        {"a": float(a[i]), "b": float(b[i]), "t": float(t[i]), "excess": float(excess[i])}
        for i in bad[:50]
    ]
    return KneserVerdict(
        trials=trials,
        violations=violations,
        max_excess=float(excess.max()),
        tol=tol,
        r_range=(r_lo, r_hi),
    )


# ---------------------------------------------------------------------------
# inequality ledger


def _compare(lhs: float, rhs: float, tol: float) -> dict:
    """Three-valued verdict for lhs >= rhs."""
    if math.isinf(lhs) and lhs > 0:
        return {"verdict": "holds", "lhs": lhs, "rhs": rhs, "slack": math.inf}
    slack = lhs - rhs
    if slack >= 0:
        verdict = "holds"
    elif slack >= -tol:
        verdict = "inconclusive"
    else:
        verdict = "violated"
    return {"verdict": verdict, "lhs": lhs, "rhs": rhs, "slack": slack}


def _match(reports, kind: str, s: float) -> ContentReport:
    for rep in reports:
        if rep.kind == kind and abs(rep.s - s) <= 1e-12:
            return rep
    raise MismatchedReports(f"ledger needs a {kind} report at s={s:.6g}")


def inequality_ledger(reports, *, strict_tol: float = 1e-9) -> dict:
    """Verdicts for the guaranteed inequalities among the given reports.

    Expects reports sharing one set, body, exponent s and method: minkowski
    and s_content at s, an s_content at s(n-1)/n, and (when the set has
    positive measure) outer_minkowski at s plus s_content at n-1.
    Grid verdicts are budget-aware and three-valued.
    """
    reports = list(reports)
    if not reports:
        raise MismatchedReports("no reports given")
    base = reports[0]
    for rep in reports[1:]:
        if rep.set_desc != base.set_desc or rep.body_desc != base.body_desc or rep.method != base.method:
            raise MismatchedReports("reports mix sets, bodies or methods")
    n = base.n
    s = base.s
    null_set = base.v0 == 0.0
    mink = _match(reports, KIND_MINKOWSKI if null_set else KIND_OUTER, s)
    scont = _match(reports, KIND_SCONTENT, s)
    t_aux = s * (n - 1) / n
    scont_aux = _match(reports, KIND_SCONTENT, t_aux)

    def tol(*reps, scale: float) -> float:
        rel = sum(rep.rel_budget for rep in reps)
        return max(strict_tol * max(abs(scale), 1.0), rel * abs(scale))

    out = {}
    # S_* <= M_* <= M^* <= S^*
    chain = [
        _compare(mink.lower_est, scont.lower_est, tol(mink, scont, scale=scont.lower_est)),
        _compare(mink.upper_est, mink.lower_est, tol(mink, scale=mink.lower_est)),
        _compare(scont.upper_est, mink.upper_est, tol(mink, scont, scale=mink.upper_est)),
    ]
    out["content_chain"] = {
        "verdict": _worst(v["verdict"] for v in chain),
        "links": chain,
    }
    # M^* >= (n-s)/n * S^*
    rhs = (n - s) / n * scont.upper_est
    out["upper_ratio"] = _compare(mink.upper_est, rhs, tol(mink, scont, scale=rhs))
    # (n-t)/(n vol(C)^(1/n)) * S_*(t) >= (M_*)^((n-1)/n)
    coef = (n - t_aux) / (n * base.body_volume ** (1.0 / n))
    lhs = coef * scont_aux.lower_est
    rhs = mink.lower_est ** ((n - 1) / n) if not math.isinf(mink.lower_est) else math.inf
    if math.isinf(rhs):
        out["lower_isoperimetric"] = _compare(lhs, rhs, 0.0) if math.isinf(lhs) else {
            "verdict": "inconclusive", "lhs": lhs, "rhs": rhs, "slack": -math.inf,
        }
    else:
        out["lower_isoperimetric"] = _compare(lhs, rhs, tol(mink, scont_aux, scale=rhs))
    # S_*(n-1) >= n vol(C)^(1/n) vol(E)^((n-1)/n)
    if base.v0 > 0:
        surf = _match(reports, KIND_SCONTENT, float(n - 1))
        rhs = n * base.body_volume ** (1.0 / n) * base.v0 ** ((n - 1) / n)
        out["positive_measure"] = _compare(surf.lower_est, rhs, tol(surf, scale=rhs))
    else:
        out["positive_measure"] = {
            "verdict": "holds",
            "lhs": scont.lower_est if abs(s - (n - 1)) <= 1e-12 else None,
            "rhs": 0.0,
            "slack": math.inf,
            "note": "set has zero measure, bound is trivial",
        }
    out["overall"] = _worst(v["verdict"] for v in out.values() if isinstance(v, dict) and "verdict" in v)
    return out


def _worst(verdicts) -> str:
    rank = {"holds": 0, "inconclusive": 1, "violated": 2}
    worst = "holds"
    for v in verdicts:
        if rank[v] > rank[worst]:
            worst = v
    return worst


def standard_reports(profile: VolumeProfile, s: float) -> list:
    """The report set the ledger needs, estimated from one grid profile."""
    n = profile.n
    reps = [
        content_estimate(profile, s, KIND_MINKOWSKI if profile.v0 == 0 else KIND_OUTER),
        content_estimate(profile, s, KIND_SCONTENT),
        content_estimate(profile, s * (n - 1) / n, KIND_SCONTENT),
    ]
    if profile.v0 > 0 and abs(s - (n - 1)) > 1e-12:
        reps.append(content_estimate(profile, float(n - 1), KIND_SCONTENT))
    return reps


def gasket_reports(limits: GasketLimits, body: ConvexBody) -> list:
    """Closed-form ledger reports for the gasket at its similarity dimension."""
    d = math.log2(3.0)
    n = 2

    def rep(kind, s, lower, upper):
        return ContentReport(
            s=s,
            kind=kind,
            lower_est=lower,
            upper_est=upper,
            window=(0.0, 0.0),
            method="closed_form",
            n=n,
            v0=0.0,
            body_volume=body.volume,
            set_desc={"kind": "gasket", "depth": "limit"},
            body_desc=body.descriptor(),
        )

    # below the similarity dimension every quotient diverges
    return [
        rep(KIND_MINKOWSKI, d, limits.m_lower, limits.m_upper),
        rep(KIND_SCONTENT, d, limits.s_lower, limits.s_upper),
        rep(KIND_SCONTENT, d * (n - 1) / n, math.inf, math.inf),
    ]


# ---------------------------------------------------------------------------
# kappa monotonicity and decomposition additivity


def kappa_monotonic(profile: VolumeProfile, rel_tol: float | None = None) -> dict:
    """Check kappa(r) is non-increasing within the rate noise tolerance."""
    kap = profile.kappa
    r = profile.radii
    if rel_tol is None:
        noise = RATE_NOISE * np.sqrt(profile.cell_size / (profile.body_inradius * r))
        tol = kap[:-1] * (noise[:-1] + noise[1:])
    else:
        tol = rel_tol * kap[:-1]
    rises = np.flatnonzero(kap[1:] - kap[:-1] > tol)
    violations = [
        {"r_lo": float(r[i]), "r_hi": float(r[i + 1]), "rise": float(kap[i + 1] - kap[i])}
        for i in rises
    ]
    return {"passed": not violations, "violations": violations}


def disjoint_union(*parts: CompactSet) -> CompactSet:
    if all(isinstance(p, PointCloud) for p in parts):
        return PointCloud(np.concatenate([p.points for p in parts]))
    if all(isinstance(p, Prefractal) for p in parts):
        return Prefractal(
            ifs=parts[0].ifs,
            depth=max(p.depth for p in parts),
            segments=np.concatenate([p.segments for p in parts]),
        )
    raise TypeError("disjoint_union supports point clouds or segment prefractals")


def decomposition_check(parts, s: float, body: ConvexBody, *,
                        r_min: float, r_max: float, per_octave: int = 8,
                        cells_per_radius: int = 24, workers: int = 1,
                        rel_tol: float = 0.05) -> dict:
    """Content of a disjoint union against the sum of the parts' contents.

    Parts must be pairwise disjoint with positive distance; each part, and the
    union, is run through the grid pipeline and the finest-octave envelopes
    are compared.
    """
    parts = list(parts)
    if len(parts) >= 2:
        clouds = [sample_boundary(p, spacing=r_min) for p in parts]
        for i in range(len(clouds)):
            for j in range(i + 1, len(clouds)):
                d, _ = cKDTree(clouds[i]).query(clouds[j], k=1)
                if d.min() <= 0.0:
                    raise OverlappingParts(f"parts {i} and {j} touch")
    kind = KIND_MINKOWSKI
    part_reports = []
    for p in parts:
        prof = profile_by_octaves(p, body, r_min, r_max, per_octave=per_octave,
                                  cells_per_radius=cells_per_radius, workers=workers)
        part_reports.append(content_estimate(prof, s, kind))
    union_prof = profile_by_octaves(disjoint_union(*parts), body, r_min, r_max,
                                    per_octave=per_octave,
                                    cells_per_radius=cells_per_radius, workers=workers)
    union_rep = content_estimate(union_prof, s, kind)
    sum_lower = sum(rep.lower_est for rep in part_reports)
    sum_upper = sum(rep.upper_est for rep in part_reports)
    budget = rel_tol + union_rep.rel_budget + max(rep.rel_budget for rep in part_reports)
    lo_ok = abs(union_rep.lower_est - sum_lower) <= budget * sum_lower
    hi_ok = abs(union_rep.upper_est - sum_upper) <= budget * sum_upper
    return {
        "verdict": "holds" if (lo_ok and hi_ok) else "violated",
        "union": union_rep.as_dict(),
        "parts": [rep.as_dict() for rep in part_reports],
        "sum_lower": sum_lower,
        "sum_upper": sum_upper,
        "rel_tol": budget,
        "union_set": descriptor(disjoint_union(*parts)) if len(parts) > 1 else None,
    }
