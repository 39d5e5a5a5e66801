"""Closed-form evaluators: polygon anisotropic perimeter, triangle tube volumes,
the gasket's piecewise volume/surface profile and its four exact content limits.

All expressions are evaluated for the polytope body actually supplied (its own
volume and support values), so cross-validation against the grid estimator is
self-consistent.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bodies import ConvexBody
from .errors import NonPositiveRadius, RadiusOutsideValidity
from .sets import PolygonRegion

ROOT3 = np.sqrt(3.0)

# Outward unit normals of the unit triangle with base [(0,0),(1,0)], apex up;
# this orientation is fixed throughout (bottom, right, left side).
TRIANGLE_NORMALS = np.array([[0.0, -1.0], [ROOT3 / 2, 0.5], [-ROOT3 / 2, 0.5]])

MAX_LEVEL = 60  # dyadic refinement cap for the piecewise profile


def polygon_aniso_perimeter(region: PolygonRegion, body: ConvexBody) -> float:
    """Edge sum of length * support(outward normal) over all rings.

    Hole rings are stored clockwise, so the right-hand edge normal points out
    of the region there as well.
    """
    total = 0.0
    for ring in region.rings:
        edge = np.roll(ring, -1, axis=0) - ring
        length = np.linalg.norm(edge, axis=1)
        normal = np.stack([edge[:, 1], -edge[:, 0]], axis=1) / length[:, None]
        total += float(np.sum(length * body.support(normal)))
    return total


@dataclass(frozen=True)
class TriangleAnisotropy:
    """Body-dependent constants of the equilateral-triangle tube formulas.

    ``support_sum_out``/``support_sum_in`` are the sums of the body's support
    function over the triangle's outward normals and their negatives; both are
    positive because the origin is interior.
    """

    support_sum_in: float
    support_sum_out: float
    body_volume: float
    side: float = 1.0

    @classmethod
    def for_body(cls, body: ConvexBody, side: float = 1.0) -> "TriangleAnisotropy":
        if side <= 0:
            raise ValueError("side must be > 0")
        u_in = float(body.support(-TRIANGLE_NORMALS).sum())
        u_out = float(body.support(TRIANGLE_NORMALS).sum())
        return cls(support_sum_in=u_in, support_sum_out=u_out, body_volume=body.volume, side=side)

    @property
    def boundary_validity_radius(self) -> float:
        """Largest r for which the boundary-tube polynomial is valid."""
        return ROOT3 * self.side / (2.0 * self.support_sum_in)


def triangle_tube_volume(tri: TriangleAnisotropy, r, variant: str = "filled"):
    """Exact tube volume of the filled triangle or of its boundary.

    filled:   vol(C) r^2 + side * support_sum_out * r + (sqrt3/4) side^2
    boundary: (vol(C) - support_sum_in^2/sqrt3) r^2
              + side (support_sum_in + support_sum_out) r,
              valid for 0 <= r <= sqrt3*side/(2*support_sum_in).
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise NonPositiveRadius("tube radius must be >= 0")
    s, lam = tri.side, tri.body_volume
    if variant == "filled":
        out = lam * r**2 + s * tri.support_sum_out * r + ROOT3 / 4 * s**2
    elif variant == "boundary":
        if np.any(r > tri.boundary_validity_radius * (1 + 1e-12)):
            raise RadiusOutsideValidity(
                f"boundary tube polynomial is valid for r <= {tri.boundary_validity_radius:.6g}"
            )
        out = (lam - tri.support_sum_in**2 / ROOT3) * r**2 + s * (tri.support_sum_in + tri.support_sum_out) * r
    else:
        raise ValueError(f"variant must be 'filled' or 'boundary', got {variant!r}")
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class GasketProfile:
    """Piecewise closed form for the unit gasket's tube volume and its derivative.

    The radius axis splits into dyadic windows [scale*2^-n, scale*2^(1-n)) on
    which the volume is a fixed quadratic; ``scale`` is the left end of the
    outermost window.  Constants depend on the body only through its volume and
    the triangle support sum.
    """

    body: ConvexBody

    @cached_property
    def similarity_dim(self) -> float:
        return float(np.log2(3.0))

    @cached_property
    def support_sum_out(self) -> float:
        return float(self.body.support(TRIANGLE_NORMALS).sum())

    @cached_property
    def body_volume(self) -> float:
        return self.body.volume

    @cached_property
    def scale(self) -> float:
        return ROOT3 / (4.0 * self.support_sum_out)

    @cached_property
    def lin_coef(self) -> float:
        # coefficient of alpha^(D-1) in both rescaled quotients
        d = self.similarity_dim
        return float(self.support_sum_out * (ROOT3 / (4 * self.support_sum_out)) ** (d - 1))

    @cached_property
    def quad_coef_limit(self) -> float:
        d = self.similarity_dim
        return float(-(ROOT3 ** (d - 1)) * 4.0**-d * self.support_sum_out ** (2 - d))

    def level_of(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0):
            raise NonPositiveRadius("radius must be > 0")
        lev = -np.floor(np.log2(r / self.scale)).astype(np.int64)
        return np.clip(lev, 0, MAX_LEVEL)

    def window(self, level: int):
        """[left, right) radius window of a refinement level (level 0 extends to inf)."""
        left = self.scale * 2.0**-level
        right = np.inf if level == 0 else left * 2.0
        return left, right

    def radius_at(self, level: int, alpha) -> np.ndarray:
        """Window parametrization: alpha in [1,2) sweeps level's window."""
        return np.asarray(alpha, dtype=float) * self.scale * 2.0**-level

    def quad_coef(self, level) -> np.ndarray:
        d = self.similarity_dim
        u, lam = self.support_sum_out, self.body_volume
        lead = (ROOT3 / (4 * u)) ** d
        return lead * ((2 * ROOT3 * lam + u**2) / (3.0 ** np.asarray(level, dtype=float) * ROOT3) - u**2 / ROOT3)

    def poly_coeffs(self, level):
        """(quadratic, linear, constant) of the tube volume on the given window."""
        n = np.asarray(level, dtype=float)
        u, lam = self.support_sum_out, self.body_volume
        quad = lam - (3.0**n - 1.0) * u**2 / (2 * ROOT3)
        lin = 1.5**n * u
        const = ROOT3 / 4 * 0.75**n
        return quad, lin, const

    def volume(self, r):
        r = np.asarray(r, dtype=float)
        quad, lin, const = self.poly_coeffs(self.level_of(r))
        out = quad * r**2 + lin * r + const
        return out if out.ndim else float(out)

    def rate(self, r):
        """Right derivative of the tube volume (the anisotropic surface measure)."""
        r = np.asarray(r, dtype=float)
        quad, lin, _ = self.poly_coeffs(self.level_of(r))
        out = 2 * quad * r + lin
        return out if out.ndim else float(out)

    # rescaled within-window quotient curves; level=None takes the fine-scale limit
    def rate_quotient(self, alpha, level=None):
        """S(r)/r^(1-D) as a function of the window parameter alpha."""
        d = self.similarity_dim
        a = np.asarray(alpha, dtype=float)
        quad = self.quad_coef_limit if level is None else self.quad_coef(level)
        return quad * a**d + self.lin_coef * a ** (d - 1)

    def volume_quotient(self, alpha, level=None):
        """V(r)/r^(2-D) as a function of the window parameter alpha."""
        d = self.similarity_dim
        a = np.asarray(alpha, dtype=float)
        quad = self.quad_coef_limit if level is None else self.quad_coef(level)
        return 0.5 * quad * a**d + self.lin_coef * (a ** (d - 1) + a ** (d - 2))


def gasket_profile(g: GasketProfile, r):
    """(V, S) of the gasket tube at radius r > 0 (exact piecewise evaluation)."""
    return g.volume(r), g.rate(r)


@dataclass(frozen=True)
class GasketLimits:
    """The four exact fine-scale limits of the gasket's content quotients."""

    s_lower: float
    m_lower: float
    m_upper: float
    s_upper: float
    alpha_max: float
    beta_max: float
    beta_min: float
    unit_factor: float  # support_sum_out^(2-D); divide limits by this for coefficients

    def coefficients(self):
        return (
            self.s_lower / self.unit_factor,
            self.m_lower / self.unit_factor,
            self.m_upper / self.unit_factor,
            self.s_upper / self.unit_factor,
        )

    def as_dict(self) -> dict:
        return {
            "s_content_lower": self.s_lower,
            "minkowski_lower": self.m_lower,
            "minkowski_upper": self.m_upper,
            "s_content_upper": self.s_upper,
            "alpha_max": self.alpha_max,
            "beta_max": self.beta_max,
            "beta_min": self.beta_min,
            "unit_factor": self.unit_factor,
        }


def gasket_content_limits(g: GasketProfile) -> GasketLimits:
    """Evaluate the four exact limits and the optimizer abscissae.

    The lower/upper surface-content limits come from the endpoints/interior
    maximum of the rate quotient curve; the volume-content limits from the two
    interior critical points of the volume quotient curve.  All optimizers lie
    in [1, 2].
    """
    d = g.similarity_dim
    alpha_max = 4.0 * (1.0 - 1.0 / d)
    disc = np.sqrt(1.5 * d**2 - 3.0 * d + 1.0)
    beta_max = (4.0 / d) * (d - 1.0 + disc)
    beta_min = (4.0 / d) * (d - 1.0 - disc)
    for val in (alpha_max, beta_max, beta_min):
        assert 1.0 <= val <= 2.0, f"optimizer {val} escaped [1, 2]"
    s_lower = (g.quad_coef_limit + g.lin_coef) / (2.0 - d)
    s_upper = float(g.rate_quotient(alpha_max)) / (2.0 - d)
    m_lower = float(g.volume_quotient(beta_min))
    m_upper = float(g.volume_quotient(beta_max))
    return GasketLimits(
        s_lower=s_lower,
        m_lower=m_lower,
        m_upper=m_upper,
        s_upper=s_upper,
        alpha_max=alpha_max,
        beta_max=beta_max,
        beta_min=beta_min,
        unit_factor=g.support_sum_out ** (2.0 - d),
    )
