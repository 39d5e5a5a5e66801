"""The gasket's four distinct content limits, exactly and from the grid.

At the similarity dimension D = log2(3) the volume and rate quotients of the
gasket oscillate forever between exact bounds; the four limits
(lower/upper surface content, lower/upper volume content) are all different,
so neither content exists as a plain limit.  The grid pipeline reproduces the
envelope on a depth-12 prefractal.
"""

import numpy as np

import anisotube as at
from anisotube.contents import KIND_MINKOWSKI, KIND_SCONTENT, content_estimate

body = at.preset_body("disk64")
gp = at.GasketProfile(body)
lim = at.gasket_content_limits(gp)
d = gp.similarity_dim
u = lim.unit_factor

print(f"triangle support sum u = {gp.support_sum_out:.6f}, unit factor u^(2-D) = {u:.6f}")
print("\nexact limits (as coefficients of the unit factor):")
for name, value in zip(("S_lower", "M_lower", "M_upper", "S_upper"), lim.coefficients()):
    print(f"  {name} = {value:.6f}")
print(f"optimizing window positions: alpha_max = {lim.alpha_max:.4f}, "
      f"beta_max = {lim.beta_max:.4f}, beta_min = {lim.beta_min:.4f}")

# the within-window curves whose extrema give the limits
alphas = np.linspace(1, 2, 9)
print("\nwithin-window quotient curves (fine-scale limit):")
print("  alpha: ", "  ".join(f"{a:7.3f}" for a in alphas))
print("  volume:", "  ".join(f"{q:7.4f}" for q in gp.volume_quotient(alphas) / u))
print("  rate:  ", "  ".join(f"{q:7.4f}" for q in gp.rate_quotient(alphas) / (2 - d) / u))

# grid cross-validation on the depth-12 prefractal
print("\nrunning the grid estimator on the depth-12 prefractal ...")
E = at.sierpinski_gasket(12)
profile = at.profile_by_octaves(E, body, gp.scale / 8, gp.scale * 1.9,
                                per_octave=8, cells_per_radius=32)
rel = np.abs(profile.volume - gp.volume(profile.radii)) / gp.volume(profile.radii)
print(f"V(grid) vs piecewise closed form over {len(profile.radii)} radii: "
      f"max rel err {rel.max():.2e}")

rep_m = content_estimate(profile, d, KIND_MINKOWSKI)
rep_s = content_estimate(profile, d, KIND_SCONTENT)
print("\nfinest-window envelopes at s = D (coefficients of the unit factor):")
print(f"  volume content  [{rep_m.lower_est / u:.4f}, {rep_m.upper_est / u:.4f}]"
      f"  exact limits [{lim.m_lower / u:.4f}, {lim.m_upper / u:.4f}]")
print(f"  rate content    [{rep_s.lower_est / u:.4f}, {rep_s.upper_est / u:.4f}]"
      f"  exact limits [{lim.s_lower / u:.4f}, {lim.s_upper / u:.4f}]")
print("\nper-window envelope of the volume quotient (converges downward):")
for row in rep_m.octave_table:
    print(f"  window {row['octave']}: r in [{row['r_lo']:.4f}, {row['r_hi']:.4f}] -> "
          f"[{row['q_min'] / u:.4f}, {row['q_max'] / u:.4f}]")
