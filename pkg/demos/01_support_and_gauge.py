"""Convex bodies and their two basic scalar functions.

A convex body C with the origin inside carries a support function
h(y) = max_{x in C} x.y and a gauge g(x) = min{t >= 0 : x in tC}.  The gauge
is the anisotropic "distance to the origin" the whole library is built on,
and the containment radii bracket it by Euclidean norms.
"""

import numpy as np

import anisotube as at

square = at.preset_body("square")
disk = at.preset_body("disk64")
lopsided = at.make_body([[1.2, 0.1], [-0.3, 0.9], [-0.8, -0.2], [0.3, -0.7]])

print("body      volume   inradius  outradius")
for body in (square, disk, lopsided):
    name = body.name or "lopsided"
    print(f"{name:9s} {body.volume:8.5f}  {body.inradius:8.5f}  {body.outradius:8.5f}")

print("\nsupport of the square along the axes:", square.support([[1, 0], [0, 1]]))
print("gauge of the square at (0.5, -0.25):", square.gauge([0.5, -0.25]), "(the sup norm)")
print("gauge of the 64-gon ~ Euclidean norm: g(3,4) =", disk.gauge([3.0, 4.0]))

rng = np.random.default_rng(0)
x = rng.normal(size=(5, 2))
print("\nEuclidean bracket  |x|/outradius <= gauge(x) <= |x|/inradius  (lopsided body):")
for xi in x:
    g = lopsided.gauge(xi)
    lo = np.linalg.norm(xi) / lopsided.outradius
    hi = np.linalg.norm(xi) / lopsided.inradius
    print(f"  {lo:7.4f} <= {g:7.4f} <= {hi:7.4f}")

print("\nscaling: gauge shrinks and volume grows with the dilate r*C")
for r in (0.5, 2.0):
    scaled = lopsided.scale(r)
    print(f"  r={r}: volume {scaled.volume:.5f} (= r^2 *", f"{lopsided.volume:.5f}),",
          f"gauge(1,1) {scaled.gauge([1.0, 1.0]):.5f}")
