"""Four-point homographies: estimate, apply, invert, compose."""
import numpy as np

from patchwarp.geometry import Point2, Quad, apply_homography, compose, estimate_homography, invert, map_points
from patchwarp.patching import TEMPLATE_QUAD

unit = Quad.from_array([[0, 0], [1, 0], [1, 1], [0, 1]])
trapezoid = Quad.from_array([[0, 0], [2, 0], [1.5, 1], [0.5, 1]])

H = estimate_homography(unit, trapezoid)
print("unit square -> trapezoid\n", np.round(H.m, 6))

# the projective part shows up in the bottom row
print("(1, 1) ->", apply_homography(H, Point2(1, 1)))
print("(0.5, 0.5) ->", apply_homography(H, Point2(0.5, 0.5)))

# inverse maps the trapezoid back onto the square
back = map_points(invert(H), trapezoid.as_array())
print("round trip error:", np.abs(back - unit.as_array()).max())

# source quad -> 64x64 template -> target quad, as one matrix
src = Quad.from_array([[100, 40], [180, 55], [170, 150], [95, 140]])
dst = Quad.from_array([[300, 60], [360, 70], [365, 170], [290, 160]])
h_sn = estimate_homography(src, TEMPLATE_QUAD)
h_nt = estimate_homography(TEMPLATE_QUAD, dst)
h_st = compose(h_nt, h_sn)
print("source corners in the template:\n", np.round(map_points(h_sn, src.as_array()), 9))
print("combined map error:", np.abs(map_points(h_st, src.as_array()) - dst.as_array()).max())
