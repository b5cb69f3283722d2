"""
Four ways to read time-to-transit
=================================

Geometric tau is distance along the heading over speed.  The camera sees
image position s and velocity s_dot, and s / s_dot is the perceived tau.
Driving straight the two differ only by f/v; turning adds rotational flow
that inflates the perceived value.
"""

import math

from taunav import CameraModel, FeaturePoint, Pose, arc_pose, project, to_body_frame
from taunav import finite_difference_tau, geometric_tau, perceived_tau, quasilinear_tau_star

cam = CameraModel(f=1.0)
feat = FeaturePoint(-1.0, 6.0)
start = Pose(0.0, 0.0, math.pi / 2)
v = 1.0

# Straight ahead: perceived = geometric - f/v exactly.
for t in (0.0, 1.0, 2.0):
    p = arc_pose(start, 0.0, v, t)
    g = geometric_tau(p, v, feat).value
    q = perceived_tau(cam, p, v, 0.0, feat).value
    print(f"straight t={t}: geometric={g:.4f} perceived={q:.4f} diff={q - g:+.4f}")

# A gentle left turn toward the feature.  The quasi-linear tau* drops the
# rotational part of the flow and stays at geometric - f/v.
u = 0.02
for t in (0.0, 1.0, 2.0):
    p = arc_pose(start, u, v, t)
    g = geometric_tau(p, v, feat).value
    q = perceived_tau(cam, p, v, u, feat).value
    s = quasilinear_tau_star(cam, p, v, feat).value
    print(f"arc t={t}: geometric={g:.4f} perceived={q:.4f} tau*={s:.4f}")

# A tracker only sees samples; a backward difference recovers s / s_dot to
# first order in the frame interval.
p = arc_pose(start, 0.0, v, 1.0)
truth = perceived_tau(cam, p, v, 0.0, feat).value
for dt in (0.1, 0.01, 0.001):
    s0 = project(cam, to_body_frame(arc_pose(start, 0.0, v, 1.0 - dt), feat))
    s1 = project(cam, to_body_frame(p, feat))
    est = finite_difference_tau(s0, s1, dt).value
    print(f"dt={dt}: finite difference {est:.6f} (error {est - truth:+.2e})")
