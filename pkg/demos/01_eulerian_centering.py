"""
Centering in a corridor by balancing time-to-transit
====================================================

Two receptors on a 1-D pinhole camera look at the left and right walls.
Each one reports how long until the vehicle passes the wall point it sees.
Turning toward the side with the longer wait pulls the vehicle to the
centerline.
"""

import math

import numpy as np

from taunav import CameraModel, CorridorWorld, SimConfig, SteeringLaw, run
from taunav.steering import predicted_limits

# On the centerline, heading straight, both walls are imaged at +-1 and the
# two taus agree, so the turn rate is zero.
world = CorridorWorld(R=1.0)
cam = CameraModel(f=1.0, delta=1.0, epsilon=1.0)

# Start off-center and tilted; the balance law k (tau_l - tau_r) steers back.
for x0, dth in [(0.5, 0.2), (-0.5, -0.2)]:
    rec = run(SimConfig(T=20.0, x0=x0, theta0=math.pi / 2 + dth, law=SteeringLaw(k=0.5)))
    print(f"start x={x0:+.1f}: x(5)={rec.x[5000]:+.4f}  x(20)={rec.x[-1]:+.2e}")

# Moving the left receptor inward (delta < epsilon) shifts the resting line
# toward the left wall, by R (delta - epsilon) / (delta + epsilon).
skewed = CameraModel(f=1.0, delta=0.5, epsilon=1.0)
rec = run(SimConfig(T=60.0, camera=skewed))
print("offset with delta=0.5:", round(rec.x[-1], 6), "predicted", predicted_limits(world, skewed, SteeringLaw())[0])

# Weighting each tau by its receptor offset gives an offset that no longer
# depends on the corridor width.
for R in (1.0, 2.0):
    rec = run(SimConfig(T=60.0, camera=skewed, world=CorridorWorld(R), controller="continuous_weighted"))
    print(f"weighted law, R={R}: x={rec.x[-1]:.6f}")

# After the first correction the vehicle stays close to the centerline.
rec = run(SimConfig(T=20.0, x0=0.5))
print("max |x| after t=5:", np.max(np.abs(rec.x[5000:])))
