"""
Sample-and-hold steering and the heading map
============================================

If the turn rate is refreshed only every h seconds, the heading offset phi
after one interval is g(phi) = phi + h k (tau_l - tau_r).  Holding x fixed
this is a 1-D map, and the loop is stable while |g'| < 1.
"""

import numpy as np

from taunav import SampledConfig, estimate_k_crit, g_prime, iterate_heading_map
from taunav.sampled import compare_map_to_closed_loop, max_abs_gprime
from taunav.sim import SimConfig, run
from taunav.steering import SteeringLaw

h = 0.05

# At the fixed point the slope is 1 - 4hk (for R = 1), so the equilibrium
# keeps contracting until k reaches 1/(2h).
print("g'(0, 0) at k=1:", g_prime(0.0, 0.0, h, 1.0))
print("k_crit at the fixed point:", estimate_k_crit(h, 1.0, 0.0, 0.0))

# Far from the centerline the map is much steeper, so the gain that keeps it
# a contraction on a larger region is smaller.
for x_max, phi_max in [(0.25, 0.25), (0.5, 0.5), (1.0, 0.6)]:
    print(f"k_crit on |x|<={x_max}, |phi|<={phi_max}: {estimate_k_crit(h, 1.0, x_max, phi_max):.3f}")
print("max |g'| on |phi| <= 0.5 at k=1:", max_abs_gprime(h, 1.0, 1.0, 1.0, 0.5))

# Iterating the frozen-x map from phi=0.2 settles to zero.
phis = iterate_heading_map(0.2, 0.0, SampledConfig(h=h, k=1.0), 200)
print("phi_0..phi_4:", np.round(phis[:5], 5), " phi_200:", phis[-1])

# The real loop lets x drift while the heading settles; the frozen-x map
# tracks it, and more closely as the interval shrinks.
for hh in (0.1, 0.05, 0.025):
    c = compare_map_to_closed_loop(0.5, 0.0, hh, 1.0, n=10)
    print(f"h={hh}: map vs loop gap {c.gap:.2e}, x drift {c.x_drift:.2e}")

# Past the threshold the sampled loop overshoots and leaves the corridor.
for k in (9.0, 11.0):
    rec = run(SimConfig(controller="sampled", h=h, law=SteeringLaw(k=k), T=20.0, x0=0.05))
    print(f"k={k}: aborted={rec.aborted} {rec.abort_reason}")
