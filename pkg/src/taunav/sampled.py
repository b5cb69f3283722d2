"""Sample-and-hold tau-balance steering and its discrete heading map.

With the balance law held constant over ``[t_i, t_i + h)`` the heading offset
``phi = theta - pi/2`` advances by exactly ``h * u_i``.  In normalized units
(f = v = delta = epsilon = 1) the tau difference has the closed form

    tau_l - tau_r = (2 sin(phi) (R + cos(phi)) - 2 x cos(phi)) / (sin^2(phi) - cos^2(phi))

so for frozen ``x`` the heading evolves by iterating
``g(phi) = phi + h k (tau_l - tau_r)``.  ``g`` never exceeds slope 1 on the
domain, so it is a contraction wherever ``g' > -1``; the largest gain with that
property on a grid is ``k_crit``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainEscape, Singular
from .geometry import SING_TOL, CameraModel, CorridorWorld, Pose
from .kinematics import rk4_step
from .steering import SteeringLaw, eulerian_control

#: Default cap on |phi|; the map blows up at |phi| = pi/4.
PHI_MAX = math.pi / 4 - 0.02


@dataclass(frozen=True)
class SampledConfig:
    h: float = 0.05
    k: float = 1.0
    R: float = 1.0
    phi_max: float = PHI_MAX

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"sampling interval h must be positive, got {self.h}")
        if not self.k > 0:
            raise ValueError(f"gain k must be positive, got {self.k}")
        if not self.R > 0:
            raise ValueError("R must be positive")
        if not 0 <= self.phi_max < math.pi / 4:
            raise ValueError("phi_max must lie in [0, pi/4)")


def sample_hold_controller(
    pose: Pose, cam: CameraModel, world: CorridorWorld, k: float, v: float = 1.0
) -> tuple[float, float, float]:
    """Balance-law turn rate to hold until the next sample: ``(u, tau_l, tau_r)``."""
    return eulerian_control(pose, cam, world, SteeringLaw(k=k), v)


def _check_phi(phi):
    den = np.sin(phi) ** 2 - np.cos(phi) ** 2
    if np.any(np.abs(den) < SING_TOL):
        raise Singular("heading offset at |phi| = pi/4 where the map is singular")
    return den


def tau_diff_closed_form(x, phi, R=1.0):
    """Normalized ``tau_l - tau_r`` at lateral position ``x`` and heading offset ``phi``."""
    den = _check_phi(phi)
    return (2 * np.sin(phi) * (R + np.cos(phi)) - 2 * x * np.cos(phi)) / den


def g_map(phi, x, h, k, R=1.0):
    return phi + h * k * tau_diff_closed_form(x, phi, R)


def contraction_numerator(phi, x, R=1.0):
    return (
        -2
        - 3 * R * np.cos(phi)
        + R * np.cos(3 * phi)
        + 3 * x * np.sin(phi)
        + x * np.sin(3 * phi)
    )


def g_prime(phi, x, h, k, R=1.0):
    """Exact derivative of :func:`g_map` with respect to ``phi``."""
    _check_phi(phi)
    c2 = np.cos(phi) ** 2 - np.sin(phi) ** 2
    return 1 + h * k * contraction_numerator(phi, x, R) / (c2 * c2)


def g_prime_printed(phi, x, h, k, R=1.0):
    """The published form ``1 + 2hk N / (cos^2 - sin^2)``.

    It shares the sign-carrying numerator ``N`` with :func:`g_prime` but is not
    the derivative of :func:`g_map`: at ``(0, 0)`` it gives ``1 - 8hk`` for
    ``R = 1`` where the true slope is ``1 - 4hk``.  Kept for comparison only.
    """
    _check_phi(phi)
    c2 = np.cos(phi) ** 2 - np.sin(phi) ** 2
    return 1 + 2 * h * k * contraction_numerator(phi, x, R) / c2


def iterate_heading_map(phi0: float, x: float, config: SampledConfig, n: int) -> np.ndarray:
    """Iterates ``phi_0 .. phi_n`` of the frozen-``x`` map.

    Raises :class:`DomainEscape` (carrying the iterates so far) as soon as an
    iterate leaves ``|phi| <= phi_max``.
    """
    if abs(phi0) > config.phi_max:
        raise DomainEscape(f"phi0={phi0} outside |phi| <= {config.phi_max}", np.array([phi0]))
    out = np.empty(n + 1)
    out[0] = phi0
    phi = phi0
    for i in range(1, n + 1):
        phi = float(g_map(phi, x, config.h, config.k, config.R))
        if not abs(phi) <= config.phi_max:
            out[i] = phi
            raise DomainEscape(f"iterate {i} ({phi:.6g}) left the map domain", out[: i + 1])
        out[i] = phi
    return out


def classify_iterates(phis: np.ndarray, tol: float = 1e-6) -> str:
    """``'converged'``, ``'oscillating'`` or ``'diverged'`` from a tail of iterates."""
    phis = np.asarray(phis, dtype=float)
    if phis.size == 0 or not np.all(np.isfinite(phis)):
        return "diverged"
    if abs(phis[-1]) < tol:
        return "converged"
    tail = np.abs(phis[len(phis) // 2 :])
    if tail.size >= 2 and tail[-1] > tail[0]:
        return "diverged"
    return "oscillating"


def _grid(x_max: float, phi_max: float, pitch: float):
    nx = int(round(2 * x_max / pitch)) + 1 if x_max > 0 else 1
    nphi = int(round(2 * phi_max / pitch)) + 1 if phi_max > 0 else 1
    xs = np.linspace(-x_max, x_max, nx)
    phis = np.linspace(-phi_max, phi_max, nphi)
    return np.meshgrid(xs, phis, indexing="ij")


def gprime_grid(h, k, R=1.0, x_max=None, phi_max=PHI_MAX, pitch=0.01):
    """``(X, PHI, G')`` on the rectangular grid ``|x| <= x_max``, ``|phi| <= phi_max``."""
    x_max = R if x_max is None else x_max
    X, P = _grid(x_max, phi_max, pitch)
    return X, P, g_prime(P, X, h, k, R)


def max_abs_gprime(h, k, R=1.0, x_max=None, phi_max=PHI_MAX, pitch=0.01) -> float:
    return float(np.max(np.abs(gprime_grid(h, k, R, x_max, phi_max, pitch)[2])))


def estimate_k_crit(
    h: float,
    R: float = 1.0,
    x_max: float | None = None,
    phi_max: float = PHI_MAX,
    pitch: float = 0.01,
    resolution: float = 1e-4,
) -> float:
    """Largest gain keeping ``max |g'| < 1`` on the grid, by bisection.

    ``resolution`` is relative to the bracket's lower end.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x_max = R if x_max is None else x_max
    X, P = _grid(x_max, phi_max, pitch)
    _check_phi(P)
    c2 = np.cos(P) ** 2 - np.sin(P) ** 2
    slope = contraction_numerator(P, X, R) / (c2 * c2)

    def contractive(k):
        return bool(np.max(np.abs(1 + h * k * slope)) < 1)

    lo, hi = 0.0, 1.0 / h
    while contractive(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > resolution * max(lo, resolution):
        mid = 0.5 * (lo + hi)
        if contractive(mid):
            lo = mid
        else:
            hi = mid
    return lo


class MapComparison(NamedTuple):
    gap: float
    drift_bound: float
    x_drift: float
    phi_map: np.ndarray
    phi_closed: np.ndarray
    x_closed: np.ndarray


def compare_map_to_closed_loop(
    x0: float, phi0: float, h: float, k: float, R: float = 1.0, n: int = 10, substeps: int = 50
) -> MapComparison:
    """Frozen-``x`` iterates against the sampled closed loop at the sample instants.

    The closed loop runs in normalized units with ``x`` co-evolving.
    ``drift_bound`` bounds ``|x(t_i) - x0|`` over the window by summing
    ``h * max|sin(phi)|`` per interval.
    """
    cam = CameraModel(f=1.0, delta=1.0, epsilon=1.0)
    world = CorridorWorld(R)
    cfg = SampledConfig(h=h, k=k, R=R)
    phi_map = iterate_heading_map(phi0, x0, cfg, n)
    pose = Pose(x0, 0.0, math.pi / 2 + phi0)
    dt = h / substeps
    phis = [phi0]
    xs = [x0]
    bound = 0.0
    for _ in range(n):
        u, _, _ = sample_hold_controller(pose, cam, world, k)
        start = pose.theta - math.pi / 2
        for _ in range(substeps):
            pose = rk4_step(pose, u, 1.0, dt)
        end = pose.theta - math.pi / 2
        bound += h * max(abs(math.sin(start)), abs(math.sin(end)))
        phis.append(end)
        xs.append(pose.x)
    phi_closed = np.array(phis)
    x_closed = np.array(xs)
    return MapComparison(
        gap=float(np.max(np.abs(phi_map - phi_closed))),
        drift_bound=bound,
        x_drift=float(np.max(np.abs(x_closed - x0))),
        phi_map=phi_map,
        phi_closed=phi_closed,
        x_closed=x_closed,
    )
