"""Time-to-transit (tau) steering of a planar unicycle with a 1-D pinhole camera."""

from .errors import (
    AbortedOutsideRegion,
    BehindPinhole,
    ConfigError,
    DomainEscape,
    EmptyField,
    FeatureLost,
    OutOfFov,
    OutsideAdmissibleRegion,
    Singular,
    StationaryImage,
    TauNavError,
    UndefinedAtFoE,
    WallStarved,
    ZeroSpeed,
)
from .geometry import (
    BodyFrameCoords,
    CameraModel,
    CorridorWorld,
    FeaturePoint,
    Pose,
    image_velocity,
    inverse_project_left,
    inverse_project_right,
    project,
    to_body_frame,
)
from .kinematics import arc_pose, rk4_step
from .perception import (
    TauReading,
    finite_difference_tau,
    geometric_tau,
    perceived_tau,
    quasilinear_tau_star,
)
from .sampled import (
    SampledConfig,
    estimate_k_crit,
    g_map,
    g_prime,
    iterate_heading_map,
    sample_hold_controller,
    tau_diff_closed_form,
)
from .sim import SimConfig, TrajectoryRecord, convergence_metrics, run
from .steering import (
    SteeringLaw,
    predicted_limits,
    steering_balance,
    steering_weighted,
    tau_pair_eulerian,
)

__version__ = "0.1.0"
