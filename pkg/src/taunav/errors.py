"""Exception hierarchy shared by all taunav modules."""


class TauNavError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(TauNavError):
    pass


class BehindPinhole(GeometryError):
    """Feature is not strictly in front of the pinhole (d_fwd <= f)."""


class OutOfFov(GeometryError):
    """Projected image coordinate exceeds the camera's r_max."""


class Singular(GeometryError):
    """A denominator fell below the singularity tolerance."""


class TauError(TauNavError):
    pass


class ZeroSpeed(TauError):
    pass


class UndefinedAtFoE(TauError):
    """Image point sits at the focus of expansion: tau is 0/0."""


class StationaryImage(TauError):
    """Image velocity is numerically zero while the image point is not."""


class OutsideAdmissibleRegion(TauNavError):
    """Pose lies outside {|x| < R, |theta - pi/2| < pi/2 - atan(f) - margin}."""


class DomainEscape(TauNavError):
    """An iterate of the heading map left the map's domain."""

    def __init__(self, message, iterates=None):
        super().__init__(message)
        self.iterates = iterates


class EmptyField(TauNavError):
    pass


class WallStarved(TauNavError):
    """No usable tau estimate on one corridor wall."""

    def __init__(self, side):
        super().__init__(f"no usable tau estimate on the {side} wall")
        self.side = side


class ConfigError(TauNavError):
    pass


class AbortedOutsideRegion(TauNavError):
    """Simulation left the admissible region; ``record`` holds the partial run."""

    def __init__(self, message, record=None):
        super().__init__(message)
        self.record = record


class FeatureLost(TauNavError):
    """The designated feature left the field of view during a comparison run."""
