"""Exception hierarchy.

Errors fall in two groups: evaluation-domain errors (a field point sits on a
source, a charge is inside the solenoid, ...) and scene/geometry errors (the
input itself is malformed or asymmetric). The CLI maps the first group to
exit code 3 and the second to exit code 2.
"""


class ABMError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ABMError, ValueError):
    """A quantity was requested at a point where it is not defined."""


class NonFiniteField(DomainError):
    pass


class OnSurface(DomainError):
    pass


class TooCloseToWire(DomainError):
    pass


class TooCloseToFilament(DomainError):
    pass


class SamePoint(DomainError):
    pass


class ZeroSeparation(DomainError):
    pass


class ChargeInsideSolenoid(DomainError):
    pass


class InsideSolenoid(DomainError):
    pass


class SceneError(ABMError, ValueError):
    """The scene or its discretization violates a precondition."""


class DegenerateGeometry(SceneError):
    pass


class GeometryMismatch(SceneError):
    pass


class UnpairableDiscretization(SceneError):
    pass


class AsymmetricScene(SceneError):
    pass


class EndpointMismatch(SceneError):
    pass


class InvalidGauge(SceneError):
    pass


class StepTooLarge(SceneError):
    pass
