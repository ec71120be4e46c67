"""Exception types.

Every error carries a short machine-readable ``code`` so that the CLI and the
trajectory writer can report it without string matching.
"""


class GeometryError(ValueError):
    code = "geometry-error"

    def __init__(self, message="", **info):
        super().__init__(message or self.code)
        self.info = info


class InvalidRadius(GeometryError):
    code = "invalid-radius"


class NonConvexSphere(GeometryError):
    code = "non-convex-sphere"


class InvalidProfile(GeometryError):
    code = "invalid-profile"


class LostStarshapedness(GeometryError):
    code = "lost-starshapedness"


class CorruptProfile(GeometryError):
    code = "corrupt-profile"


class OriginEscape(GeometryError):
    code = "origin-escape"


class RecenterFailure(GeometryError):
    code = "recenter-failure"


class NoBall(GeometryError):
    code = "no-ball"


class NotStrictlyInterior(GeometryError):
    code = "not-strictly-interior"


class ConfigInfeasible(GeometryError):
    code = "config-infeasible"


class BoundViolation(GeometryError):
    code = "bound-violation"


class EquatorCrossing(GeometryError):
    code = "equator-crossing"


class NotConvex(GeometryError):
    code = "not-convex"


class NotMeanConvex(GeometryError):
    code = "not-mean-convex"


class OutOfCone(GeometryError):
    code = "out-of-cone"


class FitFailed(GeometryError):
    code = "fit-failed"


class SolveFailed(GeometryError):
    code = "solve-failed"


class DualityFailed(GeometryError):
    code = "duality-failed"


class AlreadyConverged(GeometryError):
    code = "already-converged"


# Terminal flow events. ``step`` raises them, ``run`` records them.

class FlowEvent(RuntimeError):
    code = "flow-event"

    def __init__(self, message="", **info):
        super().__init__(message or self.code)
        self.info = info


class StopNonconvex(FlowEvent):
    code = "stop-nonconvex"


class NeedsRecenter(FlowEvent):
    code = "needs-recenter"


class StiffBlowup(FlowEvent):
    code = "stiff-blowup"
