"""Exception hierarchy for the P2PA solver."""


class P2PAError(Exception):
    """Base class for every error raised by this package."""


class NearZeroVector(P2PAError, ValueError):
    pass


class DegenerateVertex(P2PAError, ValueError):
    pass


class ParallelInputs(P2PAError, ValueError):
    pass


class IncongruentPairs(P2PAError, ValueError):
    pass


class CameraAtLandmark(P2PAError, ValueError):
    pass


class DegenerateDenominator(P2PAError, ValueError):
    pass


class BadIndexChoice(P2PAError, ValueError):
    pass


class SingularInput(P2PAError):
    """Raised when a singular configuration reaches code that needs a finite solution set."""

    def __init__(self, case):
        super().__init__(f"singular configuration: {case.value}")
        self.case = case


class NotCoaltitude(P2PAError, ValueError):
    pass


class MixedHemisphere(P2PAError, ValueError):
    pass


class NoIntersection(P2PAError, ValueError):
    pass


class TheoremViolation(P2PAError, AssertionError):
    """More solutions survived than the multiplicity bound allows. Always a bug."""


class ConfigInvalid(P2PAError, ValueError):
    pass


class SceneError(P2PAError, ValueError):
    """Malformed scene or config document."""
