"""Exception hierarchy shared by all nhvi modules."""


class NhviError(Exception):
    """Base class for all errors raised by this package."""


class EvaluationFailure(NhviError):
    """A user-supplied map returned NaN/Inf during a numeric evaluation."""


class SingularJacobian(NhviError):
    """Linear solve inside Newton failed even after Tikhonov regularization."""


class NewtonFailure(NhviError):
    """An implicit solve did not converge; carries context about the step."""

    def __init__(self, message, k=None, t=None, residual_norm=None, phase=None):
        super().__init__(message)
        self.k = k
        self.t = t
        self.residual_norm = residual_norm
        self.phase = phase


class NotOnBoundary(NhviError):
    """A boundary frame was requested at a point off the collision surface."""


class DegenerateFrame(NhviError):
    """Tangent basis / projection pair failed the left-inverse check."""


class PoleSingularity(NhviError):
    """Spherical-coordinate state too close to a pole (degenerate metric)."""


class InvalidInitialState(NhviError):
    """Discretized initial configurations left the admissible set."""


class AlphaOutOfRange(NhviError):
    """Impact fraction solved outside the open interval (0, 1)."""


class PersistentPenetration(NhviError):
    """Post-impact state still penetrates after a retry; aborting the run."""


class RootSelectionAmbiguous(NhviError):
    """Energy-matching solve converged to a root that does not re-enter the
    admissible set."""


class SchemaError(NhviError):
    """Configuration file violates the documented schema."""

    def __init__(self, message, key_path=""):
        self.key_path = key_path
        super().__init__(f"{key_path}: {message}" if key_path else message)


class DimensionMismatch(NhviError):
    """Vector lengths inconsistent with the model dimensions."""
