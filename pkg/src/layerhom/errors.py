"""Exception hierarchy.

``ValidationError`` subclasses flag invariant violations in inputs,
``SolverError`` subclasses flag numerical failures. The CLI maps these
families onto distinct exit codes.
"""


class LayerhomError(Exception):
    pass


class ConfigParse(LayerhomError):
    pass


class ValidationError(LayerhomError):
    pass


class GapViolation(ValidationError):
    pass


class BoundaryViolation(ValidationError):
    pass


class ThicknessViolation(ValidationError):
    pass


class WindowTooSmall(ValidationError):
    pass


class BadModelParams(ValidationError):
    pass


class UnresolvedLayer(ValidationError):
    pass


class UnsupportedScaling(ValidationError):
    pass


class RegimeMismatch(ValidationError):
    pass


class ConstraintConflict(ValidationError):
    pass


class NotPeriodic(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class InsufficientEpsilons(ValidationError):
    pass


class DegenerateField(ValidationError):
    pass


class SolverError(LayerhomError):
    pass


class SolveFailure(SolverError):
    pass


class NonFiniteState(SolverError):
    pass
