"""Exception types raised across the package.

Every error derives from :class:`XYZBetheError` so callers (notably the CLI)
can separate numerical/construction failures from programming errors.
"""


class XYZBetheError(Exception):
    pass


class InvalidModulus(XYZBetheError, ValueError):
    pass


class TruncationOverflow(XYZBetheError):
    pass


class PoleCollision(XYZBetheError, ZeroDivisionError):
    pass


class GaugeSingularity(XYZBetheError):
    pass


class DimensionOverflow(XYZBetheError, ValueError):
    pass


class DimensionMismatch(XYZBetheError, ValueError):
    pass


class SingularMatrix(XYZBetheError, ZeroDivisionError):
    pass


class InvalidParameters(XYZBetheError, ValueError):
    pass


class RootCountMismatch(XYZBetheError):
    pass


class TwinPairingFailure(XYZBetheError):
    pass


class DerivativeSingularity(XYZBetheError, ZeroDivisionError):
    pass


class DegenerateNormalization(XYZBetheError, ZeroDivisionError):
    pass


class EvaluationPointSingular(XYZBetheError):
    pass
