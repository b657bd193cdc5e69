"""Exception hierarchy.

Every error carries an ``exit_code`` so the CLI can map failures to distinct
process exit statuses without a lookup table.
"""

EXIT_OK = 0
EXIT_MODEL_ERROR = 1
EXIT_CONFIG_INVALID = 2
EXIT_TRUNCATION_INADEQUATE = 3
EXIT_NEAR_DEFECTIVE = 4
EXIT_NO_CANDIDATE = 5
EXIT_PROBABILITY_UNDERFLOW = 6


class ZenoError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = EXIT_MODEL_ERROR


class InvalidDimension(ZenoError, ValueError):
    pass


class DimensionCapExceeded(ZenoError, ValueError):
    pass


class DimensionMismatch(ZenoError, ValueError):
    pass


class DegenerateVector(ZenoError, ValueError):
    pass


class IndexOutOfRange(ZenoError, IndexError):
    pass


class InvalidState(ZenoError, ValueError):
    """A matrix that should be a density matrix (or a normalized ket) is not."""


class InvalidParameter(ZenoError, ValueError):
    pass


class InvalidTemperature(InvalidParameter):
    pass


class DegenerateDelta(InvalidParameter):
    """g = 0 together with Omega = omega leaves delta = 0."""


class TruncationInadequate(ZenoError, ValueError):
    exit_code = EXIT_TRUNCATION_INADEQUATE


class FactorizationSingular(ZenoError, ArithmeticError):
    """The propagator factorization breaks down (A diverges)."""


class FixedPointSingular(ZenoError, ArithmeticError):
    """1 - exp(-C) vanishes, so the coherent closed form is 0/0."""


class NearDefective(ZenoError, ArithmeticError):
    exit_code = EXIT_NEAR_DEFECTIVE


class ProbabilityUnderflow(ZenoError, ArithmeticError):
    exit_code = EXIT_PROBABILITY_UNDERFLOW


class AsymptoticsUndefined(ZenoError, ArithmeticError):
    pass


class NoCandidate(ZenoError, ValueError):
    exit_code = EXIT_NO_CANDIDATE


class ConfigInvalid(ZenoError, ValueError):
    exit_code = EXIT_CONFIG_INVALID
