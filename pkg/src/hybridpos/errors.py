"""Exception hierarchy shared across the package."""


class HybridPosError(Exception):
    """Base class for all errors raised by this package."""


class CoincidentPointsError(HybridPosError):
    """Two points that must be distinct are closer than the geometric epsilon."""


class InvalidSectorError(HybridPosError):
    """Beam codebook sector is empty or otherwise unusable."""


class DimensionMismatchError(HybridPosError):
    """Array/matrix dimensions of the supplied configs do not agree."""


class SingularCombinerError(HybridPosError):
    """Receive combiner Gram matrix W^H W is numerically singular."""


class QuadratureError(HybridPosError):
    """Numerical integration failed to reach the requested tolerance."""


class DegenerateBiasError(HybridPosError):
    """Clock-bias information is positive but too small to eliminate stably."""


class UnknownScenarioError(HybridPosError):
    """Requested built-in scenario name does not exist."""


class ScenarioParseError(HybridPosError):
    """Scenario file is not syntactically valid (carries location diagnostics)."""


class ScenarioValidationError(HybridPosError):
    """Scenario file parsed but violates the schema (names the offending field)."""


class IndexOutOfRangeError(HybridPosError, IndexError):
    """Subcarrier or anchor index outside the configured range."""
