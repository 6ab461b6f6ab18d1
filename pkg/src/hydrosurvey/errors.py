"""Exception hierarchy shared by all hydrosurvey modules.

The CLI maps these onto process exit codes: configuration/parameter errors
exit 2, simulation failures exit 3, and data degeneracy exits 4.
"""


class HydroSurveyError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ConfigError(HydroSurveyError, ValueError):
    """Invalid configuration or parameter value."""

    exit_code = 2


class DomainError(ConfigError):
    """Coordinates outside the supported domain (e.g. near the poles)."""


class InvalidSpacingError(ConfigError):
    """Lane spacing is non-positive or wider than the surveyed extent."""


class DegenerateSegmentError(ConfigError):
    """A segment whose two endpoints coincide."""


class SimulationTimeout(HydroSurveyError):
    """The simulated vehicle failed to reach a waypoint in time."""

    exit_code = 3

    def __init__(self, waypoint_index, position, elapsed):
        self.waypoint_index = waypoint_index
        self.position = position
        self.elapsed = elapsed
        super().__init__(
            f"waypoint {waypoint_index} at ({position[0]:.2f}, {position[1]:.2f}) "
            f"not reached after {elapsed:.1f} s"
        )


class DataError(HydroSurveyError):
    """Problems with measured data rather than with configuration."""

    exit_code = 4


class ParseError(DataError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(where + message)


class OrderingError(ParseError):
    """Timestamps go backwards in a sensor log."""


class DegenerateInputError(DataError):
    """Too few or collinear points, or other input that admits no result."""


class EmptyInputError(DegenerateInputError):
    pass


class UndefinedCorrelationError(DataError):
    """Pearson correlation is undefined (constant series or < 2 pairs)."""
