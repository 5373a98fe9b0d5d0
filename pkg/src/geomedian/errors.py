"""Exception hierarchy; exit_code is what the CLI returns for each class."""


class GeomedianError(Exception):
    exit_code = 1


class ConfigError(GeomedianError):
    """Invalid parameters or an infeasible configuration."""

    exit_code = 2


class DataError(GeomedianError):
    """Bad observations: non-finite values, wrong arity, empty input."""

    exit_code = 3


class InputOutputError(GeomedianError):
    exit_code = 4


class NumericalError(GeomedianError):
    """A numerical routine failed to converge or is undefined."""

    exit_code = 5


class DimensionMismatchError(DataError):
    pass


class SingularPointError(NumericalError):
    """Evaluation point coincides with a sample point."""
