class BallMapperError(Exception):
    """Base class for errors raised by this package."""


class DataError(BallMapperError, ValueError):
    """Input data failed validation (bad column, empty result, bad value...)."""


class CSVFormatError(DataError):
    """A CSV file could not be parsed; ``line`` is the 1-based file line."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MismatchError(DataError):
    """A graph file was not built from the supplied point cloud."""
