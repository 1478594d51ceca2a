"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Array shapes do not agree (signal length vs. ensemble, M vs. intensities)."""


class CertificateError(ValueError):
    """A concentration constant is out of range or the certificate is not valid."""


class NumericalError(RuntimeError):
    """Base class for failures the CLI maps to exit code 3."""


class PowerIterationError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DivergenceError(NumericalError):
    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class ParseError(ValueError):
    """Malformed signal/ensemble/config file. ``lineno`` is 1-based."""

    def __init__(self, message, path=None, lineno=None):
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
        self.path = path
        self.lineno = lineno
