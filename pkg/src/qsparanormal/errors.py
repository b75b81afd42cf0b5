"""Exception types raised by the library."""


class OperatorError(Exception):
    """Base class for every error raised by qsparanormal."""


class NotHermitian(OperatorError, ValueError):
    pass


class NotPsd(OperatorError, ValueError):
    pass


class SpectraOverlap(OperatorError, ValueError):
    """The Sylvester equation has no unique solution: the spectra meet."""


class NonPositiveMu(OperatorError, ValueError):
    pass


class UnsupportedClass(OperatorError, ValueError):
    pass


class NotInvariant(OperatorError, ValueError):
    pass


class NotInvertible(OperatorError, ValueError):
    pass


class NotNilpotent(OperatorError, ValueError):
    pass


class ParameterError(OperatorError, ValueError):
    pass


class InputFormatError(OperatorError, ValueError):
    """Malformed matrix or weight JSON.

    ``path`` is the file (or ``None`` for in-memory data) and ``field``
    names the offending JSON field.
    """

    def __init__(self, message, path=None, field=None):
        self.message = message
        self.path = path
        self.field = field
        where = []
        if path is not None:
            where.append(str(path))
        if field is not None:
            where.append(f"field {field!r}")
        prefix = ": ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)
