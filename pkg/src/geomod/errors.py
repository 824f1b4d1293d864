"""Exception types raised by geomod."""


class GeomodError(Exception):
    """Base class for all geomod errors."""


class ParseError(GeomodError, ValueError):
    """Malformed input file. Carries the offending line number when known."""

    def __init__(self, message, path=None, lineno=None):
        self.path = path
        self.lineno = lineno
        where = ""
        if path is not None:
            where = f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)


class DomainError(GeomodError, ValueError):
    pass


class UndefinedScoreError(GeomodError, ValueError):
    """Modularity is undefined (graph has zero total weight)."""


class DegenerateCentroidError(GeomodError, ValueError):
    pass


class NodeNotFoundError(GeomodError, KeyError):
    pass


class SizeLimitError(GeomodError, ValueError):
    pass


class ConsistencyError(GeomodError, ValueError):
    """Two inputs that must describe the same node set do not."""
