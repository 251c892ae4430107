"""Exception types shared across the package."""


class PlaceplanError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PlaceplanError):
    """A file or byte stream does not match its expected format."""


class ConfigError(PlaceplanError):
    """A configuration mapping is missing required keys or holds bad values."""


class ParamError(PlaceplanError):
    """Robot parameters are inconsistent or geometrically degenerate."""


class GeometryError(PlaceplanError):
    """A geometric construction is undefined for the given inputs."""


class EmptySetError(PlaceplanError):
    """An operation requiring a nonempty candidate set received an empty one."""


class RangeError(PlaceplanError):
    """An index or coordinate lies outside its valid range."""


class FormatError(PlaceplanError):
    """An unsupported output format was requested."""
