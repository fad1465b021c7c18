"""Exception hierarchy shared across the package.

The CLI maps these classes onto process exit codes, so new error types
should subclass the closest existing family rather than raising bare
ValueError/OSError from library code.
"""


class VnshotError(Exception):
    """Base class for all errors raised by this package."""


class IngestError(VnshotError):
    """Base class for frame-acquisition failures."""


class DecoderNotFoundError(IngestError):
    """The external decoder (or probe) executable could not be executed."""


class DecodeFailedError(IngestError):
    """The decoder ran but produced an error or malformed output."""


class EmptyVideoError(IngestError):
    """Decoding succeeded but yielded zero frames."""


class EmptyDirectoryError(IngestError):
    """A directory input contains no readable image files."""


class UnreadableImageError(IngestError):
    """An image file exists but cannot be decoded."""


class DimensionMismatchError(VnshotError, ValueError):
    """An array does not have the shape an operation requires."""


class EmptyRasterError(VnshotError, ValueError):
    """A raster with zero pixels was passed where content is required."""


class EmptySequenceError(VnshotError, ValueError):
    """A frame sequence with zero frames was passed."""


class CorruptCacheError(VnshotError):
    """A similarity-matrix cache file failed magic/length/checksum checks."""


class EntropyDomainError(VnshotError, ValueError):
    """An input lies provably outside the domain of an entropy routine."""


class InvalidRangeError(VnshotError, ValueError):
    """An index or index range is out of bounds for its matrix/sequence."""


class GroundTruthParseError(VnshotError, ValueError):
    """A ground-truth or prediction file is not valid JSON."""


class SchemaViolationError(VnshotError, ValueError):
    """A ground-truth or prediction file parses but violates its schema."""
