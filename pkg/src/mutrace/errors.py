"""Exception types shared across the pipeline."""


class MutraceError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(MutraceError):
    """Source text could not be parsed or validated.

    Carries the 1-based position of the offending token and a short
    description of what was expected.
    """

    def __init__(self, message, line, column):
        super().__init__("%d:%d: %s" % (line, column, message))
        self.message = message
        self.line = line
        self.column = column


class StaleMutant(MutraceError):
    """A mutant was applied against a file that changed since generation."""


class BundleError(MutraceError):
    """A history bundle failed validation."""


class MissingManifest(BundleError):
    pass


class InvalidManifest(BundleError):
    pass


class NonMonotonicTimestamps(BundleError):
    pass


class ParseFailure(BundleError):
    def __init__(self, path, line, message):
        super().__init__("%s:%s: %s" % (path, line, message))
        self.path = path
        self.line = line


class BrokenSuite(BundleError):
    def __init__(self, revision_index, message):
        super().__init__("revision %d: %s" % (revision_index, message))
        self.revision_index = revision_index


class IndexOrder(MutraceError):
    """A revision-index pair was given out of order."""


class NotLatent(MutraceError):
    """Reveal categories only exist for latent traces."""


class UntraceableLine(MutraceError):
    """A mutated line has no statement node to trace through history."""


class DegenerateData(MutraceError):
    """Training data contains a single class."""


class TooFewRows(MutraceError):
    """Not enough rows for the requested cross-validation split."""
