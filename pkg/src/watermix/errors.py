"""Exception types shared across the package."""


class WatermixError(Exception):
    """Base class for all package errors."""


class DomainError(WatermixError):
    """An argument is outside the mathematical domain of an operation."""


class ValidationError(WatermixError):
    """Input data violates a structural invariant (shape, completeness, range)."""


class ParseError(WatermixError):
    """A data file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InversionError(DomainError):
    """Kubelka-Munk inversion failed on one or more channels."""

    def __init__(self, message, channel=None):
        if channel is not None:
            message = f"channel {channel}: {message}"
        super().__init__(message)
        self.channel = channel


class NotReadyError(WatermixError):
    """A required artifact (model, LUT, corpus) is not loaded or missing."""


class TrainingDivergedError(WatermixError):
    """Training hit a non-finite loss; carries the last finite checkpoint."""

    def __init__(self, epoch, last_good=None):
        super().__init__(f"non-finite loss at epoch {epoch}; aborting with last good weights")
        self.epoch = epoch
        self.last_good = last_good
