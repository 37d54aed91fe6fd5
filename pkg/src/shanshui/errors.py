"""Exception types shared across the package."""


class ShanshuiError(Exception):
    """Base class for package-specific failures."""


class FormatError(ShanshuiError):
    """A file's contents do not match the expected format."""


class DomainError(ShanshuiError, ValueError):
    """An argument is outside the operation's domain."""


class ShapeError(ShanshuiError, ValueError):
    """Tensor or image dimensions violate an operation's contract."""


class TrainingError(ShanshuiError):
    """Training produced a non-finite loss or otherwise cannot continue."""


class CheckpointError(FormatError):
    """A checkpoint file is corrupt, incompatible, or mismatched."""
