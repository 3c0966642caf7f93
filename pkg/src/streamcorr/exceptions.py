"""Exception types raised by streamcorr."""


class InputError(ValueError):
    """Bad observation data: NaN coordinates, malformed records, empty samples."""

    def __init__(self, message, index=None):
        if index is not None:
            message = f"record {index}: {message}"
        super().__init__(message)
        self.index = index


class SketchStateError(RuntimeError):
    """Inconsistent sketch bookkeeping, e.g. evicting from an empty cell."""
