"""Exception types shared across the package."""


class FramingError(ValueError):
    """A sample stream is too short or its lengths do not line up."""
