"""Exception hierarchy shared by the library and the CLI.

The CLI maps each class to a distinct process exit code, so library code
should raise the most specific class that applies.
"""


class HyperdiffError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(HyperdiffError):
    """Malformed configuration: unknown keys, unparsable values, bad tags."""

    exit_code = 2


class PreconditionError(HyperdiffError):
    """An operation's stated precondition does not hold for the inputs."""

    exit_code = 3


class CapExhausted(HyperdiffError):
    """A bounded scan ran out of candidates; signals the sweep bound, not a refutation."""

    exit_code = 4

    def __init__(self, message, *, step=None, condition=None):
        super().__init__(message)
        self.step = step
        self.condition = condition


class InvariantViolation(HyperdiffError):
    """An internal identity or certified inequality failed; indicates a bug or bad data."""

    exit_code = 5
