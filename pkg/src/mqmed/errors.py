"""Exception types shared across the package."""


class MqmedError(Exception):
    """Base class for all package errors."""


class UnsupportedBathError(MqmedError):
    """Operation called with a bath family it does not support."""


class DegenerateInputError(MqmedError):
    """Input is structurally valid but carries no information (e.g. J == 0)."""


class UnitError(MqmedError):
    """Unknown unit or unit pair."""


class NonconvergenceError(MqmedError):
    """Half-line integral did not converge before the time cap.

    Carries the partial value and the time reached so callers can report
    the offending quantity.
    """

    def __init__(self, message, value=None, t_end=None):
        super().__init__(message)
        self.value = value
        self.t_end = t_end


class DimensionCapError(MqmedError):
    """Requested Hilbert-space dimension exceeds the configured cap."""


class TruncationTailError(MqmedError):
    """Thermal weight beyond the truncated basis is too large to trust."""


class MultipleSteadyStatesError(MqmedError):
    """Rate graph is reducible; lists the disconnected components."""

    def __init__(self, components):
        self.components = [sorted(c) for c in components]
        super().__init__(
            "rate graph is reducible; disconnected components: "
            + "; ".join(",".join(c) for c in self.components)
        )


class ConfigError(MqmedError):
    """Configuration document is malformed; message carries key/line context."""
