class BackwaveError(Exception):
    """
    Base class for all errors raised by backwave.

    Carries a machine-readable category and the CLI exit code for that category.
    """
    category = "error"
    exit_code = 1

    def __init__(self, message: str, **details) -> None:
        super().__init__(message)
        self.details = details


class ConfigError(BackwaveError, ValueError):
    """Raised when a configuration or data file is missing, malformed or inconsistent."""
    category = "config"
    exit_code = 2


class InvalidModel(ConfigError):
    """Raised when Sellmeier coefficients are missing, unknown or non-finite."""
    category = "invalid_model"


class MissingCalibration(ConfigError):
    """Raised when neither a rate-per-watt calibration nor an explicit kappa1 is given."""
    category = "missing_calibration"


class UnsupportedSetting(ConfigError):
    """Raised for settings that are recognized but not supported, e.g. crystal temperature."""
    category = "unsupported"


class PhysicsError(BackwaveError, ValueError):
    """Raised when a computation leaves the physical domain of the model."""
    category = "physics"
    exit_code = 3


class OutOfRange(PhysicsError):
    """Raised when a wavelength falls outside the valid range of a dispersion model."""
    category = "out_of_range"


class NonPositiveDenominator(PhysicsError):
    """Raised when the k-vector combination for a poling period is not positive."""
    category = "non_positive_denominator"


class DegenerateForward(PhysicsError):
    """Raised when the forward group-velocity mismatch vanishes and the linear expansion fails."""
    category = "degenerate_forward"


class ZeroDecay(PhysicsError):
    """Raised when a cavity has no decay (perfect mirrors, no loss)."""
    category = "zero_decay"


class NoPositiveRoot(PhysicsError):
    """Raised when neither cluster-spacing quadratic has a positive root."""
    category = "no_positive_root"


class IncompatibleNormalization(PhysicsError):
    """Raised when two reports are compared at different pump powers."""
    category = "incompatible_normalization"


class InvalidDuration(PhysicsError):
    """Raised when an event stream duration is not positive and finite."""
    category = "invalid_duration"


class EmptyStream(PhysicsError):
    """Raised when a coincidence histogram is requested for a stream without events."""
    category = "empty_stream"


class VerificationError(BackwaveError, RuntimeError):
    """Raised when a numerical oracle disagrees with the closed-form model."""
    category = "verification"
    exit_code = 4


class NotConverged(VerificationError):
    """Raised when a seeded cavity run does not reach steady state."""
    category = "not_converged"


class ShootingDiverged(VerificationError):
    """Raised when the shooting solution of the spatial boundary-value problem breaks down."""
    category = "shooting_diverged"


class ToleranceExceeded(VerificationError):
    """Raised by --verify when a check exceeds its tolerance."""
    category = "tolerance_exceeded"


class GainTooLargeWarning(UserWarning):
    """Emitted when the small-gain approximation is pushed beyond its comfortable range."""


class PurityWarning(UserWarning):
    """Emitted when the pair rate is not small compared to the inverse coherence time."""


class IoError(ConfigError):
    """Raised when an artifact cannot be written to the output directory."""
    category = "io_error"
