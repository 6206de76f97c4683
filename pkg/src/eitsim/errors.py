"""Exception types shared across the simulator."""


class EitsimError(Exception):
    """Base class for all simulator errors."""


class EmptySector(EitsimError):
    """No occupation tuple satisfies the requested basis constraints."""


class NotHermitian(EitsimError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


class BasisMismatch(EitsimError):
    """Operands are attached to different or incompatible bases."""


class CutoffTooSmall(EitsimError):
    """The requested state does not fit inside the truncated basis."""


class DimensionOverflow(EitsimError):
    """The requested basis exceeds the configured size limit."""


class StepTooLarge(EitsimError):
    """Integrator norm drift exceeded its bound; reduce the time step."""


class ProfileNotClosing(EitsimError):
    """The control sweep does not reach the required mixing-angle endpoint."""


class ConfigError(EitsimError):
    """Invalid run configuration."""
