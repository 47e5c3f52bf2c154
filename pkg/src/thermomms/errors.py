"""Exception hierarchy."""


class ThermoMMSError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(ThermoMMSError, ValueError):
    pass


class AssemblyError(ThermoMMSError):
    pass


class ModelError(ThermoMMSError):
    """An assembled or reduced model violates a structural requirement."""


class RigidBodyModeError(ModelError):
    """The structural stiffness is singular after boundary conditions."""


class MetricError(ThermoMMSError):
    """A matrix used as eigenproblem metric is not positive definite."""


class CapacityError(ThermoMMSError):
    pass


class ClassificationError(ThermoMMSError):
    pass


class StiffnessError(ThermoMMSError):
    """Adaptive step size underflowed."""


class ConfigError(ThermoMMSError):
    pass
