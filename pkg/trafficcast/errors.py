class TrafficcastError(ValueError):
    """Base class for every error raised by the forecast engine"""


class ParameterError(TrafficcastError):
    pass


class InsufficientDataError(TrafficcastError):
    pass


class ConvergenceError(TrafficcastError):
    """Raised when a fit exhausts its iteration budget"""

    def __init__(self, message, best_params=None, residual_norm=None):
        super().__init__(message)
        self.best_params = best_params
        self.residual_norm = residual_norm


class DegenerateInputError(TrafficcastError):
    pass


class ModelError(TrafficcastError):
    pass


class DegeneratePatternError(TrafficcastError):
    pass


class InconsistentAreaError(TrafficcastError):
    pass


class InconsistentParametersError(TrafficcastError):
    pass


class DomainError(TrafficcastError):
    pass


class ConfigError(TrafficcastError):
    """Carries every validation message found, not just the first"""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class GoldenFileError(TrafficcastError):
    pass
