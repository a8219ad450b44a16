"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid parameters or an infeasible experiment/environment setup."""

    def __init__(self, message, key=None):
        self.key = key
        if key is not None:
            message = f"{key}: {message}"
        super().__init__(message)


class ContractError(ValueError):
    """Array shapes or arguments violate an operation's preconditions."""


class DomainError(ValueError):
    """Argument outside the mathematical domain of a function."""


class NumericalError(ArithmeticError):
    pass


class SimulationFault(RuntimeError):
    """A simulated state became non-finite."""

    def __init__(self, message, lane=None, step=None):
        self.lane = lane
        self.step = step
        super().__init__(message)


class IntegrityError(ValueError):
    """A serialized snapshot failed its checksum or could not be decoded."""


class EvaluationError(RuntimeError):
    def __init__(self, message, sample=None):
        self.sample = sample
        super().__init__(message)
