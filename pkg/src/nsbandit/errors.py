"""Exception types raised across the toolkit."""


class NsBanditError(Exception):
    pass


class SpecError(NsBanditError, ValueError):
    """Invalid generative-model parameters."""


class ConfigError(NsBanditError, ValueError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        prefix = ""
        if line is not None:
            prefix += f"line {line}: "
        if field is not None:
            prefix += f"{field}: "
        super().__init__(prefix + message)


class PolicyContractError(NsBanditError):
    """A policy returned something that is not a probability vector."""

    def __init__(self, message, timestep=None):
        self.timestep = timestep
        if timestep is not None:
            message = f"timestep {timestep}: {message}"
        super().__init__(message)


class BudgetError(NsBanditError):
    def __init__(self, what, required, budget):
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(f"{what} needs {self.required} states, budget is {self.budget}")


class ImpossibleObservationError(NsBanditError):
    """Observation has zero likelihood under the current belief."""


class UnrealizableError(NsBanditError):
    """The requested oracle process cannot be evaluated for this instance."""


class UnsupportedError(NsBanditError):
    pass


class PreconditionError(NsBanditError):
    pass


class ClassificationError(NsBanditError):
    def __init__(self, message, witness=None):
        self.witness = witness
        super().__init__(message)


class NumericalError(NsBanditError, ArithmeticError):
    pass
