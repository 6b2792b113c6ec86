"""Exception types raised by the model, analysis and simulator layers."""


class WpaoiError(Exception):
    """Base class for every error raised by this package."""


class InvalidParam(WpaoiError, ValueError):
    def __init__(self, field, reason):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


class RelayPowerInfeasible(WpaoiError, ValueError):
    """The DF relay's processing cost leaves no energy for transmission."""


class DivideByZeroProb(WpaoiError, ZeroDivisionError):
    pass


class DomainError(WpaoiError, ValueError):
    pass


class ConvergenceError(WpaoiError, ArithmeticError):
    pass


class UnstableQueue(WpaoiError):
    """Mean service time of the relay queue is not below the mean interarrival time."""


class Diverged(WpaoiError):
    pass


class ConfigError(WpaoiError, ValueError):
    pass
