"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the region where a quantity is defined."""


class IntegrationError(RuntimeError):
    """The integrator could not continue (step-size underflow).

    ``last_state`` holds the final accepted state, when one exists.
    """

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state
