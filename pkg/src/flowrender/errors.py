"""Exception types shared across the package.

The CLI maps these onto exit codes: validation problems exit 2, I/O and
parse problems exit 3, numerical divergence exits 4.
"""


class FlowRenderError(Exception):
    """Base class for every error raised by this package."""


class ShapeError(FlowRenderError, ValueError):
    pass


class EmptyInputError(FlowRenderError, ValueError):
    pass


class DomainError(FlowRenderError, ValueError):
    pass


class VocabularyError(FlowRenderError, ValueError):
    pass


class ContractError(FlowRenderError, ValueError):
    pass


class ConfigError(FlowRenderError, ValueError):
    pass


class FormatError(FlowRenderError, ValueError):
    """A file did not parse in the expected text format."""


class DivergenceError(FlowRenderError, ArithmeticError):
    """A loss or ODE state became non-finite."""

    def __init__(self, message, step):
        super().__init__(f"{message} (step {step})")
        self.step = step
