"""Almost-Poisson brackets for nonholonomic systems with gauge momenta."""

from nonholo._core import (
    Chaplygin,
    ConfigValueError,
    DegenerateFrameError,
    FloquetViolationError,
    OutOfChartError,
    Revolution,
    __version__,
)

__all__ = [
    "Chaplygin",
    "Revolution",
    "OutOfChartError",
    "DegenerateFrameError",
    "FloquetViolationError",
    "ConfigValueError",
    "__version__",
]
