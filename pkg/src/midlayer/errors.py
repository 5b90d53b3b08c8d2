"""Exception types shared across the package.

The CLI maps these onto exit codes: ``ParameterError`` and ``ValidationError``
exit with 2, ``ResourceLimitError`` with 3, ``ConsistencyError`` with 4.
"""


class MidlayerError(Exception):
    """Base class for all package errors."""


class ParameterError(MidlayerError, ValueError):
    """An argument is outside the supported domain."""


class ValidationError(MidlayerError, ValueError):
    """An input object violates a required property (e.g. an improper coloring)."""


class ResourceLimitError(MidlayerError):
    """A computation would exceed a configured enumeration cap.

    ``estimate`` carries the quantity that tripped the cap, when known.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class ConsistencyError(MidlayerError, AssertionError):
    """Two routes that must agree exactly did not."""
