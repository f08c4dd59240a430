"""
Error hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI maps it to.
"""


class NullRigError(Exception):
    exit_code = 3


class ConfigurationError(NullRigError):
    """Unknown example, unsupported classification, malformed flags or config file."""

    exit_code = 2


class UnsupportedError(NullRigError):
    """The requested operation is not defined for this input."""

    exit_code = 2


class NumericalError(NullRigError):
    exit_code = 3


class DegeneracyError(NumericalError):
    """A metric that must be nondegenerate is singular at the point."""


class ContradictionError(DegeneracyError):
    """The rigged metric came out degenerate, which signals an invalid frame."""


class SignatureError(NumericalError):
    pass


class ImmersionError(NumericalError):
    pass


class NotNullError(NumericalError):
    pass


class RechartError(NumericalError):
    """Rank or pivot pattern is not locally constant around the point."""


class ScreenSelectionError(NumericalError):
    pass


class TransversalConstructionError(NumericalError):
    pass


class EvaluationError(NumericalError):
    pass
