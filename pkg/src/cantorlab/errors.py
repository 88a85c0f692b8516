"""Exception hierarchy. The CLI maps these onto exit codes."""


class CantorlabError(Exception):
    exit_code = 5


class ConfigError(CantorlabError, ValueError):
    exit_code = 2


class ModelInvalid(CantorlabError, ValueError):
    """A length function that does not define a Cantor construction."""

    exit_code = 3


class DomainError(CantorlabError, ValueError):
    exit_code = 2


class PrecondFailed(CantorlabError, ValueError):
    exit_code = 3


class UnsupportedModel(CantorlabError, TypeError):
    exit_code = 2


class UnsupportedPrefix(CantorlabError, ValueError):
    exit_code = 2


class TooLarge(CantorlabError, RuntimeError):
    """Resource guard tripped (enumeration would exceed the leaf budget)."""

    exit_code = 4


class DepthExceeded(CantorlabError, RuntimeError):
    exit_code = 4


class DeltaTooLarge(CantorlabError, ValueError):
    exit_code = 2


class InvariantViolation(CantorlabError, AssertionError):
    exit_code = 5
