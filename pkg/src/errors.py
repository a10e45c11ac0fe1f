"""
Exception hierarchy for the extension verification toolkit.
"""


class ExtensionVerifyError(Exception):
    """Base class for all toolkit errors"""


class ValidationError(ExtensionVerifyError, ValueError):
    """A precondition of an operation was violated"""


class DimensionCapError(ValidationError):
    """Exact enumeration was requested above the supported dimension"""


class DominationError(ValidationError):
    """A supplied operator does not dominate the operator it should"""


class ConfigError(ExtensionVerifyError):
    """Malformed configuration; `key` names the offending dotted key"""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key

