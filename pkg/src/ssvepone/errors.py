"""Exception type carrying machine-readable error codes."""


class ToolkitError(Exception):
    """Raised on contract violations.

    `code` is a stable kebab-case identifier (e.g. "window-out-of-range")
    suitable for machine consumption; the message is for humans.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code

    def __str__(self) -> str:
        return f"{self.code}: {super().__str__()}"
