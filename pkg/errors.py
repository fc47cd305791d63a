"""
Error types raised across the toolkit.

Argument problems raise plain ValueError; the classes below mark the cases
callers (and the CLI exit-code mapping) need to tell apart.
"""


class ToolkitError(Exception):
    """Base class for toolkit-specific failures."""


class UnsupportedModeError(ToolkitError, ValueError):
    """A method or coupling mode is not defined for the given spec."""


class DomainError(ToolkitError, ValueError):
    """An input lies outside the mathematical domain of an operation."""


class BoundaryCaseError(DomainError):
    """The input sits exactly on a regime boundary with no stated limit."""


class DegenerateError(ToolkitError):
    """A statistic collapsed (zero variance, empty fit) and cannot be used."""


class ConfigError(ToolkitError):
    """Configuration file failed validation.

    Attributes:
        problems: Every validation problem found, not just the first
    """

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__(
            f"{len(problems)} configuration problem(s):\n" + "\n".join(f"  - {p}" for p in problems)
        )
