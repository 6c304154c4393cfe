"""Common exception base for the toolkit.

Every module defines its own specific exception types; they all derive
from SrlkitError so callers (notably the CLI) can distinguish data and
validation problems from genuine bugs.
"""


class SrlkitError(Exception):
    """Base class for all toolkit-level errors."""
