"""Exception hierarchy shared across the package.

Contract violations (bad arguments, malformed input files) derive from
ValueError so ordinary argument checking idioms still apply.  Resource and
numeric failures derive from RuntimeError because they describe conditions
discovered mid-computation rather than bad call signatures.
"""


class ContractError(ValueError):
    """An argument or state violated a documented precondition."""


class SchemaError(ValueError):
    """A data file did not match the expected tabular schema."""


class ResourceLimitError(RuntimeError):
    """A requested simulation exceeds the configured memory ceiling."""


class TruncationError(RuntimeError):
    """A truncated-basis operation lost more norm than the tolerance allows."""


class DivergenceError(RuntimeError):
    """A numeric computation produced non-finite values."""
