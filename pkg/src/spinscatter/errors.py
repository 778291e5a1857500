"""Error types shared across the package.

Bad user input raises plain ValueError.  InternalFaultError marks a broken
internal invariant (solver residual, flux conservation): it should never
fire on valid input, and the CLI maps it to a distinct exit status.
"""


class InternalFaultError(RuntimeError):
    """An internal numeric invariant failed; results cannot be trusted."""
