"""Error types shared across the library.

PreconditionError marks rejected inputs: bad shapes, out-of-range
arguments, violated theorem hypotheses. NumericalError marks failures of
the numerics themselves, such as divergent integration or a solve whose
residual cannot be trusted. The CLI maps the two to distinct exit codes.
"""


class PreconditionError(ValueError):
    """An input violates a documented precondition."""


class NumericalError(RuntimeError):
    """A numerical routine failed to produce a trustworthy result."""
