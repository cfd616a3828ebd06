"""Exception hierarchy shared across the package.

Everything raised on purpose derives from :class:`MulticohError`, so callers
(and the CLI) can separate model-level failures from genuine bugs or I/O
problems.
"""


class MulticohError(Exception):
    """Base class for all errors raised by multicoh."""


class ValidityError(MulticohError, ValueError):
    """A probability table, moment vector or matrix violates its contract."""


class AdmissibilityError(MulticohError, ValueError):
    """A correlation or joint moment lies outside its feasible range."""


class DegenerateMarginalError(MulticohError, ValueError):
    """An operation needs a non-degenerate marginal (p strictly in (0,1))."""


class MechanismError(MulticohError, ValueError):
    """A sampling mechanism is incompatible with the supplied model."""


class FormatError(MulticohError, ValueError):
    """A file or configuration document does not follow its format."""
