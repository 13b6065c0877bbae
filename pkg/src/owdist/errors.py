"""Exception hierarchy shared across the package.

Two families matter to the CLI exit-code contract: malformed external input
(exit code 2) and violated numeric contracts (exit code 3).
"""


class OwdistError(Exception):
    """Base class for all package errors."""


class InputFormatError(OwdistError):
    """An external file (CSV/JSON) could not be parsed or fails schema checks."""


class ContractError(OwdistError):
    """A numeric contract was violated (weights, metric axioms, bounds)."""


class AtomLimitError(ContractError):
    """The exact solver was asked for more atoms than its configured limit."""


class SolverCertificationError(ContractError):
    """An exact solve failed its optimality certificate; indicates a bug."""
