"""Exception hierarchy shared across the package.

The CLI maps these onto distinct process exit codes, so new error types
should subclass one of the categories below rather than raising bare
exceptions.
"""


class CogmimoError(Exception):
    """Base class for all package errors."""


class DomainError(CogmimoError, ValueError):
    """A value is outside the physical or mathematical domain of an operation."""


class ConfigError(CogmimoError):
    """A configuration file or parameter set failed validation."""


class OrthogonalityError(DomainError):
    """Requested waveform set cannot be orthogonal (more waveforms than samples)."""


class AssemblyError(CogmimoError):
    """Base class for multiplexed-submatrix assembly failures."""


class MissingBlockError(AssemblyError):
    """A submatrix required by the multiplexing schedule was not supplied."""


class AssemblyConsistencyError(AssemblyError):
    """Measured entries sharing an anti-diagonal disagree beyond tolerance."""

    def __init__(self, max_discrepancy: float, tolerance: float):
        self.max_discrepancy = max_discrepancy
        self.tolerance = tolerance
        super().__init__(
            f"anti-diagonal consistency violated: max discrepancy "
            f"{max_discrepancy:.3e} exceeds tolerance {tolerance:.3e}"
        )


class InfeasibleSelectionError(CogmimoError):
    """No transceiver placement satisfies the cardinality and isolation rules."""


class SolverFailureError(CogmimoError):
    """The convex subproblem solver did not reach an acceptable solution."""


class NumericalError(CogmimoError):
    """A matrix operation failed even after regularization."""
