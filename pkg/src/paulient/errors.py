"""Exception types shared across the package."""


class PaulientError(Exception):
    """Base class for all package-specific errors."""


class SizeLimitExceeded(PaulientError):
    """A dense construction was requested beyond its qubit budget."""


class NotUnitary(PaulientError):
    """An operation that requires a unitary operator received something else."""


class NotHermitian(PaulientError):
    """An operation that requires a Hermitian operator received something else."""


class InvalidGeneratorImages(PaulientError):
    """Prescribed generator images violate the symplectic (commutation) condition."""


class NotProduct(PaulientError):
    """Operator-Schmidt rank exceeds one where a product operator is required."""


class NotProductPreserving(PaulientError):
    """The unitary does not map every Pauli string to a product operator."""


class FactorizationDegeneracy(PaulientError):
    """The canonicalization stage of the factorizer hit a numerically degenerate
    configuration that should not occur for valid inputs; carries diagnostics."""


class NotUnitaryClosure(PaulientError):
    """The periodic closure of an MPU tensor is not unitary at the requested length."""


class DegenerateLeadingEigenvalue(PaulientError):
    """Transfer matrix has a (near-)degenerate dominant eigenvalue, so the
    thermodynamic limit is not determined by a single eigenpair."""


class ConfigError(PaulientError):
    """Invalid run configuration (unknown fields, missing values, bad schema)."""
