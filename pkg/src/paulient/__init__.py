"""Numerics for operator entanglement of Heisenberg-evolved Pauli strings:
Pauli/Clifford algebra over symplectic bit vectors, operator-Schmidt spectra,
stabilizer entropies and their local minimizations, the Pauli-entangling
power (exact, sampled, projector form, MPU transfer matrices), constructive
local-Clifford factorization, and spin-chain experiments."""

__version__ = "0.1.0"

from .operators import Bipartition
from .paulis import CliffordTableau, PauliString

__all__ = ["Bipartition", "CliffordTableau", "PauliString", "__version__"]
