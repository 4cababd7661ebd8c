"""Dense complex linear algebra primitives for small (<= 256 x 256) matrices.

Matrices are plain ``numpy.ndarray`` of dtype complex128, square, row-major.
All functions are pure and thread-safe.
"""

import numpy as np

from .errors import PreconditionError

# Tolerances shared between the library and its tests.
HERM_TOL = 1e-10       # max-abs entry deviation allowed from Hermiticity
UNITARY_TOL = 1e-12    # spectral deviation of U^dag U from the identity
MAX_DIM = 256

__all__ = [
    "HERM_TOL",
    "UNITARY_TOL",
    "MAX_DIM",
    "as_matrix",
    "herm_deviation",
    "require_hermitian",
    "expm_i",
    "spectral_norm",
    "kron",
]


def as_matrix(m) -> np.ndarray:
    """Coerce input to a square complex128 array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PreconditionError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise PreconditionError("matrix dimension must be >= 1")
    return a


def herm_deviation(m) -> float:
    """Max-abs entry deviation of m from its Hermitian conjugate."""
    a = as_matrix(m)
    return float(np.max(np.abs(a - a.conj().T)))


def require_hermitian(m, tol: float = HERM_TOL) -> np.ndarray:
    a = as_matrix(m)
    dev = herm_deviation(a)
    if dev > tol:
        raise PreconditionError(
            f"matrix is not Hermitian: max-abs deviation {dev:.3e} exceeds {tol:.1e}"
        )
    return a


def expm_i(h, t: float) -> np.ndarray:
    """Unitary exponential exp(-i*h*t) of a Hermitian matrix h.

    Computed via Hermitian eigendecomposition so the phases are exact and
    the result is unitary to machine precision (no series truncation).
    """
    a = require_hermitian(h)
    evals, evecs = np.linalg.eigh(a)
    phases = np.exp(-1j * evals * t)
    return (evecs * phases) @ evecs.conj().T


def spectral_norm(m) -> float:
    """Largest singular value of m."""
    a = as_matrix(m)
    return float(np.linalg.norm(a, ord=2))


def kron(a, b) -> np.ndarray:
    """Kronecker product with a's index slowest (leftmost factor)."""
    return np.kron(as_matrix(a), as_matrix(b))
