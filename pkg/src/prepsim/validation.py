"""Input validation helpers in the spirit of ``sklearn.utils.validation``.

Every helper takes array-like input, returns a clean ``complex128`` array
and raises :class:`~prepsim.exceptions.OperatorValidationError` when the
requested property does not hold within ``eps``.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DimensionError, OperatorValidationError

DEFAULT_EPS = 1e-9


def check_square_matrix(matrix, name="matrix"):
    """Return ``matrix`` as a finite 2-D square complex array."""
    arr = np.array(matrix, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"{name} must be a square 2-D matrix, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise DimensionError(f"{name} must have side length >= 1")
    if not np.all(np.isfinite(arr)):
        raise OperatorValidationError(f"{name} contains non-finite entries")
    return arr


def check_vector(vector, name="vector", normalized=False, eps=1e-9):
    """Return ``vector`` as a finite 1-D complex array, optionally unit-norm."""
    arr = np.array(vector, dtype=np.complex128).reshape(-1)
    if arr.size < 1:
        raise DimensionError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise OperatorValidationError(f"{name} contains non-finite entries")
    if normalized:
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > eps:
            raise OperatorValidationError(f"{name} must be normalized, got norm {norm!r}")
    return arr


def hermiticity_error(arr):
    return float(np.max(np.abs(arr - arr.conj().T)))


def check_hermitian(arr, eps=DEFAULT_EPS, name="matrix"):
    arr = np.asarray(arr, dtype=complex)
    err = hermiticity_error(arr)
    if err > eps:
        raise OperatorValidationError(f"{name} is not Hermitian (max |A - A^dag| = {err:.3e})")
    return arr


def check_density(arr, eps=DEFAULT_EPS, name="density operator"):
    """Hermitian, eigenvalues >= -eps, unit trace."""
    arr = np.asarray(arr, dtype=complex)
    check_hermitian(arr, eps, name)
    tr = np.trace(arr)
    if abs(tr - 1.0) > eps:
        raise OperatorValidationError(f"{name} must have unit trace, got {tr.real:.17g}")
    # eigvalsh reads only one triangle, so Hermitize first.
    lowest = float(np.linalg.eigvalsh((arr + arr.conj().T) / 2)[0])
    if lowest < -eps:
        raise OperatorValidationError(
            f"{name} is not positive semidefinite (lowest eigenvalue {lowest:.3e})"
        )
    return arr


def check_projector(arr, eps=DEFAULT_EPS, name="projector"):
    """Hermitian and idempotent."""
    arr = np.asarray(arr, dtype=complex)
    check_hermitian(arr, eps, name)
    err = float(np.max(np.abs(arr @ arr - arr)))
    if err > eps:
        raise OperatorValidationError(f"{name} is not idempotent (max |F F - F| = {err:.3e})")
    return arr


def check_unitary(arr, eps=DEFAULT_EPS, name="unitary"):
    arr = np.asarray(arr, dtype=complex)
    eye = np.eye(arr.shape[0])
    err = float(np.max(np.abs(arr @ arr.conj().T - eye)))
    if err > eps:
        raise OperatorValidationError(f"{name} is not unitary (max |U U^dag - I| = {err:.3e})")
    return arr


def check_probability(value, eps=DEFAULT_EPS, name="probability"):
    """Clamp ``value`` into [0, 1]; raise when it is more than ``eps`` outside."""
    value = float(np.real(value))
    if not np.isfinite(value) or value < -eps or value > 1.0 + eps:
        raise OperatorValidationError(f"{name} {value!r} lies outside [0, 1]")
    return min(max(value, 0.0), 1.0)
