"""
Complex vector and matrix kernels shared by every propagator.

States are 1-D complex128 numpy arrays, operators are 2-D complex128 arrays.
This module provides:
- linear combinations and distances between states,
- spectral and Frobenius norms and the (optionally phase-modded) operator
  distance used to score simulated propagators,
- the exact-evolution oracle exp(-iHt)x from a Hermitian eigendecomposition.

Dependencies:
    - numpy, scipy.linalg (eigh)
"""

import logging

import numpy as np
from scipy import linalg

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
NORMS = ("spectral", "frobenius")

# power iteration budget for the spectral norm
POWER_ITER_TOL = 1e-13
POWER_ITER_MAX = 2000


class DimensionMismatchError(ValueError):
    """Raised when operands do not share a dimension."""

    def __init__(self, left, right):
        self.left = left
        self.right = right
        super().__init__(f"dimension mismatch: {left} != {right}")


class NotHermitianError(ValueError):
    """Raised when an operator is not Hermitian within tolerance."""

    def __init__(self, deviation, tolerance):
        self.deviation = deviation
        self.tolerance = tolerance
        super().__init__(
            f"operator is not Hermitian: deviation {deviation:.3e} > {tolerance:.1e}"
        )


class PrecisionBudgetError(ValueError):
    """Raised when a requested accuracy cannot be met in double precision."""


def as_state(amps):
    """Coerces amplitudes into a 1-D complex128 array."""
    state = np.asarray(amps, dtype=np.complex128)
    if state.ndim != 1:
        raise ValueError(f"state must be one-dimensional, got shape {state.shape}")
    return state


def as_operator(matrix):
    op = np.asarray(matrix, dtype=np.complex128)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"operator must be square, got shape {op.shape}")
    return op


def check_dims(left, right):
    if left != right:
        raise DimensionMismatchError(left, right)


def linear_combination(a, x, b, y):
    """Returns a*x + b*y."""
    x = as_state(x)
    y = as_state(y)
    check_dims(x.shape[0], y.shape[0])
    return a * x + b * y


def hermitian_deviation(matrix):
    op = as_operator(matrix)
    return float(np.max(np.abs(op - op.conj().T), initial=0.0))


def is_hermitian(matrix, tol=HERMITIAN_TOL):
    return hermitian_deviation(matrix) <= tol


def is_unitary(matrix, tol=1e-10):
    op = as_operator(matrix)
    eye = np.eye(op.shape[0])
    return float(np.max(np.abs(op.conj().T @ op - eye), initial=0.0)) <= tol


def _checked_eigh(matrix):
    op = as_operator(matrix)
    # tolerance scales with the operator so large-norm inputs are judged fairly
    scale = max(1.0, float(np.max(np.abs(op), initial=0.0)))
    deviation = hermitian_deviation(op)
    if deviation > HERMITIAN_TOL * scale:
        raise NotHermitianError(deviation, HERMITIAN_TOL * scale)
    return linalg.eigh((op + op.conj().T) / 2.0)


def exact_evolve(matrix, t, x):
    """
    Exact exp(-iHt)x through the eigendecomposition of H.
    input: Hermitian matrix, float:t, state
    output: state
    """
    x = as_state(x)
    check_dims(np.shape(matrix)[0], x.shape[0])
    if t == 0:
        return x.copy()
    eigvals, eigvecs = _checked_eigh(matrix)
    return eigvecs @ (np.exp(-1j * eigvals * t) * (eigvecs.conj().T @ x))


def exact_propagator(matrix, t):
    """Dense exp(-iHt)."""
    eigvals, eigvecs = _checked_eigh(matrix)
    return (eigvecs * np.exp(-1j * eigvals * t)) @ eigvecs.conj().T


def frobenius_norm(matrix):
    return float(np.linalg.norm(matrix, "fro"))


def spectral_norm(matrix):
    """
    Largest singular value by power iteration on A^H A.

    The start vector has full support with probability one (fixed seed), and
    the iteration stops once the Rayleigh quotient settles to POWER_ITER_TOL.
    Slow convergence (near-degenerate top singular values) falls back to SVD.
    """
    op = as_operator(matrix)
    if not np.any(op):
        return 0.0
    gram = op.conj().T @ op
    rng = np.random.default_rng(0)
    vec = rng.standard_normal(op.shape[0]) + 1j * rng.standard_normal(op.shape[0])
    vec /= np.linalg.norm(vec)
    value = 0.0
    for _ in range(POWER_ITER_MAX):
        nxt = gram @ vec
        new_value = float(np.real(np.vdot(vec, nxt)))
        size = np.linalg.norm(nxt)
        if size == 0.0:
            return 0.0
        vec = nxt / size
        if abs(new_value - value) <= POWER_ITER_TOL * max(new_value, 1e-300):
            return float(np.sqrt(max(new_value, 0.0)))
        value = new_value
    logger.debug("power iteration did not settle, using SVD norm")
    return float(np.linalg.norm(op, 2))


def operator_norm(matrix, norm="spectral"):
    if norm == "spectral":
        return spectral_norm(matrix)
    if norm == "frobenius":
        return frobenius_norm(matrix)
    raise ValueError(f"unknown norm {norm!r}, expected one of {NORMS}")


def operator_distance(u, v, mod_phase=False, norm="spectral"):
    """
    Norm of U - V; with mod_phase, of U - e^{i phi} V where
    phi = arg trace(V^H U).
    """
    u = as_operator(u)
    v = as_operator(v)
    check_dims(u.shape[0], v.shape[0])
    if mod_phase:
        overlap = np.trace(v.conj().T @ u)
        if abs(overlap) > 0.0:
            v = v * (overlap / abs(overlap))
    return operator_norm(u - v, norm)


def state_distance(x, y):
    """Euclidean norm of x - y."""
    x = as_state(x)
    y = as_state(y)
    check_dims(x.shape[0], y.shape[0])
    return float(np.linalg.norm(x - y))


def commutator(a, b):
    return a @ b - b @ a
