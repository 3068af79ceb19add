"""Fixed-size complex linear algebra for 2x2 and 4x4 gate matrices.

Rotation constructors follow the convention ``P(beta) = exp(+i * beta * P)``
for a Pauli generator ``P`` (so ``Z(pi/2) = iZ``), not the more common
``exp(-i * beta * P / 2)``.  Parsers that accept external circuit formats are
responsible for mapping between the two conventions.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import ConvergenceError, UnitarityError

# Unitarity tolerances: loose for caller-supplied matrices (which may come
# from lossy text formats), tight for matrices we construct ourselves.
INPUT_UNITARY_ATOL = 1e-8
INTERNAL_ATOL = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
S = np.array([[1, 0], [0, 1j]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)

CX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

# Magic basis: conjugation by MAGIC turns local gates into real orthogonal
# matrices and diagonalizes XX, YY and ZZ simultaneously.
MAGIC = np.array(
    [[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex
) / math.sqrt(2)

_PAULI_1Q = {"X": X, "Y": Y, "Z": Z}
_PAULI_2Q = {
    "XX": np.kron(X, X),
    "YY": np.kron(Y, Y),
    "ZZ": np.kron(Z, Z),
}


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b."""
    return a @ b


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; qubit 0 is the left (most significant) factor."""
    return np.kron(a, b)


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def determinant(a: np.ndarray) -> complex:
    return complex(np.linalg.det(a))


def is_unitary(a: np.ndarray, atol: float = INPUT_UNITARY_ATOL) -> bool:
    a = np.asarray(a, dtype=complex)
    return np.abs(a @ a.conj().T - np.eye(a.shape[0])).max() <= atol


def require_unitary(a: np.ndarray, atol: float = INPUT_UNITARY_ATOL, what: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    dev = np.abs(a @ a.conj().T - np.eye(a.shape[0])).max()
    if dev > atol:
        raise UnitarityError(f"{what} is not unitary: max |A A^dag - I| = {dev:.3e}")
    return a


def su_normalize(a: np.ndarray, atol: float = INPUT_UNITARY_ATOL):
    """Rescale a unitary to determinant one.

    Returns ``(a_su, phase)`` with ``a = phase * a_su`` and ``det(a_su) = 1``.
    The phase branch is the principal n-th root of det(a).
    """
    a = require_unitary(a, atol)
    n = a.shape[0]
    det = determinant(a)
    phase = cmath.exp(1j * cmath.phase(det) / n)
    return a / phase, phase


def distance_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """min over unit phases phi of ||a - phi*b||_F, for unitaries.

    Equals sqrt(2n - 2|tr(a^dag b)|); the minimum is attained at
    phi = tr(a^dag b)/|tr|, and evaluating the aligned difference directly
    avoids the sqrt-of-cancellation noise floor of the trace form.
    """
    tr = np.trace(a.conj().T @ b)
    phi = tr.conjugate() / abs(tr) if abs(tr) > 1e-300 else 1.0
    return float(np.linalg.norm(a - phi * b, "fro"))


def rotation_1q(axis: str, beta: float) -> np.ndarray:
    """exp(i * beta * P) for P in {X, Y, Z}."""
    p = _PAULI_1Q[axis.upper()]
    return math.cos(beta) * I2 + 1j * math.sin(beta) * p


def rotation_2q(axes: str, beta: float) -> np.ndarray:
    """exp(i * beta * P o P) for P o P in {XX, YY, ZZ}."""
    p = _PAULI_2Q[axes.upper()]
    return math.cos(beta) * np.eye(4) + 1j * math.sin(beta) * p


def eig_sym4(a: np.ndarray, threshold: float = 1e-12, max_sweeps: int = 64):
    """Eigendecomposition of a small real symmetric matrix by cyclic Jacobi.

    Returns ``(eigenvalues, q)`` with ``a = q @ diag(eigenvalues) @ q.T`` and
    ``q`` orthogonal.  Eigenvalues are unsorted.  Raises ConvergenceError if
    the off-diagonal norm does not drop below ``threshold`` within
    ``max_sweeps`` sweeps.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    sym_dev = np.abs(a - a.T).max()
    if sym_dev > 1e-10:
        raise ValueError(f"matrix is not symmetric: max |A - A^T| = {sym_dev:.3e}")
    a = (a + a.T) / 2.0
    q = np.eye(n)
    for _ in range(max_sweeps):
        offmat = a - np.diag(np.diag(a))
        off = math.sqrt(float((offmat**2).sum()))
        if off < threshold:
            return np.diag(a).copy(), q
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if abs(apr) < threshold / (4 * n):
                    continue
                # classic Jacobi rotation zeroing a[p, r]
                diff = a[r, r] - a[p, p]
                if abs(apr) < 1e-300:
                    continue
                phi = diff / (2.0 * apr)
                t = 1.0 / (abs(phi) + math.sqrt(phi * phi + 1.0))
                if phi < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = c
                rot[r, r] = c
                rot[p, r] = s
                rot[r, p] = -s
                a = rot.T @ a @ rot
                a = (a + a.T) / 2.0
                q = q @ rot
    raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def haar_su(dim: int, rng: np.random.Generator) -> np.ndarray:
    u, _ = su_normalize(haar_unitary(dim, rng))
    return u
