"""Dense complex linear algebra for the small Hilbert spaces of the experiment.

Kets are 1-D complex numpy arrays, operators are square 2-D complex arrays and
isometries are tall 2-D arrays.  Everything here is a pure function; inputs are
never modified.

Basis conventions used throughout the package:

* system S: index 0 = up, 1 = down
* friend record F: index 0 = U, 1 = D
* Wigner register W: index 0 = ready before Wigner acts and outcome 1 after,
  index 1 = outcome 2
* composite index is row-major over (S, F, W): ``4*s + 2*f + w``
"""

from __future__ import annotations

import math

import numpy as np

EPS_NORM = 1e-12
EPS_HERM = 1e-12
EPS_PSD = 1e-9
EPS_TRACE = 1e-12
EPS_ISOMETRY = 1e-12
JACOBI_OFF_TOL = 1e-14


class ContractViolation(ValueError):
    """Raised when an operation receives inputs outside its contract."""


def _as_array(x) -> np.ndarray:
    arr = np.asarray(x, dtype=complex)
    if arr.ndim not in (1, 2):
        raise ContractViolation(f"expected a ket or a matrix, got ndim={arr.ndim}")
    return arr


def _square(M) -> np.ndarray:
    M = _as_array(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ContractViolation(f"expected a square operator, got shape {M.shape}")
    return M


def ket(*amps) -> np.ndarray:
    return np.array(amps, dtype=complex)


def basis(dim: int, index: int) -> np.ndarray:
    if not 0 <= index < dim:
        raise ContractViolation(f"basis index {index} out of range for dim {dim}")
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def identity(dim: int) -> np.ndarray:
    return np.eye(dim, dtype=complex)


def projector(psi) -> np.ndarray:
    """Return the rank-one operator ``|psi><psi|``."""
    psi = _as_array(psi)
    if psi.ndim != 1:
        raise ContractViolation("projector expects a ket")
    return np.outer(psi, psi.conj())


def kron(A, B) -> np.ndarray:
    """Tensor product of two kets or two operators."""
    A = _as_array(A)
    B = _as_array(B)
    if A.ndim != B.ndim:
        raise ContractViolation("kron operands must both be kets or both be operators")
    return np.kron(A, B)


def kron_all(*factors) -> np.ndarray:
    out = _as_array(factors[0])
    for f in factors[1:]:
        out = kron(out, f)
    return out


def dagger(M) -> np.ndarray:
    return _as_array(M).conj().T


def matmul(A, B) -> np.ndarray:
    A = _as_array(A)
    B = _as_array(B)
    if A.shape[-1] != B.shape[0]:
        raise ContractViolation(f"dimension mismatch: {A.shape} @ {B.shape}")
    return A @ B


def trace(M) -> complex:
    return complex(np.trace(_square(M)))


def commutator(A, B) -> np.ndarray:
    A = _square(A)
    B = _square(B)
    if A.shape != B.shape:
        raise ContractViolation(f"dimension mismatch: {A.shape} vs {B.shape}")
    return A @ B - B @ A


def expectation(M, rho) -> float:
    """``Re tr(M rho)``; both arguments are assumed Hermitian."""
    return trace(matmul(M, rho)).real


def is_normalized(psi, eps: float = EPS_NORM) -> bool:
    psi = _as_array(psi)
    return psi.ndim == 1 and abs(float(np.vdot(psi, psi).real) - 1.0) <= eps


def is_hermitian(M, eps: float = EPS_HERM) -> bool:
    M = _as_array(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    return float(np.max(np.abs(M - M.conj().T))) <= eps


def is_psd(M, eps: float = EPS_PSD, herm_eps: float = EPS_HERM) -> bool:
    if not is_hermitian(M, herm_eps):
        return False
    return eig_min_hermitian(M, herm_eps) >= -eps


def is_density(rho, eps: float = EPS_TRACE, psd_eps: float = EPS_PSD) -> bool:
    return is_psd(rho, psd_eps) and abs(trace(rho) - 1.0) <= eps


def is_isometry(V, eps: float = EPS_ISOMETRY) -> bool:
    V = _as_array(V)
    if V.ndim != 2 or V.shape[0] < V.shape[1]:
        return False
    gram = V.conj().T @ V
    return float(np.max(np.abs(gram - np.eye(V.shape[1])))) <= eps


def eig_min_hermitian(M, herm_eps: float = EPS_HERM) -> float:
    """Smallest eigenvalue of a Hermitian matrix.

    Uses the closed form for 2x2 inputs and cyclic complex Jacobi rotations
    otherwise.
    """
    M = _square(M)
    if not is_hermitian(M, herm_eps):
        raise ContractViolation("eig_min_hermitian requires a Hermitian operator")
    if M.shape[0] == 1:
        return float(M[0, 0].real)
    if M.shape[0] == 2:
        return _eig_2x2(M)[0]
    return float(min(jacobi_eigenvalues(M)))


def _eig_2x2(M: np.ndarray) -> tuple[float, float]:
    p, q = M[0, 0].real, M[1, 1].real
    half_tr = (p + q) / 2
    # sqrt((tr/2)^2 - det) written without cancellation
    r = math.hypot((p - q) / 2, abs(M[0, 1]))
    return half_tr - r, half_tr + r


def jacobi_eigenvalues(M, off_tol: float = JACOBI_OFF_TOL, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations.

    Sweeps continue until the off-diagonal Frobenius norm drops below
    ``off_tol * max(1, ||M||_F)``.
    """
    A = np.array(_square(M), dtype=complex)
    A = (A + A.conj().T) / 2
    n = A.shape[0]
    threshold = off_tol * max(1.0, float(np.linalg.norm(A)))
    offdiag = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A[offdiag]))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag == 0.0:
                    continue
                phase = apq / mag
                theta = (A[q, q].real - A[p, p].real) / (2 * mag)
                if abs(theta) > 1e150:
                    t = 1 / (2 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                # R = D P with D = diag(1, conj(phase)) on (p, q) and P the real rotation
                cp = A[:, p].copy()
                cq = A[:, q].copy() * phase.conjugate()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :].copy() * phase
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                A[p, q] = 0.0
                A[q, p] = 0.0
    return np.sort(np.diag(A).real)


def operator_norm_2x2(M) -> float:
    """Largest singular value of a 2x2 matrix, in closed form."""
    M = _square(M)
    if M.shape != (2, 2):
        raise ContractViolation("operator_norm_2x2 expects a 2x2 matrix")
    fro2 = float(np.sum(np.abs(M) ** 2))
    det = abs(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    disc = max(fro2 * fro2 - 4 * det * det, 0.0)
    return math.sqrt((fro2 + math.sqrt(disc)) / 2)


def to_bloch(M) -> tuple[float, float, float, float]:
    """Coefficients (g0, gx, gy, gz) with ``M = g0 I + gx X + gy Y + gz Z``."""
    M = _square(M)
    if M.shape != (2, 2):
        raise ContractViolation("to_bloch expects a 2x2 matrix")
    return (
        float((M[0, 0] + M[1, 1]).real / 2),
        float(M[0, 1].real),
        float(-M[0, 1].imag),
        float((M[0, 0] - M[1, 1]).real / 2),
    )


def from_bloch(g0: float, gx: float, gy: float, gz: float) -> np.ndarray:
    return np.array([[g0 + gz, gx - 1j * gy], [gx + 1j * gy, g0 - gz]], dtype=complex)
