"""Dense complex matrix kernel shared by every other module.

All operations act on plain complex numpy arrays. Dimensions in this package
stay tiny (at most d^2 x d^2 with d <= 9), so everything is dense and eager.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg


class ShapeError(ValueError):
    """Operand dimensions are incompatible."""


class HermiticityError(ValueError):
    """A matrix required to be Hermitian is not, within tolerance."""


DEFAULT_HERM_TOL = 1e-10

# Eigenvalues closer than this are treated as one degenerate cluster;
# downstream code only ever consumes spectral projectors of whole clusters,
# never individual eigenvectors inside one.
DEGENERACY_GAP = 1e-9

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D complex array, rejecting NaN/Inf entries."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ShapeError(f"{name}: expected a 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name}: contains non-finite entries")
    return m


def _require_square(a: np.ndarray, name: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"{name}: expected a square matrix, got shape {a.shape}")


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Complex matrix product a @ b."""
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: inner dimensions differ, {a.shape} x {b.shape}")
    return a @ b


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; block (i, j) equals a[i, j] * b."""
    return np.kron(a, b)


def dagger(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return a.conj().T


def hs_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Hilbert-Schmidt inner product Tr(a^dag b)."""
    if a.shape != b.shape:
        raise ShapeError(f"hs_inner: shapes differ, {a.shape} vs {b.shape}")
    _require_square(a, "hs_inner")
    return complex(np.vdot(a, b))


def hs_norm(a: np.ndarray) -> float:
    """Hilbert-Schmidt (Frobenius) norm sqrt(Tr(a^dag a))."""
    return float(np.linalg.norm(a))


def trace_norm(a: np.ndarray) -> float:
    """Trace norm: sum of singular values, via the spectrum of a^dag a."""
    _require_square(a, "trace_norm")
    w = np.linalg.eigvalsh(dagger(a) @ a)
    return float(np.sqrt(np.clip(w, 0.0, None)).sum())


def hermiticity_defect(a: np.ndarray) -> float:
    """Largest entrywise deviation |a - a^dag|."""
    return float(np.abs(a - dagger(a)).max())


def require_hermitian(a: np.ndarray, tol: float = DEFAULT_HERM_TOL,
                      name: str = "matrix") -> None:
    """Raise HermiticityError when a deviates from a^dag beyond tol."""
    _require_square(a, name)
    defect = hermiticity_defect(a)
    if defect > tol:
        raise HermiticityError(
            f"{name}: not Hermitian, max |a - a^dag| = {defect:.3e} > {tol:.1e}")


@dataclass(frozen=True)
class HermitianEigen:
    """Spectral decomposition of a Hermitian matrix.

    eigenvalues are ascending; eigenvectors holds the matching unit
    eigenvectors as columns, so A = V diag(w) V^dag.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dagger(v)


def hermitian_eig(a: np.ndarray, tol: float = DEFAULT_HERM_TOL) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    require_hermitian(a, tol, "hermitian_eig")
    w, v = np.linalg.eigh(0.5 * (a + dagger(a)))
    return HermitianEigen(eigenvalues=w, eigenvectors=v)


def psd_project(a: np.ndarray, tol: float = DEFAULT_HERM_TOL) -> np.ndarray:
    """Nearest (in HS norm) positive semidefinite matrix to Hermitian a.

    Clamps negative eigenvalues to zero and reconstructs.
    """
    eig = hermitian_eig(a, tol)
    w = np.clip(eig.eigenvalues, 0.0, None)
    v = eig.eigenvectors
    out = (v * w) @ dagger(v)
    return 0.5 * (out + dagger(out))


def matrix_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential (scaling-and-squaring, via scipy)."""
    _require_square(a, "matrix_exp")
    return scipy.linalg.expm(a)


def gell_mann_basis(dim: int) -> list[np.ndarray]:
    """HS-orthonormal basis of traceless Hermitian dim x dim matrices.

    Generalized Gell-Mann construction: symmetric and antisymmetric
    off-diagonal pairs plus diagonal ladder matrices; dim^2 - 1 elements.
    For dim = 2 this is (sigma_x, sigma_y, sigma_z) / sqrt(2).
    """
    if dim < 2:
        raise ValueError(f"gell_mann_basis: dim must be >= 2, got {dim}")
    basis: list[np.ndarray] = []
    for j in range(dim):
        for k in range(j + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[j, k] = m[k, j] = 1.0 / np.sqrt(2.0)
            basis.append(m)
            m = np.zeros((dim, dim), dtype=complex)
            m[j, k] = -1.0j / np.sqrt(2.0)
            m[k, j] = 1.0j / np.sqrt(2.0)
            basis.append(m)
    for l in range(1, dim):
        m = np.zeros((dim, dim), dtype=complex)
        for i in range(l):
            m[i, i] = 1.0
        m[l, l] = -float(l)
        basis.append(m / np.sqrt(l * (l + 1)))
    return basis
