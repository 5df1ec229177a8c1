"""Symmetric matrices, the traceless subspace and a flat coordinate chart.

The space ``sym_0 x R^n`` (traceless symmetric matrices paired with a shift
vector) is identified with ``R^d``, ``d = n(n+3)/2 - 1``, through a
Frobenius-orthonormal basis of ``sym_0``.  The identification is a linear
isometry for the inner product ``<(A,v),(B,w)> = tr(A^T B) + <v,w>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionMismatch, SymmetryError, TraceError

SYM_TOL = 1e-12
TRACE_TOL = 1e-12


def sym_matrix(a, tol: float = SYM_TOL) -> np.ndarray:
    """Validate ``a`` as a symmetric square matrix and return a float copy.

    Inputs whose asymmetry exceeds ``tol`` are rejected rather than
    symmetrized.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 2:
        raise DimensionMismatch("dimension must be at least 2")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(a - a.T)) > tol:
        raise SymmetryError("matrix is not symmetric")
    # exact symmetry from here on
    return 0.5 * (a + a.T)


def frobenius(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    return float(np.sum(a * b))


def chart_dim(n: int) -> int:
    """Dimension ``n(n+3)/2 - 1`` of ``sym_0 x R^n``."""
    return n * (n + 3) // 2 - 1


@lru_cache(maxsize=None)
def _basis_array(n: int) -> np.ndarray:
    if n < 2:
        raise DimensionMismatch("dimension must be at least 2")
    diag = []
    for i in range(n - 1):
        e = np.zeros((n, n))
        e[i, i] = 1.0
        e[i + 1, i + 1] = -1.0
        diag.append(e / np.sqrt(2.0))
    # Gram-Schmidt on the diagonal differences (they overlap for n >= 3)
    ortho = []
    for b in diag:
        for q in ortho:
            b = b - np.sum(b * q) * q
        ortho.append(b / np.sqrt(np.sum(b * b)))
    off = []
    for i in range(n):
        for j in range(i + 1, n):
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = 1.0 / np.sqrt(2.0)
            off.append(e)
    basis = np.array(ortho + off)
    basis.setflags(write=False)
    return basis


def basis_sym0(n: int) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of the traceless symmetric ``n x n`` matrices."""
    return [b.copy() for b in _basis_array(n)]


def basis_array(n: int) -> np.ndarray:
    """Basis of ``sym_0`` stacked as a read-only ``(k, n, n)`` array."""
    return _basis_array(n)


@dataclass(frozen=True)
class SymPair:
    """A point ``(M, w)`` of ``sym x R^n``."""

    M: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        M = sym_matrix(self.M)
        w = np.array(self.w, dtype=float).reshape(-1)
        if w.shape[0] != M.shape[0]:
            raise DimensionMismatch("vector length does not match matrix dimension")
        M.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.M.shape[0]

    @classmethod
    def zero(cls, n: int) -> "SymPair":
        return cls(np.zeros((n, n)), np.zeros(n))

    def trace(self) -> float:
        return float(np.trace(self.M))

    def inner(self, other: "SymPair") -> float:
        return frobenius(self.M, other.M) + float(self.w @ other.w)

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self)))

    def __add__(self, other: "SymPair") -> "SymPair":
        return SymPair(self.M + other.M, self.w + other.w)

    def __sub__(self, other: "SymPair") -> "SymPair":
        return SymPair(self.M - other.M, self.w - other.w)

    def __mul__(self, t: float) -> "SymPair":
        return SymPair(t * self.M, t * self.w)

    __rmul__ = __mul__

    def __neg__(self) -> "SymPair":
        return SymPair(-self.M, -self.w)

    def project_traceless(self) -> "SymPair":
        """Orthogonal projection onto ``sym_0 x R^n``."""
        n = self.n
        return SymPair(self.M - (np.trace(self.M) / n) * np.eye(n), self.w)


def pair_to_coords(p: SymPair, tol: float = TRACE_TOL) -> np.ndarray:
    if abs(p.trace()) > tol:
        raise TraceError(f"trace {p.trace():.3e} exceeds tolerance {tol:.1e}")
    basis = _basis_array(p.n)
    return np.concatenate([np.einsum("kij,ij->k", basis, p.M), p.w])


def coords_to_pair(x, n: int) -> SymPair:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != chart_dim(n):
        raise DimensionMismatch(
            f"expected {chart_dim(n)} coordinates for n={n}, got {x.shape[0]}")
    basis = _basis_array(n)
    k = basis.shape[0]
    M = np.einsum("k,kij->ij", x[:k], basis)
    return SymPair(0.5 * (M + M.T), x[k:])


def sym0_coords(M) -> np.ndarray:
    """Coordinates of the traceless part of a symmetric matrix (or a stack of them)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[-1]
    return np.einsum("kij,...ij->...k", _basis_array(n), M)


def sym0_from_coords(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.einsum("...k,kij->...ij", x, _basis_array(n))
