"""Dense complex-matrix primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Bipartite
operators on ``H_A (x) H_B`` use the Kronecker index convention

    (i_a, i_b) -> i_a * dim_b + i_b

everywhere, which is what ``np.kron`` produces and what a C-order reshape to
``(dim_a, dim_b, dim_a, dim_b)`` undoes.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import config
from .errors import DimensionMismatch, EigenDecompositionError, NotHermitian


@dataclass(frozen=True)
class BipartiteIndex:
    """Tensor-factor bookkeeping for an operator on ``H_A (x) H_B``."""

    dim_a: int
    dim_b: int

    def __post_init__(self):
        if self.dim_a < 1 or self.dim_b < 1:
            raise DimensionMismatch(f"factor dimensions must be positive, got {self.dim_a}, {self.dim_b}")

    @property
    def dim(self) -> int:
        return self.dim_a * self.dim_b

    @property
    def swapped(self) -> "BipartiteIndex":
        return BipartiteIndex(self.dim_b, self.dim_a)

    def check(self, m: np.ndarray) -> None:
        if m.shape != (self.dim, self.dim):
            raise DimensionMismatch(
                f"expected a {self.dim}x{self.dim} operator on {self.dim_a}x{self.dim_b}, got {m.shape}"
            )


def as_matrix(m, square: bool = True) -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D matrix, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionMismatch(f"empty matrix of shape {a.shape}")
    if square and a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def hermiticity_residual(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitian(m, tol: float = config.HERMITICITY_TOL) -> np.ndarray:
    """Validate ``m`` as Hermitian and return its exact symmetrization ``(M + M^dag)/2``."""
    a = as_matrix(m)
    res = hermiticity_residual(a)
    if res > tol:
        raise NotHermitian(res, tol)
    return frozen((a + a.conj().T) / 2)


def _same_square(a: np.ndarray, b: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape != b.shape:
        raise DimensionMismatch(f"need equal square dimensions, got {a.shape} and {b.shape}")


def tensor(a, b) -> np.ndarray:
    """Kronecker product ``a (x) b``; row ``(i_a, i_b)`` lands at ``i_a*dim_b + i_b``."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def partial_trace(m, idx: BipartiteIndex, which: str) -> np.ndarray:
    """Trace out factor ``which`` (``"A"`` or ``"B"``) of a bipartite operator.

    ``partial_trace(m, idx, "B")`` is ``Tr_B[m]`` on ``H_A``; ``"A"`` gives ``Tr_A[m]`` on ``H_B``.
    """
    m = np.asarray(m, dtype=complex)
    idx.check(m)
    t = m.reshape(idx.dim_a, idx.dim_b, idx.dim_a, idx.dim_b)
    if which == "B":
        return np.einsum("ijkj->ik", t)
    if which == "A":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"which must be 'A' or 'B', got {which!r}")


def anticommutator(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _same_square(a, b)
    return a @ b + b @ a


def commutator(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _same_square(a, b)
    return a @ b - b @ a


def swap_conjugate(m, idx: BipartiteIndex) -> np.ndarray:
    """Return ``S m S`` on ``H_B (x) H_A`` for ``m`` on ``H_A (x) H_B``.

    The output is indexed by ``idx.swapped``; applying the function again with
    that index gives back ``m``.
    """
    m = np.asarray(m, dtype=complex)
    idx.check(m)
    t = m.reshape(idx.dim_a, idx.dim_b, idx.dim_a, idx.dim_b)
    return t.transpose(1, 0, 3, 2).reshape(idx.dim, idx.dim)


def swap_operator(dim_a: int, dim_b: int | None = None) -> np.ndarray:
    """The permutation ``S |i>_A |j>_B = |j>_B |i>_A`` as a matrix from A(x)B to B(x)A."""
    dim_b = dim_a if dim_b is None else dim_b
    s = np.zeros((dim_a * dim_b, dim_a * dim_b), dtype=complex)
    for i in range(dim_a):
        for j in range(dim_b):
            s[j * dim_a + i, i * dim_b + j] = 1.0
    return s


def partial_transpose(m, idx: BipartiteIndex, which: str) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    idx.check(m)
    t = m.reshape(idx.dim_a, idx.dim_b, idx.dim_a, idx.dim_b)
    if which == "A":
        t = t.transpose(2, 1, 0, 3)
    elif which == "B":
        t = t.transpose(0, 3, 2, 1)
    else:
        raise ValueError(f"which must be 'A' or 'B', got {which!r}")
    return t.reshape(idx.dim, idx.dim)


class Eigh(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eig_hermitian(h, residual_tol: float = config.SPECTRAL_RESIDUAL_TOL) -> Eigh:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The reconstruction ``V diag(w) V^dag`` is checked against ``h``; the
    tolerance is scaled by ``max(1, ||h||_F)``.
    """
    h = np.asarray(h, dtype=complex)
    _same_square(h, h)
    try:
        w, v = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(f"eigh failed on {h.shape} matrix: {exc}") from exc
    residual = np.linalg.norm((v * w) @ v.conj().T - h)
    scale = max(1.0, float(np.linalg.norm(h)))
    if not residual <= residual_tol * scale:
        raise EigenDecompositionError(
            f"reconstruction residual {residual:.3e} exceeds {residual_tol * scale:.1e} "
            f"(dim {h.shape[0]}, hermiticity residual {hermiticity_residual(h):.3e})"
        )
    return Eigh(w, v)


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product ``Tr[a^dag b]``."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    _same_square(a, b)
    return complex(np.vdot(a, b))


def is_projector(p, tol: float = config.MEASUREMENT_TOL) -> bool:
    p = np.asarray(p, dtype=complex)
    return hermiticity_residual(p) <= tol and float(np.max(np.abs(p @ p - p))) <= tol


def ket(index: int, dim: int) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec) -> np.ndarray:
    """Rank-1 projector onto the (normalized) vector ``vec``."""
    v = np.asarray(vec, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def matrix_unit(i: int, j: int, dim: int) -> np.ndarray:
    """``|i><j|`` in dimension ``dim``."""
    e = np.zeros((dim, dim), dtype=complex)
    e[i, j] = 1.0
    return e


PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
for _m in (PAULI_X, PAULI_Y, PAULI_Z, HADAMARD):
    _m.setflags(write=False)
