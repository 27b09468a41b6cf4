"""Truncated Fock-space and qubit operator algebra.

Every operator in the package lives on a tensor product with a fixed
ordering: the qubit slot (if present) comes first, followed by the bosonic
modes in declared order.  Hamiltonian builders go through :func:`embed`, so
no module assembles Kronecker products by hand.

Storage is a canonical CSR matrix (sorted indices, duplicates summed), which
is what a coordinate list with a canonicalization pass amounts to.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import InvalidDimension, ShapeError

HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class HilbertSpace:
    """Truncated tensor-product space ``qubit (x) boson_1 (x) ...``.

    Parameters
    ----------
    boson_dims : sequence of int
        Fock cutoff of each bosonic mode (number of retained levels).
    has_qubit : bool
        Whether a two-level factor occupies slot 0.
    """

    boson_dims: tuple[int, ...]
    has_qubit: bool = True

    def __post_init__(self):
        dims = tuple(int(d) for d in self.boson_dims)
        for d in dims:
            if d < 2:
                raise InvalidDimension(f"boson cutoff must be >= 2, got {d}")
        if not dims and not self.has_qubit:
            raise InvalidDimension("empty Hilbert space")
        object.__setattr__(self, "boson_dims", dims)

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return ((2,) if self.has_qubit else ()) + self.boson_dims

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def boson_slot(self, mode: int = 0) -> int:
        """Factor index of bosonic mode ``mode``."""
        if not 0 <= mode < len(self.boson_dims):
            raise ShapeError(f"no bosonic mode {mode} in {self}")
        return mode + (1 if self.has_qubit else 0)

    @property
    def qubit_slot(self) -> int:
        if not self.has_qubit:
            raise ShapeError("space has no qubit")
        return 0


class SparseOperator:
    """Immutable complex sparse matrix with a hermiticity flag.

    The flag is computed from the entries at construction, so it can never
    disagree with an explicit conjugate-transpose check.
    """

    __slots__ = ("_matrix", "_hermitian")

    def __init__(self, matrix):
        m = sp.csr_matrix(matrix, dtype=np.complex128)
        if m.shape[0] != m.shape[1]:
            raise ShapeError(f"operator must be square, got {m.shape}")
        m.sum_duplicates()
        m.sort_indices()
        m.eliminate_zeros()
        self._matrix = m
        self._hermitian = _is_hermitian(m)

    @property
    def matrix(self) -> sp.csr_matrix:
        return self._matrix

    @property
    def hermitian(self) -> bool:
        return self._hermitian

    @property
    def dim(self) -> int:
        return self._matrix.shape[0]

    @property
    def entries(self) -> list[tuple[int, int, complex]]:
        coo = self._matrix.tocoo()
        return [(int(r), int(c), complex(v)) for r, c, v in zip(coo.row, coo.col, coo.data)]

    def toarray(self) -> np.ndarray:
        return self._matrix.toarray()

    def dag(self) -> SparseOperator:
        return SparseOperator(self._matrix.conj().T)

    def _check(self, other: SparseOperator):
        if not isinstance(other, SparseOperator):
            return NotImplemented
        if other.dim != self.dim:
            raise ShapeError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SparseOperator(self._matrix + other._matrix)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return SparseOperator(self._matrix - other._matrix)

    def __neg__(self):
        return SparseOperator(-self._matrix)

    def __mul__(self, other):
        if isinstance(other, SparseOperator):
            return self @ other
        if np.isscalar(other):
            return SparseOperator(self._matrix * complex(other))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return SparseOperator(self._matrix * complex(other))
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            self._check(other)
            return SparseOperator(self._matrix @ other._matrix)
        return self._matrix @ other

    def __repr__(self):
        return f"SparseOperator(dim={self.dim}, nnz={self._matrix.nnz}, hermitian={self._hermitian})"


def _is_hermitian(m: sp.csr_matrix) -> bool:
    if m.nnz == 0:
        return True
    diff = m - m.conj().T
    if diff.nnz == 0:
        return True
    scale = max(1.0, float(np.abs(m.data).max()))
    return float(np.abs(diff.data).max()) <= HERMITIAN_TOL * scale


# Functional forms of the arithmetic, mirroring the operators above.

def op_add(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a + b


def op_mul(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a @ b


def op_scale(a: SparseOperator, c: complex) -> SparseOperator:
    return a * c


def op_dagger(a: SparseOperator) -> SparseOperator:
    return a.dag()


def commutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    return a @ b - b @ a


def identity(dim: int) -> SparseOperator:
    return SparseOperator(sp.identity(dim, format="csr"))


def annihilation(dim: int) -> SparseOperator:
    """Truncated bosonic lowering operator, ``<n-1|b|n> = sqrt(n)``."""
    if dim < 2:
        raise InvalidDimension(f"Fock cutoff must be >= 2, got {dim}")
    return SparseOperator(sp.diags(np.sqrt(np.arange(1, dim)), 1, shape=(dim, dim)))


def creation(dim: int) -> SparseOperator:
    return annihilation(dim).dag()


def number(dim: int) -> SparseOperator:
    if dim < 2:
        raise InvalidDimension(f"Fock cutoff must be >= 2, got {dim}")
    return SparseOperator(sp.diags(np.arange(dim, dtype=float), 0))


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def pauli(axis: str) -> SparseOperator:
    """Pauli matrix; basis order is (|up>, |down>) so sigma_z = diag(1, -1)."""
    try:
        return SparseOperator(_PAULI[axis.lower()])
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None


def embed(space: HilbertSpace, slot: int, op: SparseOperator) -> SparseOperator:
    """Place ``op`` on factor ``slot`` with identities elsewhere."""
    dims = space.factor_dims
    if not 0 <= slot < len(dims):
        raise ShapeError(f"slot {slot} out of range for factors {dims}")
    if op.dim != dims[slot]:
        raise ShapeError(f"operator dim {op.dim} does not match factor {slot} of dim {dims[slot]}")
    left = int(np.prod(dims[:slot]))
    right = int(np.prod(dims[slot + 1:]))
    m = op.matrix
    if left > 1:
        m = sp.kron(sp.identity(left, format="csr"), m, format="csr")
    if right > 1:
        m = sp.kron(m, sp.identity(right, format="csr"), format="csr")
    return SparseOperator(m)


def boson_parity(dim: int) -> SparseOperator:
    """``exp(i pi b^dag b)`` on a single truncated mode."""
    return SparseOperator(sp.diags((-1.0) ** np.arange(dim), 0))


def parity_operator(space: HilbertSpace) -> SparseOperator:
    """Z2 parity ``sigma_z (x) prod_k exp(i pi n_k)`` (diagonal in the product basis)."""
    diag = np.ones(1)
    if space.has_qubit:
        diag = np.array([1.0, -1.0])
    for d in space.boson_dims:
        diag = np.kron(diag, (-1.0) ** np.arange(d))
    return SparseOperator(sp.diags(diag, 0))


def squeeze_matrix(dim: int, r: float) -> np.ndarray:
    """Truncated ``S(r) = exp[r (b^2 - b^dag^2) / 2]`` as a dense unitary."""
    b = annihilation(dim).toarray()
    gen = 0.5 * r * (b @ b - b.T @ b.T)
    return scipy.linalg.expm(gen)


def displacement_matrix(dim: int, beta: complex) -> np.ndarray:
    """Truncated ``D(beta) = exp(beta b^dag - beta* b)`` as a dense unitary."""
    b = annihilation(dim).toarray()
    return scipy.linalg.expm(beta * b.conj().T - np.conj(beta) * b)


# Fock-basis state vectors from closed-form expansions.  They serve as
# oracles and never go through matrix exponentials.

def fock_state(dim: int, n: int) -> np.ndarray:
    if not 0 <= n < dim:
        raise InvalidDimension(f"level {n} outside cutoff {dim}")
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def coherent_state(dim: int, beta: complex) -> np.ndarray:
    """``exp(-|beta|^2/2) sum_n beta^n / sqrt(n!) |n>``, truncated and renormalized."""
    n = np.arange(dim)
    if beta == 0:
        return fock_state(dim, 0)
    logmag = n * log(abs(beta)) - 0.5 * np.array([lgamma(k + 1) for k in n]) - 0.5 * abs(beta) ** 2
    phase = np.exp(1j * n * np.angle(beta))
    v = np.exp(logmag) * phase
    return v / np.linalg.norm(v)


def squeezed_vacuum(dim: int, t: float) -> np.ndarray:
    """``exp[t (b^dag^2 - b^2)/2] |0>`` from its Fock expansion.

    Amplitudes are ``(tanh t)^k sqrt((2k)!) / (2^k k! sqrt(cosh t))`` on the
    even levels; with this convention the P quadrature is squeezed for t > 0.
    """
    v = np.zeros(dim, dtype=complex)
    th = np.tanh(t)
    amp = 1.0 / np.sqrt(np.cosh(t))
    for k in range(0, (dim + 1) // 2):
        if 2 * k >= dim:
            break
        v[2 * k] = amp
        # ratio between consecutive even amplitudes
        amp = amp * th * np.sqrt((2 * k + 1) * (2 * k + 2)) / (2 * (k + 1))
    return v / np.linalg.norm(v)
