"""
Small-matrix kernel: exact-size complex operators for one and two qubits

All operators are 2x2 (one qubit) or 4x4 (two qubits, basis |00>, |01>, |10>,
|11> with qubit 1 as the left tensor factor). Values are immutable; every
function here is pure.
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from loguru import logger

from .errors import ContractViolation, InvalidStateError

# Tolerances shared by every module
OPERATOR_TOL = 1e-10
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
DENSITY_HERMITIAN_TOL = 1e-12
DENSITY_TRACE_TOL = 1e-12
DENSITY_PSD_TOL = 1e-10

ALLOWED_DIMS = (2, 4)

_JACOBI_OFF_TOL = 1e-14
_JACOBI_MAX_SWEEPS = 50
_TIE_TOL = 1e-10

ArrayLike = Union[np.ndarray, Sequence]


def as_complex(value) -> complex:
    """Convert to a finite Python complex, rejecting NaN and Inf"""
    z = complex(value)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ContractViolation(f"non-finite complex scalar: {value!r}")
    return z


class ComplexMatrix:
    """Immutable dim x dim complex operator, dim in {2, 4}

    Equality is never implicit: compare with ``is_close(other, tol)``.
    """

    __slots__ = ("_data",)

    def __init__(self, data: ArrayLike):
        arr = np.array(data, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] not in ALLOWED_DIMS:
            raise ContractViolation(f"expected a 2x2 or 4x4 matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ContractViolation("matrix has non-finite entries")
        arr.flags.writeable = False
        self._data = arr

    @classmethod
    def identity(cls, dim: int = 4) -> "ComplexMatrix":
        return cls(np.eye(dim, dtype=np.complex128))

    @classmethod
    def diag(cls, values: ArrayLike) -> "ComplexMatrix":
        return cls(np.diag(np.asarray(values, dtype=np.complex128)))

    @classmethod
    def projector(cls, vector: ArrayLike) -> "ComplexMatrix":
        """|v><v| for a (not necessarily normalized) vector"""
        v = np.asarray(vector, dtype=np.complex128)
        return cls(np.outer(v, v.conj()))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dim(self) -> int:
        return self._data.shape[0]

    def entry(self, row: int, col: int) -> complex:
        return complex(self._data[row, col])

    def adjoint(self) -> "ComplexMatrix":
        return ComplexMatrix(self._data.conj().T)

    def transpose(self) -> "ComplexMatrix":
        return ComplexMatrix(self._data.T)

    def trace(self) -> complex:
        return complex(np.trace(self._data))

    def norm(self) -> float:
        """Operator (spectral) norm"""
        return float(np.linalg.norm(self._data, 2))

    def distance(self, other: "ComplexMatrix") -> float:
        self._check_same_dim(other)
        return float(np.linalg.norm(self._data - other._data, 2))

    def is_close(self, other: "ComplexMatrix", tol: float) -> bool:
        return self.dim == other.dim and self.distance(other) <= tol

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return float(np.linalg.norm(self._data - self._data.conj().T, 2)) <= tol

    def is_unitary(self, tol: float = UNITARY_TOL) -> bool:
        gram = self._data.conj().T @ self._data
        return float(np.linalg.norm(gram - np.eye(self.dim), 2)) <= tol

    def apply(self, vector: ArrayLike) -> np.ndarray:
        v = np.asarray(vector, dtype=np.complex128)
        if v.shape != (self.dim,):
            raise ContractViolation(f"vector of length {self.dim} expected, got {v.shape}")
        return self._data @ v

    def _check_same_dim(self, other: "ComplexMatrix") -> None:
        if not isinstance(other, ComplexMatrix):
            raise ContractViolation(f"expected ComplexMatrix, got {type(other).__name__}")
        if other.dim != self.dim:
            raise ContractViolation(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __matmul__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        self._check_same_dim(other)
        return ComplexMatrix(self._data @ other._data)

    def __add__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        self._check_same_dim(other)
        return ComplexMatrix(self._data + other._data)

    def __sub__(self, other: "ComplexMatrix") -> "ComplexMatrix":
        self._check_same_dim(other)
        return ComplexMatrix(self._data - other._data)

    def __neg__(self) -> "ComplexMatrix":
        return ComplexMatrix(-self._data)

    def __mul__(self, scalar) -> "ComplexMatrix":
        return ComplexMatrix(self._data * as_complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "ComplexMatrix":
        return ComplexMatrix(self._data / as_complex(scalar))

    def __repr__(self) -> str:
        return f"ComplexMatrix(dim={self.dim}, data={np.array2string(self._data, precision=6)})"


PAULI = {
    "i": ComplexMatrix([[1, 0], [0, 1]]),
    "x": ComplexMatrix([[0, 1], [1, 0]]),
    "y": ComplexMatrix([[0, -1j], [1j, 0]]),
    "z": ComplexMatrix([[1, 0], [0, -1]]),
}


def basis_ket(label: str) -> np.ndarray:
    """Computational basis vector for a bit string such as '0' or '01'"""
    if len(label) not in (1, 2) or set(label) - {"0", "1"}:
        raise ContractViolation(f"basis label must be 1 or 2 bits, got {label!r}")
    vec = np.zeros(2 ** len(label), dtype=np.complex128)
    vec[int(label, 2)] = 1.0
    return vec


def kron(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    """Tensor product a (qubit 1) ⊗ b (qubit 2) of two single-qubit operators"""
    if a.dim != 2 or b.dim != 2:
        raise ContractViolation(f"kron expects two 2x2 operators, got dims {a.dim} and {b.dim}")
    return ComplexMatrix(np.kron(a.data, b.data))


class DensityMatrix:
    """Two-qubit density matrix

    Construction checks Hermiticity and unit trace within 1e-12 and
    eigenvalues >= -1e-10; the stored matrix is Hermitized and renormalized.
    """

    __slots__ = ("_mat",)

    def __init__(self, mat: Union[ComplexMatrix, ArrayLike]):
        m = mat if isinstance(mat, ComplexMatrix) else ComplexMatrix(mat)
        if m.dim != 4:
            raise InvalidStateError(f"density matrices are 4x4, got dim {m.dim}")
        data = m.data
        skew = float(np.max(np.abs(data - data.conj().T)))
        if skew > DENSITY_HERMITIAN_TOL:
            raise InvalidStateError(f"state is not Hermitian (deviation {skew:.3e})")
        tr = np.trace(data)
        drift = abs(tr - 1.0)
        if drift > DENSITY_TRACE_TOL:
            raise InvalidStateError(f"state trace {tr:.15g} deviates from 1 by {drift:.3e}")
        clean = 0.5 * (data + data.conj().T) / tr.real
        try:
            np.linalg.cholesky(clean + DENSITY_PSD_TOL * np.eye(4))
        except np.linalg.LinAlgError:
            raise InvalidStateError("state has an eigenvalue below -1e-10") from None
        self._mat = ComplexMatrix(clean)

    @classmethod
    def from_ket(cls, vector: ArrayLike) -> "DensityMatrix":
        v = np.asarray(vector, dtype=np.complex128)
        norm = np.linalg.norm(v)
        if v.shape != (4,) or norm == 0:
            raise InvalidStateError("pure two-qubit state needs a nonzero vector of length 4")
        return cls(ComplexMatrix.projector(v / norm))

    @classmethod
    def product(cls, rho_a: ComplexMatrix, rho_b: ComplexMatrix) -> "DensityMatrix":
        return cls(kron(rho_a, rho_b))

    @classmethod
    def maximally_mixed(cls) -> "DensityMatrix":
        return cls(ComplexMatrix.identity(4) / 4)

    @property
    def mat(self) -> ComplexMatrix:
        return self._mat

    @property
    def data(self) -> np.ndarray:
        return self._mat.data

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.data)).copy()

    def purity(self) -> float:
        return float(np.real(np.trace(self.data @ self.data)))

    def __repr__(self) -> str:
        return f"DensityMatrix({np.array2string(self.data, precision=6)})"


@dataclass(frozen=True, eq=False)
class HermitianSpectrum:
    """Ascending eigenvalues and matching orthonormal eigenvectors (columns)"""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        n = self.eigenvalues.shape[0]
        if self.eigenvectors.shape != (n, n):
            raise ContractViolation("eigenvector matrix shape does not match eigenvalue count")
        if np.any(np.diff(self.eigenvalues) < 0):
            raise ContractViolation("eigenvalues must be ascending")
        gram = self.eigenvectors.conj().T @ self.eigenvectors
        if float(np.max(np.abs(gram - np.eye(n)))) > OPERATOR_TOL:
            raise ContractViolation("eigenvectors are not orthonormal")
        self.eigenvalues.flags.writeable = False
        self.eigenvectors.flags.writeable = False

    def reconstruct(self) -> ComplexMatrix:
        v = self.eigenvectors
        return ComplexMatrix((v * self.eigenvalues) @ v.conj().T)


def _jacobi_rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> Tuple[np.ndarray, np.ndarray]:
    # Phase-strip a[p, q], then the real symmetric rotation zeroing it.
    apq = a[..., p, q]
    r = np.abs(apq)
    active = r > 0.0
    safe_r = np.where(active, r, 1.0)
    phase_conj = np.where(active, np.conj(apq) / safe_r, 1.0)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        zeta = (a[..., q, q].real - a[..., p, p].real) / (2.0 * safe_r)
        t = np.where(zeta >= 0.0, 1.0, -1.0) / (np.abs(zeta) + np.sqrt(zeta * zeta + 1.0))
    t = np.where(active & np.isfinite(t), t, 0.0)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c

    u = np.broadcast_to(np.eye(a.shape[-1], dtype=np.complex128), a.shape).copy()
    u[..., p, p] = c
    u[..., p, q] = s
    u[..., q, p] = -s * phase_conj
    u[..., q, q] = c * phase_conj
    a = np.conj(np.swapaxes(u, -1, -2)) @ a @ u
    v = v @ u
    return a, v


def _jacobi_diagonalize(stack: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Cyclic complex Jacobi on a stack (..., n, n) of Hermitian matrices

    Returns unsorted eigenvalues (..., n) and eigenvector columns (..., n, n).
    """
    a = np.array(stack, dtype=np.complex128)
    n = a.shape[-1]
    v = np.broadcast_to(np.eye(n, dtype=np.complex128), a.shape).copy()
    off_mask = ~np.eye(n, dtype=bool)
    scale = float(np.max(np.linalg.norm(a, axis=(-2, -1)), initial=0.0))
    sweeps = 0
    for sweeps in range(1, _JACOBI_MAX_SWEEPS + 1):
        off = float(np.max(np.sqrt(np.sum(np.abs(a[..., off_mask]) ** 2, axis=-1)), initial=0.0))
        if off <= _JACOBI_OFF_TOL * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                a, v = _jacobi_rotate(a, v, p, q)
    else:
        logger.warning(f"Jacobi stopped after {_JACOBI_MAX_SWEEPS} sweeps without reaching tolerance")
    logger.trace(f"Jacobi converged in {sweeps} sweeps for batch shape {a.shape[:-2]}")
    return np.real(np.diagonal(a, axis1=-2, axis2=-1)).copy(), v


def _check_hermitian(h: ComplexMatrix) -> None:
    if not isinstance(h, ComplexMatrix):
        raise ContractViolation(f"expected ComplexMatrix, got {type(h).__name__}")
    if not h.is_hermitian(HERMITIAN_TOL):
        raise ContractViolation("operator is not Hermitian within 1e-10")


def _phase_fix(vectors: np.ndarray) -> np.ndarray:
    fixed = vectors.copy()
    for k in range(fixed.shape[1]):
        col = fixed[:, k]
        lead = np.flatnonzero(np.abs(col) > 1e-12)
        if lead.size:
            z = col[lead[0]]
            fixed[:, k] = col * (np.conj(z) / abs(z))
    return fixed


def _tie_key(vector: np.ndarray) -> Tuple[float, ...]:
    # Descending lexicographic order over (re, im) pairs of the phase-fixed vector
    return tuple(-round(float(x), 12) for z in vector for x in (z.real, z.imag))


def hermitian_eigensystem(h: ComplexMatrix) -> HermitianSpectrum:
    """Eigendecomposition of a Hermitian 2x2 or 4x4 operator

    Eigenvalues ascend; each eigenvector has its first nonzero component real
    positive, and eigenvectors of a degenerate eigenvalue are ordered
    lexicographically.
    """
    _check_hermitian(h)
    herm = 0.5 * (h.data + h.data.conj().T)
    evals, evecs = _jacobi_diagonalize(herm[np.newaxis])
    evals, evecs = evals[0], _phase_fix(evecs[0])

    order = list(np.argsort(evals, kind="stable"))
    scale = max(1.0, float(np.max(np.abs(evals))))
    grouped = []
    values = np.empty_like(evals)
    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and evals[order[stop]] - evals[order[start]] <= _TIE_TOL * scale:
            stop += 1
        group = sorted(order[start:stop], key=lambda k: _tie_key(evecs[:, k]))
        # one shared value per tie group
        values[start:stop] = float(np.mean(evals[group]))
        grouped.extend(group)
        start = stop

    return HermitianSpectrum(eigenvalues=values, eigenvectors=evecs[:, grouped].copy())


def hermitian_eigenvalues(stack: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of a stack (..., n, n) of Hermitian matrices"""
    arr = np.asarray(stack, dtype=np.complex128)
    if arr.ndim < 2 or arr.shape[-1] != arr.shape[-2] or arr.shape[-1] not in ALLOWED_DIMS:
        raise ContractViolation(f"expected a stack of 2x2 or 4x4 matrices, got shape {arr.shape}")
    skew = np.abs(arr - np.conj(np.swapaxes(arr, -1, -2)))
    if skew.size and float(np.max(skew)) > HERMITIAN_TOL:
        raise ContractViolation("stack contains a non-Hermitian matrix")
    herm = 0.5 * (arr + np.conj(np.swapaxes(arr, -1, -2)))
    evals, _ = _jacobi_diagonalize(herm)
    return np.sort(evals, axis=-1)


def unitary_exp(h: ComplexMatrix, angle_scale: float) -> ComplexMatrix:
    """exp(-i * angle_scale * h) for Hermitian h"""
    spectrum = hermitian_eigensystem(h)
    v = spectrum.eigenvectors
    phases = np.exp(-1j * float(angle_scale) * spectrum.eigenvalues)
    return ComplexMatrix((v * phases) @ v.conj().T)


def evolve(rho: DensityMatrix, u: ComplexMatrix) -> DensityMatrix:
    """U rho U^dagger"""
    if u.dim != 4:
        raise ContractViolation(f"two-qubit evolution needs a 4x4 unitary, got dim {u.dim}")
    if not u.is_unitary(UNITARY_TOL):
        raise ContractViolation("evolution operator is not unitary within 1e-10")
    return DensityMatrix(u.data @ rho.data @ u.data.conj().T)
