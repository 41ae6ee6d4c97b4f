"""
Entanglement and mixedness diagnostics for two-qubit states
"""

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from loguru import logger

from .errors import ContractViolation
from .smallmat import ComplexMatrix, DensityMatrix, hermitian_eigenvalues

DEFAULT_VERDICT_TOL = 1e-9
# Below this the PT eigenvalue is treated as numerically negative
NPT_SIGN_FLOOR = 1e-13
ENTROPY_CLIP = 1e-14
SUBSYSTEM_SPECTRUM_TOL = 1e-10


@dataclass(frozen=True)
class EntanglementVerdict:
    min_pt_eigenvalue: float
    negativity: float
    entangled: bool
    tolerance: float
    indeterminate: bool

    @property
    def label(self) -> str:
        if self.entangled:
            return "entangled"
        return "indeterminate" if self.indeterminate else "separable"


def _pt_array(data: np.ndarray, subsystem: int) -> np.ndarray:
    # Indices (i1, i2, j1, j2): transpose swaps i_k with j_k for qubit k
    if subsystem not in (1, 2):
        raise ContractViolation(f"subsystem must be 1 or 2, got {subsystem!r}")
    lead = data.shape[:-2]
    tensor = data.reshape(lead + (2, 2, 2, 2))
    n = len(lead)
    axes = list(range(n)) + [n, n + 1, n + 2, n + 3]
    if subsystem == 1:
        axes[n], axes[n + 2] = axes[n + 2], axes[n]
    else:
        axes[n + 1], axes[n + 3] = axes[n + 3], axes[n + 1]
    return tensor.transpose(axes).reshape(data.shape)


def partial_transpose(rho: DensityMatrix, subsystem: int = 2) -> ComplexMatrix:
    """Transpose of one qubit's indices"""
    if not isinstance(rho, DensityMatrix):
        raise ContractViolation(f"expected DensityMatrix, got {type(rho).__name__}")
    return ComplexMatrix(_pt_array(rho.data, subsystem))


def partial_transpose_batch(stack: np.ndarray, subsystem: int = 2) -> np.ndarray:
    arr = np.asarray(stack, dtype=np.complex128)
    if arr.shape[-2:] != (4, 4):
        raise ContractViolation(f"expected a stack of 4x4 states, got shape {arr.shape}")
    return _pt_array(arr, subsystem)


def pt_spectrum(rho: DensityMatrix, subsystem: int = 2) -> np.ndarray:
    return hermitian_eigenvalues(_pt_array(rho.data, subsystem)[np.newaxis])[0]


def _verdict_from_spectrum(spectrum: np.ndarray, tol: float) -> EntanglementVerdict:
    min_pt = float(spectrum[0])
    negativity = float(-np.sum(spectrum[spectrum < 0.0]))
    entangled = min_pt < -tol
    indeterminate = abs(min_pt) <= tol
    if not entangled and not indeterminate:
        negativity = 0.0
    return EntanglementVerdict(
        min_pt_eigenvalue=min_pt,
        negativity=negativity,
        entangled=entangled,
        tolerance=tol,
        indeterminate=indeterminate,
    )


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not tol > 0:
        raise ContractViolation(f"verdict tolerance must be positive, got {tol}")
    return tol


def verdict(rho: DensityMatrix, tol: float = DEFAULT_VERDICT_TOL) -> EntanglementVerdict:
    """Partial-transpose entanglement verdict

    The PT spectra for the two subsystem choices must coincide; a mismatch
    beyond 1e-10 is a contract violation.
    """
    tol = _check_tol(tol)
    both = hermitian_eigenvalues(np.stack([_pt_array(rho.data, 1), _pt_array(rho.data, 2)]))
    mismatch = float(np.max(np.abs(both[0] - both[1])))
    if mismatch > SUBSYSTEM_SPECTRUM_TOL:
        raise ContractViolation(f"PT spectra of the two subsystems differ by {mismatch:.3e}")
    if mismatch > 1e-12:
        logger.warning(f"PT spectra of the two subsystems differ by {mismatch:.3e}")
    return _verdict_from_spectrum(both[1], tol)


def verdicts_batch(states: Sequence[DensityMatrix], tol: float = DEFAULT_VERDICT_TOL) -> List[EntanglementVerdict]:
    """Verdicts for many states with one batched eigen-solve"""
    tol = _check_tol(tol)
    if not states:
        return []
    stack = np.stack([s.data for s in states])
    spectra = hermitian_eigenvalues(partial_transpose_batch(stack, 2))
    return [_verdict_from_spectrum(row, tol) for row in spectra]


def is_npt(min_pt_eigenvalue: float, floor: float = NPT_SIGN_FLOOR) -> bool:
    return min_pt_eigenvalue < -floor


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """-Tr[rho log2 rho] in bits"""
    evals = hermitian_eigenvalues(rho.data[np.newaxis])[0]
    kept = evals[evals > ENTROPY_CLIP]
    value = float(-np.sum(kept * np.log2(kept)))
    return min(max(value, 0.0), 2.0)


def mixedness_fraction(rho: DensityMatrix) -> float:
    return von_neumann_entropy(rho) / 2.0


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    evals = hermitian_eigenvalues((rho.data - sigma.data)[np.newaxis])[0]
    return 0.5 * float(np.sum(np.abs(evals)))


def xy_block_populations(rho: DensityMatrix) -> Tuple[float, float, float]:
    """(|00> population, smaller and larger eigenvalue of the {|01>,|10>} block)"""
    block = rho.data[np.ix_([1, 2], [1, 2])]
    low, high = hermitian_eigenvalues(block[np.newaxis])[0]
    return float(rho.data[0, 0].real), float(low), float(high)


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -(p * math.log2(p) + (1.0 - p) * math.log2(1.0 - p))
