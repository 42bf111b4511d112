"""Dense operator algebra for small qubit registers.

Everything here is an explicit complex matrix wrapped in a thin validated
container.  Site indices are 1-based and site 1 is the leftmost (most
significant) tensor factor, so ``|01>`` on two qubits is basis index 1.
Registers are capped at 12 qubits: the point of this library is transparent
dense numerics, not scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NumericalCheckError

MAX_QUBITS = 12

HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-10
UNITARITY_ATOL = 1e-10
ORTHONORMALITY_ATOL = 1e-10
RECONSTRUCTION_RTOL = 1e-9
DEGENERACY_TOL = 1e-9

# Eigenvalues at or below this floor count as zero for support purposes
# (matrix logarithms, relative entropy).
EIGENVALUE_FLOOR = 1e-14

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
PAULIS = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}


@dataclass(frozen=True)
class QubitRegister:
    """A register of ``n`` qubits (1-based sites, site 1 leftmost)."""

    n: int

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or isinstance(self.n, bool):
            raise ValueError(f"qubit count must be an integer, got {self.n!r}")
        if self.n < 1:
            raise ValueError(f"register needs at least one qubit, got n={self.n}")
        if self.n > MAX_QUBITS:
            raise ValueError(
                f"n={self.n} exceeds the dense-storage ceiling of {MAX_QUBITS} qubits"
            )

    @property
    def dim(self) -> int:
        return 2**self.n

    def sites(self) -> range:
        return range(1, self.n + 1)


def _frozen_matrix(entries: np.ndarray, dim: int, what: str) -> np.ndarray:
    arr = np.array(entries, dtype=np.complex128)
    if arr.shape != (dim, dim):
        raise ValueError(f"{what} must be {dim}x{dim}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise NumericalCheckError(f"{what} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HermitianOperator:
    """A self-adjoint matrix on a qubit register."""

    register: QubitRegister
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = _frozen_matrix(self.entries, self.register.dim, "operator matrix")
        deviation = float(np.abs(entries - entries.conj().T).max())
        if deviation > HERMITICITY_ATOL:
            raise NumericalCheckError(
                f"matrix is not self-adjoint: max |A - A^dag| = {deviation:.3e} "
                f"exceeds {HERMITICITY_ATOL:.0e}"
            )
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.register.dim


@dataclass(frozen=True)
class UnitaryOperator:
    """A unitary matrix on a qubit register, validated at construction."""

    register: QubitRegister
    entries: np.ndarray
    tolerance: float = UNITARITY_ATOL

    def __post_init__(self) -> None:
        entries = _frozen_matrix(self.entries, self.register.dim, "unitary matrix")
        gram = entries.conj().T @ entries
        deviation = float(np.abs(gram - np.eye(self.register.dim)).max())
        if deviation > self.tolerance:
            raise NumericalCheckError(
                f"unitarity check failed: max |U^dag U - I| = {deviation:.3e} "
                f"exceeds {self.tolerance:.0e}"
            )
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.register.dim


@dataclass(frozen=True)
class DensityMatrix:
    """A trace-one positive semidefinite matrix on a qubit register.

    Slightly negative eigenvalues from roundoff are tolerated down to
    -1e-10 and are clamped to zero by every function of the spectrum.
    """

    register: QubitRegister
    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = _frozen_matrix(self.entries, self.register.dim, "density matrix")
        herm_dev = float(np.abs(entries - entries.conj().T).max())
        if herm_dev > HERMITICITY_ATOL:
            raise NumericalCheckError(
                f"density matrix is not self-adjoint: deviation {herm_dev:.3e}"
            )
        trace_dev = abs(complex(np.trace(entries)) - 1.0)
        if trace_dev > TRACE_ATOL:
            raise NumericalCheckError(
                f"density matrix trace differs from 1 by {trace_dev:.3e}"
            )
        smallest = float(np.linalg.eigvalsh(entries)[0])
        if smallest < -PSD_ATOL:
            raise NumericalCheckError(
                f"density matrix has eigenvalue {smallest:.3e} below -{PSD_ATOL:.0e}"
            )
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.register.dim


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and matching orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    degeneracy_tolerance: float = DEGENERACY_TOL

    def __post_init__(self) -> None:
        eigenvalues = np.array(self.eigenvalues, dtype=np.float64)
        eigenvectors = np.array(self.eigenvectors, dtype=np.complex128)
        dim = eigenvalues.size
        if eigenvectors.shape != (dim, dim):
            raise ValueError("eigenvector matrix shape does not match eigenvalue count")
        if np.any(np.diff(eigenvalues) < 0):
            raise ValueError("eigenvalues must be sorted in ascending order")
        gram_dev = float(np.abs(eigenvectors.conj().T @ eigenvectors - np.eye(dim)).max())
        if gram_dev > ORTHONORMALITY_ATOL:
            raise NumericalCheckError(
                f"eigenvectors are not orthonormal: deviation {gram_dev:.3e}"
            )
        eigenvalues.setflags(write=False)
        eigenvectors.setflags(write=False)
        object.__setattr__(self, "eigenvalues", eigenvalues)
        object.__setattr__(self, "eigenvectors", eigenvectors)

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.size)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def degenerate_blocks(self) -> list[slice]:
        """Contiguous index ranges of (numerically) equal eigenvalues."""
        blocks: list[slice] = []
        start = 0
        for i in range(1, self.dim + 1):
            if i == self.dim or self.eigenvalues[i] - self.eigenvalues[i - 1] > self.degeneracy_tolerance:
                blocks.append(slice(start, i))
                start = i
        return blocks


def spectral_decompose(operator: HermitianOperator) -> SpectralDecomposition:
    """Diagonalize a Hermitian operator, checking the reconstruction error."""
    matrix = operator.entries
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as err:
        raise NumericalCheckError(
            f"eigensolver failed to converge on a {matrix.shape[0]}x{matrix.shape[1]} "
            f"matrix with max-entry norm {np.abs(matrix).max():.3e}"
        ) from err
    decomposition = SpectralDecomposition(eigenvalues, eigenvectors)
    scale = 1.0 + float(np.abs(matrix).max())
    residual = float(np.abs(decomposition.reconstruct() - matrix).max())
    if residual > RECONSTRUCTION_RTOL * scale:
        raise NumericalCheckError(
            f"spectral reconstruction error {residual:.3e} exceeds "
            f"{RECONSTRUCTION_RTOL:.0e} * (1 + max|A|)"
        )
    return decomposition


def hermitian_function(
    operator: HermitianOperator, func: Callable[[np.ndarray], np.ndarray]
) -> HermitianOperator:
    """Apply a real scalar function to a Hermitian operator via its spectrum.

    ``func`` is called on the eigenvalue array (vectorized callables work
    directly; scalar ones are mapped).  Non-finite results raise, since they
    mean the function is undefined at an eigenvalue.
    """
    decomposition = spectral_decompose(operator)
    eigenvalues = decomposition.eigenvalues
    with np.errstate(divide="ignore", invalid="ignore"):
        try:
            mapped = np.asarray(func(eigenvalues), dtype=np.float64)
        except (TypeError, ValueError):
            mapped = np.asarray([func(x) for x in eigenvalues], dtype=np.float64)
        if mapped.shape != eigenvalues.shape:
            mapped = np.asarray([func(x) for x in eigenvalues], dtype=np.float64)
    if not np.all(np.isfinite(mapped)):
        bad = float(eigenvalues[~np.isfinite(mapped)][0])
        raise NumericalCheckError(
            f"function is undefined at eigenvalue {bad:.6e} (non-finite result)"
        )
    v = decomposition.eigenvectors
    entries = (v * mapped) @ v.conj().T
    entries = 0.5 * (entries + entries.conj().T)
    return HermitianOperator(operator.register, entries)


def evolution_operator(hamiltonian: HermitianOperator, duration: float) -> UnitaryOperator:
    """exp(-i H t) built from the spectral decomposition, hence exactly unitary
    up to roundoff."""
    if not math.isfinite(duration):
        raise ValueError("evolution duration must be finite")
    decomposition = spectral_decompose(hamiltonian)
    phases = np.exp(-1j * decomposition.eigenvalues * duration)
    v = decomposition.eigenvectors
    return UnitaryOperator(hamiltonian.register, (v * phases) @ v.conj().T)


def embed_pauli(register: QubitRegister, site: int, axis: str) -> HermitianOperator:
    """Single-site Pauli sigma^axis acting on ``site`` of the register."""
    if axis not in PAULIS:
        raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")
    return HermitianOperator(register, _embed_matrix(register.n, PAULIS[axis], (site,)))


def embed_operator(
    register: QubitRegister, entries: np.ndarray, sites: Sequence[int]
) -> np.ndarray:
    """Embed an operator on ``len(sites)`` qubits into the full register.

    Tensor factor ``j`` of ``entries`` is placed on ``sites[j]``.  Returns the
    raw matrix; wrap it in the container matching its symmetry.
    """
    return _embed_matrix(register.n, np.asarray(entries, dtype=np.complex128), tuple(sites))


def _embed_matrix(n: int, op: np.ndarray, sites: tuple[int, ...]) -> np.ndarray:
    k = len(sites)
    if op.shape != (2**k, 2**k):
        raise ValueError(f"operator on {k} sites must be {2**k}x{2**k}, got {op.shape}")
    if len(set(sites)) != k:
        raise ValueError(f"sites must be distinct, got {sites}")
    for site in sites:
        if not 1 <= site <= n:
            raise ValueError(f"site {site} outside register 1..{n}")
    if k == n and sites == tuple(range(1, n + 1)):
        return op.copy()
    rest = np.eye(2 ** (n - k), dtype=np.complex128)
    full = np.kron(op, rest).reshape((2,) * (2 * n))
    # Row axes currently ordered [op sites..., remaining sites...]; build the
    # permutation that sends them to register order.
    source_order = list(sites) + [s for s in range(1, n + 1) if s not in sites]
    perm = [source_order.index(s) for s in range(1, n + 1)]
    full = full.transpose(perm + [p + n for p in perm])
    return np.ascontiguousarray(full.reshape(2**n, 2**n))


def partial_trace(state: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """Trace out every site not listed in ``keep`` (1-based, any order).

    The reduced state lives on a register of ``len(keep)`` qubits ordered by
    ascending original site index.
    """
    keep_sites = sorted(set(int(s) for s in keep))
    n = state.register.n
    if not keep_sites:
        raise ValueError("keep must name at least one site")
    for site in keep_sites:
        if not 1 <= site <= n:
            raise ValueError(f"site {site} outside register 1..{n}")
    reduced = _partial_trace_matrix(state.entries, n, [s - 1 for s in keep_sites])
    return DensityMatrix(QubitRegister(len(keep_sites)), reduced)


def _partial_trace_matrix(entries: np.ndarray, n: int, keep0: list[int]) -> np.ndarray:
    """Partial trace of a raw matrix over the complement of ``keep0`` (0-based)."""
    k = len(keep0)
    if k == n:
        return entries.copy()
    traced = [s for s in range(n) if s not in keep0]
    tensor = entries.reshape((2,) * (2 * n))
    row = list(range(n))
    col = [row[s] if s in traced else n + s for s in range(n)]
    out = [row[s] for s in keep0] + [n + s for s in keep0]
    reduced = np.einsum(tensor, row + col, out)
    return np.ascontiguousarray(reduced.reshape(2**k, 2**k))


def tensor_product(left: DensityMatrix, right: DensityMatrix) -> DensityMatrix:
    """Joint state ``left (x) right`` on the concatenated register."""
    register = QubitRegister(left.register.n + right.register.n)
    return DensityMatrix(register, np.kron(left.entries, right.entries))


def dicke_state(register: QubitRegister, k_ones: int) -> np.ndarray:
    """Equal-amplitude superposition of all basis states with ``k_ones`` ones."""
    n = register.n
    if not isinstance(k_ones, int) or not 0 <= k_ones <= n:
        raise ValueError(f"k_ones must lie in 0..{n}, got {k_ones}")
    vec = np.zeros(register.dim, dtype=np.complex128)
    for ones in itertools.combinations(range(n), k_ones):
        index = sum(1 << (n - 1 - site) for site in ones)
        vec[index] = 1.0
    return vec / math.sqrt(math.comb(n, k_ones))


def pure_state(register: QubitRegister, amplitudes: np.ndarray) -> DensityMatrix:
    """Projector onto a (normalized) state vector."""
    vec = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    if vec.size != register.dim:
        raise ValueError(f"state vector must have length {register.dim}, got {vec.size}")
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    vec = vec / norm
    return DensityMatrix(register, np.outer(vec, vec.conj()))


# JSON matrix exchange format: {"n": qubits, "re": [[...]], "im": [[...]]},
# row-major.  Loaders re-run the container validation, so a file holding a
# non-unitary matrix fails at load time.


def matrix_to_json(register: QubitRegister, entries: np.ndarray) -> dict:
    arr = np.asarray(entries, dtype=np.complex128)
    return {
        "n": register.n,
        "re": arr.real.tolist(),
        "im": arr.imag.tolist(),
    }


def operator_to_json(operator: HermitianOperator | UnitaryOperator | DensityMatrix) -> dict:
    return matrix_to_json(operator.register, operator.entries)


def matrix_from_json(payload: dict) -> tuple[QubitRegister, np.ndarray]:
    if not isinstance(payload, dict):
        raise ValueError("matrix payload must be a JSON object")
    for key in ("n", "re", "im"):
        if key not in payload:
            raise ValueError(f"matrix payload missing key {key!r}")
    extra = set(payload) - {"n", "re", "im"}
    if extra:
        raise ValueError(f"matrix payload has unknown keys {sorted(extra)}")
    register = QubitRegister(payload["n"])
    real = np.asarray(payload["re"], dtype=np.float64)
    imag = np.asarray(payload["im"], dtype=np.float64)
    if real.shape != (register.dim, register.dim) or imag.shape != real.shape:
        raise ValueError(
            f"matrix payload for n={register.n} must hold {register.dim}x{register.dim} parts"
        )
    return register, real + 1j * imag


def hermitian_from_json(payload: dict) -> HermitianOperator:
    register, entries = matrix_from_json(payload)
    return HermitianOperator(register, entries)


def density_from_json(payload: dict) -> DensityMatrix:
    register, entries = matrix_from_json(payload)
    return DensityMatrix(register, entries)


def unitary_from_json(payload: dict, tolerance: float = UNITARITY_ATOL) -> UnitaryOperator:
    register, entries = matrix_from_json(payload)
    return UnitaryOperator(register, entries, tolerance)
