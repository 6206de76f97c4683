"""Occupation-number bases and operators for small multimode bosonic systems.

A basis enumerates occupation tuples ``(n_0, ..., n_{M-1})`` under per-mode
cutoffs, optionally restricted to one total-excitation sector.  Operator
matrices stay attached to the basis they were built on; they are stored dense
below ``DENSE_DIM_LIMIT`` and as CSR sparse matrices above it.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import scipy.sparse as sp

from .errors import BasisMismatch, EmptySector, NotHermitian

DENSE_DIM_LIMIT = 64
HERMITICITY_RTOL = 1e-14
EIGEN_RESIDUAL_RTOL = 1e-10

RAISE = "raise"
LOWER = "lower"


class FockBasis:
    """Deterministic enumeration of occupation tuples.

    Tuples are listed in descending lexicographic order, which keeps a
    single-excitation sector in plain mode order: (1,0,0), (0,1,0), (0,0,1).
    """

    def __init__(self, mode_count: int, cutoffs, sector: int | None = None):
        if mode_count < 1:
            raise ValueError("mode_count must be >= 1")
        cutoffs = tuple(int(c) for c in cutoffs)
        if len(cutoffs) != mode_count:
            raise ValueError("need exactly one cutoff per mode")
        if any(c < 0 for c in cutoffs):
            raise ValueError("cutoffs must be >= 0")
        if sector is not None:
            sector = int(sector)
            if sector < 0:
                raise ValueError("sector must be >= 0")
            if sector > sum(cutoffs):
                raise EmptySector(
                    f"sector {sector} exceeds the reachable total {sum(cutoffs)}"
                )
        self.mode_count = mode_count
        self.cutoffs = cutoffs
        self.sector = sector
        produced = itertools.product(*(range(c, -1, -1) for c in cutoffs))
        if sector is not None:
            produced = (t for t in produced if sum(t) == sector)
        self.tuples: tuple[tuple[int, ...], ...] = tuple(produced)
        if not self.tuples:
            raise EmptySector("no occupation tuple satisfies the constraints")
        self.index = {t: i for i, t in enumerate(self.tuples)}
        self.dim = len(self.tuples)

    def state_index(self, occupation) -> int:
        occupation = tuple(int(n) for n in occupation)
        try:
            return self.index[occupation]
        except KeyError:
            raise BasisMismatch(f"occupation {occupation} not in basis") from None

    def __contains__(self, occupation) -> bool:
        return tuple(occupation) in self.index

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and self.mode_count == other.mode_count
            and self.cutoffs == other.cutoffs
            and self.sector == other.sector
        )

    def __hash__(self):
        return hash((type(self).__name__, self.mode_count, self.cutoffs, self.sector))

    def __repr__(self):
        return (
            f"FockBasis(mode_count={self.mode_count}, cutoffs={self.cutoffs}, "
            f"sector={self.sector}, dim={self.dim})"
        )


def enumerate_basis(mode_count: int, cutoffs, sector: int | None = None) -> FockBasis:
    """Build the basis descriptor for the given cutoffs and optional sector."""
    return FockBasis(mode_count, cutoffs, sector)


class StateVector:
    """Complex amplitudes over one enumerated basis."""

    def __init__(self, basis, amplitudes):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        if amplitudes.shape != (basis.dim,):
            raise BasisMismatch(
                f"amplitude vector of shape {amplitudes.shape} does not fit "
                f"basis of dimension {basis.dim}"
            )
        self.basis = basis
        self.amplitudes = amplitudes

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / n)

    def copy(self) -> "StateVector":
        return StateVector(self.basis, self.amplitudes.copy())

    def amplitude(self, occupation) -> complex:
        return complex(self.amplitudes[self.basis.state_index(occupation)])

    def __repr__(self):
        return f"StateVector(dim={self.basis.dim}, norm={self.norm():.6g})"


def basis_state(basis, occupation) -> StateVector:
    """Unit vector on a single occupation tuple."""
    amps = np.zeros(basis.dim, dtype=complex)
    amps[basis.state_index(occupation)] = 1.0
    return StateVector(basis, amps)


class OperatorMatrix:
    """Matrix attached to a basis, sparse above DENSE_DIM_LIMIT."""

    def __init__(self, basis, data):
        self.basis = basis
        if sp.issparse(data):
            if basis.dim < DENSE_DIM_LIMIT:
                data = data.toarray().astype(complex)
            else:
                data = sp.csr_matrix(data, dtype=complex)
        else:
            data = np.asarray(data, dtype=complex)
            if basis.dim >= DENSE_DIM_LIMIT:
                data = sp.csr_matrix(data)
        if data.shape != (basis.dim, basis.dim):
            raise BasisMismatch(
                f"matrix of shape {data.shape} does not fit basis of dimension {basis.dim}"
            )
        self.data = data

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.data)

    def dense(self) -> np.ndarray:
        return self.data.toarray() if self.is_sparse else np.array(self.data)

    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.basis, self.data.conj().T)

    def hermiticity_defect(self) -> float:
        diff = self.data - self.data.conj().T
        if sp.issparse(diff):
            return float(np.abs(diff.data).max()) if diff.nnz else 0.0
        return float(np.abs(diff).max()) if diff.size else 0.0

    def max_abs(self) -> float:
        if self.is_sparse:
            return float(np.abs(self.data.data).max()) if self.data.nnz else 0.0
        return float(np.abs(self.data).max()) if self.data.size else 0.0

    def norm2(self) -> float:
        """Largest singular value."""
        if self.max_abs() == 0.0:
            return 0.0
        return float(np.linalg.norm(self.dense(), 2))

    def _check_same_basis(self, other):
        if self.basis != other.basis:
            raise BasisMismatch("operands live on different bases")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check_same_basis(other)
            return OperatorMatrix(self.basis, self.data @ other.data)
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self._check_same_basis(other)
        return OperatorMatrix(self.basis, self.data + other.data)

    def __sub__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self._check_same_basis(other)
        return OperatorMatrix(self.basis, self.data - other.data)

    def __mul__(self, scalar):
        return OperatorMatrix(self.basis, self.data * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return OperatorMatrix(self.basis, -self.data)

    def __repr__(self):
        kind = "sparse" if self.is_sparse else "dense"
        return f"OperatorMatrix(dim={self.basis.dim}, {kind})"


def identity(basis) -> OperatorMatrix:
    return OperatorMatrix(basis, sp.identity(basis.dim, dtype=complex, format="csr"))


def operator_from_moves(basis, moves) -> OperatorMatrix:
    """Assemble a matrix from occupation moves.

    ``moves`` is an iterable of ``(delta, amplitude)`` pairs: ``delta`` shifts
    each mode's occupation and ``amplitude`` maps a source tuple to the matrix
    element.  Moves whose target falls outside the basis are dropped, which
    realizes the zero rows of truncated raising operators.
    """
    rows, cols, vals = [], [], []
    for j, src in enumerate(basis.tuples):
        for delta, amplitude in moves:
            val = amplitude(src)
            if val == 0.0:
                continue
            target = tuple(n + d for n, d in zip(src, delta))
            i = basis.index.get(target)
            if i is None:
                continue
            rows.append(i)
            cols.append(j)
            vals.append(val)
    mat = sp.csr_matrix(
        (vals, (rows, cols)), shape=(basis.dim, basis.dim), dtype=complex
    )
    return OperatorMatrix(basis, mat)


def _unit_delta(mode_count: int, mode: int, step: int) -> tuple[int, ...]:
    delta = [0] * mode_count
    delta[mode] = step
    return tuple(delta)


def ladder(basis, mode: int, kind: str) -> OperatorMatrix:
    """Single-mode raising or lowering operator.

    Raising maps ``n -> n+1`` with amplitude ``sqrt(n+1)``; lowering maps
    ``n -> n-1`` with amplitude ``sqrt(n)``.  Targets outside the cutoff or
    sector constraints give zero rows.
    """
    if not 0 <= mode < basis.mode_count:
        raise ValueError(f"mode {mode} out of range")
    if kind == RAISE:
        move = (_unit_delta(basis.mode_count, mode, +1),
                lambda t: math.sqrt(t[mode] + 1))
    elif kind == LOWER:
        move = (_unit_delta(basis.mode_count, mode, -1),
                lambda t: math.sqrt(t[mode]))
    else:
        raise ValueError(f"kind must be {RAISE!r} or {LOWER!r}, got {kind!r}")
    return operator_from_moves(basis, [move])


def hop(basis, src_mode: int, dst_mode: int) -> OperatorMatrix:
    """Excitation transfer ``dst_raise . src_lower`` built in one pass.

    Conserves total excitation, so it is exact on sector-restricted bases
    where a product of two one-mode ladders would vanish.
    """
    if src_mode == dst_mode:
        raise ValueError("source and destination modes must differ")
    delta = [0] * basis.mode_count
    delta[src_mode] = -1
    delta[dst_mode] = +1

    def amplitude(t):
        return math.sqrt(t[src_mode]) * math.sqrt(t[dst_mode] + 1)

    return operator_from_moves(basis, [(tuple(delta), amplitude)])


def number_operator(basis, mode: int) -> OperatorMatrix:
    diag = np.array([t[mode] for t in basis.tuples], dtype=complex)
    return OperatorMatrix(basis, sp.diags(diag, format="csr"))


def total_number_operator(basis) -> OperatorMatrix:
    diag = np.array([sum(t) for t in basis.tuples], dtype=complex)
    return OperatorMatrix(basis, sp.diags(diag, format="csr"))


def apply(op: OperatorMatrix, state: StateVector) -> StateVector:
    if op.basis != state.basis:
        raise BasisMismatch("operator and state live on different bases")
    return StateVector(state.basis, op.data @ state.amplitudes)


def inner(left: StateVector, right: StateVector) -> complex:
    """Inner product, conjugate linear in the first argument."""
    if left.basis != right.basis:
        raise BasisMismatch("states live on different bases")
    return complex(np.vdot(left.amplitudes, right.amplitudes))


def norm(state: StateVector) -> float:
    return state.norm()


def eigendecompose(op: OperatorMatrix):
    """Eigenpairs of a Hermitian operator, ascending by eigenvalue.

    Raises NotHermitian when the entrywise Hermiticity defect exceeds
    ``HERMITICITY_RTOL`` relative to the largest entry.
    """
    scale = max(1.0, op.max_abs())
    defect = op.hermiticity_defect()
    if defect > HERMITICITY_RTOL * scale:
        raise NotHermitian(f"hermiticity defect {defect:.3e} exceeds tolerance")
    vals, vecs = np.linalg.eigh(op.dense())
    return [
        (float(vals[i]), StateVector(op.basis, vecs[:, i]))
        for i in range(len(vals))
    ]


def project_to_basis(state: StateVector, target_basis) -> StateVector:
    """Re-express a state on another basis, dropping missing tuples."""
    amps = np.zeros(target_basis.dim, dtype=complex)
    for i, t in enumerate(state.basis.tuples):
        j = target_basis.index.get(t)
        if j is not None:
            amps[j] = state.amplitudes[i]
    return StateVector(target_basis, amps)


def interior_indices(basis, margin: int = 1) -> list[int]:
    """Indices of tuples at least ``margin`` below every cutoff."""
    return [
        i
        for i, t in enumerate(basis.tuples)
        if all(n <= c - margin for n, c in zip(t, basis.cutoffs))
    ]


def cutoff_edge_weight(state: StateVector) -> float:
    """Probability weight carried by tuples sitting at any cutoff edge."""
    w = 0.0
    for i, t in enumerate(state.basis.tuples):
        if any(n == c for n, c in zip(t, state.basis.cutoffs)):
            w += abs(state.amplitudes[i]) ** 2
    return float(w)
