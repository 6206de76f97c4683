"""Exact finite-N engine for the symmetric sector of N three-level atoms.

Permutation-symmetric states of N atoms with levels (b ground, a excited,
c metastable) map onto three boson modes with fixed total occupation
n_a + n_b + n_c = N.  A basis tuple stores (n_photon, n_a, n_c); n_b is
implied.  The collective operators then have closed-form matrix elements:

    A† = α_a† α_b / √N          amplitude sqrt((n_a+1)(N−n_a−n_c)) / √N
    C† = α_c† α_b / √N          amplitude sqrt((n_c+1)(N−n_a−n_c)) / √N
    T+ = α_a† α_c               amplitude sqrt((n_a+1) n_c)
    S  = n_a,   T3 = (n_a − n_c)/2

These operators are exact at every N; only the photon mode is truncated.
The module exposes the closed su-algebra defect norms (machine zero), the
bosonic-approximation defects that decay as 1/N, and the residual of the
bosonic dark states under the exact Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BasisMismatch, CutoffTooSmall, DimensionOverflow, EmptySector
from .fock import OperatorMatrix, operator_from_moves
from .model import sector_energies

DEFAULT_MAX_DIM = 200_000


class ExactBasis:
    """Occupation tuples (n_photon, n_a, n_c) with n_a + n_c <= N.

    Same descending lexicographic ordering as the bosonic basis.  An optional
    ``sector`` restricts to fixed n_photon + n_a + n_c, which is conserved by
    the exact Hamiltonian.
    """

    def __init__(self, n_atoms: int, photon_cutoff: int, sector: int | None = None):
        if n_atoms < 1:
            raise ValueError("n_atoms must be >= 1")
        if photon_cutoff < 0:
            raise ValueError("photon_cutoff must be >= 0")
        if sector is not None and sector < 0:
            raise ValueError("sector must be >= 0")
        self.n_atoms = n_atoms
        self.photon_cutoff = photon_cutoff
        self.sector = sector
        tuples = []
        for p in range(photon_cutoff, -1, -1):
            for a in range(n_atoms, -1, -1):
                for c in range(n_atoms - a, -1, -1):
                    if sector is not None and p + a + c != sector:
                        continue
                    tuples.append((p, a, c))
        if not tuples:
            raise EmptySector("no exact-basis tuple satisfies the constraints")
        self.tuples = tuple(tuples)
        self.index = {t: i for i, t in enumerate(self.tuples)}
        self.dim = len(self.tuples)
        self.mode_count = 3
        # Cutoffs mirror the bosonic basis interface; n_a, n_c are capped by N.
        self.cutoffs = (photon_cutoff, n_atoms, n_atoms)

    def state_index(self, occupation) -> int:
        return self.index[tuple(int(n) for n in occupation)]

    def __contains__(self, occupation) -> bool:
        return tuple(occupation) in self.index

    def __eq__(self, other) -> bool:
        return (
            type(other) is type(self)
            and self.n_atoms == other.n_atoms
            and self.photon_cutoff == other.photon_cutoff
            and self.sector == other.sector
        )

    def __hash__(self):
        return hash((type(self).__name__, self.n_atoms, self.photon_cutoff, self.sector))

    def __repr__(self):
        return (
            f"ExactBasis(n_atoms={self.n_atoms}, photon_cutoff={self.photon_cutoff}, "
            f"sector={self.sector}, dim={self.dim})"
        )


@dataclass(frozen=True)
class ExactOperators:
    """Collective-spin and photon operators on one exact basis."""

    basis: ExactBasis
    A: OperatorMatrix
    A_dag: OperatorMatrix
    C: OperatorMatrix
    C_dag: OperatorMatrix
    T_plus: OperatorMatrix
    T_minus: OperatorMatrix
    T_3: OperatorMatrix
    S: OperatorMatrix
    photon_lower: OperatorMatrix
    photon_raise: OperatorMatrix


def _n_b(basis: ExactBasis, t) -> int:
    return basis.n_atoms - t[1] - t[2]


def build_exact(
    n_atoms: int,
    photon_cutoff: int,
    max_dim: int = DEFAULT_MAX_DIM,
) -> tuple[ExactBasis, ExactOperators]:
    """Exact basis and operator set for N atoms and a truncated photon mode."""
    basis = ExactBasis(n_atoms, photon_cutoff)
    if basis.dim > max_dim:
        raise DimensionOverflow(
            f"exact basis dimension {basis.dim} exceeds the limit {max_dim}"
        )
    root_n = math.sqrt(n_atoms)

    a_dag = operator_from_moves(
        basis,
        [((0, 1, 0), lambda t: math.sqrt((t[1] + 1) * _n_b(basis, t)) / root_n)],
    )
    c_dag = operator_from_moves(
        basis,
        [((0, 0, 1), lambda t: math.sqrt((t[2] + 1) * _n_b(basis, t)) / root_n)],
    )
    t_plus = operator_from_moves(
        basis,
        [((0, 1, -1), lambda t: math.sqrt((t[1] + 1) * t[2]))],
    )
    s_op = operator_from_moves(basis, [((0, 0, 0), lambda t: float(t[1]))])
    t_3 = operator_from_moves(basis, [((0, 0, 0), lambda t: 0.5 * (t[1] - t[2]))])
    photon_lower = operator_from_moves(
        basis, [((-1, 0, 0), lambda t: math.sqrt(t[0]))]
    )
    ops = ExactOperators(
        basis=basis,
        A=a_dag.dagger(),
        A_dag=a_dag,
        C=c_dag.dagger(),
        C_dag=c_dag,
        T_plus=t_plus,
        T_minus=t_plus.dagger(),
        T_3=t_3,
        S=s_op,
        photon_lower=photon_lower,
        photon_raise=photon_lower.dagger(),
    )
    return basis, ops


def exact_sector_basis(n_atoms: int, sector: int) -> ExactBasis:
    """Fixed total-excitation slice; the photon range is capped by the sector."""
    return ExactBasis(n_atoms, photon_cutoff=sector, sector=sector)


def build_exact_hamiltonian(params, basis: ExactBasis, ops: ExactOperators | None = None) -> OperatorMatrix:
    """Exact interaction Hamiltonian Δc S + g√N (a A† + a† A) + Ω (T+ + T−).

    With ``ops`` given (full basis only) the matrix is assembled from operator
    products; otherwise it is built entry-wise from conserving moves, which
    also works on sector-restricted bases.  Both routes agree on full bases.
    """
    g = params.g_sqrt_n
    om = params.omega
    dc = params.delta_c
    if ops is not None:
        if ops.basis != basis:
            raise BasisMismatch("operator set was built on a different basis")
        if basis.sector is not None:
            raise BasisMismatch("operator products are not closed on a sector basis")
        probe = ops.photon_lower @ ops.A_dag
        h = dc * ops.S + g * (probe + probe.dagger()) + om * (ops.T_plus + ops.T_minus)
        return h

    root_n = math.sqrt(basis.n_atoms)
    moves = [
        ((0, 0, 0), lambda t: dc * t[1]),
        # photon absorbed into the A spin wave, and its Hermitian partner
        (
            (-1, 1, 0),
            lambda t: g * math.sqrt(t[0]) * math.sqrt((t[1] + 1) * _n_b(basis, t)) / root_n,
        ),
        (
            (1, -1, 0),
            lambda t: g
            * math.sqrt(t[0] + 1)
            * math.sqrt(t[1] * (_n_b(basis, t) + 1))
            / root_n,
        ),
        ((0, 1, -1), lambda t: om * math.sqrt((t[1] + 1) * t[2])),
        ((0, -1, 1), lambda t: om * math.sqrt(t[1] * (t[2] + 1))),
    ]
    return operator_from_moves(basis, moves)


def commutator_defect(n_atoms: int) -> dict[str, float]:
    """Spectral norms of the exact su-algebra identities, all machine zero.

    Uses a photon-free basis: the atomic Hilbert space carries no truncation,
    so each identity holds up to floating-point cancellation only.
    """
    _, ops = build_exact(n_atoms, photon_cutoff=0)

    def comm(x, y):
        return x @ y - y @ x

    defects = {
        "[A,C]": comm(ops.A, ops.C),
        "[A,Cdag]+Tminus/N": comm(ops.A, ops.C_dag) + (1.0 / n_atoms) * ops.T_minus,
        "[Tminus,C]+A": comm(ops.T_minus, ops.C) + ops.A,
        "[Tminus,Cdag]": comm(ops.T_minus, ops.C_dag),
        "[Tminus,A]": comm(ops.T_minus, ops.A),
        "[Tminus,Adag]-Cdag": comm(ops.T_minus, ops.A_dag) - ops.C_dag,
        "[S,A]+A": comm(ops.S, ops.A) + ops.A,
        "[S,C]": comm(ops.S, ops.C),
        "[S,Tplus]-Tplus": comm(ops.S, ops.T_plus) - ops.T_plus,
    }
    return {name: op.norm2() for name, op in defects.items()}


def _low_excitation_indices(basis: ExactBasis, max_spins: int = 2) -> list[int]:
    return [i for i, t in enumerate(basis.tuples) if t[1] + t[2] <= max_spins]


def bosonic_commutator_defect(n_atoms: int) -> dict[str, float]:
    """How far A, C are from true bosons, on states with n_a + n_c <= 2.

    Returns the largest singular values of [A, A†] − 1 and [A, C†] restricted
    to the low-excitation subspace; both decay as 1/N.
    """
    basis, ops = build_exact(n_atoms, photon_cutoff=0)
    idx = _low_excitation_indices(basis)
    eye = np.eye(basis.dim)

    def restricted_norm2(mat: np.ndarray) -> float:
        sub = mat[np.ix_(idx, idx)]
        return float(np.linalg.norm(sub, 2))

    comm_aa = (ops.A @ ops.A_dag - ops.A_dag @ ops.A).dense() - eye
    comm_ac = (ops.A @ ops.C_dag - ops.C_dag @ ops.A).dense()
    return {
        "[A,Adag]-1": restricted_norm2(comm_aa),
        "[A,Cdag]": restricted_norm2(comm_ac),
    }


def span_closure_residual(n_atoms: int) -> float:
    """Worst least-squares residual of [{T±,T3}, {A,A†,C,C†}] against the span
    of {A, A†, C, C†}, with columns restricted to states with n_a + n_c <= 2."""
    basis, ops = build_exact(n_atoms, photon_cutoff=0)
    idx = _low_excitation_indices(basis)
    span_ops = [ops.A, ops.A_dag, ops.C, ops.C_dag]
    design = np.column_stack([op.dense()[:, idx].ravel() for op in span_ops])
    worst = 0.0
    for gen in (ops.T_plus, ops.T_minus, ops.T_3):
        for x in span_ops:
            target = (gen @ x - x @ gen).dense()[:, idx].ravel()
            coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
            residual = float(np.linalg.norm(design @ coeffs - target))
            worst = max(worst, residual)
    return worst


def embed_bosonic_dark(n: int, theta: float, basis: ExactBasis) -> np.ndarray:
    """Amplitudes of the bosonic n-quanta dark state inside an exact basis.

    The bosonic C-mode number states map onto (n_a = 0, n_c = m).
    """
    amps = np.zeros(basis.dim, dtype=complex)
    ct, st = math.cos(theta), math.sin(theta)
    for m in range(n + 1):
        t = (n - m, 0, m)
        if t not in basis:
            raise CutoffTooSmall(f"tuple {t} missing from the exact basis")
        amps[basis.state_index(t)] = (
            ((-1.0) ** m) * math.sqrt(math.comb(n, m)) * ct ** (n - m) * st**m
        )
    return amps


def bosonic_defect(n_atoms: int, n: int, theta: float, params) -> tuple[float, float]:
    """Residual and zero-eigenspace fidelity of a bosonic dark state at finite N.

    Embeds the n-quanta bosonic dark state into the exact sector and returns
    ``(||H d|| / ε, fidelity)``.  The fidelity is the weight of the embedded
    state inside the exact near-zero eigenspace (eigenvalues within half the
    smallest nonzero level distance of the sector); an eigenspace rather than
    a single eigenvector because at zero detuning the sector can hold several
    exactly degenerate zero-energy levels, whose internal mixing at finite N
    carries no physical content.  The residual vanishes identically for
    n <= 1 and decays as 1/N above.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > n_atoms:
        raise CutoffTooSmall(f"{n} spin excitations need at least {n} atoms")
    basis = exact_sector_basis(n_atoms, sector=n)
    h = build_exact_hamiltonian(params, basis).dense()
    d = embed_bosonic_dark(n, theta, basis)
    eps = params.epsilon
    residual = float(np.linalg.norm(h @ d)) / eps
    nonzero = [abs(e) for e in sector_energies(params, n) if abs(e) > 1e-9 * eps]
    window = 0.5 * (min(nonzero) if nonzero else eps)
    vals, vecs = np.linalg.eigh(h)
    weights = np.abs(vecs.conj().T @ d) ** 2
    fidelity = float(weights[np.abs(vals) < window].sum())
    return residual, fidelity
