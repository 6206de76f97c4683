"""Bosonized three-mode model of the two-photon-resonance memory.

Mode order is fixed throughout: probe photon ``a``, excited spin wave ``A``,
metastable spin wave ``C``.  With collective coupling g√N, control Rabi
frequency Ω and shared single-photon detuning Δc (all in units of one common
reference frequency), the interaction-picture Hamiltonian reads

    H = Δc A†A + g√N (a A† + a† A) + Ω (A†C + C†A).

Total excitation a†a + A†A + C†C is conserved, so each sector is exact on its
own.  The dark-state polariton D = a cosθ − C sinθ with tanθ = g√N/Ω commutes
with H; powers of D† on the vacuum span the zero-energy dark ladder.  The
bright polariton B = a sinθ + C cosθ hybridizes with A into normal modes Q±
whose quanta carry energies e± = (Δc ± Θ)/2 with ε = √(g²N + Ω²) and
Θ = √(Δc² + 4ε²), which generates the rest of the spectrum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import fock
from .errors import BasisMismatch, CutoffTooSmall
from .fock import (
    OperatorMatrix,
    StateVector,
    hop,
    ladder,
    number_operator,
)

MODE_PHOTON = 0
MODE_A = 1
MODE_C = 2


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of one simulation, in reference-frequency units."""

    g_sqrt_n: float
    omega: float
    delta_c: float = 0.0
    n_atoms: int | None = None

    def __post_init__(self):
        if not (self.g_sqrt_n > 0.0 and math.isfinite(self.g_sqrt_n)):
            raise ValueError("g_sqrt_n must be finite and > 0")
        if not (self.omega >= 0.0 and math.isfinite(self.omega)):
            raise ValueError("omega must be finite and >= 0")
        if not math.isfinite(self.delta_c):
            raise ValueError("delta_c must be finite")
        if self.n_atoms is not None and self.n_atoms < 1:
            raise ValueError("n_atoms must be >= 1 when given")

    @property
    def epsilon_sq(self) -> float:
        return self.g_sqrt_n * self.g_sqrt_n + self.omega * self.omega

    @property
    def epsilon(self) -> float:
        return math.sqrt(self.epsilon_sq)

    def with_omega(self, omega: float) -> "ModelParams":
        return replace(self, omega=omega)


def mixing_angle(params: ModelParams) -> float:
    """Polariton mixing angle θ = atan2(g√N, Ω), in (0, π/2]."""
    return math.atan2(params.g_sqrt_n, params.omega)


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Closed-form spectral quantities and polariton coefficient tables.

    ``dark_bright`` holds rows (D, B) over columns (a, C).  ``normal_modes``
    holds rows (D, Q+, Q-) over columns (a, A, C); both are real orthogonal.
    """

    theta: float
    epsilon: float
    big_theta: float
    e_plus: float
    e_minus: float
    c_plus: float
    c_minus: float
    dark_bright: np.ndarray
    normal_modes: np.ndarray


def spectral_data(params: ModelParams) -> SpectralData:
    theta = mixing_angle(params)
    eps = params.epsilon
    dc = params.delta_c
    big = math.sqrt(dc * dc + 4.0 * params.epsilon_sq)
    # (Δc ± Θ)/2 are the roots of λ² − Δc λ − ε² = 0, identical to the
    # radical form ±sqrt((Θ±Δc)/(Θ∓Δc))·ε but free of 0/0 at Ω = 0, Δc < 0.
    e_plus = 0.5 * (dc + big)
    e_minus = 0.5 * (dc - big)
    c_plus = math.sqrt((big + dc) / (2.0 * big))
    c_minus = math.sqrt((big - dc) / (2.0 * big))
    st, ct = math.sin(theta), math.cos(theta)
    dark_bright = np.array([[ct, -st], [st, ct]])
    normal_modes = np.array(
        [
            [ct, 0.0, -st],
            [c_minus * st, c_plus, c_minus * ct],
            [-c_plus * st, c_minus, -c_plus * ct],
        ]
    )
    return SpectralData(
        theta=theta,
        epsilon=eps,
        big_theta=big,
        e_plus=e_plus,
        e_minus=e_minus,
        c_plus=c_plus,
        c_minus=c_minus,
        dark_bright=dark_bright,
        normal_modes=normal_modes,
    )


def _check_model_basis(basis):
    if basis.mode_count != 3:
        raise BasisMismatch("the model needs a 3-mode basis (photon, A, C)")


def hamiltonian_parts(params: ModelParams, basis):
    """Static part (detuning + probe coupling) and unit-amplitude control part.

    The full Hamiltonian at control amplitude Ω is
    ``static + Ω * control``; both terms conserve total excitation, so the
    construction is exact on sector-restricted bases as well.
    """
    _check_model_basis(basis)
    probe = hop(basis, MODE_PHOTON, MODE_A)
    static = params.delta_c * number_operator(basis, MODE_A) + params.g_sqrt_n * (
        probe + probe.dagger()
    )
    control = hop(basis, MODE_C, MODE_A)
    control = control + control.dagger()
    return static, control


def build_hamiltonian(params: ModelParams, basis) -> OperatorMatrix:
    static, control = hamiltonian_parts(params, basis)
    return static + params.omega * control


def dark_state(n: int, theta: float, basis) -> StateVector:
    """Normalized n-quanta dark state at mixing angle ``theta``.

    Expanding D†ⁿ/√(n!) on the vacuum gives amplitudes
    (−1)^m sqrt(C(n,m)) cos^{n−m}θ sin^mθ on |n−m⟩_photon ⊗ |m⟩_C, with the
    A mode empty throughout.
    """
    _check_model_basis(basis)
    if n < 0:
        raise ValueError("n must be >= 0")
    if basis.sector is not None and basis.sector != n:
        raise CutoffTooSmall(
            f"dark state with {n} quanta cannot live in sector {basis.sector}"
        )
    if basis.cutoffs[MODE_PHOTON] < n or basis.cutoffs[MODE_C] < n:
        raise CutoffTooSmall(
            f"dark state with {n} quanta needs photon and C cutoffs >= {n}"
        )
    ct, st = math.cos(theta), math.sin(theta)
    amps = np.zeros(basis.dim, dtype=complex)
    for m in range(n + 1):
        coeff = ((-1.0) ** m) * math.sqrt(math.comb(n, m)) * ct ** (n - m) * st**m
        amps[basis.state_index((n - m, 0, m))] = coeff
    return StateVector(basis, amps)


def _fix_phase(amps: np.ndarray) -> np.ndarray:
    # Global phase convention: the largest-magnitude amplitude is made real
    # positive (ties broken by lowest index) for reproducible outputs.
    idx = int(np.argmax(np.abs(amps)))
    pivot = amps[idx]
    if pivot == 0.0:
        return amps
    return amps * (np.conj(pivot) / abs(pivot))


def dressed_state(
    m: int,
    k: int,
    n: int,
    params: ModelParams,
    basis,
    fix_phase: bool = True,
) -> StateVector:
    """Eigenstate with m upper and k lower normal-mode quanta on |d_n>.

    Built by applying the Q± raising operators to the dark state and dividing
    by sqrt(m! k!).  Needs an unrestricted basis whose cutoffs all reach
    m + k + n, so no ladder application touches the truncation edge and the
    result is unit norm.
    """
    _check_model_basis(basis)
    if min(m, k, n) < 0:
        raise ValueError("m, k, n must be >= 0")
    sd = spectral_data(params)
    if basis.sector is not None:
        if m == 0 and k == 0:
            return dark_state(n, sd.theta, basis)
        raise CutoffTooSmall(
            "the normal-mode ladder crosses sectors; use a basis without "
            "sector restriction"
        )
    total = m + k + n
    if min(basis.cutoffs) < total:
        raise CutoffTooSmall(
            f"dressed state with total excitation {total} needs every cutoff >= {total}"
        )
    st, ct = math.sin(sd.theta), math.cos(sd.theta)
    a_dag = ladder(basis, MODE_PHOTON, fock.RAISE)
    big_a_dag = ladder(basis, MODE_A, fock.RAISE)
    c_dag = ladder(basis, MODE_C, fock.RAISE)
    bright_dag = st * a_dag + ct * c_dag
    q_plus_dag = sd.c_plus * big_a_dag + sd.c_minus * bright_dag
    q_minus_dag = sd.c_minus * big_a_dag - sd.c_plus * bright_dag

    vec = dark_state(n, sd.theta, basis).amplitudes
    for _ in range(k):
        vec = q_minus_dag.data @ vec
    for _ in range(m):
        vec = q_plus_dag.data @ vec
    vec = vec / math.sqrt(math.factorial(m) * math.factorial(k))
    if fix_phase:
        vec = _fix_phase(vec)
    return StateVector(basis, vec)


def dressed_energy(m: int, k: int, params: ModelParams) -> float:
    """Energy of the dressed state with m upper and k lower quanta.

    Each Q+ quantum adds e+ and each Q- quantum adds e- (negative), per the
    ladder relations [H, Q±†] = e± Q±†; the dark ladder sits at zero.
    """
    if m < 0 or k < 0:
        raise ValueError("m, k must be >= 0")
    sd = spectral_data(params)
    return m * sd.e_plus + k * sd.e_minus


def sector_energies(params: ModelParams, sector: int) -> list[float]:
    """Closed-form eigenvalue multiset of one total-excitation sector."""
    if sector < 0:
        raise ValueError("sector must be >= 0")
    sd = spectral_data(params)
    out = []
    for m in range(sector + 1):
        for k in range(sector - m + 1):
            out.append(m * sd.e_plus + k * sd.e_minus)
    return sorted(out)


def representable_dark_ns(basis) -> list[int]:
    """Dark-ladder indices that fit in the basis."""
    n_max = min(basis.cutoffs[MODE_PHOTON], basis.cutoffs[MODE_C])
    if basis.sector is not None:
        return [basis.sector] if basis.sector <= n_max else []
    return list(range(n_max + 1))


def dark_manifold_fidelity(state: StateVector, theta: float) -> float:
    """Total weight of a state on the dark ladder at mixing angle theta."""
    total = 0.0
    for n in representable_dark_ns(state.basis):
        d = dark_state(n, theta, state.basis)
        total += abs(fock.inner(d, state)) ** 2
    return float(total)
