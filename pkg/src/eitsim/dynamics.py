"""Time-dependent control sweeps, Schrödinger integration, and memory maps.

The control amplitude Ω(t) follows a smooth sweep profile.  Evolution uses a
fixed-step classical 4th-order integrator with the Hamiltonian evaluated at
the step midpoint; excitation-number conservation makes sector-restricted
bases exact, so no truncation error enters beyond floating point.

The adiabaticity monitor η(t) compares the nonadiabatic coupling out of the
dark manifold against the smallest dressed-level gap.  Writing a photon state
into the spin wave sweeps the mixing angle θ from near 0 to π/2; reading it
back runs the sweep in reverse.  On the number basis the stored state picks
up a (−1)^(n+m) checkerboard of signs, which the read map undoes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import ProfileNotClosing, StepTooLarge
from .fock import StateVector, enumerate_basis
from .model import (
    ModelParams,
    dark_manifold_fidelity,
    dark_state,
    dressed_state,
    hamiltonian_parts,
    mixing_angle,
    spectral_data,
)

PROFILE_KINDS = ("linear", "cosine-ramp", "tanh")
TANH_STEEPNESS = 12.0
OMEGA_FLOOR_FACTOR = 1e-6
DEFAULT_OMEGA_MAX_FACTOR = 10.0
DEFAULT_EPSILON_DT = 0.05
NORM_DRIFT_LIMIT = 1e-6
THETA_ENDPOINT_TOL = 1e-3
FD_THETA_STEP = 1e-5
TRACE_TOL = 1e-12
EIGENVALUE_FLOOR = -1e-10


@dataclass(frozen=True)
class SweepProfile:
    """Control amplitude Ω(t) on [t_start, t_end], held constant outside.

    kind selects the ramp shape: "linear", "cosine-ramp" (half cosine, flat
    derivative at both ends), or "tanh" (centered step of width span/12).
    value() and derivative() accept scalars or arrays.
    """

    kind: str
    t_start: float
    t_end: float
    omega_start: float
    omega_end: float

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if not self.t_end > self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.omega_start < 0.0 or self.omega_end < 0.0:
            raise ValueError("control amplitudes must be >= 0")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @property
    def omega_max(self) -> float:
        return max(self.omega_start, self.omega_end)

    def value(self, t):
        t_arr = np.asarray(t, dtype=float)
        u = np.clip((t_arr - self.t_start) / self.duration, 0.0, 1.0)
        delta = self.omega_end - self.omega_start
        if self.kind == "linear":
            ramp = u
        elif self.kind == "cosine-ramp":
            ramp = 0.5 * (1.0 - np.cos(np.pi * u))
        else:
            tau = self.duration / TANH_STEEPNESS
            x = (u - 0.5) * self.duration / tau
            ramp = 0.5 * (1.0 + np.tanh(x))
        out = self.omega_start + delta * ramp
        return float(out) if t_arr.ndim == 0 else out

    def derivative(self, t):
        t_arr = np.asarray(t, dtype=float)
        inside = (t_arr >= self.t_start) & (t_arr <= self.t_end)
        u = np.clip((t_arr - self.t_start) / self.duration, 0.0, 1.0)
        delta = self.omega_end - self.omega_start
        if self.kind == "linear":
            slope = np.full_like(u, delta / self.duration)
        elif self.kind == "cosine-ramp":
            slope = delta * 0.5 * np.pi * np.sin(np.pi * u) / self.duration
        else:
            tau = self.duration / TANH_STEEPNESS
            x = (u - 0.5) * self.duration / tau
            slope = delta / (2.0 * tau * np.cosh(x) ** 2)
        out = np.where(inside, slope, 0.0)
        return float(out) if t_arr.ndim == 0 else out


def write_sweep(
    params: ModelParams,
    duration: float,
    omega_max: float | None = None,
    kind: str = "tanh",
) -> SweepProfile:
    """Storage ramp: Ω from its maximum down to a near-zero floor (θ -> π/2)."""
    top = DEFAULT_OMEGA_MAX_FACTOR * params.g_sqrt_n if omega_max is None else omega_max
    floor = OMEGA_FLOOR_FACTOR * params.g_sqrt_n
    return SweepProfile(kind, 0.0, duration, top, floor)


def read_sweep(
    params: ModelParams,
    duration: float,
    omega_max: float | None = None,
    kind: str = "tanh",
) -> SweepProfile:
    """Retrieval ramp: the write sweep reversed (θ from π/2 back toward 0)."""
    top = DEFAULT_OMEGA_MAX_FACTOR * params.g_sqrt_n if omega_max is None else omega_max
    floor = OMEGA_FLOOR_FACTOR * params.g_sqrt_n
    return SweepProfile(kind, 0.0, duration, floor, top)


def theta_dot(params: ModelParams, omega_dot: float) -> float:
    """Signed rate of the mixing angle, -g√N Ω̇ / ε²."""
    return -params.g_sqrt_n * omega_dot / params.epsilon_sq


def adiabaticity(params: ModelParams, omega_dot: float) -> float:
    """Instantaneous adiabaticity parameter η ≥ 0; transfer is clean for η ≪ 1.

    η = g√N (Θ + |Δc|) |Ω̇| / (√(Θ(Θ − |Δc|)) ε³), with Θ = √(Δc² + 4ε²).
    At zero detuning this reduces exactly to g√N |Ω̇| / ε³.
    """
    g = params.g_sqrt_n
    eps = params.epsilon
    if params.delta_c == 0.0:
        return g * abs(omega_dot) / eps**3
    dc = abs(params.delta_c)
    big = math.sqrt(dc * dc + 4.0 * params.epsilon_sq)
    return g * (big + dc) * abs(omega_dot) / (math.sqrt(big * (big - dc)) * eps**3)


def _eta_array(g: float, delta_c: float, omega, omega_dot):
    eps2 = g * g + np.asarray(omega) ** 2
    eps3 = eps2**1.5
    if delta_c == 0.0:
        return g * np.abs(omega_dot) / eps3
    dc = abs(delta_c)
    big = np.sqrt(dc * dc + 4.0 * eps2)
    return g * (big + dc) * np.abs(omega_dot) / (np.sqrt(big * (big - dc)) * eps3)


def coupling_closed_form(
    m: int, k: int, n: int, l: int, params: ModelParams, omega_dot: float
) -> float:
    """Dressed-basis matrix element of d/dt acting on the dark ladder.

    Only the single-quantum normal modes over |d_(l-1)> couple:
    <e(0,1; l-1)| d/dt |d_l> = +√l θ̇ c_plus and
    <e(1,0; l-1)| d/dt |d_l> = -√l θ̇ c_minus; everything else vanishes.
    """
    if min(m, k, n, l) < 0:
        raise ValueError("quantum numbers must be >= 0")
    if l < 1 or n != l - 1:
        return 0.0
    sd = spectral_data(params)
    td = theta_dot(params, omega_dot)
    if (m, k) == (0, 1):
        return math.sqrt(l) * td * sd.c_plus
    if (m, k) == (1, 0):
        return -math.sqrt(l) * td * sd.c_minus
    return 0.0


def nonadiabatic_coupling(
    m: int, k: int, n: int, l: int, params: ModelParams, omega_dot: float, basis
) -> complex:
    """Numerical <e(m,k;n)| d/dt |d_l> via central differencing in θ.

    d/dt |d_l> = θ̇ ∂_θ |d_l>; the bra uses the raw ladder construction
    (fix_phase=False) so the sign convention matches coupling_closed_form.
    """
    if min(m, k, n, l) < 0:
        raise ValueError("quantum numbers must be >= 0")
    theta = mixing_angle(params)
    td = theta_dot(params, omega_dot)
    h = FD_THETA_STEP
    plus = dark_state(l, theta + h, basis).amplitudes
    minus = dark_state(l, theta - h, basis).amplitudes
    deriv = (plus - minus) * (td / (2.0 * h))
    bra = dressed_state(m, k, n, params, basis, fix_phase=False).amplitudes
    return complex(np.vdot(bra, deriv))


def default_dt(params: ModelParams, profile: SweepProfile) -> float:
    """Step keeping ε·dt at 0.05 for the largest ε reached along the sweep."""
    eps_max = math.hypot(params.g_sqrt_n, profile.omega_max)
    return DEFAULT_EPSILON_DT / eps_max


@dataclass
class Trajectory:
    """Sampled history of one evolution run."""

    basis: object
    times: np.ndarray
    omegas: np.ndarray
    thetas: np.ndarray
    etas: np.ndarray
    dark_fidelities: np.ndarray
    states: list[StateVector]
    max_eta: float
    norm_drift: float
    n_steps: int
    dt: float

    @property
    def final_state(self) -> StateVector:
        return self.states[-1]


def _sweep_grid(params: ModelParams, profile: SweepProfile, dt: float | None):
    if dt is None:
        dt = default_dt(params, profile)
    if dt <= 0.0:
        raise ValueError("dt must be > 0")
    n_steps = max(1, math.ceil(profile.duration / dt - 1e-12))
    step = profile.duration / n_steps
    edges = profile.t_start + step * np.arange(n_steps + 1)
    return n_steps, step, edges


def _evolve_columns(params: ModelParams, profile: SweepProfile, basis, columns, dt):
    """Core fixed-step integration of i dψ/dt = (static + Ω(t) control) ψ.

    Evolves every column of ``columns`` simultaneously; columns must be unit
    norm.  Returns (final columns, max_eta, norm_drift, n_steps).
    """
    static, control = hamiltonian_parts(params, basis)
    a_mat = -1j * static.dense()
    b_mat = -1j * control.dense()
    n_steps, step, edges = _sweep_grid(params, profile, dt)
    om_edges = np.asarray(profile.value(edges), dtype=float).reshape(-1)
    om_halves = np.asarray(profile.value(edges[:-1] + 0.5 * step), dtype=float).reshape(-1)
    etas = _eta_array(
        params.g_sqrt_n, params.delta_c, om_edges, profile.derivative(edges)
    )
    max_eta = float(np.max(etas))

    psi = np.array(columns, dtype=complex)
    flat = psi.ndim == 1
    if flat:
        psi = psi[:, None]
    drift = 0.0
    for i in range(n_steps):
        om0, omh, om1 = om_edges[i], om_halves[i], om_edges[i + 1]
        k1 = a_mat @ psi + om0 * (b_mat @ psi)
        y = psi + (0.5 * step) * k1
        k2 = a_mat @ y + omh * (b_mat @ y)
        y = psi + (0.5 * step) * k2
        k3 = a_mat @ y + omh * (b_mat @ y)
        y = psi + step * k3
        k4 = a_mat @ y + om1 * (b_mat @ y)
        psi = psi + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        step_drift = float(np.max(np.abs(np.linalg.norm(psi, axis=0) - 1.0)))
        drift = max(drift, step_drift)
        if drift > NORM_DRIFT_LIMIT:
            raise StepTooLarge(
                f"norm drift {drift:.3e} at step {i + 1} of {n_steps}; reduce dt"
            )
    return (psi[:, 0] if flat else psi), max_eta, drift, n_steps


def evolve(
    initial: StateVector,
    params: ModelParams,
    profile: SweepProfile,
    dt: float | None = None,
    record_every: int | None = None,
) -> Trajectory:
    """Integrate one state through the sweep, recording diagnostics.

    Snapshots are kept every ``record_every`` steps (auto-chosen to cap the
    record count near 2000 when omitted); the first and last step are always
    recorded.  Raises StepTooLarge if unitarity drifts beyond 1e-6.
    """
    basis = initial.basis
    static, control = hamiltonian_parts(params, basis)
    a_mat = -1j * static.dense()
    b_mat = -1j * control.dense()
    n_steps, step, edges = _sweep_grid(params, profile, dt)
    om_edges = np.asarray(profile.value(edges), dtype=float).reshape(-1)
    om_halves = np.asarray(profile.value(edges[:-1] + 0.5 * step), dtype=float).reshape(-1)
    eta_edges = _eta_array(
        params.g_sqrt_n, params.delta_c, om_edges, profile.derivative(edges)
    )
    if record_every is None:
        record_every = max(1, n_steps // 2000)

    psi = np.array(initial.amplitudes, dtype=complex)
    drift = 0.0
    rec_i, rec_states = [], []

    def record(idx):
        rec_i.append(idx)
        rec_states.append(StateVector(basis, psi.copy()))

    record(0)
    for i in range(n_steps):
        om0, omh, om1 = om_edges[i], om_halves[i], om_edges[i + 1]
        k1 = a_mat @ psi + om0 * (b_mat @ psi)
        y = psi + (0.5 * step) * k1
        k2 = a_mat @ y + omh * (b_mat @ y)
        y = psi + (0.5 * step) * k2
        k3 = a_mat @ y + omh * (b_mat @ y)
        y = psi + step * k3
        k4 = a_mat @ y + om1 * (b_mat @ y)
        psi = psi + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = max(drift, abs(float(np.linalg.norm(psi)) - 1.0))
        if drift > NORM_DRIFT_LIMIT:
            raise StepTooLarge(
                f"norm drift {drift:.3e} at step {i + 1} of {n_steps}; reduce dt"
            )
        if (i + 1) % record_every == 0 or i + 1 == n_steps:
            record(i + 1)

    idx = np.array(rec_i)
    times = edges[idx]
    omegas = om_edges[idx]
    thetas = np.arctan2(params.g_sqrt_n, omegas)
    fidelities = np.array(
        [
            dark_manifold_fidelity(state, float(th))
            for state, th in zip(rec_states, thetas)
        ]
    )
    return Trajectory(
        basis=basis,
        times=times,
        omegas=omegas,
        thetas=thetas,
        etas=eta_edges[idx],
        dark_fidelities=fidelities,
        states=rec_states,
        max_eta=float(np.max(eta_edges)),
        norm_drift=drift,
        n_steps=n_steps,
        dt=step,
    )


@dataclass
class TransferResult:
    """Dark-state transport through one sweep."""

    trajectory: Trajectory
    fidelity: float
    max_eta: float


def dark_transfer(
    n: int,
    params: ModelParams,
    profile: SweepProfile,
    dt: float | None = None,
    record_every: int | None = None,
) -> TransferResult:
    """Drag |d_n> through the sweep; fidelity is against |d_n> at the final angle.

    Uses the exact n-excitation sector, so the only error is integration and
    nonadiabatic leakage.  The fidelity ignores the global phase.
    """
    basis = enumerate_basis(3, (n, n, n), sector=n)
    theta0 = mixing_angle(params.with_omega(profile.value(profile.t_start)))
    theta1 = mixing_angle(params.with_omega(profile.value(profile.t_end)))
    traj = evolve(dark_state(n, theta0, basis), params, profile, dt, record_every)
    target = dark_state(n, theta1, basis)
    fid = abs(fock.inner(target, traj.final_state)) ** 2
    return TransferResult(trajectory=traj, fidelity=float(fid), max_eta=traj.max_eta)


class ProbeDensityMatrix:
    """Validated photon-number density matrix (Hermitian, PSD, unit trace)."""

    def __init__(self, matrix):
        mat = np.array(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("density matrix must be square")
        scale = max(1.0, float(np.max(np.abs(mat))))
        if float(np.max(np.abs(mat - mat.conj().T))) > 1e-12 * scale:
            raise ValueError("density matrix must be Hermitian")
        if abs(float(np.trace(mat).real) - 1.0) > TRACE_TOL:
            raise ValueError("density matrix trace must be 1")
        if float(np.linalg.eigvalsh(mat).min()) < EIGENVALUE_FLOOR:
            raise ValueError("density matrix must be positive semidefinite")
        self.matrix = mat
        self.dim = mat.shape[0]

    @classmethod
    def from_entries(cls, entries) -> "ProbeDensityMatrix":
        return cls(np.array(entries, dtype=complex))

    @classmethod
    def pure(cls, amplitudes) -> "ProbeDensityMatrix":
        psi = np.array(amplitudes, dtype=complex)
        nrm = np.linalg.norm(psi)
        if nrm == 0.0:
            raise ValueError("pure state needs a nonzero amplitude vector")
        psi = psi / nrm
        return cls(np.outer(psi, psi.conj()))

    def __repr__(self):
        return f"ProbeDensityMatrix(dim={self.dim})"


def _as_matrix(rho) -> np.ndarray:
    if isinstance(rho, ProbeDensityMatrix):
        return rho.matrix
    return np.array(rho, dtype=complex)


def density_fidelity(rho, sigma) -> float:
    """Uhlmann fidelity (tr √(√ρ σ √ρ))²; accepts raw matrices too.

    With a subnormalized second argument this is bounded by its trace, so
    lost population counts against the score.
    """
    r = _as_matrix(rho)
    s = _as_matrix(sigma)
    vals, vecs = np.linalg.eigh(r)
    sqrt_r = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T
    inner_vals = np.linalg.eigvalsh(sqrt_r @ s @ sqrt_r)
    return float(np.sqrt(np.clip(inner_vals, 0.0, None)).sum() ** 2)


def _memory_basis(dim: int):
    cutoff = dim - 1
    return enumerate_basis(3, (cutoff, cutoff, cutoff))


def _require_angle(params: ModelParams, omega: float, where: str) -> float:
    theta = mixing_angle(params.with_omega(omega))
    if abs(theta - 0.5 * math.pi) > THETA_ENDPOINT_TOL:
        raise ProfileNotClosing(
            f"sweep must reach θ = π/2 at its {where}; got θ = {theta:.6f}"
        )
    return theta


@dataclass
class StoreResult:
    """Write map output: photon ρ mapped onto the metastable spin wave."""

    rho_in: np.ndarray
    rho_out: np.ndarray
    map_matrix: np.ndarray
    captured_weight: float
    max_eta: float
    norm_drift: float
    theta_end: float
    n_steps: int


@dataclass
class RetrieveResult:
    """Read map output: spin-wave ρ mapped back onto photon numbers."""

    rho_in: np.ndarray
    rho_out: np.ndarray
    map_matrix: np.ndarray
    captured_weight: float
    max_eta: float
    norm_drift: float
    theta_start: float
    n_steps: int

    def as_probe(self) -> ProbeDensityMatrix:
        trace = float(np.trace(self.rho_out).real)
        if trace <= 0.0:
            raise ValueError("retrieved matrix has no weight to normalize")
        return ProbeDensityMatrix(self.rho_out / trace)


def _evolve_map(params, profile, basis, in_tuples, out_tuples, dt):
    columns = np.zeros((basis.dim, len(in_tuples)), dtype=complex)
    for j, t in enumerate(in_tuples):
        columns[basis.state_index(t), j] = 1.0
    final, max_eta, drift, n_steps = _evolve_columns(params, profile, basis, columns, dt)
    rows = [basis.state_index(t) for t in out_tuples]
    return final[rows, :], max_eta, drift, n_steps


def store(rho, params: ModelParams, profile: SweepProfile, dt: float | None = None) -> StoreResult:
    """Write a photon-number density matrix into the spin wave.

    Each photon ket rides its own dark ladder through the sweep, so the map
    is linear; the result on the spin-wave number basis is (−1)^(n+m) ρ_nm up
    to the sweep infidelity.  The output is left subnormalized: weight lost
    to nonadiabatic leakage simply goes missing, it is not renormalized away.
    """
    mat = _as_matrix(rho)
    dim = mat.shape[0]
    theta_end = _require_angle(params, profile.value(profile.t_end), "end")
    basis = _memory_basis(dim)
    in_tuples = [(n, 0, 0) for n in range(dim)]
    out_tuples = [(0, 0, m) for m in range(dim)]
    map_matrix, max_eta, drift, n_steps = _evolve_map(
        params, profile, basis, in_tuples, out_tuples, dt
    )
    rho_out = map_matrix @ mat @ map_matrix.conj().T
    captured = float(np.min(np.sum(np.abs(map_matrix) ** 2, axis=0)))
    return StoreResult(
        rho_in=mat,
        rho_out=rho_out,
        map_matrix=map_matrix,
        captured_weight=captured,
        max_eta=max_eta,
        norm_drift=drift,
        theta_end=theta_end,
        n_steps=n_steps,
    )


def retrieve(rho_spinwave, params: ModelParams, profile: SweepProfile, dt: float | None = None) -> RetrieveResult:
    """Read a spin-wave density matrix back out as photons.

    The sweep must start at θ ≈ π/2 (control off) and ramp the control up.
    Composing with store cancels the (−1)^(n+m) signs and returns the input
    up to twice the single-sweep infidelity.
    """
    mat = _as_matrix(rho_spinwave)
    dim = mat.shape[0]
    theta_start = _require_angle(params, profile.value(profile.t_start), "start")
    basis = _memory_basis(dim)
    in_tuples = [(0, 0, m) for m in range(dim)]
    out_tuples = [(n, 0, 0) for n in range(dim)]
    map_matrix, max_eta, drift, n_steps = _evolve_map(
        params, profile, basis, in_tuples, out_tuples, dt
    )
    rho_out = map_matrix @ mat @ map_matrix.conj().T
    captured = float(np.min(np.sum(np.abs(map_matrix) ** 2, axis=0)))
    return RetrieveResult(
        rho_in=mat,
        rho_out=rho_out,
        map_matrix=map_matrix,
        captured_weight=captured,
        max_eta=max_eta,
        norm_drift=drift,
        theta_start=theta_start,
        n_steps=n_steps,
    )
