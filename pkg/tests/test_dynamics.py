"""Sweep profiles, adiabatic transport, and the write/read memory maps."""

import math

import numpy as np
import pytest

from eitsim.dynamics import (
    ProbeDensityMatrix,
    SweepProfile,
    adiabaticity,
    coupling_closed_form,
    dark_transfer,
    default_dt,
    density_fidelity,
    evolve,
    nonadiabatic_coupling,
    read_sweep,
    retrieve,
    store,
    theta_dot,
    write_sweep,
)
from eitsim.errors import ProfileNotClosing, StepTooLarge
from eitsim.fock import StateVector, enumerate_basis, inner
from eitsim.model import ModelParams, dark_state, mixing_angle

PARAMS = ModelParams(1.0, 1.0, 0.0)


# ---------------------------------------------------------------- profiles

def test_profile_rejects_bad_arguments():
    with pytest.raises(ValueError):
        SweepProfile("spline", 0.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        SweepProfile("linear", 1.0, 1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        SweepProfile("linear", 0.0, 1.0, -1.0, 0.0)


def test_profile_clamps_outside_window():
    prof = SweepProfile("linear", 2.0, 6.0, 5.0, 1.0)
    assert prof.value(-10.0) == 5.0
    assert prof.value(100.0) == 1.0
    assert prof.derivative(-10.0) == 0.0
    assert prof.derivative(100.0) == 0.0
    assert prof.value(4.0) == pytest.approx(3.0)


def test_profile_endpoints_and_monotone_ramp():
    for kind in ("linear", "cosine-ramp", "tanh"):
        prof = SweepProfile(kind, 0.0, 10.0, 8.0, 0.5)
        ts = np.linspace(0.0, 10.0, 401)
        vals = prof.value(ts)
        assert vals[0] == pytest.approx(8.0, abs=1e-2)
        assert vals[-1] == pytest.approx(0.5, abs=1e-2)
        assert np.all(np.diff(vals) <= 1e-12)


def test_profile_derivative_matches_finite_difference():
    h = 1e-6
    for kind in ("linear", "cosine-ramp", "tanh"):
        prof = SweepProfile(kind, 0.0, 7.0, 4.0, 0.25)
        ts = np.linspace(0.5, 6.5, 101)
        fd = (prof.value(ts + h) - prof.value(ts - h)) / (2.0 * h)
        assert np.max(np.abs(prof.derivative(ts) - fd)) <= 1e-5


def test_write_and_read_sweeps_are_mirror_images():
    w = write_sweep(PARAMS, 30.0, omega_max=6.0)
    r = read_sweep(PARAMS, 30.0, omega_max=6.0)
    assert w.omega_start == r.omega_end == 6.0
    assert w.omega_end == r.omega_start == pytest.approx(1e-6)
    ts = np.linspace(0.0, 30.0, 64)
    assert np.allclose(w.value(ts), r.value(30.0 - ts), atol=1e-12)


# -------------------------------------------------- angle rates and couplings

def test_theta_dot_frozen_values():
    assert theta_dot(ModelParams(1.0, 1.0, 0.0), -0.1) == pytest.approx(0.05)
    assert theta_dot(ModelParams(1.0, 0.0, 0.0), -0.1) == pytest.approx(0.1)
    assert theta_dot(PARAMS, 0.0) == 0.0


def test_theta_dot_matches_chain_rule():
    params = ModelParams(1.3, 0.7, 2.0)
    h = 1e-7
    om_dot = -0.31
    fd = (
        mixing_angle(params.with_omega(params.omega + h * om_dot))
        - mixing_angle(params.with_omega(params.omega - h * om_dot))
    ) / (2.0 * h)
    assert theta_dot(params, om_dot) == pytest.approx(fd, abs=1e-8)


def test_adiabaticity_frozen_and_limits():
    assert adiabaticity(PARAMS, 0.01) == pytest.approx(0.01 / 2.0**1.5, rel=1e-14)
    assert adiabaticity(PARAMS, 0.0) == 0.0
    assert adiabaticity(ModelParams(1.0, 1.0, 3.0), 0.01) > adiabaticity(PARAMS, 0.01)


def test_adiabaticity_detuned_branch_continuous_at_zero():
    base = adiabaticity(PARAMS, 0.02)
    tiny = adiabaticity(ModelParams(1.0, 1.0, 1e-9), 0.02)
    assert tiny == pytest.approx(base, rel=1e-6)


def test_coupling_closed_form_frozen():
    om_dot = -0.1
    td = theta_dot(PARAMS, om_dot)  # +0.05
    got_plus = coupling_closed_form(0, 1, 0, 1, PARAMS, om_dot)
    got_minus = coupling_closed_form(1, 0, 0, 1, PARAMS, om_dot)
    assert got_plus == pytest.approx(td / math.sqrt(2.0), rel=1e-14)
    assert got_minus == pytest.approx(-td / math.sqrt(2.0), rel=1e-14)
    # strength grows with the ladder index as sqrt(l)
    assert coupling_closed_form(0, 1, 3, 4, PARAMS, om_dot) == pytest.approx(
        2.0 * td / math.sqrt(2.0), rel=1e-14
    )


def test_coupling_numeric_matches_closed_form():
    params = ModelParams(1.0, 1.7, 0.9)
    om_dot = 0.23
    basis = enumerate_basis(3, (3, 3, 3))
    for m, k, n, l in [(0, 1, 0, 1), (1, 0, 0, 1), (0, 1, 1, 2), (1, 0, 2, 3)]:
        num = nonadiabatic_coupling(m, k, n, l, params, om_dot, basis)
        assert abs(num.imag) <= 1e-8
        assert num.real == pytest.approx(
            coupling_closed_form(m, k, n, l, params, om_dot), abs=1e-6
        )


def test_coupling_selection_rules():
    params = ModelParams(1.0, 0.8, -1.1)
    om_dot = 0.4
    basis = enumerate_basis(3, (3, 3, 3))
    zero_cases = [
        (0, 0, 1, 1),  # dark-dark with matching quanta: diagonal, no drive
        (1, 1, 0, 2),  # two quanta extracted at once
        (0, 2, 1, 3),
        (2, 0, 1, 3),
        (0, 1, 1, 1),  # total quanta mismatch
        (1, 0, 2, 2),
        (0, 1, 0, 2),
        (1, 0, 0, 3),
        (0, 0, 0, 1),
    ]
    for m, k, n, l in zero_cases:
        assert coupling_closed_form(m, k, n, l, params, om_dot) == 0.0
        assert abs(nonadiabatic_coupling(m, k, n, l, params, om_dot, basis)) <= 1e-8
    with pytest.raises(ValueError):
        coupling_closed_form(-1, 0, 0, 1, params, om_dot)


# ------------------------------------------------------------- integration

def test_default_dt_tracks_peak_coupling():
    prof = write_sweep(PARAMS, 10.0)  # omega_max defaults to 10 g
    assert default_dt(PARAMS, prof) == pytest.approx(0.05 / math.hypot(1.0, 10.0))


def test_constant_profile_keeps_dark_state_stationary():
    prof = SweepProfile("linear", 0.0, 5.0, 2.0, 2.0)
    res = dark_transfer(1, PARAMS.with_omega(2.0), prof)
    assert res.max_eta == 0.0
    assert res.fidelity == pytest.approx(1.0, abs=1e-10)


def test_vacuum_is_inert():
    basis = enumerate_basis(3, (1, 1, 1), sector=0)
    vac = StateVector(basis, np.array([1.0 + 0.0j]))
    traj = evolve(vac, PARAMS, write_sweep(PARAMS, 5.0))
    assert abs(abs(traj.final_state.amplitudes[0]) - 1.0) <= 1e-12
    assert traj.norm_drift <= 1e-12


def test_step_halving_converges():
    prof = write_sweep(PARAMS, 20.0, omega_max=5.0)
    dt = default_dt(PARAMS, prof)
    f1 = dark_transfer(1, PARAMS, prof, dt=dt).fidelity
    f2 = dark_transfer(1, PARAMS, prof, dt=0.5 * dt).fidelity
    assert abs(f1 - f2) <= 1e-8


def test_too_large_step_raises():
    params = ModelParams(10.0, 10.0, 0.0)
    prof = SweepProfile("linear", 0.0, 20.0, 10.0, 10.0)
    with pytest.raises(StepTooLarge):
        evolve(
            StateVector(
                enumerate_basis(3, (1, 1, 1), sector=1),
                np.array([1.0, 0.0, 0.0], dtype=complex),
            ),
            params,
            prof,
            dt=1.0,
        )


def test_trajectory_record_invariants():
    prof = write_sweep(PARAMS, 12.0)
    res = dark_transfer(1, PARAMS, prof, record_every=50)
    traj = res.trajectory
    assert traj.times[0] == prof.t_start
    assert traj.times[-1] == pytest.approx(prof.t_end)
    assert np.all(np.diff(traj.times) > 0)
    n = len(traj.times)
    assert (
        len(traj.omegas)
        == len(traj.thetas)
        == len(traj.etas)
        == len(traj.dark_fidelities)
        == len(traj.states)
        == n
    )
    assert traj.max_eta >= float(np.max(traj.etas))
    assert np.all(traj.dark_fidelities <= 1.0 + 1e-9)
    # tanh ramps meet their endpoints only asymptotically
    assert traj.omegas[0] == pytest.approx(prof.omega_start, abs=1e-3)


# -------------------------------------------------------------- transfers

def test_slow_sweep_transfers_dark_state_cleanly():
    prof = write_sweep(PARAMS, 180.0)
    res = dark_transfer(1, PARAMS, prof)
    assert res.max_eta <= 0.05
    assert res.fidelity >= 0.99


def test_fast_sweep_fails_to_transfer():
    prof = write_sweep(PARAMS, 3.0)
    res = dark_transfer(1, PARAMS, prof)
    assert res.max_eta >= 1.0
    assert res.fidelity <= 0.9


def test_transfer_is_linear_on_superpositions():
    basis = enumerate_basis(3, (2, 2, 2))
    prof = write_sweep(PARAMS, 90.0)
    th0 = mixing_angle(PARAMS.with_omega(prof.value(prof.t_start)))
    th1 = mixing_angle(PARAMS.with_omega(prof.value(prof.t_end)))
    amps = sum(dark_state(n, th0, basis).amplitudes for n in range(3)) / math.sqrt(3)
    traj = evolve(StateVector(basis, amps), PARAMS, prof)
    target = sum(dark_state(n, th1, basis).amplitudes for n in range(3)) / math.sqrt(3)
    fid = abs(np.vdot(target, traj.final_state.amplitudes)) ** 2
    assert fid >= 0.99


# ------------------------------------------------------- density matrices

def test_probe_density_matrix_validation():
    with pytest.raises(ValueError):
        ProbeDensityMatrix(np.ones((2, 3)))
    with pytest.raises(ValueError):
        ProbeDensityMatrix(np.array([[0.5, 0.5j], [0.5j, 0.5]]))  # not Hermitian
    with pytest.raises(ValueError):
        ProbeDensityMatrix(np.eye(2))  # trace 2
    with pytest.raises(ValueError):
        ProbeDensityMatrix(np.diag([1.5, -0.5]))  # negative eigenvalue


def test_probe_pure_normalizes():
    rho = ProbeDensityMatrix.pure([1.0, 1.0])
    assert rho.matrix[0, 1] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        ProbeDensityMatrix.pure([0.0, 0.0])


def test_density_fidelity_properties():
    rho = ProbeDensityMatrix.pure([1.0, 2.0]).matrix
    sigma = ProbeDensityMatrix.pure([1.0, 0.0]).matrix
    assert density_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-12)
    assert density_fidelity(rho, sigma) == pytest.approx(0.2, abs=1e-12)
    # subnormalized second argument cannot score above its trace
    assert density_fidelity(rho, 0.5 * rho) == pytest.approx(0.5, abs=1e-12)


# ---------------------------------------------------------- memory write/read

def test_store_flips_coherence_sign():
    rho = ProbeDensityMatrix.pure([math.sqrt(0.5), math.sqrt(0.5)])
    res = store(rho, PARAMS, write_sweep(PARAMS, 60.0))
    assert res.rho_out[0, 1].real < -0.45
    assert abs(res.rho_out[0, 1].imag) <= 1e-6
    assert res.captured_weight >= 0.95
    assert float(np.trace(res.rho_out).real) <= 1.0 + 1e-9


def test_store_single_quantum_population():
    res = store(ProbeDensityMatrix.pure([0.0, 1.0]), PARAMS, write_sweep(PARAMS, 60.0))
    diag = np.diag(res.rho_out).real
    assert diag[0] <= 1e-8
    assert diag[1] >= 0.97


def test_round_trip_restores_input():
    rho = ProbeDensityMatrix.pure([math.sqrt(0.5), math.sqrt(0.5)])
    st = store(rho, PARAMS, write_sweep(PARAMS, 60.0))
    rt = retrieve(st.rho_out, PARAMS, read_sweep(PARAMS, 60.0))
    assert density_fidelity(rho, rt.rho_out) >= 0.95
    assert rt.as_probe().matrix[0, 1].real > 0.45


def test_store_requires_control_to_close():
    rho = ProbeDensityMatrix.pure([1.0, 0.0])
    with pytest.raises(ProfileNotClosing):
        store(rho, PARAMS, read_sweep(PARAMS, 60.0))


def test_retrieve_requires_control_to_open():
    rho = np.diag([1.0, 0.0]).astype(complex)
    with pytest.raises(ProfileNotClosing):
        retrieve(rho, PARAMS, write_sweep(PARAMS, 60.0))
