"""Acceptance gate: nine end-to-end checks with pinned tolerances and budgets.

Each test covers one numbered criterion and prints a single PASS line with
the measured figure of merit; run with -v for one line per criterion.
"""

import json
import math
import time

import numpy as np
import pytest

from eitsim.cli import main
from eitsim.dynamics import (
    ProbeDensityMatrix,
    adiabaticity,
    coupling_closed_form,
    dark_transfer,
    density_fidelity,
    nonadiabatic_coupling,
    read_sweep,
    retrieve,
    store,
    write_sweep,
)
from eitsim.exact import bosonic_commutator_defect, bosonic_defect, commutator_defect
from eitsim.fock import eigendecompose, enumerate_basis
from eitsim.model import (
    ModelParams,
    build_hamiltonian,
    dark_state,
    dressed_energy,
    mixing_angle,
    spectral_data,
)

ZERO_DETUNING = ModelParams(1.0, 1.0, 0.0)


def _draw_params(rng):
    return ModelParams(
        g_sqrt_n=1.0,
        omega=float(rng.uniform(0.0, 10.0)),
        delta_c=float(rng.uniform(-5.0, 5.0)),
    )


def test_criterion_1_dark_state_nullity():
    rng = np.random.default_rng(11)
    bases = {n: enumerate_basis(3, (n, n, n), sector=n) for n in range(5)}
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        params = _draw_params(rng)
        theta = mixing_angle(params)
        for n, basis in bases.items():
            h = build_hamiltonian(params, basis).dense()
            d = dark_state(n, theta, basis).amplitudes
            worst = max(worst, float(np.linalg.norm(h @ d)) / params.epsilon)
    elapsed = time.perf_counter() - start
    assert worst <= 1e-10
    assert elapsed < 1.0
    print(f"PASS criterion-1: max ||H d_n|| / eps = {worst:.3e} in {elapsed:.2f}s")


def test_criterion_2_spectrum_multiset():
    rng = np.random.default_rng(23)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(10):
        params = _draw_params(rng)
        for sector in range(5):
            basis = enumerate_basis(3, (sector, sector, sector), sector=sector)
            numeric = sorted(
                val for val, _ in eigendecompose(build_hamiltonian(params, basis))
            )
            closed = sorted(
                dressed_energy(m, k, params)
                for m in range(sector + 1)
                for k in range(sector + 1 - m)
            )
            worst = max(
                worst, max(abs(a - b) for a, b in zip(numeric, closed))
            )
    elapsed = time.perf_counter() - start
    assert worst <= 1e-8
    assert elapsed < 5.0
    print(f"PASS criterion-2: max eigenvalue mismatch = {worst:.3e} in {elapsed:.2f}s")


def test_criterion_3_normal_mode_energies():
    rng = np.random.default_rng(37)
    worst = 0.0
    for _ in range(10):
        params = _draw_params(rng)
        sd = spectral_data(params)
        ref = np.linalg.eigvalsh(
            np.array([[params.delta_c, params.epsilon], [params.epsilon, 0.0]])
        )
        worst = max(worst, abs(sd.e_minus - ref[0]), abs(sd.e_plus - ref[1]))
    assert worst <= 1e-12
    instance = spectral_data(ModelParams(1.0, 1.0, 1.0))
    assert instance.e_plus == 2.0
    assert instance.e_minus == -1.0
    print(f"PASS criterion-3: max |e± - eigh| = {worst:.3e}; (1,1,1) -> (2, -1) exact")


def test_criterion_4_exact_algebra_and_defect_scaling():
    start = time.perf_counter()
    worst = 0.0
    for n in (1, 2, 4, 8, 16, 32):
        defects = commutator_defect(n)
        worst = max(worst, defects["[A,Cdag]+Tminus/N"], defects["[Tminus,Adag]-Cdag"])
    assert worst <= 1e-12
    ns = np.array([2.0, 4.0, 8.0, 16.0, 32.0])
    slopes = []
    for key in ("[A,Adag]-1", "[A,Cdag]"):
        vals = [bosonic_commutator_defect(int(n))[key] for n in ns]
        slopes.append(float(np.polyfit(np.log(ns), np.log(vals), 1)[0]))
    elapsed = time.perf_counter() - start
    assert all(abs(s + 1.0) <= 0.2 for s in slopes)
    assert elapsed < 10.0
    print(
        f"PASS criterion-4: identity defects <= {worst:.3e}, "
        f"scaling exponents {slopes[0]:+.3f}/{slopes[1]:+.3f} in {elapsed:.2f}s"
    )


def test_criterion_5_finite_n_dark_states():
    start = time.perf_counter()
    theta = mixing_angle(ZERO_DETUNING)
    worst_n1 = 0.0
    for n_atoms in (1, 2, 4, 8, 16, 32):
        residual, _ = bosonic_defect(n_atoms, 1, theta, ZERO_DETUNING)
        worst_n1 = max(worst_n1, residual)
    r16, _ = bosonic_defect(16, 2, theta, ZERO_DETUNING)
    r32, _ = bosonic_defect(32, 2, theta, ZERO_DETUNING)
    ratio = r16 / r32
    elapsed = time.perf_counter() - start
    assert worst_n1 <= 1e-12
    assert 1.8 <= ratio <= 2.2
    assert elapsed < 10.0
    print(
        f"PASS criterion-5: n=1 residual <= {worst_n1:.3e}, "
        f"n=2 residual ratio 16->32 = {ratio:.3f} in {elapsed:.2f}s"
    )


def test_criterion_6_nonadiabatic_couplings():
    rng = np.random.default_rng(53)
    basis = enumerate_basis(3, (3, 3, 3))
    start = time.perf_counter()
    worst_match = 0.0
    worst_zero = 0.0
    for _ in range(3):
        params = _draw_params(rng)
        om_dot = float(rng.uniform(-0.5, 0.5))
        for l in (1, 2, 3):
            for m, k in ((0, 1), (1, 0)):
                num = nonadiabatic_coupling(m, k, l - 1, l, params, om_dot, basis)
                ref = coupling_closed_form(m, k, l - 1, l, params, om_dot)
                worst_match = max(worst_match, abs(num - ref))
        for m, k, n, l in ((1, 1, 0, 2), (0, 2, 1, 3), (0, 0, 0, 1), (0, 1, 1, 1)):
            worst_zero = max(
                worst_zero, abs(nonadiabatic_coupling(m, k, n, l, params, om_dot, basis))
            )
    elapsed = time.perf_counter() - start
    assert worst_match <= 1e-6
    assert worst_zero <= 1e-8
    assert elapsed < 5.0
    print(
        f"PASS criterion-6: coupling mismatch <= {worst_match:.3e}, "
        f"forbidden <= {worst_zero:.3e} in {elapsed:.2f}s"
    )


def test_criterion_7_adiabatic_transfer():
    start = time.perf_counter()
    slow = dark_transfer(1, ZERO_DETUNING, write_sweep(ZERO_DETUNING, 180.0))
    assert slow.max_eta <= 0.05
    assert slow.fidelity >= 0.99
    fast = dark_transfer(1, ZERO_DETUNING, write_sweep(ZERO_DETUNING, 3.0))
    assert fast.max_eta >= 1.0
    assert fast.fidelity <= 0.9
    om_dot = -0.173
    expected = ZERO_DETUNING.g_sqrt_n * abs(om_dot) / ZERO_DETUNING.epsilon**3
    assert adiabaticity(ZERO_DETUNING, om_dot) == expected
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    print(
        f"PASS criterion-7: slow eta {slow.max_eta:.3f} F {slow.fidelity:.6f}; "
        f"fast eta {fast.max_eta:.2f} F {fast.fidelity:.3f} in {elapsed:.2f}s"
    )


def test_criterion_8_write_read_maps():
    start = time.perf_counter()
    params = ZERO_DETUNING
    rho = ProbeDensityMatrix.pure([math.sqrt(0.5), math.sqrt(0.5)])
    stored = store(rho, params, write_sweep(params, 240.0, omega_max=20.0))
    sweep_infidelity = 1.0 - stored.captured_weight
    off = stored.rho_out[0, 1]
    assert off.real < 0.0
    assert abs(off - (-0.5)) <= max(sweep_infidelity, 1e-3)
    retrieved = retrieve(
        stored.rho_out, params, read_sweep(params, 240.0, omega_max=20.0)
    )
    fidelity = density_fidelity(rho, retrieved.rho_out)
    elapsed = time.perf_counter() - start
    assert fidelity >= 0.98
    assert elapsed < 60.0
    print(
        f"PASS criterion-8: stored coherence {off.real:+.6f}, "
        f"round trip F = {fidelity:.6f} in {elapsed:.2f}s"
    )


def test_criterion_9_verify_is_deterministic(tmp_path):
    first = tmp_path / "report1.json"
    second = tmp_path / "report2.json"
    assert main(["verify", "--out", str(first)]) == 0
    assert main(["verify", "--out", str(second)]) == 0
    b1 = first.read_bytes()
    assert b1 == second.read_bytes()
    report = json.loads(b1)
    assert report["all_passed"] is True
    print(
        f"PASS criterion-9: {report['n_checks']} checks, "
        f"two runs byte-identical ({len(b1)} bytes)"
    )
