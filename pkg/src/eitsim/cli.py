"""Command-line entry point: verify, spectrum, store-retrieve, sweep.

Configuration comes from an optional flat key-value file plus command-line
flags; flags win.  Structured reports are JSON, per-row data is CSV, and all
numbers use round-trip-safe decimal formatting so identical configs produce
byte-identical outputs.  Exit codes: 0 success, 1 failed check, 2 bad config.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import fock, verify
from .dynamics import (
    ProbeDensityMatrix,
    SweepProfile,
    dark_transfer,
    density_fidelity,
    evolve,
    read_sweep,
    retrieve,
    store,
    write_sweep,
)
from .errors import (
    ConfigError,
    CutoffTooSmall,
    DimensionOverflow,
    EmptySector,
    ProfileNotClosing,
)
from .fock import StateVector, enumerate_basis
from .model import (
    ModelParams,
    build_hamiltonian,
    dressed_energy,
    mixing_angle,
)

PROFILE_TOKENS = {"linear": "linear", "cosine": "cosine-ramp", "tanh": "tanh"}
DEFAULT_RHO = "0:0:0.5:0, 0:1:0.5:0, 1:0:0.5:0, 1:1:0.5:0"

_FLOAT_KEYS = ("g_sqrt_n", "omega", "delta_c", "dt", "duration", "omega_max", "override_tolerance")
_INT_KEYS = ("n_atoms", "cutoff", "sector", "dark_n", "seed")
_LIST_KEYS = ("durations", "delta_cs")


@dataclass(frozen=True)
class RunConfig:
    """Typed run configuration; zeros mean "use the derived default"."""

    g_sqrt_n: float = 1.0
    omega: float = 1.0
    delta_c: float = 0.0
    n_atoms: int = 16
    cutoff: int = 4
    sector: int = 1
    dt: float = 0.0
    profile: str = "tanh"
    duration: float = 180.0
    omega_max: float = 0.0
    dark_n: int = 4
    seed: int = 7
    durations: tuple = ()
    delta_cs: tuple = ()
    rho: str = DEFAULT_RHO
    override_tolerance: float = 0.0
    provided: frozenset = frozenset()

    def params(self) -> ModelParams:
        try:
            return ModelParams(
                g_sqrt_n=self.g_sqrt_n,
                omega=self.omega,
                delta_c=self.delta_c,
                n_atoms=self.n_atoms,
            )
        except ValueError as err:
            raise ConfigError(str(err)) from err

    def sweep_omega_max(self) -> float:
        return self.omega_max if self.omega_max > 0.0 else 10.0 * self.g_sqrt_n

    def profile_kind(self) -> str:
        return PROFILE_TOKENS[self.profile]

    def dt_or_none(self) -> float | None:
        return self.dt if self.dt > 0.0 else None


def _parse_float(key: str, raw: str) -> float:
    try:
        val = float(raw)
    except ValueError as err:
        raise ConfigError(f"{key} must be a number, got {raw!r}") from err
    if not math.isfinite(val):
        raise ConfigError(f"{key} must be finite, got {raw!r}")
    return val


def _parse_int(key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as err:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from err


def _parse_float_list(key: str, raw: str) -> tuple:
    items = [s for s in (piece.strip() for piece in raw.split(",")) if s]
    return tuple(_parse_float(key, item) for item in items)


def parse_rho_entries(raw: str):
    """Entries "n:m:real:imag" separated by commas."""
    entries = []
    for piece in raw.split(","):
        item = piece.strip()
        if not item:
            continue
        parts = item.split(":")
        if len(parts) != 4:
            raise ConfigError(f"rho entry must be n:m:real:imag, got {item!r}")
        n = _parse_int("rho", parts[0])
        m = _parse_int("rho", parts[1])
        if n < 0 or m < 0:
            raise ConfigError(f"rho indices must be >= 0, got {item!r}")
        entries.append((n, m, _parse_float("rho", parts[2]), _parse_float("rho", parts[3])))
    if not entries:
        raise ConfigError("rho must contain at least one entry")
    return entries


def rho_matrix(raw: str) -> np.ndarray:
    entries = parse_rho_entries(raw)
    dim = max(max(n, m) for n, m, _, _ in entries) + 1
    mat = np.zeros((dim, dim), dtype=complex)
    for n, m, re, im in entries:
        mat[n, m] = re + 1j * im
    return mat


def _coerce(key: str, raw: str):
    if key in _FLOAT_KEYS:
        return _parse_float(key, raw)
    if key in _INT_KEYS:
        return _parse_int(key, raw)
    if key in _LIST_KEYS:
        return _parse_float_list(key, raw)
    if key == "profile":
        if raw not in PROFILE_TOKENS:
            raise ConfigError(
                f"profile must be one of {sorted(PROFILE_TOKENS)}, got {raw!r}"
            )
        return raw
    if key == "rho":
        parse_rho_entries(raw)
        return raw
    raise ConfigError(f"unknown config key {key!r}")


_CONFIG_KEYS = frozenset(
    f.name for f in fields(RunConfig) if f.name != "provided"
)


def parse_config_text(text: str) -> dict:
    """Flat "key = value" lines; # starts a comment; unknown keys rejected."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
        values[key] = _coerce(key, raw.strip())
    return values


def _format_value(key: str, value) -> str:
    if key in _INT_KEYS:
        return str(int(value))
    if key in _FLOAT_KEYS:
        return repr(float(value))
    if key in _LIST_KEYS:
        return ", ".join(repr(float(v)) for v in value)
    if key == "rho":
        entries = parse_rho_entries(value)
        return ", ".join(
            f"{n}:{m}:{repr(float(re))}:{repr(float(im))}" for n, m, re, im in entries
        )
    return str(value)


def canonical_form(config: RunConfig) -> str:
    """Stable text rendering of the keys that were explicitly set."""
    lines = [
        f"{key} = {_format_value(key, getattr(config, key))}"
        for key in sorted(config.provided)
    ]
    return "".join(line + "\n" for line in lines)


def load_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as err:
            raise ConfigError(f"cannot read config file: {err}") from err
        values.update(parse_config_text(text))
    flag_map = {
        "g_sqrt_n": args.g_sqrt_n,
        "omega": args.omega,
        "delta_c": args.delta_c,
        "n_atoms": args.n_atoms,
        "cutoff": args.cutoff,
        "sector": args.sector,
        "dt": args.dt,
        "profile": args.profile,
        "duration": args.duration,
    }
    for key, val in flag_map.items():
        if val is not None:
            values[key] = _coerce(key, str(val)) if isinstance(val, str) else val
    config = RunConfig(**values, provided=frozenset(values))
    _validate(config)
    return config


def _validate(config: RunConfig) -> None:
    config.params()
    if config.cutoff < 0:
        raise ConfigError(f"cutoff must be >= 0, got {config.cutoff}")
    if config.sector < 0:
        raise ConfigError(f"sector must be >= 0, got {config.sector}")
    if config.dark_n < 0:
        raise ConfigError(f"dark_n must be >= 0, got {config.dark_n}")
    if config.dt < 0.0:
        raise ConfigError(f"dt must be >= 0, got {config.dt}")
    if config.duration <= 0.0:
        raise ConfigError(f"duration must be > 0, got {config.duration}")
    if config.omega_max < 0.0:
        raise ConfigError(f"omega_max must be >= 0, got {config.omega_max}")
    if config.seed < 0:
        raise ConfigError(f"seed must be >= 0, got {config.seed}")
    if any(d <= 0.0 for d in config.durations):
        raise ConfigError("durations must all be > 0")
    if config.override_tolerance < 0.0:
        raise ConfigError("override_tolerance must be >= 0")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return repr(float(x))


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    return "".join(line + "\n" for line in lines)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _rho_entries_json(mat: np.ndarray):
    dim = mat.shape[0]
    return [
        [n, m, float(mat[n, m].real), float(mat[n, m].imag)]
        for n in range(dim)
        for m in range(dim)
    ]


def cmd_verify(config: RunConfig, args: argparse.Namespace) -> int:
    override = config.override_tolerance if config.override_tolerance > 0.0 else None
    results = verify.run_all(
        seed=config.seed,
        cutoff=config.cutoff,
        dark_n=config.dark_n,
        n_atoms=config.n_atoms,
        override_tolerance=override,
    )
    failed = [r.name for r in results if not r.passed]
    report = {
        "all_passed": not failed,
        "failed": failed,
        "n_checks": len(results),
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "residual": r.residual,
                "tolerance": r.tolerance,
                "detail": r.detail,
            }
            for r in results
        ],
    }
    if args.format == "csv":
        text = _csv_verify(results)
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    return 0 if not failed else 1


def _csv_verify(results) -> str:
    lines = ["name,passed,residual,tolerance"]
    for r in results:
        lines.append(f"{r.name},{int(r.passed)},{_fmt(r.residual)},{_fmt(r.tolerance)}")
    return "".join(line + "\n" for line in lines)


def cmd_spectrum(config: RunConfig, args: argparse.Namespace) -> int:
    params = config.params()
    sector = config.sector
    basis = enumerate_basis(3, (sector, sector, sector), sector=sector)
    numeric = sorted(val for val, _ in fock.eigendecompose(build_hamiltonian(params, basis)))
    labels = [
        (m, k, sector - m - k)
        for m in range(sector + 1)
        for k in range(sector - m + 1)
    ]
    closed = [(dressed_energy(m, k, params), m, k, n) for m, k, n in labels]
    closed.sort()
    rows = [
        (m, k, n, e_closed, e_num, abs(e_closed - e_num))
        for (e_closed, m, k, n), e_num in zip(closed, numeric)
    ]
    rows.sort(key=lambda r: (r[3], r[0], r[1]))
    if args.format == "json":
        payload = [
            {
                "m": m,
                "k": k,
                "n": n,
                "energy_closed_form": e_c,
                "energy_numeric": e_n,
                "abs_error": err,
            }
            for m, k, n, e_c, e_n, err in rows
        ]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = _csv(
            ("m", "k", "n", "E_closed_form", "E_numeric", "abs_error"),
            rows,
        )
    _emit(text, args.out)
    return 0


def _dominant_state(mat: np.ndarray, basis, tuples) -> StateVector:
    vals, vecs = np.linalg.eigh(mat)
    lead = vecs[:, -1]
    pivot = lead[np.argmax(np.abs(lead))]
    lead = lead * (np.conj(pivot) / abs(pivot))
    amps = np.zeros(basis.dim, dtype=complex)
    for weight, t in zip(lead, tuples):
        amps[basis.state_index(t)] = weight
    return StateVector(basis, amps / np.linalg.norm(amps))


def _trajectory_rows(traj):
    return list(
        zip(traj.times, traj.omegas, traj.thetas, traj.etas, traj.dark_fidelities)
    )


def cmd_store_retrieve(config: RunConfig, args: argparse.Namespace) -> int:
    params = config.params()
    mat = rho_matrix(config.rho)
    try:
        ProbeDensityMatrix(mat)
    except ValueError as err:
        raise ConfigError(f"rho: {err}") from err
    dim = mat.shape[0]
    omega_max = config.sweep_omega_max()
    kind = config.profile_kind()
    dt = config.dt_or_none()
    write_prof = write_sweep(params, config.duration, omega_max=omega_max, kind=kind)
    read_prof = read_sweep(params, config.duration, omega_max=omega_max, kind=kind)

    stored = store(mat, params, write_prof, dt=dt)
    retrieved = retrieve(stored.rho_out, params, read_prof, dt=dt)
    fidelity = density_fidelity(mat, retrieved.rho_out)
    max_eta = max(stored.max_eta, retrieved.max_eta)

    basis = enumerate_basis(3, (dim - 1, dim - 1, dim - 1))
    photon_tuples = [(n, 0, 0) for n in range(dim)]
    state = _dominant_state(mat, basis, photon_tuples)
    traj_write = evolve(state, params, write_prof, dt=dt)
    read_shifted = SweepProfile(
        kind,
        write_prof.t_end,
        write_prof.t_end + read_prof.duration,
        read_prof.omega_start,
        read_prof.omega_end,
    )
    traj_read = evolve(traj_write.final_state, params, read_shifted, dt=dt)
    rows = _trajectory_rows(traj_write) + _trajectory_rows(traj_read)[1:]
    csv_text = _csv(("t", "omega", "theta", "eta", "dark_fidelity"), rows)

    summary = {
        "command": "store-retrieve",
        "dim": dim,
        "rho_in": _rho_entries_json(mat),
        "rho_stored": _rho_entries_json(stored.rho_out),
        "rho_retrieved": _rho_entries_json(retrieved.rho_out),
        "round_trip_fidelity": float(fidelity),
        "nonadiabatic": bool(max_eta >= 1.0),
        "store": {
            "max_eta": stored.max_eta,
            "captured_weight": stored.captured_weight,
            "norm_drift": stored.norm_drift,
            "n_steps": stored.n_steps,
            "theta_end": stored.theta_end,
        },
        "retrieve": {
            "max_eta": retrieved.max_eta,
            "captured_weight": retrieved.captured_weight,
            "norm_drift": retrieved.norm_drift,
            "n_steps": retrieved.n_steps,
            "theta_start": retrieved.theta_start,
        },
        "profile": {
            "kind": kind,
            "duration": config.duration,
            "omega_max": omega_max,
        },
    }
    json_text = json.dumps(summary, indent=2, sort_keys=True) + "\n"

    if args.out is None:
        sys.stdout.write(csv_text if args.format == "csv" else json_text)
    else:
        json_path, csv_path = _twin_paths(args.out)
        _emit(json_text, json_path)
        _emit(csv_text, csv_path)
    return 0


def _twin_paths(out: str) -> tuple:
    root, ext = os.path.splitext(out)
    if ext == ".json":
        return out, root + ".csv"
    if ext == ".csv":
        return root + ".json", out
    return out + ".json", out + ".csv"


def _sweep_point(task):
    duration, delta_c, g_sqrt_n, omega_max, kind, dt = task
    params = ModelParams(g_sqrt_n=g_sqrt_n, omega=omega_max, delta_c=delta_c)
    profile = write_sweep(params, duration, omega_max=omega_max, kind=kind)
    result = dark_transfer(1, params, profile, dt=dt, record_every=1_000_000_000)
    return (duration, delta_c, result.max_eta, 1.0 - result.fidelity)


def _max_workers() -> int:
    raw = os.environ.get("EITSIM_THREADS", "").strip()
    if raw:
        try:
            request = int(raw)
        except ValueError as err:
            raise ConfigError(f"EITSIM_THREADS must be an integer, got {raw!r}") from err
        if request < 1:
            raise ConfigError("EITSIM_THREADS must be >= 1")
        return request
    return min(4, os.cpu_count() or 1)


def cmd_sweep(config: RunConfig, args: argparse.Namespace) -> int:
    config.params()
    durations = config.durations or (config.duration,)
    delta_cs = config.delta_cs or (config.delta_c,)
    omega_max = config.sweep_omega_max()
    kind = config.profile_kind()
    tasks = [
        (duration, dc, config.g_sqrt_n, omega_max, kind, config.dt_or_none())
        for dc in sorted(delta_cs)
        for duration in sorted(durations)
    ]
    workers = _max_workers()
    if workers == 1 or len(tasks) == 1:
        rows = [_sweep_point(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    rows.sort(key=lambda r: (r[1], r[0]))
    if args.format == "json":
        payload = [
            {
                "duration": d,
                "delta_c": dc,
                "max_eta": eta,
                "final_infidelity": infid,
            }
            for d, dc, eta, infid in rows
        ]
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    else:
        text = _csv(("duration", "delta_c", "max_eta", "final_infidelity"), rows)
    _emit(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eitsim",
        description="Dark-state polariton memory simulator and verifier.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("verify", "run the library invariant suite and emit a JSON report"),
        ("spectrum", "closed-form vs numeric dressed energies in one sector"),
        ("store-retrieve", "write a photon density matrix in and read it back"),
        ("sweep", "scan sweep durations / detunings for adiabaticity"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--config", help="flat key = value config file")
        cmd.add_argument("--g-sqrt-n", dest="g_sqrt_n", type=float)
        cmd.add_argument("--omega", type=float)
        cmd.add_argument("--delta-c", dest="delta_c", type=float)
        cmd.add_argument("--n-atoms", dest="n_atoms", type=int)
        cmd.add_argument("--cutoff", type=int)
        cmd.add_argument("--sector", type=int)
        cmd.add_argument("--dt", type=float)
        cmd.add_argument("--profile", choices=sorted(PROFILE_TOKENS))
        cmd.add_argument("--duration", type=float)
        cmd.add_argument("--out", help="output path (store-retrieve writes .json and .csv)")
        cmd.add_argument(
            "--format",
            choices=("csv", "json"),
            default="json" if name in ("verify", "store-retrieve") else "csv",
        )
    return parser


_COMMANDS = {
    "verify": cmd_verify,
    "spectrum": cmd_spectrum,
    "store-retrieve": cmd_store_retrieve,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args)
        return _COMMANDS[args.command](config, args)
    except (ConfigError, CutoffTooSmall, EmptySector, DimensionOverflow) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except ProfileNotClosing as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
