"""Observables and gate-simulation drivers."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import (
    DensityState,
    IntegrationConfig,
    Restriction,
    build_channels,
    excitation_restrict,
    integrate_master,
)
from .holonomy import (
    DFSEncoding,
    GateSpec,
    ParameterError,
    encoding_s1,
    encoding_s2,
    gate_params,
    pulse_time,
)
from .model import PhysicalParams, pair_hamiltonian, single_qubit_pairs, two_qubit_pairs

WORKERS_ENV = "HOLODFS_WORKERS"


def _fmt(x: float) -> str:
    return f"{x:.9g}"


@dataclass
class TimeSeries:
    times: np.ndarray
    labels: list[str]
    populations: np.ndarray  # (n_times, n_labels)
    fidelity: np.ndarray
    leakage: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pops = np.asarray(self.populations)
        if pops.shape != (len(self.times), len(self.labels)):
            raise ValueError(f"populations shape {pops.shape} does not match times/labels")

    @property
    def final_fidelity(self) -> float:
        return float(self.fidelity[-1])

    def max_fidelity(self, t_max: float | None = None) -> float:
        mask = np.ones(len(self.times), bool) if t_max is None else self.times <= t_max * (1 + 1e-12)
        return float(np.max(self.fidelity[mask]))

    def to_csv(self, path: str | os.PathLike | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["time_ns"] + [f"pop_{lab}" for lab in self.labels] + ["fidelity"])
        for t, pops, f in zip(self.times, self.populations, self.fidelity):
            w.writerow([_fmt(t)] + [_fmt(p) for p in pops] + [_fmt(f)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


@dataclass
class ScanResult:
    theta_grid: np.ndarray
    max_fidelity_identical: np.ndarray
    max_fidelity_individual: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.theta_grid) <= 0):
            raise ValueError("theta grid must be strictly increasing")

    def to_csv(self, path: str | os.PathLike | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["theta_over_pi", "maxF_identical", "maxF_individual"])
        for th, a, b in zip(self.theta_grid, self.max_fidelity_identical, self.max_fidelity_individual):
            w.writerow([_fmt(th / np.pi), _fmt(a), _fmt(b)])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

def _photon_stack(enc: DFSEncoding, qubit_vec: np.ndarray, restriction: Restriction | None) -> np.ndarray:
    """Columns |n> (x) |qubit_vec> for n = 0..n_max, in the (restricted) simulation basis."""
    layout = enc.layout
    nq = 2 ** layout.n_qubits
    cols = np.zeros((layout.total_dim, layout.n_max + 1), dtype=complex)
    for n in range(layout.n_max + 1):
        cols[n * nq:(n + 1) * nq, n] = qubit_vec
    return cols if restriction is None else cols[restriction.indices]


def _expect_traced(rho: np.ndarray, cols: np.ndarray) -> np.ndarray:
    # sum_n <n,v| rho |n,v>, batch aware
    return np.real(np.einsum("in,...ij,jn->...", cols.conj(), rho, cols))


def _label_vector(enc: DFSEncoding, label: str) -> np.ndarray:
    v = np.zeros(2 ** enc.layout.n_qubits, dtype=complex)
    v[enc.qubit_index(label)] = 1.0
    return v


def logical_target_vector(enc: DFSEncoding, amplitudes: Sequence[complex]) -> np.ndarray:
    """Qubit-space vector for amplitudes over the encoding's logical labels."""
    amps = np.asarray(amplitudes, dtype=complex)
    if amps.shape[-1] not in (enc.n_logical, enc.dim):
        raise ParameterError(f"expected {enc.n_logical} logical amplitudes, got {amps.shape}")
    v = np.zeros(2 ** enc.layout.n_qubits, dtype=complex)
    for lab, a in zip(enc.labels, amps):
        v[enc.qubit_index(lab)] = a
    return v


def logical_populations(
    rho: DensityState | np.ndarray, enc: DFSEncoding, restriction: Restriction | None = None
) -> dict[str, float]:
    """Populations of each encoding label after tracing out the cavity."""
    mat = rho.rho if isinstance(rho, DensityState) else np.asarray(rho)
    expected = enc.layout.total_dim if restriction is None else restriction.dim
    if mat.shape[-1] != expected:
        raise ValueError(f"state dimension {mat.shape[-1]} does not match encoding layout ({expected})")
    return {
        lab: float(_expect_traced(mat, _photon_stack(enc, _label_vector(enc, lab), restriction)))
        for lab in enc.labels
    }


def state_fidelity(
    rho: DensityState | np.ndarray,
    target: Sequence[complex],
    enc: DFSEncoding,
    restriction: Restriction | None = None,
) -> float:
    """<target| Tr_cavity(rho) |target> for a logical pure target state."""
    mat = rho.rho if isinstance(rho, DensityState) else np.asarray(rho)
    v = logical_target_vector(enc, target)
    v = v / np.linalg.norm(v)
    return float(_expect_traced(mat, _photon_stack(enc, v, restriction)))


# ---------------------------------------------------------------------------
# gate runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationOptions:
    """Numerical settings shared by every gate run."""

    dt: float | None = None  # default: 2*pi / (200 * 2 * delta)
    n_max: int = 2
    sample_stride: int = 100
    duration_factor: float = 1.0
    restrict: bool = True
    excitation_margin: int = 0  # dynamics never raise the excitation number
    check: bool = True

    def config(self, delta: float, t_end: float) -> IntegrationConfig:
        dt = IntegrationConfig.default_dt(delta) if self.dt is None else self.dt
        cfg = IntegrationConfig(dt=dt, t_end=t_end, sample_stride=self.sample_stride, n_max=self.n_max)
        cfg.validate_resolution(delta)
        return cfg


@dataclass(frozen=True, eq=False)
class GateSetup:
    gate: GateSpec
    enc: DFSEncoding
    pairs: list
    lam: float
    tau: float


def gate_setup(gate: GateSpec, params: PhysicalParams, n_max: int = 2) -> GateSetup:
    if gate.kind == "u1":
        enc = encoding_s1(n_max)
        pairs = single_qubit_pairs(gate.angle, gate.phase, params.g)
    else:
        enc = encoding_s2(n_max)
        pairs = two_qubit_pairs(gate.angle, gate.phase, params.g)
    lam, _ = gate_params(pairs[0].g_mn, pairs[1].g_mn, params.delta)
    return GateSetup(gate, enc, pairs, lam, pulse_time(lam))


def simulate_gate(
    gate: GateSpec,
    initial: Sequence[complex] | np.ndarray,
    params: PhysicalParams,
    mode: str = "collective",
    options: SimulationOptions = SimulationOptions(),
) -> list[TimeSeries]:
    """Full-model Lindblad run of a holonomic gate for one or more initial logical states.

    ``initial`` is a vector of logical amplitudes or a 2-D batch of them; all
    states share one integration. Returns one ``TimeSeries`` per state.
    """
    setup = gate_setup(gate, params, options.n_max)
    enc = setup.enc
    layout = enc.layout
    init = np.atleast_2d(np.asarray(initial, dtype=complex))
    if init.shape[1] != enc.n_logical:
        raise ParameterError(f"{gate.kind} needs {enc.n_logical} logical amplitudes, got {init.shape[1]}")
    init = init / np.linalg.norm(init, axis=1, keepdims=True)
    targets = init @ gate.matrix().T

    ham = pair_hamiltonian(layout, setup.pairs, params.delta)
    channels = build_channels(layout, params, mode)
    restriction = None
    psis = np.array([enc.physical_state(a) for a in init])
    if options.restrict:
        # every encoding label carries the same excitation number
        n_exc = int(enc.bits(enc.labels[0]).count("1"))
        restriction = excitation_restrict(layout, n_exc + options.excitation_margin)
        ham = ham.restrict(restriction.indices)
        channels = restriction.restrict_channels(channels)
        psis = np.array([restriction.restrict_state(p) for p in psis])
    rho0 = np.einsum("bi,bj->bij", psis, psis.conj())

    cfg = options.config(params.delta, options.duration_factor * setup.tau)
    traj = integrate_master(ham, rho0, channels, cfg, check=options.check)

    label_cols = [_photon_stack(enc, _label_vector(enc, lab), restriction) for lab in enc.labels]
    vac_cols = np.stack([c[:, 0] for c in label_cols], axis=1)
    out = []
    for b in range(init.shape[0]):
        states = traj.states[:, b]
        pops = np.stack([_expect_traced(states, c) for c in label_cols], axis=1)
        tcols = _photon_stack(enc, logical_target_vector(enc, targets[b]), restriction)
        fid = _expect_traced(states, tcols)
        in_dfs = np.real(np.einsum("in,tij,jn->t", vac_cols.conj(), states, vac_cols))
        out.append(
            TimeSeries(
                times=traj.times.copy(),
                labels=enc.labels,
                populations=pops,
                fidelity=fid,
                leakage=1.0 - in_dfs,
                meta={
                    "gate": gate,
                    "mode": mode,
                    "tau": setup.tau,
                    "lambda": setup.lam,
                    "dt": cfg.t_end / max(cfg.n_steps(), 1),
                    "dim": ham.dim,
                    "initial": init[b],
                    "target": targets[b],
                    **{k: v for k, v in traj.diagnostics.items()},
                },
            )
        )
    return out


def run_single_qubit_gate(theta, phi, initial, params, mode="collective", options=SimulationOptions()) -> TimeSeries:
    return simulate_gate(GateSpec("u1", theta, phi), initial, params, mode, options)[0]


def run_two_qubit_gate(vartheta, phi, initial, params, mode="collective", options=SimulationOptions()) -> TimeSeries:
    return simulate_gate(GateSpec("u2", vartheta, phi), initial, params, mode, options)[0]


def logical_basis_state(label: str, gate_kind: str) -> np.ndarray:
    enc_labels = ["0", "1"] if gate_kind == "u1" else ["00", "01", "10", "11"]
    if label not in enc_labels:
        raise ParameterError(f"initial label {label!r} not one of {enc_labels}")
    v = np.zeros(len(enc_labels), dtype=complex)
    v[enc_labels.index(label)] = 1.0
    return v


# ---------------------------------------------------------------------------
# theta scan
# ---------------------------------------------------------------------------

def _scan_mode(args):
    gate, grid, params, mode, options = args
    init = np.stack([np.cos(grid), np.sin(grid)], axis=1).astype(complex)
    runs = simulate_gate(gate, init, params, mode, options)
    window = options.duration_factor * runs[0].meta["tau"]
    return np.array([r.max_fidelity(window) for r in runs])


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def theta_scan(
    gate: GateSpec,
    n_points: int = 11,
    params: PhysicalParams | None = None,
    options: SimulationOptions | None = None,
    workers: int | None = None,
) -> ScanResult:
    """Max fidelity over [0, 1.2 tau] for cos(T)|0>_L + sin(T)|1>_L, T on a grid over [0, pi].

    Both decoherence modes are computed; the result does not depend on
    ``workers`` (each mode is a separate deterministic integration).
    """
    if gate.kind != "u1":
        raise ParameterError("theta scan is defined for single-qubit gates")
    if n_points < 2:
        raise ParameterError("n_points must be >= 2")
    params = params or PhysicalParams()
    options = options or SimulationOptions(duration_factor=1.2)
    grid = np.linspace(0.0, np.pi, n_points)
    jobs = [(gate, grid, params, mode, options) for mode in ("collective", "individual")]
    workers = default_workers() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as ex:
            identical, individual = list(ex.map(_scan_mode, jobs))
    else:
        identical, individual = [_scan_mode(j) for j in jobs]
    return ScanResult(grid, identical, individual)


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------

def convergence_check(
    gate: GateSpec,
    initial: Sequence[complex],
    params: PhysicalParams,
    mode: str = "collective",
    options: SimulationOptions = SimulationOptions(),
) -> dict[str, float]:
    """Final-fidelity changes under dt halving and under n_max -> n_max + 1."""
    base = simulate_gate(gate, initial, params, mode, options)[0]
    dt = base.meta["dt"]
    half = simulate_gate(gate, initial, params, mode, replace(options, dt=dt / 2, sample_stride=2 * options.sample_stride))[0]
    more = simulate_gate(gate, initial, params, mode, replace(options, n_max=options.n_max + 1))[0]
    return {
        "fidelity": base.final_fidelity,
        "dt": dt,
        "dt_halving_delta": abs(half.final_fidelity - base.final_fidelity),
        "n_max_delta": abs(more.final_fidelity - base.final_fidelity),
    }
