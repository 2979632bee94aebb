"""Independent numerical checks of the holonomic construction.

Each check returns an ``OracleResult``; ``run_all`` is what ``holodfs verify``
prints.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .dynamics import propagate_state
from .hilbert import SpaceLayout
from .holonomy import (
    collective_sz_in,
    cnot_construction,
    dressed_in_dfs,
    encoding_s1,
    encoding_s2,
    equal_up_to_phase,
    gate_params,
    holonomic_u1_from_h1,
    holonomic_u2_from_h2,
    parallel_transport_check,
    pulse_time,
    u1_matrix,
    u2_matrix,
)
from .model import (
    PairDrive,
    PhysicalParams,
    effective_hamiltonian,
    h1_dfs,
    h2_dfs,
    pair_hamiltonian,
    single_qubit_pairs,
)


@dataclass(frozen=True)
class OracleResult:
    name: str
    value: float
    threshold: float
    passed: bool
    comparison: str = "<"

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<34} {self.value:.3e} {self.comparison} {self.threshold:.1e}"


def _below(name, value, threshold):
    return OracleResult(name, float(value), threshold, bool(value < threshold), "<")


def _above(name, value, threshold):
    return OracleResult(name, float(value), threshold, bool(value >= threshold), ">=")


def _overlaps(full_states, psi0, h_eff, times):
    ev, vecs = np.linalg.eigh(h_eff)
    c0 = vecs.conj().T @ psi0
    out = []
    for t, psi in zip(times, full_states):
        eff = vecs @ (np.exp(-1j * ev * t) * c0)
        out.append(abs(np.vdot(eff, psi)) ** 2)
    return np.array(out)


def pair_overlap(
    delta_over_g: float = 20.0,
    detuning_sign: int = 1,
    phase: float = 0.4,
    n_max: int = 2,
    g: float = 2 * np.pi * 0.05,
    flip_minus: bool = False,
    n_samples: int = 40,
) -> tuple[float, float]:
    """Full vs effective propagation of one pair from |vac; 10>.

    Returns the overlap at the swap time pi*delta/(2 g^2) and the minimum
    overlap over the sampled trajectory.
    """
    delta = delta_over_g * g
    layout = SpaceLayout.cavity_qubits(n_max, 2)
    pair = PairDrive(1, 2, g, detuning_sign, phase, 0.0)
    full = pair_hamiltonian(layout, [pair], delta, flip_minus=flip_minus)
    h_eff = effective_hamiltonian(layout, [pair], delta).data
    psi0 = layout.basis_vector(0, "10")
    t_swap = np.pi * delta / (2 * g ** 2)
    dt = 2 * np.pi / (200 * 2 * delta)
    times, states = propagate_state(full, psi0, t_swap, dt, n_samples=n_samples)
    ov = _overlaps(states, psi0, h_eff, times)
    return float(ov[-1]), float(ov.min())


def dfs_overlap(
    theta: float = np.pi / 3,
    phi: float = 0.7,
    params: PhysicalParams | None = None,
    flip_minus: bool = False,
    n_max: int = 1,
    n_samples: int = 40,
) -> float:
    """Minimum overlap between full 3-qubit dynamics and exp(-i H1 t) along one gate."""
    params = params or PhysicalParams()
    enc = encoding_s1(n_max)
    layout = enc.layout
    pairs = single_qubit_pairs(theta, phi, params.g)
    full = pair_hamiltonian(layout, pairs, params.delta, flip_minus=flip_minus)
    h_eff = effective_hamiltonian(layout, pairs, params.delta).data
    psi0 = enc.physical_state(np.array([0.6, 0.8j]))
    lam, _ = gate_params(pairs[0].g_mn, pairs[1].g_mn, params.delta)
    dt = 2 * np.pi / (200 * 2 * params.delta)
    times, states = propagate_state(full, psi0, pulse_time(lam), dt, n_samples=n_samples)
    return float(_overlaps(states, psi0, h_eff, times).min())


def h1_matches_pairs(theta: float = 1.1, phi: float = 0.3, params: PhysicalParams | None = None) -> float:
    """Max entry difference between h1_dfs and the compensated pair model inside S1."""
    params = params or PhysicalParams()
    enc = encoding_s1(1)
    pairs = single_qubit_pairs(theta, phi, params.g)
    h_pairs = enc.restrict(effective_hamiltonian(enc.layout, pairs, params.delta))
    h1 = h1_dfs(pairs[0].g_mn, pairs[1].g_mn, params.delta, phi).data
    return float(np.max(np.abs(h_pairs - h1)))


def holonomy_u1_error(n: int = 50, seed: int = 7) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    delta = 2 * np.pi
    for theta, phi in zip(rng.uniform(0.05, np.pi - 0.05, n), rng.uniform(-np.pi, np.pi, n)):
        g23 = 0.3
        g12 = g23 * np.sqrt(np.tan(theta / 2))
        h = h1_dfs(g12, g23, delta, phi)
        lam, _ = gate_params(g12, g23, delta)
        u = holonomic_u1_from_h1(h, pulse_time(lam))
        worst = max(worst, equal_up_to_phase(u, u1_matrix(theta, phi)))
    return worst


def h2_parts_from(h2) -> tuple[np.ndarray, np.ndarray]:
    """Split a two-qubit gate Hamiltonian by support into unit-strength H_a, H_b."""
    mat = h2.data if hasattr(h2, "data") else np.asarray(h2)
    lam = float(np.max(np.abs(np.linalg.eigvalsh(mat))))
    parts = []
    for idx in ((0, 1, 4), (2, 3, 5)):
        part = np.zeros_like(mat)
        part[np.ix_(idx, idx)] = mat[np.ix_(idx, idx)]
        parts.append(part / lam)
    return parts[0], parts[1]


def holonomy_u2_errors(n: int = 50, seed: int = 11) -> tuple[float, float]:
    """Errors of exp(-i H2 tau) against u2_matrix and against exp(-i pi H_a) exp(-i pi H_b)."""
    rng = np.random.default_rng(seed)
    worst_u2 = worst_split = 0.0
    delta = 2 * np.pi
    for vt, phi in zip(rng.uniform(0.05, np.pi - 0.05, n), rng.uniform(-np.pi, np.pi, n)):
        g36 = 0.3
        g34 = g36 * np.sqrt(np.tan(vt / 2))
        h = h2_dfs(g34, g36, delta, phi)
        lam, _ = gate_params(g34, g36, delta)
        tau = pulse_time(lam)
        u = holonomic_u2_from_h2(h, tau)
        worst_u2 = max(worst_u2, equal_up_to_phase(u, u2_matrix(vt, phi)))
        ha, hb = h2_parts_from(h)
        split = expm(-1j * np.pi * ha) @ expm(-1j * np.pi * hb)
        worst_split = max(worst_split, float(np.max(np.abs(expm(-1j * h.data * tau) - split))))
    return worst_u2, worst_split


def parallel_transport_violation(n_points: int = 20, n_samples: int = 100, seed: int = 3) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for theta, phi in zip(rng.uniform(0.05, np.pi - 0.05, n_points), rng.uniform(-np.pi, np.pi, n_points)):
        g23 = 0.3
        g12 = g23 * np.sqrt(np.tan(theta / 2))
        h = h1_dfs(g12, g23, 2 * np.pi, phi)
        lam, _ = gate_params(g12, g23, 2 * np.pi)
        worst = max(worst, parallel_transport_check(h, dressed_in_dfs(theta, phi), pulse_time(lam), n_samples))
    return worst


def cnot_error() -> float:
    expected = np.zeros((4, 4), dtype=complex)
    expected[:2, :2] = np.eye(2)
    expected[2:, 2:] = -1j * np.array([[0, 1], [1, 0]])
    return float(np.max(np.abs(cnot_construction() - expected)))


def dfs_symmetry_error() -> float:
    e1 = np.max(np.abs(collective_sz_in(encoding_s1(1)) + np.eye(3)))
    e2 = np.max(np.abs(collective_sz_in(encoding_s2(1)) + 2 * np.eye(6)))
    return float(max(e1, e2))


def run_all(flip_minus: bool = False) -> list[OracleResult]:
    results = []
    for sign, label in ((1, "+"), (-1, "-")):
        at_swap, worst = pair_overlap(detuning_sign=sign, flip_minus=flip_minus)
        results.append(_above(f"pair effective-vs-full d{label} (swap)", at_swap, 0.98))
        results.append(_above(f"pair effective-vs-full d{label} (min)", worst, 0.98))
    results.append(_above("S1 effective-vs-full (min)", dfs_overlap(flip_minus=flip_minus), 0.98))
    results.append(_below("H1 vs pair model in S1", h1_matches_pairs(), 1e-12))
    results.append(_below("U1 holonomy (cyclicity)", holonomy_u1_error(), 1e-9))
    e_u2, e_split = holonomy_u2_errors()
    results.append(_below("U2 holonomy (cyclicity)", e_u2, 1e-9))
    results.append(_below("U2 = exp(-i pi Ha) exp(-i pi Hb)", e_split, 1e-9))
    results.append(_below("parallel transport", parallel_transport_violation(), 1e-10))
    results.append(_below("CNOT composition", cnot_error(), 1e-12))
    results.append(_below("DFS S^z symmetry", dfs_symmetry_error(), 1e-15))
    return results
