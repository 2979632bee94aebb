"""DFS encodings, analytic holonomic gates and holonomy-condition checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .hilbert import LayoutError, Operator, SpaceLayout, collective_op


class ParameterError(ValueError):
    """Physically meaningless or degenerate parameter choice."""


class CyclicityError(ValueError):
    """Evolution time does not close the bright/ancilla loop (lambda * tau != pi)."""


# ---------------------------------------------------------------------------
# encodings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DFSEncoding:
    """Logical labels mapped onto physical computational-basis bitstrings.

    Bitstrings are read qubit 1 first; ``n_logical`` leading entries of
    ``basis`` are computational states, the rest are ancillas.
    """

    name: str
    basis: tuple[tuple[str, str], ...]
    n_logical: int
    layout: SpaceLayout

    def __post_init__(self):
        n = len(self.basis[0][1])
        if self.layout.n_qubits != n:
            raise LayoutError(f"{self.name} needs {n} qubits, layout has {self.layout.n_qubits}")

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _ in self.basis]

    @property
    def logical_labels(self) -> list[str]:
        return self.labels[: self.n_logical]

    @property
    def ancilla_labels(self) -> list[str]:
        return self.labels[self.n_logical:]

    @property
    def dim(self) -> int:
        return len(self.basis)

    def bits(self, label: str) -> str:
        for lab, b in self.basis:
            if lab == label:
                return b
        raise KeyError(f"{label!r} is not a label of {self.name}; labels are {self.labels}")

    def qubit_index(self, label: str) -> int:
        """Index of the label's bitstring in the qubit-only space (cavity traced out)."""
        return int(self.bits(label), 2)

    def qubit_indices(self) -> np.ndarray:
        return np.array([int(b, 2) for _, b in self.basis])

    def physical_indices(self, n_photons: int = 0) -> np.ndarray:
        return np.array([self.layout.basis_index(n_photons, b) for _, b in self.basis])

    def physical_state(self, amplitudes: Sequence[complex], n_photons: int = 0) -> np.ndarray:
        """Embed amplitudes over the encoding basis (logical first, then ancillas).

        A vector of length ``n_logical`` is padded with zero ancilla amplitudes.
        """
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.shape not in {(self.n_logical,), (self.dim,)}:
            raise LayoutError(f"expected {self.n_logical} or {self.dim} amplitudes, got {amps.shape}")
        full = np.zeros(self.dim, dtype=complex)
        full[: amps.size] = amps
        vec = np.zeros(self.layout.total_dim, dtype=complex)
        vec[self.physical_indices(n_photons)] = full
        return vec

    def label_state(self, label: str, n_photons: int = 0) -> np.ndarray:
        return self.layout.basis_vector(n_photons, self.bits(label))

    def restrict(self, op: Operator, n_photons: int = 0) -> np.ndarray:
        """Matrix of ``op`` in the encoding basis at fixed photon number."""
        idx = self.physical_indices(n_photons)
        return op.data[np.ix_(idx, idx)]


_S1 = (("0", "100"), ("1", "001"), ("a1", "010"))
_S2 = (
    ("00", "100100"), ("01", "100001"), ("10", "001100"), ("11", "001001"),
    ("a2", "101000"), ("a3", "000101"),
)


def encoding_s1(n_max: int = 2) -> DFSEncoding:
    """Three-qubit DFS: |0>_L=|100>, |1>_L=|001>, ancilla |a1>=|010>."""
    return DFSEncoding("S1", _S1, 2, SpaceLayout.cavity_qubits(n_max, 3))


def encoding_s2(n_max: int = 2) -> DFSEncoding:
    """Six-qubit DFS for two logical qubits plus ancillas |a2>, |a3>."""
    return DFSEncoding("S2", _S2, 4, SpaceLayout.cavity_qubits(n_max, 6))


def collective_sz_in(enc: DFSEncoding) -> np.ndarray:
    """S^z restricted to the encoding span (vacuum cavity)."""
    return enc.restrict(collective_op("S_z", enc.layout))


# ---------------------------------------------------------------------------
# analytic gates
# ---------------------------------------------------------------------------

def u1_matrix(theta: float, phi: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s * np.exp(-1j * phi)], [s * np.exp(1j * phi), -c]], dtype=complex)


def u2_matrix(vartheta: float, phi: float) -> np.ndarray:
    c, s = np.cos(vartheta), np.sin(vartheta)
    em, ep = s * np.exp(-1j * phi), s * np.exp(1j * phi)
    return np.array(
        [[c, em, 0, 0], [ep, -c, 0, 0], [0, 0, -c, em], [0, 0, ep, c]], dtype=complex
    )


@dataclass(frozen=True)
class GateSpec:
    kind: str
    angle: float
    phase: float = 0.0

    def __post_init__(self):
        if self.kind not in {"u1", "u2"}:
            raise ParameterError(f"gate kind must be 'u1' or 'u2', got {self.kind!r}")
        if not (np.isfinite(self.angle) and np.isfinite(self.phase)):
            raise ParameterError("gate angle and phase must be finite")

    def matrix(self) -> np.ndarray:
        fn = u1_matrix if self.kind == "u1" else u2_matrix
        return fn(self.angle, self.phase)

    @property
    def n_logical(self) -> int:
        return 2 if self.kind == "u1" else 4


def dark_bright(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Dressed logical states: the dark one is annihilated by the gate Hamiltonian."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    dark = np.array([c, s * np.exp(1j * phi)], dtype=complex)
    bright = np.array([s * np.exp(-1j * phi), -c], dtype=complex)
    return dark, bright


def gate_params(g_a: float, g_b: float, delta: float) -> tuple[float, float]:
    """Effective Rabi frequency and mixing angle of a two-pair Lambda loop.

    ``lambda = sqrt(|g_a|^4 + |g_b|^4) / delta`` and
    ``theta = 2 arctan(|g_a|^2 / |g_b|^2)``.
    """
    if delta <= 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    a2, b2 = abs(g_a) ** 2, abs(g_b) ** 2
    if a2 == 0 and b2 == 0:
        raise ParameterError("both couplings are zero")
    return float(np.hypot(a2, b2) / delta), float(2 * np.arctan2(a2, b2))


def couplings_for(theta: float, g_b: float) -> float:
    """Coupling ``g_a`` giving mixing angle ``theta`` when the other pair runs at ``g_b``."""
    if g_b == 0:
        raise ParameterError("g_b = 0 fixes theta = pi; no finite theta can be requested")
    t = np.tan(theta / 2)
    if not 0 <= t < np.inf or theta < 0 or theta > np.pi:
        raise ParameterError(f"theta must lie in [0, pi), got {theta}")
    return float(abs(g_b) * np.sqrt(t))


def balanced_couplings(theta: float, g_max: float) -> tuple[float, float]:
    """Pair couplings for ``theta`` with the larger one pinned at ``g_max``.

    Keeps both pairs inside the dispersive regime set by ``g_max``.
    """
    if not 0 <= theta <= np.pi:
        raise ParameterError(f"theta must lie in [0, pi], got {theta}")
    if theta <= np.pi / 2:
        return couplings_for(theta, g_max), float(g_max)
    return float(g_max), float(g_max * np.sqrt(1.0 / np.tan(theta / 2)))


def pulse_time(lam: float) -> float:
    """Gate duration closing the cyclic loop, ``pi / lambda``."""
    if lam <= 0:
        raise ParameterError(f"effective Rabi frequency must be positive, got {lam}")
    return float(np.pi / lam)


# ---------------------------------------------------------------------------
# holonomy from Hamiltonians
# ---------------------------------------------------------------------------

def strip_global_phase(mat: np.ndarray) -> np.ndarray:
    """Divide out the phase of the largest-magnitude entry."""
    mat = np.asarray(mat, dtype=complex)
    k = np.argmax(np.abs(mat))
    ref = mat.flat[k]
    return mat * (abs(ref) / ref)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray) -> float:
    """Entrywise max error between ``a`` and ``b`` after aligning global phase."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    k = np.argmax(np.abs(b))
    phase = a.flat[k] / b.flat[k]
    phase /= abs(phase)
    return float(np.max(np.abs(a - phase * b)))


def _holonomy(h: Operator | np.ndarray, tau: float, n_logical: int, atol: float) -> np.ndarray:
    mat = h.data if isinstance(h, Operator) else np.asarray(h, dtype=complex)
    lam = float(np.max(np.abs(np.linalg.eigvalsh(mat))))
    if abs(lam * tau - np.pi) > atol:
        raise CyclicityError(f"lambda*tau = {lam * tau!r} differs from pi by more than {atol}")
    return expm(-1j * mat * tau)[:n_logical, :n_logical]


def holonomic_u1_from_h1(h1: Operator | np.ndarray, tau: float, atol: float = 1e-9) -> np.ndarray:
    """exp(-i H1 tau) restricted to {|0>_L, |1>_L}; requires a cyclic tau."""
    return _holonomy(h1, tau, 2, atol)


def holonomic_u2_from_h2(h2: Operator | np.ndarray, tau: float, atol: float = 1e-9) -> np.ndarray:
    """exp(-i H2 tau) restricted to the four logical two-qubit states."""
    return _holonomy(h2, tau, 4, atol)


def parallel_transport_check(
    h: Operator | np.ndarray,
    vectors: Sequence[np.ndarray],
    tau: float,
    n_samples: int = 100,
    relative: bool = True,
) -> float:
    """Largest |<psi_i(t)|H|psi_j(t)>| over sampled t in [0, tau].

    With ``relative`` the result is divided by the spectral norm of ``h``.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    mat = h.data if isinstance(h, Operator) else np.asarray(h, dtype=complex)
    vecs = np.stack([np.asarray(v, dtype=complex) for v in vectors], axis=1)
    evals, evecs = np.linalg.eigh(mat)
    coeffs = evecs.conj().T @ vecs
    worst = 0.0
    for t in np.linspace(0.0, tau, n_samples):
        psi = evecs @ (np.exp(-1j * evals * t)[:, None] * coeffs)
        worst = max(worst, float(np.max(np.abs(psi.conj().T @ mat @ psi))))
    if relative:
        norm = float(np.max(np.abs(evals)))
        worst = worst / norm if norm > 0 else worst
    return worst


def dressed_in_dfs(theta: float, phi: float, dim: int = 3) -> list[np.ndarray]:
    """Dark and bright states padded with zero ancilla amplitudes."""
    out = []
    for v in dark_bright(theta, phi):
        full = np.zeros(dim, dtype=complex)
        full[:2] = v
        out.append(full)
    return out


# ---------------------------------------------------------------------------
# composition
# ---------------------------------------------------------------------------

def compose(gates: Sequence[np.ndarray]) -> np.ndarray:
    """Product of gates applied in sequence (first element acts first)."""
    if not gates:
        raise ValueError("need at least one gate")
    out = np.asarray(gates[0], dtype=complex)
    for g in gates[1:]:
        g = np.asarray(g, dtype=complex)
        if g.shape[1] != out.shape[0]:
            raise LayoutError(f"cannot compose {g.shape} after {out.shape}")
        out = g @ out
    return out


def lift_single(u: np.ndarray, logical_qubit: int) -> np.ndarray:
    """Lift a 2x2 logical gate to the two-logical-qubit space (qubit 1 is the slower index)."""
    if logical_qubit == 1:
        return np.kron(u, np.eye(2))
    if logical_qubit == 2:
        return np.kron(np.eye(2), u)
    raise ValueError(f"logical qubit must be 1 or 2, got {logical_qubit}")


def phase_gate_construction() -> np.ndarray:
    """U1(pi/2, pi/4) applied after U1(pi/2, 0)."""
    return compose([u1_matrix(np.pi / 2, 0.0), u1_matrix(np.pi / 2, np.pi / 4)])


def cnot_construction() -> np.ndarray:
    """U2(pi/4, pi/2) followed by U1(pi/4, pi/2) on logical qubit 2.

    The product is block-diag(I, -iX): a CNOT up to a controlled -i phase.
    """
    return compose([u2_matrix(np.pi / 4, np.pi / 2), lift_single(u1_matrix(np.pi / 4, np.pi / 2), 2)])
