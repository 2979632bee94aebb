"""Physical parameters and Hamiltonian construction.

Units: angular frequencies in rad/ns, times in ns. ``mhz(x)`` converts an
ordinary frequency quoted in MHz to rad/ns (2*pi*x*1e-3).

Sign convention
---------------
A drive pair is described by its *effective* parameters (``PairDrive``):
detuning sign ``s`` and laser phases ``phi_m, phi_n`` such that, after
eliminating the cavity, the pair obeys

    H_mn = (g^2 / (s delta)) (e^{i(phi_m - phi_n)} sigma_m^- sigma_n^+ + h.c.)

with level shifts (g^2 / (s delta)) (-a^dag a |0><0| + a a^dag |1><1|) on
each member. The full interaction Hamiltonian generates exactly these terms
when every tone of the pair carries exponent detuning ``-s * delta`` and
phase ``-phi_j``. ``PairDrive.drives`` is the only place that mapping lives.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .hilbert import (
    LayoutError,
    Operator,
    SpaceLayout,
    cavity_annihilation,
    qubit_on,
)
from .holonomy import ParameterError, balanced_couplings, gate_params


def mhz(value: float) -> float:
    """Ordinary frequency in MHz -> angular frequency in rad/ns."""
    return 2 * np.pi * value * 1e-3


def to_mhz(omega: float) -> float:
    return omega / (2 * np.pi * 1e-3)


@dataclass(frozen=True)
class PhysicalParams:
    """System and decoherence parameters, all in rad/ns.

    ``g`` is the effective cavity-assisted coupling used in simulations;
    ``rate_multipliers`` scale per-qubit relaxation and dephasing in the
    individual-decoherence mode.
    """

    G: float = mhz(1000.0)
    Omega_L: float = mhz(500.0)
    Delta: float = mhz(8000.0)
    delta: float = mhz(1000.0)
    g: float = mhz(50.0)
    kappa: float = mhz(0.5)
    gamma: float = mhz(0.004)
    gamma_phi: float = mhz(0.004)
    rate_multipliers: tuple[float, ...] = (0.8, 1.0, 1.2)

    def __post_init__(self):
        for name in ("G", "Omega_L", "Delta", "delta", "g", "kappa", "gamma", "gamma_phi"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ParameterError(f"{name} must be a finite non-negative frequency, got {value}")
        if any(m < 0 or not np.isfinite(m) for m in self.rate_multipliers):
            raise ParameterError(f"rate multipliers must be non-negative, got {self.rate_multipliers}")
        object.__setattr__(self, "rate_multipliers", tuple(float(m) for m in self.rate_multipliers))

    def check_hierarchy(self) -> list[str]:
        """Warn (not fail) when outside the dispersive regime delta >> g, delta << Delta."""
        issues = []
        if self.delta <= 10 * self.g:
            issues.append(f"delta/g = {self.delta / self.g:.3g} <= 10: dispersive approximation is poor")
        if self.Delta <= 4 * self.delta:
            issues.append(f"Delta/delta = {self.Delta / max(self.delta, 1e-300):.3g} <= 4: excited-state elimination is poor")
        for msg in issues:
            warnings.warn(msg, stacklevel=2)
        return issues

    def without_decoherence(self) -> "PhysicalParams":
        return replace(self, kappa=0.0, gamma=0.0, gamma_phi=0.0)


def default_params() -> PhysicalParams:
    return PhysicalParams()


def effective_coupling(params: PhysicalParams, detuning_sign: int) -> float:
    """Raman coupling G*Omega_L*(1/(Delta + s*delta) + 1/Delta)."""
    if detuning_sign not in (1, -1):
        raise ParameterError(f"detuning sign must be +1 or -1, got {detuning_sign}")
    denom = params.Delta + detuning_sign * params.delta
    if params.Delta == 0 or denom == 0:
        raise ParameterError("effective coupling diverges: Delta or Delta + delta_pm is zero")
    if params.Delta < 0 or denom < 0:
        raise ParameterError("Delta and Delta + delta_pm must be positive")
    return float(params.G * params.Omega_L * (1.0 / denom + 1.0 / params.Delta))


@dataclass(frozen=True)
class DriveSpec:
    """One Raman tone: ``g (a sigma_j^+ exp(-i(detuning t - phase)) + h.c.)``."""

    qubit: int
    g: float
    detuning: float
    phase: float = 0.0

    def __post_init__(self):
        if self.g <= 0:
            raise ParameterError(f"drive coupling must be positive, got {self.g}")


@dataclass(frozen=True)
class PairDrive:
    qubit_m: int
    qubit_n: int
    g_mn: float
    detuning_sign: int
    phase_m: float = 0.0
    phase_n: float = 0.0

    def __post_init__(self):
        if self.qubit_m == self.qubit_n:
            raise ParameterError("a pair needs two distinct qubits")
        if self.detuning_sign not in (1, -1):
            raise ParameterError(f"detuning sign must be +1 or -1, got {self.detuning_sign}")

    @property
    def phase_diff(self) -> float:
        return self.phase_m - self.phase_n

    def strength(self, delta: float) -> float:
        """Signed flip-flop rate g_mn^2 / delta_pm."""
        if delta == 0:
            raise ParameterError("delta must be non-zero")
        return self.g_mn ** 2 / (self.detuning_sign * delta)

    def drives(self, delta: float) -> list[DriveSpec]:
        """Full-model tones realising this pair (see module docstring)."""
        return [
            DriveSpec(q, self.g_mn, -self.detuning_sign * delta, -ph)
            for q, ph in ((self.qubit_m, self.phase_m), (self.qubit_n, self.phase_n))
        ]


# ---------------------------------------------------------------------------
# full model
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TimeDependentHamiltonian:
    """``H(t) = static + sum_k (exp(-i w_k t) B_k + h.c.)``.

    Tones with equal frequency are merged so evaluation costs one matrix
    exponential factor per distinct detuning.
    """

    static: np.ndarray
    tones: tuple[tuple[float, np.ndarray], ...] = field(default=())

    @property
    def dim(self) -> int:
        return self.static.shape[0]

    @property
    def max_frequency(self) -> float:
        return max((abs(w) for w, _ in self.tones), default=0.0)

    def __call__(self, t: float) -> np.ndarray:
        h = self.static.copy()
        for w, b in self.tones:
            x = np.exp(-1j * w * t) * b
            h += x
            h += x.conj().T
        return h

    def restrict(self, indices: np.ndarray) -> "TimeDependentHamiltonian":
        ix = np.ix_(indices, indices)
        return TimeDependentHamiltonian(
            self.static[ix].copy(), tuple((w, b[ix].copy()) for w, b in self.tones)
        )

    def plus_static(self, extra: np.ndarray | Operator) -> "TimeDependentHamiltonian":
        extra = extra.data if isinstance(extra, Operator) else extra
        return TimeDependentHamiltonian(self.static + extra, self.tones)


def _check_qubit(layout: SpaceLayout, q: int) -> None:
    if q not in layout.qubit_sites():
        raise LayoutError(f"qubit {q} is not a qubit site of layout {layout.dims}")


def build_interaction(
    layout: SpaceLayout, drives: Iterable[DriveSpec], static: np.ndarray | Operator | None = None
) -> TimeDependentHamiltonian:
    """Cavity-assisted Raman Hamiltonian for a list of tones (one term per tone)."""
    a = cavity_annihilation(layout).data
    merged: dict[float, np.ndarray] = {}
    for d in drives:
        _check_qubit(layout, d.qubit)
        term = d.g * np.exp(1j * d.phase) * (a @ qubit_on("sigma_plus", d.qubit, layout).data)
        key = float(d.detuning)
        merged[key] = merged.get(key, 0) + term
    base = np.zeros((layout.total_dim,) * 2, dtype=complex)
    if static is not None:
        base = base + (static.data if isinstance(static, Operator) else static)
    return TimeDependentHamiltonian(base, tuple(sorted(merged.items(), key=lambda kv: kv[0])))


def interaction_hamiltonian(layout: SpaceLayout, drives: Sequence[DriveSpec], t: float) -> Operator:
    return Operator(layout, build_interaction(layout, drives)(t))


def _level_shift(layout: SpaceLayout, pair: PairDrive, delta: float) -> Operator:
    if delta == 0:
        raise ParameterError("delta must be non-zero")
    a = cavity_annihilation(layout)
    n_op = a.dag() @ a
    anti_n = a @ a.dag()
    total = None
    for q in (pair.qubit_m, pair.qubit_n):
        _check_qubit(layout, q)
        term = -(n_op @ qubit_on("proj0", q, layout)) + anti_n @ qubit_on("proj1", q, layout)
        total = term if total is None else total + term
    return pair.strength(delta) * total


def stark_compensation(layout: SpaceLayout, pair: PairDrive, delta: float) -> Operator:
    """Exact counter-term cancelling the photon-number-dependent level shifts of a pair."""
    return -_level_shift(layout, pair, delta)


def effective_pair_hamiltonian(layout: SpaceLayout, pair: PairDrive, delta: float) -> Operator:
    """Compensated flip-flop between the pair's qubits; identity on the cavity."""
    _check_qubit(layout, pair.qubit_m)
    _check_qubit(layout, pair.qubit_n)
    hop = qubit_on("sigma_minus", pair.qubit_m, layout) @ qubit_on("sigma_plus", pair.qubit_n, layout)
    term = np.exp(1j * pair.phase_diff) * hop
    return pair.strength(delta) * (term + term.dag())


def pair_hamiltonian(
    layout: SpaceLayout,
    pairs: Sequence[PairDrive],
    delta: float,
    compensate: bool = True,
    flip_minus: bool = False,
) -> TimeDependentHamiltonian:
    """Full time-dependent model for a set of pairs, optionally Stark-compensated.

    ``flip_minus`` realises delta_- pairs with the wrong tone sign; it exists
    only as a negative control for the effective-model oracle.
    """
    drives: list[DriveSpec] = []
    static = np.zeros((layout.total_dim,) * 2, dtype=complex)
    for p in pairs:
        tone_pair = replace(p, detuning_sign=-p.detuning_sign) if flip_minus and p.detuning_sign < 0 else p
        drives.extend(tone_pair.drives(delta))
        if compensate:
            static += stark_compensation(layout, p, delta).data
    return build_interaction(layout, drives, static)


def effective_hamiltonian(layout: SpaceLayout, pairs: Sequence[PairDrive], delta: float) -> Operator:
    total = None
    for p in pairs:
        h = effective_pair_hamiltonian(layout, p, delta)
        total = h if total is None else total + h
    return total


# ---------------------------------------------------------------------------
# gate drive recipes
# ---------------------------------------------------------------------------

def single_qubit_pairs(theta: float, phi: float, g_max: float) -> list[PairDrive]:
    """Pairs (1,2) at delta_+ with phase difference phi and (2,3) at delta_- in phase."""
    g12, g23 = balanced_couplings(theta, g_max)
    return [PairDrive(1, 2, g12, +1, phi, 0.0), PairDrive(2, 3, g23, -1, 0.0, 0.0)]


def two_qubit_pairs(vartheta: float, phi: float, g_max: float) -> list[PairDrive]:
    """Pairs (3,4) at delta_+ and (3,6) at delta_- in phase.

    Qubit 3 gains excitation from |00>_L but loses it toward |11>_L, so the
    laser phase difference phi_3 - phi_4 = -phi gives e^{+i phi} on the
    |a2><00| coupling and e^{-i phi} on |a3><11|, the structure whose
    holonomy is U2(vartheta, phi).
    """
    g34, g36 = balanced_couplings(vartheta, g_max)
    return [PairDrive(3, 4, g34, +1, 0.0, phi), PairDrive(3, 6, g36, -1, 0.0, 0.0)]


# ---------------------------------------------------------------------------
# effective DFS Hamiltonians
# ---------------------------------------------------------------------------

def h1_dfs(g12: float, g23: float, delta: float, phi: float) -> Operator:
    """Lambda Hamiltonian on (|0>_L, |1>_L, |a1>)."""
    lam, theta = gate_params(g12, g23, delta)
    s, c = np.sin(theta / 2), np.cos(theta / 2)
    h = np.zeros((3, 3), dtype=complex)
    h[2, 0] = lam * s * np.exp(1j * phi)
    h[2, 1] = -lam * c
    return Operator(SpaceLayout((3,)), h + h.conj().T)


def h2_parts(vartheta: float, phi: float) -> tuple[Operator, Operator]:
    """Commuting unit-strength pieces H_a, H_b on (|00>,|01>,|10>,|11>,|a2>,|a3>)."""
    s, c = np.sin(vartheta / 2), np.cos(vartheta / 2)
    ha = np.zeros((6, 6), dtype=complex)
    ha[4, 0] = s * np.exp(1j * phi)
    ha[4, 1] = -c
    hb = np.zeros((6, 6), dtype=complex)
    hb[5, 3] = s * np.exp(-1j * phi)
    hb[5, 2] = -c
    layout = SpaceLayout((6,))
    return Operator(layout, ha + ha.conj().T), Operator(layout, hb + hb.conj().T)


def h2_dfs(g34: float, g36: float, delta: float, phi: float) -> Operator:
    """Two-logical-qubit gate Hamiltonian lambda_2 (H_a + H_b)."""
    lam, vartheta = gate_params(g34, g36, delta)
    ha, hb = h2_parts(vartheta, phi)
    return lam * (ha + hb)
