"""Unitary and Lindblad time evolution on dense density matrices.

The integrator is a fixed-step classical RK4; the Hamiltonian is evaluated at
``t``, ``t + dt/2`` and ``t + dt`` of every step. States may carry a leading
batch axis, which lets scans share one Hamiltonian across initial states.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .hilbert import (
    LayoutError,
    Operator,
    SpaceLayout,
    cavity_annihilation,
    collective_op,
    qubit_on,
)
from .holonomy import ParameterError
from .model import PhysicalParams

log = logging.getLogger(__name__)

TRACE_TOL = 1e-6
HERMITIAN_TOL = 1e-8
NEGATIVITY_TOL = 1e-8


class IntegrationDiverged(RuntimeError):
    def __init__(self, t: float, reason: str):
        super().__init__(f"integration diverged at t = {t:.6g} ns: {reason}")
        self.t = t
        self.reason = reason


class RestrictionError(ValueError):
    """State has weight outside the excitation-restricted subspace."""


def _mat(op) -> np.ndarray:
    return op.data if isinstance(op, Operator) else np.asarray(op, dtype=complex)


@dataclass
class DensityState:
    layout: SpaceLayout | None
    rho: np.ndarray

    @classmethod
    def pure(cls, psi: np.ndarray, layout: SpaceLayout | None = None) -> "DensityState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(layout, np.outer(psi, psi.conj()))

    def diagnostics(self) -> dict[str, float]:
        return state_diagnostics(self.rho)

    def check(self) -> None:
        d = self.diagnostics()
        if d["trace_drift"] > TRACE_TOL:
            raise ValueError(f"trace deviates from 1 by {d['trace_drift']:.3g}")
        if d["hermiticity"] > HERMITIAN_TOL:
            raise ValueError(f"density matrix not Hermitian (max |rho - rho^dag| = {d['hermiticity']:.3g})")
        if d["min_eigenvalue"] < -NEGATIVITY_TOL:
            raise ValueError(f"negative eigenvalue {d['min_eigenvalue']:.3g}")


def state_diagnostics(rho: np.ndarray) -> dict[str, float]:
    """Worst trace drift, Hermiticity defect and lowest eigenvalue (batch aware)."""
    rho = np.asarray(rho)
    if rho.ndim == 2:
        rho = rho[None]
    tr = np.trace(rho, axis1=-2, axis2=-1)
    herm = np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))).max()
    hermitian_part = 0.5 * (rho + np.conj(np.swapaxes(rho, -1, -2)))
    return {
        "trace_drift": float(np.abs(tr - 1.0).max()),
        "hermiticity": float(herm),
        "min_eigenvalue": float(np.linalg.eigvalsh(hermitian_part).min()),
    }


@dataclass(frozen=True)
class CollapseChannel:
    op: np.ndarray
    rate: float
    name: str = ""

    def __post_init__(self):
        if self.rate < 0 or not np.isfinite(self.rate):
            raise ParameterError(f"collapse rate must be non-negative, got {self.rate}")
        object.__setattr__(self, "op", _mat(self.op))


@dataclass(frozen=True)
class IntegrationConfig:
    dt: float
    t_end: float
    sample_stride: int = 100
    n_max: int = 2

    def __post_init__(self):
        if not self.dt > 0:
            raise ParameterError(f"dt must be positive, got {self.dt}")
        if not self.t_end >= 0:
            raise ParameterError(f"t_end must be non-negative, got {self.t_end}")
        if self.sample_stride < 1:
            raise ParameterError(f"sample_stride must be >= 1, got {self.sample_stride}")
        if self.n_max < 1:
            raise ParameterError(f"n_max must be >= 1, got {self.n_max}")

    @staticmethod
    def max_dt(delta: float) -> float:
        """Largest step resolving the fastest (2*delta) oscillation with 100 points."""
        return 2 * np.pi / (100 * 2 * delta)

    @staticmethod
    def default_dt(delta: float) -> float:
        return 2 * np.pi / (200 * 2 * delta)

    def validate_resolution(self, delta: float) -> None:
        bound = self.max_dt(delta)
        if self.dt > bound * (1 + 1e-12):
            raise ParameterError(
                f"dt = {self.dt:.6g} ns exceeds the resolution bound 2*pi/(100*2*delta) = {bound:.6g} ns"
            )

    def n_steps(self) -> int:
        return max(1, int(np.ceil(self.t_end / self.dt - 1e-9))) if self.t_end > 0 else 0


def _prepare_channels(channels: Sequence[CollapseChannel]):
    active = [c for c in channels if c.rate > 0]
    jumps = [(np.sqrt(c.rate) * c.op) for c in active]
    jumps_dag = [j.conj().T for j in jumps]
    loss = sum((jd @ j for j, jd in zip(jumps, jumps_dag)), start=0)
    return jumps, jumps_dag, loss


def lindblad_rhs(rho: np.ndarray, H, channels: Sequence[CollapseChannel]) -> np.ndarray:
    """-i[H, rho] + 1/2 sum_k rate_k (2 A rho A^dag - A^dag A rho - rho A^dag A)."""
    rho = np.asarray(rho, dtype=complex)
    h = _mat(H)
    if h.shape[-1] != rho.shape[-1]:
        raise LayoutError(f"Hamiltonian {h.shape} does not match state {rho.shape}")
    out = -1j * (h @ rho - rho @ h)
    for c in channels:
        a = c.op
        if a.shape != h.shape:
            raise LayoutError(f"collapse operator {a.shape} does not match Hamiltonian {h.shape}")
        ad = a.conj().T
        ada = ad @ a
        out += 0.5 * c.rate * (2 * a @ rho @ ad - ada @ rho - rho @ ada)
    return out


class _Rhs:
    """Lindblad RHS with the anti-Hermitian loss folded into H."""

    def __init__(self, channels: Sequence[CollapseChannel]):
        self.jumps, self.jumps_dag, loss = _prepare_channels(channels)
        self.loss = 0.5j * loss if np.ndim(loss) else None

    def __call__(self, h: np.ndarray, rho: np.ndarray) -> np.ndarray:
        heff = h - self.loss if self.loss is not None else h
        x = heff @ rho
        out = -1j * (x - np.conj(np.swapaxes(x, -1, -2)))
        for j, jd in zip(self.jumps, self.jumps_dag):
            out += j @ rho @ jd
        return out


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # (n_samples, [batch,] d, d)
    diagnostics: dict[str, float] = field(default_factory=dict)

    def __iter__(self):
        return iter(zip(self.times, self.states))

    def __len__(self):
        return len(self.times)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


def integrate_master(
    H_of_t: Callable[[float], np.ndarray],
    rho0: DensityState | np.ndarray,
    channels: Sequence[CollapseChannel],
    cfg: IntegrationConfig,
    check: bool = True,
) -> Trajectory:
    """Fixed-step RK4 integration of the Lindblad equation.

    ``rho0`` may be a single density matrix or a batch ``(B, d, d)``. Samples
    are recorded at t = 0, every ``sample_stride`` steps and at ``t_end``.
    With ``check`` each sample is tested against the trace, Hermiticity and
    positivity tolerances and ``IntegrationDiverged`` is raised on violation.
    """
    rho = np.array(rho0.rho if isinstance(rho0, DensityState) else rho0, dtype=complex)
    rhs = _Rhs(channels)
    n = cfg.n_steps()
    h = cfg.t_end / n if n else 0.0
    times, states = [0.0], [rho.copy()]
    worst = {"trace_drift": 0.0, "hermiticity": 0.0, "min_eigenvalue": np.inf}

    def record(t, r):
        times.append(t)
        states.append(r.copy())
        if check:
            d = state_diagnostics(r)
            worst["trace_drift"] = max(worst["trace_drift"], d["trace_drift"])
            worst["hermiticity"] = max(worst["hermiticity"], d["hermiticity"])
            worst["min_eigenvalue"] = min(worst["min_eigenvalue"], d["min_eigenvalue"])
            if d["trace_drift"] > TRACE_TOL:
                raise IntegrationDiverged(t, f"trace drift {d['trace_drift']:.3g}")
            if d["hermiticity"] > HERMITIAN_TOL:
                raise IntegrationDiverged(t, f"Hermiticity defect {d['hermiticity']:.3g}")
            if d["min_eigenvalue"] < -NEGATIVITY_TOL:
                raise IntegrationDiverged(t, f"negative eigenvalue {d['min_eigenvalue']:.3g}")

    if check:
        record_initial = state_diagnostics(rho)
        worst.update(record_initial)
    h_now = H_of_t(0.0)
    for k in range(n):
        t = k * h
        h_mid = H_of_t(t + 0.5 * h)
        h_next = H_of_t(t + h)
        k1 = rhs(h_now, rho)
        k2 = rhs(h_mid, rho + 0.5 * h * k1)
        k3 = rhs(h_mid, rho + 0.5 * h * k2)
        k4 = rhs(h_next, rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        h_now = h_next
        if (k + 1) % cfg.sample_stride == 0 or k + 1 == n:
            record((k + 1) * h, rho)
    log.debug("integrated %d steps of %.4g ns", n, h)
    return Trajectory(np.array(times), np.array(states), worst if check else {})


def propagate_state(
    H_of_t: Callable[[float], np.ndarray], psi0: np.ndarray, t_end: float, dt: float, n_samples: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """RK4 integration of the Schroedinger equation.

    Returns sample times and states; ``n_samples`` extra equally spaced
    (in steps) samples are taken besides the endpoints.
    """
    psi = np.array(psi0, dtype=complex)
    n = max(1, int(np.ceil(t_end / dt - 1e-9)))
    h = t_end / n
    stride = max(1, n // n_samples) if n_samples else n
    times, states = [0.0], [psi.copy()]
    h_now = H_of_t(0.0)
    for k in range(n):
        t = k * h
        h_mid = H_of_t(t + 0.5 * h)
        h_next = H_of_t(t + h)
        k1 = -1j * (h_now @ psi)
        k2 = -1j * (h_mid @ (psi + 0.5 * h * k1))
        k3 = -1j * (h_mid @ (psi + 0.5 * h * k2))
        k4 = -1j * (h_next @ (psi + h * k3))
        psi = psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        h_now = h_next
        if (k + 1) % stride == 0 or k + 1 == n:
            times.append((k + 1) * h)
            states.append(psi.copy())
    return np.array(times), np.array(states)


def build_channels(layout: SpaceLayout, params: PhysicalParams, mode: str = "collective") -> list[CollapseChannel]:
    """Cavity decay plus collective or per-qubit relaxation and dephasing."""
    a = cavity_annihilation(layout)
    channels = [CollapseChannel(a.data, params.kappa, "a")]
    if mode == "collective":
        channels.append(CollapseChannel(collective_op("S_minus", layout).data, params.gamma, "S_minus"))
        channels.append(CollapseChannel(collective_op("S_z", layout).data, params.gamma_phi, "S_z"))
    elif mode == "individual":
        mult = params.rate_multipliers
        sites = list(layout.qubit_sites())
        if len(mult) not in (len(sites), 3) or (len(mult) == 3 and len(sites) % 3):
            raise ParameterError(
                f"{len(mult)} rate multipliers cannot be assigned to {len(sites)} qubits"
            )
        for i, q in enumerate(sites):
            m = mult[i % len(mult)]
            channels.append(CollapseChannel(qubit_on("sigma_minus", q, layout).data, m * params.gamma, f"sigma_minus_{q}"))
        for i, q in enumerate(sites):
            m = mult[i % len(mult)]
            channels.append(CollapseChannel(qubit_on("sigma_z", q, layout).data, m * params.gamma_phi, f"sigma_z_{q}"))
    else:
        raise ParameterError(f"decoherence mode must be 'collective' or 'individual', got {mode!r}")
    return channels


# ---------------------------------------------------------------------------
# excitation-number restriction
# ---------------------------------------------------------------------------

def excitation_numbers(layout: SpaceLayout) -> np.ndarray:
    """Photon number plus number of excited qubits for every basis state."""
    grids = np.indices(layout.dims).reshape(len(layout.dims), -1)
    return grids.sum(axis=0)


@dataclass(frozen=True, eq=False)
class Restriction:
    """Invariant subspace of total excitation <= ``max_excitation``."""

    layout: SpaceLayout
    max_excitation: int
    indices: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.indices)

    @property
    def projector(self) -> Operator:
        p = np.zeros((self.layout.total_dim,) * 2, dtype=complex)
        p[self.indices, self.indices] = 1.0
        return Operator(self.layout, p)

    def restrict_op(self, op) -> np.ndarray:
        m = _mat(op)
        return m[np.ix_(self.indices, self.indices)]

    def restrict_state(self, psi_or_rho: np.ndarray, atol: float = 1e-12) -> np.ndarray:
        x = np.asarray(psi_or_rho, dtype=complex)
        if x.ndim == 1:
            outside = np.delete(x, self.indices)
            if np.sum(np.abs(outside) ** 2) > atol:
                raise RestrictionError("initial state has weight above the excitation bound")
            return x[self.indices]
        mask = np.ones(self.layout.total_dim, dtype=bool)
        mask[self.indices] = False
        if np.abs(np.diagonal(x, axis1=-2, axis2=-1)[..., mask]).sum() > atol:
            raise RestrictionError("initial state has weight above the excitation bound")
        return x[..., self.indices[:, None], self.indices[None, :]]

    def restrict_channels(self, channels: Sequence[CollapseChannel]) -> list[CollapseChannel]:
        return [CollapseChannel(self.restrict_op(c.op), c.rate, c.name) for c in channels]

    def expand(self, x: np.ndarray) -> np.ndarray:
        d = self.layout.total_dim
        x = np.asarray(x)
        if x.shape[-1] != self.dim:
            raise LayoutError(f"expected restricted dimension {self.dim}, got {x.shape}")
        if x.ndim == 1:
            out = np.zeros(d, dtype=complex)
            out[self.indices] = x
            return out
        out = np.zeros(x.shape[:-2] + (d, d), dtype=complex)
        out[..., self.indices[:, None], self.indices[None, :]] = x
        return out


def excitation_restrict(layout: SpaceLayout, max_excitation: int) -> Restriction:
    if max_excitation < 0:
        raise ParameterError(f"max_excitation must be >= 0, got {max_excitation}")
    idx = np.flatnonzero(excitation_numbers(layout) <= max_excitation)
    return Restriction(layout, int(max_excitation), idx)
