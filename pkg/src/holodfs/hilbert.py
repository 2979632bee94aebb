"""Composite Hilbert-space bookkeeping and dense operator algebra.

The composite space is a tensor product ordered row-major over
``SpaceLayout.dims``. By convention slot 0 is the cavity mode (dimension
``n_max + 1``) and slots ``1..N`` are qubits, so the basis index of
``|n; b_1 ... b_N>`` is ``n * 2**N + int("b_1...b_N", 2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np


class LayoutError(ValueError):
    """Operator or site does not fit the space layout."""


class CutoffError(ValueError):
    """Invalid photon-number cutoff."""


@dataclass(frozen=True)
class SpaceLayout:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise LayoutError("layout needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise LayoutError(f"all subsystem dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def cavity_qubits(cls, n_max: int, n_qubits: int) -> "SpaceLayout":
        """Cavity slot (Fock 0..n_max) followed by ``n_qubits`` two-level sites."""
        if n_max < 1:
            raise CutoffError(f"photon cutoff must be >= 1, got {n_max}")
        return cls((n_max + 1,) + (2,) * n_qubits)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_qubits(self) -> int:
        return len(self.dims) - 1

    @property
    def n_max(self) -> int:
        return self.dims[0] - 1

    def qubit_sites(self) -> range:
        return range(1, len(self.dims))

    def index(self, multi: Sequence[int]) -> int:
        if len(multi) != len(self.dims):
            raise LayoutError(f"multi-index {tuple(multi)} does not match dims {self.dims}")
        for m, d in zip(multi, self.dims):
            if not 0 <= m < d:
                raise LayoutError(f"multi-index {tuple(multi)} out of range for dims {self.dims}")
        return int(np.ravel_multi_index(tuple(multi), self.dims))

    def multi_index(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.total_dim:
            raise LayoutError(f"basis index {index} out of range [0, {self.total_dim})")
        return tuple(int(i) for i in np.unravel_index(index, self.dims))

    def basis_index(self, n_photons: int, bits: str) -> int:
        """Index of ``|n_photons> (x) |bits>`` with ``bits`` read qubit 1 first."""
        if len(bits) != self.n_qubits or set(bits) - {"0", "1"}:
            raise LayoutError(f"bitstring {bits!r} invalid for {self.n_qubits} qubits")
        return self.index((n_photons,) + tuple(int(b) for b in bits))

    def basis_vector(self, n_photons: int, bits: str) -> np.ndarray:
        vec = np.zeros(self.total_dim, dtype=complex)
        vec[self.basis_index(n_photons, bits)] = 1.0
        return vec


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense complex matrix tied to the layout it acts on.

    ``data`` is stored read-only so operators can be shared freely.
    """

    layout: SpaceLayout
    data: np.ndarray = field(repr=False)

    # numpy scalars must defer to __rmul__ instead of coercing via __array__
    __array_ufunc__ = None

    def __post_init__(self):
        data = np.array(self.data, dtype=complex)
        n = self.layout.total_dim
        if data.shape != (n, n):
            raise LayoutError(f"matrix shape {data.shape} does not match layout dimension {n}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def dag(self) -> "Operator":
        return Operator(self.layout, self.data.conj().T)

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.data - self.data.conj().T), initial=0.0) < atol)

    def _check(self, other: "Operator") -> None:
        if not isinstance(other, Operator):
            raise TypeError(f"expected Operator, got {type(other).__name__}")
        if other.layout != self.layout:
            raise LayoutError(f"layout mismatch: {self.layout.dims} vs {other.layout.dims}")

    def __add__(self, other):
        self._check(other)
        return Operator(self.layout, self.data + other.data)

    def __sub__(self, other):
        self._check(other)
        return Operator(self.layout, self.data - other.data)

    def __neg__(self):
        return Operator(self.layout, -self.data)

    def __mul__(self, scalar):
        if isinstance(scalar, Operator):
            return NotImplemented
        return Operator(self.layout, complex(scalar) * self.data)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Operator(self.layout, self.data / complex(scalar))

    def __matmul__(self, other):
        if isinstance(other, Operator):
            self._check(other)
            return Operator(self.layout, self.data @ other.data)
        return self.data @ np.asarray(other)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def allclose(self, other: "Operator", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self.data, other.data, rtol=0.0, atol=atol))


def identity(layout: SpaceLayout) -> Operator:
    return Operator(layout, np.eye(layout.total_dim))


def zeros(layout: SpaceLayout) -> Operator:
    return Operator(layout, np.zeros((layout.total_dim,) * 2))


def annihilation(n_max: int) -> Operator:
    """Truncated bosonic lowering operator on Fock states 0..n_max."""
    if n_max < 1:
        raise CutoffError(f"photon cutoff must be >= 1, got {n_max}")
    mat = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1)
    return Operator(SpaceLayout((n_max + 1,)), mat)


_QUBIT = {
    # basis order (|0>, |1>)
    "sigma_plus": [[0, 0], [1, 0]],
    "sigma_minus": [[0, 1], [0, 0]],
    "sigma_z": [[-1, 0], [0, 1]],
    "proj0": [[1, 0], [0, 0]],
    "proj1": [[0, 0], [0, 1]],
    "identity": [[1, 0], [0, 1]],
}


def qubit_op(kind: str) -> Operator:
    """Single-qubit operator; ``sigma_z = |1><1| - |0><0|``."""
    try:
        mat = _QUBIT[kind]
    except KeyError:
        raise ValueError(f"unknown qubit operator {kind!r}; choose from {sorted(_QUBIT)}") from None
    return Operator(SpaceLayout((2,)), np.array(mat, dtype=complex))


def embed(op: Operator | np.ndarray, site: int, layout: SpaceLayout) -> Operator:
    """Place ``op`` on subsystem ``site`` with identities elsewhere."""
    mat = op.data if isinstance(op, Operator) else np.asarray(op, dtype=complex)
    if not 0 <= site < len(layout.dims):
        raise LayoutError(f"site {site} out of range for dims {layout.dims}")
    d = layout.dims[site]
    if mat.shape != (d, d):
        raise LayoutError(f"operator of shape {mat.shape} cannot act on site {site} of dimension {d}")
    left = int(np.prod(layout.dims[:site], dtype=int))
    right = int(np.prod(layout.dims[site + 1:], dtype=int))
    full = np.kron(np.kron(np.eye(left), mat), np.eye(right))
    return Operator(layout, full)


def tensor(*ops: Operator) -> Operator:
    """Kronecker product of operators, layouts concatenated."""
    layout = SpaceLayout(sum((o.layout.dims for o in ops), ()))
    return Operator(layout, reduce(np.kron, (o.data for o in ops)))


def cavity_annihilation(layout: SpaceLayout) -> Operator:
    return embed(annihilation(layout.n_max), 0, layout)


def qubit_on(kind: str, site: int, layout: SpaceLayout) -> Operator:
    if site not in layout.qubit_sites():
        raise LayoutError(f"site {site} is not a qubit site of layout {layout.dims}")
    return embed(qubit_op(kind), site, layout)


def collective_op(kind: str, layout: SpaceLayout, sites: Iterable[int] | None = None) -> Operator:
    """Sum of single-qubit operators over all qubit sites (cavity excluded).

    ``kind`` is ``"S_minus"``, ``"S_plus"`` or ``"S_z"``.
    """
    single = {"S_minus": "sigma_minus", "S_plus": "sigma_plus", "S_z": "sigma_z"}
    if kind not in single:
        raise ValueError(f"unknown collective operator {kind!r}")
    sites = list(layout.qubit_sites() if sites is None else sites)
    if not sites:
        raise LayoutError("collective operator needs at least one qubit site")
    total = zeros(layout)
    for s in sites:
        total = total + qubit_on(single[kind], s, layout)
    return total


def adjoint(op: Operator) -> Operator:
    return op.dag()


def commutator(a: Operator, b: Operator) -> Operator:
    return a @ b - b @ a
