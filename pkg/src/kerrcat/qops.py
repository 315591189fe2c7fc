"""Dense linear algebra on truncated Fock spaces.

Everything in this package is built on two small container types: `QOperator`
(a dense complex matrix plus the tuple of mode dimensions it acts on) and
`QState` (a ket or density matrix with the same metadata).  Mode order is
fixed package-wide: the cavity is always the LEFT tensor factor, the
nonlinear resonator the RIGHT one, so `tensor(a_op, b_op)` is the only
composition rule anyone needs.

Amplitude truncation follows a single guard used by every state constructor:
a coherent amplitude `z` needs `|z|**2 + 5*|z| + 10 <= dim`, which keeps the
discarded Poisson tail below ~1e-8 for the amplitudes used here.  Truncated
coherent vectors are renormalized, so downstream code may treat them as unit
kets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from numbers import Number

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatchError,
    HermiticityError,
    StateValidationError,
    TruncationError,
)

HERMITICITY_ATOL = 1e-10
KET_NORM_ATOL = 1e-8
TRACE_ATOL = 1e-8


@dataclass(frozen=True)
class HilbertDims:
    """Truncation sizes for the two-mode space (cavity `n_a`, resonator `n_b`)."""

    n_a: int
    n_b: int

    def __post_init__(self):
        for name, value in (("n_a", self.n_a), ("n_b", self.n_b)):
            if not isinstance(value, int) or value < 2:
                raise DimensionMismatchError(
                    f"{name} must be an integer >= 2, got {value!r}"
                )

    @property
    def total(self) -> int:
        return self.n_a * self.n_b

    def as_tuple(self) -> tuple[int, int]:
        return (self.n_a, self.n_b)


def _as_dims(dims) -> tuple[int, ...]:
    if isinstance(dims, HilbertDims):
        return dims.as_tuple()
    if isinstance(dims, int):
        return (dims,)
    out = tuple(int(d) for d in dims)
    if not out or any(d < 2 for d in out):
        raise DimensionMismatchError(f"invalid dims {dims!r}")
    return out


class QOperator:
    """Dense operator on a truncated Fock space (one mode or a tensor product).

    Parameters
    ----------
    mat : array_like
        Square complex matrix of size prod(dims).
    dims : int, tuple of int, or HilbertDims
        Dimension of each tensor factor, left to right.
    """

    __slots__ = ("mat", "dims")

    def __init__(self, mat, dims):
        dims = _as_dims(dims)
        mat = np.ascontiguousarray(mat, dtype=np.complex128)
        n = int(np.prod(dims))
        if mat.shape != (n, n):
            raise DimensionMismatchError(
                f"matrix shape {mat.shape} does not match dims {dims} (total {n})"
            )
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)

    def __setattr__(self, name, value):  # containers are effectively immutable
        raise AttributeError("QOperator is read-only")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def dag(self) -> "QOperator":
        return QOperator(self.mat.conj().T, self.dims)

    def _check_same_space(self, other):
        if self.dims != other.dims:
            raise DimensionMismatchError(
                f"operands act on different spaces: {self.dims} vs {other.dims}"
            )

    def __add__(self, other):
        if not isinstance(other, QOperator):
            return NotImplemented
        self._check_same_space(other)
        return QOperator(self.mat + other.mat, self.dims)

    def __sub__(self, other):
        if not isinstance(other, QOperator):
            return NotImplemented
        self._check_same_space(other)
        return QOperator(self.mat - other.mat, self.dims)

    def __neg__(self):
        return QOperator(-self.mat, self.dims)

    def __mul__(self, scalar):
        if not isinstance(scalar, Number):
            return NotImplemented
        return QOperator(self.mat * scalar, self.dims)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return QOperator(self.mat / scalar, self.dims)

    def __matmul__(self, other):
        if isinstance(other, QOperator):
            self._check_same_space(other)
            return QOperator(self.mat @ other.mat, self.dims)
        return NotImplemented

    def apply(self, state: "QState") -> "QState":
        """Apply to a ket; the result is NOT renormalized."""
        if state.kind != "ket":
            raise StateValidationError("apply() expects a ket")
        if state.dims != self.dims:
            raise DimensionMismatchError(
                f"operator dims {self.dims} vs state dims {state.dims}"
            )
        return QState(self.mat @ state.data, self.dims, kind="ket", validate=False)

    def expect(self, state: "QState") -> complex:
        """<psi|O|psi> for kets, Tr(O rho) for density matrices."""
        if state.dims != self.dims:
            raise DimensionMismatchError(
                f"operator dims {self.dims} vs state dims {state.dims}"
            )
        if state.kind == "ket":
            return complex(state.data.conj() @ (self.mat @ state.data))
        return complex(np.trace(self.mat @ state.data))

    def is_hermitian(self, atol: float = HERMITICITY_ATOL) -> bool:
        return bool(np.max(np.abs(self.mat - self.mat.conj().T)) <= atol)

    def require_hermitian(self, atol: float = HERMITICITY_ATOL, what: str = "operator"):
        dev = float(np.max(np.abs(self.mat - self.mat.conj().T)))
        if dev > atol:
            raise HermiticityError(
                f"{what} deviates from hermiticity by {dev:.3e} (allowed {atol:.1e}); "
                "this signals a builder bug, not a numerical issue"
            )
        return self


class QState:
    """Ket or density matrix on a truncated Fock space.

    Use the factories `QState.ket` / `QState.density` (or the module-level
    constructors below); they validate the normalization contract:
    kets must have unit norm within 1e-8, density matrices unit trace within
    1e-8 and hermiticity within 1e-10.
    """

    __slots__ = ("data", "dims", "kind")

    def __init__(self, data, dims, kind: str, validate: bool = True):
        dims = _as_dims(dims)
        data = np.ascontiguousarray(data, dtype=np.complex128)
        n = int(np.prod(dims))
        if kind == "ket":
            data = data.reshape(-1)
            if data.shape != (n,):
                raise DimensionMismatchError(
                    f"ket length {data.shape} does not match dims {dims}"
                )
            if validate:
                nrm = float(np.linalg.norm(data))
                if abs(nrm - 1.0) > KET_NORM_ATOL:
                    raise StateValidationError(
                        f"ket norm {nrm} deviates from 1 by more than {KET_NORM_ATOL}"
                    )
        elif kind == "density":
            if data.shape != (n, n):
                raise DimensionMismatchError(
                    f"density shape {data.shape} does not match dims {dims}"
                )
            if validate:
                tr = complex(np.trace(data))
                if abs(tr - 1.0) > TRACE_ATOL:
                    raise StateValidationError(
                        f"density trace {tr} deviates from 1 by more than {TRACE_ATOL}"
                    )
                dev = float(np.max(np.abs(data - data.conj().T)))
                if dev > HERMITICITY_ATOL:
                    raise StateValidationError(
                        f"density deviates from hermiticity by {dev:.3e}"
                    )
        else:
            raise StateValidationError(f"unknown state kind {kind!r}")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "kind", kind)

    def __setattr__(self, name, value):
        raise AttributeError("QState is read-only")

    @classmethod
    def ket(cls, vec, dims) -> "QState":
        return cls(vec, dims, kind="ket")

    @classmethod
    def density(cls, mat, dims) -> "QState":
        return cls(mat, dims, kind="density")

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def norm(self) -> float:
        if self.kind == "ket":
            return float(np.linalg.norm(self.data))
        return float(np.trace(self.data).real)

    def normalized(self) -> "QState":
        if self.kind == "ket":
            return QState(self.data / np.linalg.norm(self.data), self.dims, "ket")
        return QState(self.data / np.trace(self.data).real, self.dims, "density")

    def to_density(self) -> "QState":
        if self.kind == "density":
            return self
        return QState(np.outer(self.data, self.data.conj()), self.dims, "density")

    def overlap(self, other: "QState") -> complex:
        """<self|other> for kets."""
        if self.kind != "ket" or other.kind != "ket":
            raise StateValidationError("overlap() is defined between kets")
        if self.dims != other.dims:
            raise DimensionMismatchError(
                f"states live on different spaces: {self.dims} vs {other.dims}"
            )
        return complex(self.data.conj() @ other.data)


# ---------------------------------------------------------------------------
# constructors


def identity(dims) -> QOperator:
    dims = _as_dims(dims)
    return QOperator(np.eye(int(np.prod(dims)), dtype=np.complex128), dims)


def annihilation(dim: int) -> QOperator:
    """Ladder operator a with a|n> = sqrt(n)|n-1> on a single mode."""
    mat = np.diag(np.sqrt(np.arange(1, dim, dtype=np.float64)), k=1)
    return QOperator(mat, dim)


def creation(dim: int) -> QOperator:
    return annihilation(dim).dag()


def number_op(dim: int) -> QOperator:
    return QOperator(np.diag(np.arange(dim, dtype=np.float64)), dim)


def basis(dim_or_dims, index) -> QState:
    """Fock basis ket |n> (single mode) or |n_a, n_b> (two modes)."""
    dims = _as_dims(dim_or_dims)
    n = int(np.prod(dims))
    vec = np.zeros(n, dtype=np.complex128)
    if isinstance(index, int):
        flat = index
    else:
        flat = int(np.ravel_multi_index(tuple(index), dims))
    vec[flat] = 1.0
    return QState(vec, dims, "ket")


def vacuum(dim_or_dims) -> QState:
    dims = _as_dims(dim_or_dims)
    return basis(dims, (0,) * len(dims) if len(dims) > 1 else 0)


def check_truncation(amplitude: complex, dim: int):
    """Guard |z|^2 + 5|z| + 10 <= dim; raises TruncationError otherwise."""
    z = abs(amplitude)
    need = z * z + 5.0 * z + 10.0
    if need > dim:
        raise TruncationError(
            f"amplitude |z|={z:.4g} needs dim >= {math.ceil(need)}, got {dim}"
        )


def coherent_state(alpha: complex, dim: int) -> QState:
    """Truncated coherent state, renormalized after truncation.

    Amplitudes are generated by the stable recurrence
    c_n = c_{n-1} * alpha / sqrt(n), then scaled; the truncation guard keeps
    the discarded tail below ~1e-8 so renormalization is a tiny correction.
    """
    check_truncation(alpha, dim)
    amps = np.empty(dim, dtype=np.complex128)
    amps[0] = 1.0
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    amps *= math.exp(-0.5 * abs(alpha) ** 2)
    amps /= np.linalg.norm(amps)
    return QState(amps, dim, "ket")


def displacement_operator(alpha: complex, dim: int) -> QOperator:
    """D(alpha) = exp(alpha a^dag - conj(alpha) a) on a single truncated mode."""
    a = annihilation(dim).mat
    return expm_op(QOperator(alpha * a.conj().T - np.conj(alpha) * a, dim))


def expm_op(op: QOperator, scale: complex = 1.0) -> QOperator:
    """Matrix exponential exp(scale * op) via Pade scaling-and-squaring."""
    return QOperator(scipy.linalg.expm(scale * op.mat), op.dims)


def tensor(x, y):
    """Kronecker product of two operators or two kets (left factor first)."""
    if isinstance(x, QOperator) and isinstance(y, QOperator):
        return QOperator(np.kron(x.mat, y.mat), x.dims + y.dims)
    if isinstance(x, QState) and isinstance(y, QState):
        if x.kind != "ket" or y.kind != "ket":
            raise StateValidationError("tensor() of states expects kets")
        return QState(np.kron(x.data, y.data), x.dims + y.dims, "ket")
    raise TypeError("tensor() expects two QOperator or two QState arguments")


def projector(states) -> QOperator:
    """Sum of |psi><psi| over the given kets."""
    states = list(states)
    dims = states[0].dims
    mat = np.zeros((states[0].dim, states[0].dim), dtype=np.complex128)
    for s in states:
        if s.dims != dims:
            raise DimensionMismatchError("projector states live on different spaces")
        mat += np.outer(s.data, s.data.conj())
    return QOperator(mat, dims)


def partial_trace(state: QState, keep: int) -> QState:
    """Reduce a two-mode state to mode `keep` (0 = cavity, 1 = resonator)."""
    if len(state.dims) != 2:
        raise DimensionMismatchError("partial_trace expects a two-mode state")
    if keep not in (0, 1):
        raise DimensionMismatchError("keep must be 0 or 1")
    na, nb = state.dims
    if state.kind == "ket":
        psi = state.data.reshape(na, nb)
        if keep == 0:
            red = psi @ psi.conj().T
        else:
            red = psi.T @ psi.conj()
    else:
        rho = state.data.reshape(na, nb, na, nb)
        if keep == 0:
            red = np.einsum("ibjb->ij", rho)
        else:
            red = np.einsum("aiaj->ij", rho)
    return QState(red, state.dims[keep], "density", validate=False)
