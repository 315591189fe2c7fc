"""Hamiltonians for the driven Kerr resonator coupled to a cavity.

The full two-mode model (units of the cavity frequency detuning, Delta = 1)
is

    H = Delta a^+a + delta b^+b - K b^+b^+bb + P b^+b^+ + P* bb
        + lam a b^+ + lam* a^+ b

with the cavity `a` on the left tensor factor and the Kerr resonator `b` on
the right.  The two-photon drive stabilizes the even/odd cat manifold at
amplitude beta = sqrt(P/K); `effective_qrm_params` reduces the model to a
qubit-cavity form on that manifold, with the qubit basis ordered
{|C_minus>, |C_plus>} so sigma_z = diag(+1, -1) tags the odd cat first.

Static frequency/drive deviations of the resonator enter through a separate
error term

    H_err = delta_omega b^+b + delta_P b^+b^+ + delta_P* bb

and a weak single-photon drive Omega (b + b^+) biases the qubit; both are
built by their own constructors so scenarios can compose exactly the model
they need.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from . import qops
from .errors import InvalidParameterError
from .qops import HilbertDims, QOperator

# Qubit matrices in the ordered cat basis {|C_minus>, |C_plus>}:
# sigma_plus = |C_minus><C_plus|, sigma_z |C_minus> = +|C_minus>.
SIGMA_P = np.array([[0, 1], [0, 0]], dtype=np.complex128)
SIGMA_M = SIGMA_P.conj().T
SIGMA_X = SIGMA_P + SIGMA_M
SIGMA_Y = -1j * (SIGMA_P - SIGMA_M)
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of the full model, all in units of Delta.

    `P` is the two-photon drive; prefer the `for_beta` constructor, which
    sets P = K * beta**2 so the stabilized cat amplitude is explicit.
    Decay rates (`kappa_*`) are used only by the open-system builders.
    """

    Delta: float = 1.0
    delta: float = 0.0
    K: float = 10.0
    P: complex = 0j
    lam: complex = 0j
    Omega: float = 0.0
    delta_omega: float = 0.0
    delta_P: complex = 0j
    kappa_a: float = 0.0
    kappa_b: float = 0.0
    kappa_phi_a: float = 0.0
    kappa_phi_b: float = 0.0

    def __post_init__(self):
        if self.K <= 0:
            raise InvalidParameterError(f"K must be positive, got {self.K}")
        for name in ("kappa_a", "kappa_b", "kappa_phi_a", "kappa_phi_b"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0")

    @classmethod
    def for_beta(cls, beta: float, **kwargs) -> "ModelParams":
        """Build params with the two-photon drive pinned to P = K * beta^2."""
        k = kwargs.pop("K", 10.0)
        return cls(K=k, P=k * beta**2, **kwargs)

    @property
    def beta(self) -> complex:
        """Stabilized cat amplitude sqrt(P/K) (principal branch)."""
        return cmath.sqrt(self.P / self.K)

    def with_(self, **changes) -> "ModelParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class EffectiveQRM:
    """Parameters of the reduced qubit-cavity model on the cat manifold.

    A = sqrt(tanh|beta|^2) encodes the residual nonorthogonality of the two
    coherent components; delta_tilde is the induced qubit splitting,
    g = lam * beta the qubit-cavity coupling, and epsilon the qubit bias
    produced by a weak linear drive (epsilon -> 4*beta*Omega for large beta).
    """

    Delta: float = 1.0
    delta_tilde: float = 0.0
    g: complex = 0j
    A: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.A <= 1.0:
            raise InvalidParameterError(f"A must lie in (0, 1], got {self.A}")


def _real_beta(params: ModelParams) -> float:
    beta = params.beta
    if abs(beta.imag) > 1e-12 * max(1.0, abs(beta.real)):
        raise InvalidParameterError(
            "cat-manifold reductions assume a real positive drive phase "
            f"(beta = {beta})"
        )
    return beta.real


def delta_tilde_from_delta(delta: float, beta: float) -> float:
    """Induced qubit splitting 2*delta*|beta|^2*csch(2|beta|^2)."""
    b2 = abs(beta) ** 2
    return 2.0 * delta * b2 / math.sinh(2.0 * b2)


def delta_from_delta_tilde(delta_tilde: float, beta: float) -> float:
    """Inverse of `delta_tilde_from_delta` at fixed beta."""
    b2 = abs(beta) ** 2
    return delta_tilde * math.sinh(2.0 * b2) / (2.0 * b2)


def effective_qrm_params(params: ModelParams) -> EffectiveQRM:
    """Reduce full-model parameters to the qubit-cavity form."""
    beta = _real_beta(params)
    if beta <= 0:
        raise InvalidParameterError("effective reduction needs beta > 0")
    a_factor = math.sqrt(math.tanh(beta**2))
    return EffectiveQRM(
        Delta=params.Delta,
        delta_tilde=delta_tilde_from_delta(params.delta, beta),
        g=params.lam * beta,
        A=a_factor,
        epsilon=4.0 * beta * params.Omega,
    )


# ---------------------------------------------------------------------------
# full-model builders


def _mode_ops(dims: HilbertDims):
    a = qops.tensor(qops.annihilation(dims.n_a), qops.identity(dims.n_b))
    b = qops.tensor(qops.identity(dims.n_a), qops.annihilation(dims.n_b))
    return a, b


def build_full_hamiltonian(params: ModelParams, dims: HilbertDims) -> QOperator:
    """Two-mode Hamiltonian: Kerr resonator with two-photon drive, linearly
    coupled to the cavity.  Error and bias-drive terms are separate builders."""
    a, b = _mode_ops(dims)
    ad, bd = a.dag(), b.dag()
    h = (
        params.Delta * (ad @ a)
        + params.delta * (bd @ b)
        - params.K * (bd @ bd @ b @ b)
        + params.P * (bd @ bd)
        + np.conj(params.P) * (b @ b)
        + params.lam * (a @ bd)
        + np.conj(params.lam) * (ad @ b)
    )
    return h.require_hermitian(what="full Hamiltonian")


def build_error_hamiltonian(params: ModelParams, dims: HilbertDims) -> QOperator:
    """Static deviation of the resonator frequency and two-photon drive."""
    _, b = _mode_ops(dims)
    bd = b.dag()
    h = (
        params.delta_omega * (bd @ b)
        + params.delta_P * (bd @ bd)
        + np.conj(params.delta_P) * (b @ b)
    )
    return h.require_hermitian(what="error Hamiltonian")


def build_linear_drive(omega: float, dims: HilbertDims) -> QOperator:
    """Weak single-photon drive Omega (b + b^+) used to bias the cat qubit."""
    if abs(complex(omega).imag) > 0:
        raise InvalidParameterError("drive amplitude Omega must be real")
    _, b = _mode_ops(dims)
    return (float(omega) * (b + b.dag())).require_hermitian(what="linear drive")


def collapse_operators(
    params: ModelParams, dims: HilbertDims
) -> list[tuple[QOperator, float]]:
    """Loss and dephasing channels [(op, rate), ...], zero rates omitted.

    Order: cavity loss, resonator loss, cavity dephasing, resonator
    dephasing.
    """
    a, b = _mode_ops(dims)
    pairs = [
        (a, params.kappa_a),
        (b, params.kappa_b),
        (a.dag() @ a, params.kappa_phi_a),
        (b.dag() @ b, params.kappa_phi_b),
    ]
    return [(op, rate) for op, rate in pairs if rate > 0.0]


# ---------------------------------------------------------------------------
# reduced-model builders (cavity tensor qubit, qubit basis {C_minus, C_plus})


def build_effective_qrm(eff: EffectiveQRM, n_a: int) -> QOperator:
    """Qubit-cavity Hamiltonian on the cat manifold.

    H = Delta a^+a + (delta_tilde/2) sigma_z + (epsilon/2) sigma_x
        + [g (sigma_plus/A + A sigma_minus) a + h.c.]

    With A = 1 this is the anisotropy-free limit whose spectrum is the pair
    of displaced oscillator ladders n*Delta - g^2/Delta +/- epsilon/2.
    """
    a = qops.tensor(qops.annihilation(n_a), qops.identity(2))
    qubit = lambda m: qops.tensor(qops.identity(n_a), QOperator(m, 2))  # noqa: E731
    coupling = qops.tensor(
        qops.annihilation(n_a),
        QOperator(eff.g * (SIGMA_P / eff.A + eff.A * SIGMA_M), 2),
    )
    h = (
        eff.Delta * (a.dag() @ a)
        + 0.5 * eff.delta_tilde * qubit(SIGMA_Z)
        + 0.5 * eff.epsilon * qubit(SIGMA_X)
        + coupling
        + coupling.dag()
    )
    return h.require_hermitian(what="effective Hamiltonian")


def build_projected_master_equation(
    eff: EffectiveQRM,
    params: ModelParams,
    n_a: int,
    flip_rate_from: str = "b",
) -> tuple[QOperator, list[tuple[QOperator, float]]]:
    """Reduced open-system model on the cat manifold.

    Returns (H, [(op, rate), ...]) with channels:
      - cavity loss kappa_a D[a] and cavity dephasing kappa_phi_a D[a^+a],
      - qubit flips D[(A+1/A)/2 sigma_x + (A-1/A)/2 sigma_y] at
        rate kappa*|beta|^2, where kappa is kappa_b or kappa_a depending on
        `flip_rate_from` (resonator loss is the physical source; "b" is the
        default, "a" reproduces the alternative attribution),
      - qubit dephasing D[(A^2+A^-2)/2 I - (A^2-A^-2)/2 sigma_z] at rate
        kappa_phi_b*|beta|^4.

    Zero-rate channels are omitted.
    """
    if flip_rate_from not in ("a", "b"):
        raise InvalidParameterError("flip_rate_from must be 'a' or 'b'")
    beta = abs(_real_beta(params))
    h = build_effective_qrm(eff, n_a)
    a = qops.tensor(qops.annihilation(n_a), qops.identity(2))
    qubit = lambda m: qops.tensor(qops.identity(n_a), QOperator(m, 2))  # noqa: E731

    big_a = eff.A
    flip_op = qubit(
        0.5 * (big_a + 1.0 / big_a) * SIGMA_X + 0.5 * (big_a - 1.0 / big_a) * SIGMA_Y
    )
    deph_op = qubit(
        0.5 * (big_a**2 + big_a**-2) * IDENTITY_2
        - 0.5 * (big_a**2 - big_a**-2) * SIGMA_Z
    )
    flip_rate = (params.kappa_b if flip_rate_from == "b" else params.kappa_a) * beta**2

    channels = [
        (a, params.kappa_a),
        (a.dag() @ a, params.kappa_phi_a),
        (flip_op, flip_rate),
        (deph_op, params.kappa_phi_b * beta**4),
    ]
    return h, [(op, rate) for op, rate in channels if rate > 0.0]
