"""Cat and pair-cat subspaces: bases, projections, and bias metrics.

The even/odd cat states

    |C_plus>  = (|beta> + |-beta>) / sqrt(N_plus)
    |C_minus> = (|beta> - |-beta>) / sqrt(N_minus)

span the manifold stabilized by the two-photon drive.  Basis order is
{|C_minus>, |C_plus>} everywhere, matching `models.SIGMA_Z`.  The ladder
operator acts inside the manifold as b|C_plus> = beta*A |C_minus> and
b|C_minus> = (beta/A) |C_plus> with A = sqrt(tanh|beta|^2), which is the
source of every bias formula below.

Displaced eigenstate kets follow the generator convention

    D(c) = exp[c (a - a^+)]            (so D(c)|0> has amplitude -c),

chosen to pair the +x qubit branch with the cavity branch that the
qubit-cavity coupling g(a + a^+) sigma_x actually selects for g > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import eval_genlaguerre

from . import qops
from .errors import InvalidParameterError, StateValidationError
from .models import SIGMA_M, SIGMA_P, SIGMA_X, SIGMA_Y, SIGMA_Z
from .qops import HilbertDims, QOperator, QState

LOWDIN_THRESHOLD = 1e-10


class CatBasis:
    """Orthonormal cat pair on one truncated mode, with 2x2 qubit matrices.

    Attributes
    ----------
    beta, dim : stabilized amplitude and mode truncation.
    A : sqrt(tanh|beta|^2), the cat asymmetry factor.
    c_minus, c_plus : the odd and even cat kets.
    plus_x, minus_x : (|C_plus> +/- |C_minus>)/sqrt(2), i.e. the
        approximately coherent pointer states.
    sigma_x, sigma_y, sigma_z, sigma_p, sigma_m : 2x2 qubit matrices in the
        ordered basis {|C_minus>, |C_plus>}.
    """

    def __init__(self, beta: complex, dim: int):
        qops.check_truncation(beta, dim)
        self.beta = beta
        self.dim = dim
        self.A = math.sqrt(math.tanh(abs(beta) ** 2))
        coh_p = qops.coherent_state(beta, dim).data
        coh_m = qops.coherent_state(-beta, dim).data
        minus = coh_p - coh_m
        plus = coh_p + coh_m
        self.c_minus = QState(minus / np.linalg.norm(minus), dim, "ket")
        self.c_plus = QState(plus / np.linalg.norm(plus), dim, "ket")
        self.plus_x = QState(
            (self.c_plus.data + self.c_minus.data) / math.sqrt(2), dim, "ket"
        )
        self.minus_x = QState(
            (self.c_plus.data - self.c_minus.data) / math.sqrt(2), dim, "ket"
        )
        # columns ordered {C_minus, C_plus}; V is the subspace isometry
        self._isometry = np.column_stack([self.c_minus.data, self.c_plus.data])
        self.sigma_p = QOperator(SIGMA_P, 2)
        self.sigma_m = QOperator(SIGMA_M, 2)
        self.sigma_x = QOperator(SIGMA_X, 2)
        self.sigma_y = QOperator(SIGMA_Y, 2)
        self.sigma_z = QOperator(SIGMA_Z, 2)

    @property
    def projector(self) -> QOperator:
        """Rank-2 projector onto the cat manifold (mode space)."""
        v = self._isometry
        return QOperator(v @ v.conj().T, self.dim)

    def lift(self, qubit_mat) -> QOperator:
        """Embed a 2x2 qubit matrix into the mode space via the cat pair."""
        m = np.asarray(qubit_mat, dtype=np.complex128)
        if m.shape != (2, 2):
            raise InvalidParameterError("lift expects a 2x2 matrix")
        v = self._isometry
        return QOperator(v @ m @ v.conj().T, self.dim)


def cat_basis(beta: complex, dim: int) -> CatBasis:
    return CatBasis(beta, dim)


def project_operator(op: QOperator, basis: CatBasis) -> QOperator:
    """Compress an operator onto the cat manifold.

    A single-mode operator becomes the 2x2 matrix <C_i|op|C_j>; a two-mode
    operator keeps its cavity factor and becomes (n_a, 2)-dimensional.
    """
    v = basis._isometry
    if op.dims == (basis.dim,):
        return QOperator(v.conj().T @ op.mat @ v, 2)
    if len(op.dims) == 2 and op.dims[1] == basis.dim:
        n_a = op.dims[0]
        w = np.kron(np.eye(n_a), v)
        return QOperator(w.conj().T @ op.mat @ w, (n_a, 2))
    raise InvalidParameterError(
        f"operator dims {op.dims} do not end in the cat mode dim {basis.dim}"
    )


# ---------------------------------------------------------------------------
# displaced eigenstates and tunneling elements


def displaced_fock_overlap(m: int, n: int, z: complex) -> complex:
    """<m| exp(z a^+ - z* a) |n> in closed (associated Laguerre) form."""
    if m < 0 or n < 0:
        raise InvalidParameterError("Fock indices must be >= 0")
    x = abs(z) ** 2
    if n >= m:
        pref = math.sqrt(math.factorial(m) / math.factorial(n))
        val = pref * (-np.conj(z)) ** (n - m) * math.exp(-x / 2) * eval_genlaguerre(
            m, n - m, x
        )
    else:
        pref = math.sqrt(math.factorial(n) / math.factorial(m))
        val = pref * z ** (m - n) * math.exp(-x / 2) * eval_genlaguerre(n, m - n, x)
    return complex(val)


def displaced_fock_overlap_expm(m: int, n: int, z: complex, dim: int) -> complex:
    """Same overlap from the dense matrix exponential (cross-check oracle)."""
    d = qops.displacement_operator(z, dim)
    return complex(d.mat[m, n])


def cavity_displacement(c: float, n_a: int) -> QOperator:
    """D(c) = exp[c (a - a^+)] on the cavity (note the sign convention)."""
    return qops.displacement_operator(-c, n_a)


def displaced_eigenstate(
    n: int, branch: int, alpha: float, basis: CatBasis, n_a: int
) -> QState:
    """Approximate eigenket |n_branch, (branch)x> of the biased qubit-cavity
    model: D(branch*alpha)|n> on the cavity times the matching pointer state.

    branch = +1 pairs D(+alpha)|n> with |+x>, branch = -1 pairs
    D(-alpha)|n> with |-x>.
    """
    if branch not in (+1, -1):
        raise InvalidParameterError("branch must be +1 or -1")
    d = cavity_displacement(branch * alpha, n_a)
    cav = d.apply(qops.basis(n_a, n))
    pointer = basis.plus_x if branch == +1 else basis.minus_x
    return qops.tensor(cav.normalized(), pointer)


def tunneling_matrix_element(
    m: int, n: int, alpha: float, delta_tilde: float
) -> complex:
    """Coupling (delta_tilde/2) <m|D(-2 alpha)|m+n> between opposite-branch
    displaced eigenstates at an n-th order level crossing."""
    if n < 0:
        raise InvalidParameterError("crossing order n must be >= 0")
    # D(-2 alpha) in the exp[c(a - a^+)] convention is the standard-form
    # displacement with amplitude +2 alpha.
    return 0.5 * delta_tilde * displaced_fock_overlap(m, m + n, 2.0 * alpha)


# ---------------------------------------------------------------------------
# pair-cat code


class PairCatBasis:
    """Two-mode code pair |mu_pm> = (|alpha,+x> +/- |-alpha,-x>)/sqrt(2).

    `comp_px` / `comp_mx` are the two branch kets (cavity displaced along the
    branch selected by the qubit pointer, per the D(c) = exp[c(a - a^+)]
    convention).  If the raw combination fails orthonormality beyond 1e-10
    (possible at tight truncation), a symmetric Lowdin correction is applied
    and flagged in `lowdin_applied`.
    """

    def __init__(self, alpha: float, beta: complex, dims: HilbertDims):
        self.alpha = alpha
        self.beta = beta
        self.dims = dims
        self.cat = cat_basis(beta, dims.n_b)
        vac = qops.basis(dims.n_a, 0)
        cav_p = cavity_displacement(+alpha, dims.n_a).apply(vac).normalized()
        cav_m = cavity_displacement(-alpha, dims.n_a).apply(vac).normalized()
        self.comp_px = qops.tensor(cav_p, self.cat.plus_x)
        self.comp_mx = qops.tensor(cav_m, self.cat.minus_x)
        plus = (self.comp_px.data + self.comp_mx.data) / math.sqrt(2)
        minus = (self.comp_px.data - self.comp_mx.data) / math.sqrt(2)

        gram_off = complex(np.vdot(plus, minus))
        residual = max(
            abs(gram_off),
            abs(np.linalg.norm(plus) - 1.0),
            abs(np.linalg.norm(minus) - 1.0),
        )
        self.residual_overlap = float(residual)
        self.lowdin_applied = residual > LOWDIN_THRESHOLD
        if self.lowdin_applied:
            basis_mat = np.column_stack([plus, minus])
            gram = basis_mat.conj().T @ basis_mat
            w, u = np.linalg.eigh(gram)
            if np.min(w) <= 0:
                raise StateValidationError(
                    "pair-cat components are linearly dependent at this truncation"
                )
            inv_sqrt = (u * (w**-0.5)) @ u.conj().T
            basis_mat = basis_mat @ inv_sqrt
            plus, minus = basis_mat[:, 0], basis_mat[:, 1]
        self.mu_plus = QState(plus, dims.as_tuple(), "ket")
        self.mu_minus = QState(minus, dims.as_tuple(), "ket")

    @property
    def projector(self) -> QOperator:
        return qops.projector([self.mu_plus, self.mu_minus])


def pair_cat_basis(alpha: float, beta: complex, dims: HilbertDims) -> PairCatBasis:
    return PairCatBasis(alpha, beta, dims)


# ---------------------------------------------------------------------------
# bias metrics


@dataclass(frozen=True)
class BiasReport:
    """Noise-bias matrix elements for the single-cat and pair-cat codes.

    `single_flip_gap`    = <C_plus|b|C_minus> - <C_minus|b|C_plus>
    `single_dephasing_gap` = <C_plus|b^+b|C_plus> - <C_minus|b^+b|C_minus>
    `pair_flip_gap`, `pair_dephasing_gap` : the same combinations in the
    {|mu_plus>, |mu_minus>} code, which carry an extra exp(-2|alpha|^2)
    suppression.  `suppression` = exp(-2|alpha|^2) for reference.
    """

    alpha: float
    beta: float
    single_flip_gap: float
    single_dephasing_gap: float
    pair_flip_gap: float
    pair_dephasing_gap: float
    suppression: float


def _real_part(value: complex, what: str) -> float:
    if abs(value.imag) > 1e-10 * max(1.0, abs(value.real)):
        raise StateValidationError(f"{what} should be real, got {value}")
    return value.real


def bias_report(alpha: float, beta: float, dims: HilbertDims) -> BiasReport:
    """Compute the four bias gaps from explicit matrix elements.

    The pair-code differences are assembled from the cross terms between the
    two branch kets: expanding |mu_pm> = (|px> +/- |mx>)/sqrt(2) makes the
    branch-diagonal contributions cancel exactly, so evaluating only the
    cross terms gives the same quantity without the catastrophic
    cancellation that direct subtraction hits once exp(-2|alpha|^2) is far
    below the diagonal elements.
    """
    pair = pair_cat_basis(alpha, beta, dims)
    cat = pair.cat
    b_mode = qops.annihilation(dims.n_b)
    n_mode = qops.number_op(dims.n_b)

    def sandwich(bra: QState, op: QOperator, ket: QState) -> complex:
        return complex(bra.data.conj() @ (op.mat @ ket.data))

    single_flip = sandwich(cat.c_plus, b_mode, cat.c_minus) - sandwich(
        cat.c_minus, b_mode, cat.c_plus
    )
    single_deph = sandwich(cat.c_plus, n_mode, cat.c_plus) - sandwich(
        cat.c_minus, n_mode, cat.c_minus
    )

    b_full = qops.tensor(qops.identity(dims.n_a), b_mode)
    n_full = qops.tensor(qops.identity(dims.n_a), n_mode)
    px, mx = pair.comp_px, pair.comp_mx
    # <mu_plus|O|mu_minus> - <mu_minus|O|mu_plus> = <mx|O|px> - <px|O|mx>
    pair_flip = sandwich(mx, b_full, px) - sandwich(px, b_full, mx)
    # <mu_plus|O|mu_plus> - <mu_minus|O|mu_minus> = 2 Re <px|O|mx>
    pair_deph = 2.0 * sandwich(px, n_full, mx).real

    return BiasReport(
        alpha=float(alpha),
        beta=float(beta),
        single_flip_gap=_real_part(single_flip, "single flip gap"),
        single_dephasing_gap=_real_part(single_deph, "single dephasing gap"),
        pair_flip_gap=_real_part(pair_flip, "pair flip gap"),
        pair_dephasing_gap=float(pair_deph),
        suppression=math.exp(-2.0 * abs(alpha) ** 2),
    )
