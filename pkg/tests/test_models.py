"""Hamiltonian builders: frozen oracles, spectra, and symmetry checks."""

import math

import numpy as np
import pytest

from kerrcat import models, qops
from kerrcat.errors import InvalidParameterError
from kerrcat.models import EffectiveQRM, ModelParams
from kerrcat.qops import HilbertDims

# mpmath reference values (30 digits)
A_B2 = 0.99966459362081392          # sqrt(tanh 4)
DTILDE_01_B2 = 5.3674026504617845e-4  # 2*0.1*4*csch(8)
DELTA_FOR_DTILDE_01_BSQRT2 = 0.68224792992819381


def test_params_validation():
    with pytest.raises(InvalidParameterError):
        ModelParams(K=0.0)
    with pytest.raises(InvalidParameterError):
        ModelParams(kappa_a=-1e-3)


def test_for_beta_sets_drive():
    p = ModelParams.for_beta(2.0, K=10.0)
    assert p.P == pytest.approx(40.0)
    assert p.beta == pytest.approx(2.0)


class TestFullHamiltonian:
    def test_hermitian(self):
        p = ModelParams.for_beta(2.0, K=10.0, lam=1.0 + 0.2j, delta=0.1)
        h = models.build_full_hamiltonian(p, HilbertDims(4, 24))
        assert h.is_hermitian()

    def test_kerr_energy_of_coherent_state(self):
        # with P = K (beta = 1) the resonator part gives <beta|H_b|beta> = K
        k = 3.0
        p = ModelParams(K=k, P=k, lam=0.0)
        dims = HilbertDims(2, 24)
        h = models.build_full_hamiltonian(p, dims)
        psi = qops.tensor(qops.vacuum(2), qops.coherent_state(1.0, 24))
        assert h.expect(psi).real == pytest.approx(k, rel=1e-7)

    def test_cat_manifold_on_top_with_gap(self):
        # lam = 0, delta = 0: resonator spectrum has a degenerate cat pair
        # at K*beta^4, separated from the rest by a gap that approaches
        # 4*K*beta^2 from below as beta grows (ratio 0.818 at beta = 2,
        # converged against truncation; quadratic-expansion estimate only)
        k, beta = 10.0, 2.0
        p = ModelParams.for_beta(beta, K=k)
        dims = HilbertDims(2, 30)
        h = models.build_full_hamiltonian(p, dims)
        # strip the trivial cavity factor: take the n_a = 0 block
        hb = h.mat.reshape(2, 30, 2, 30)[0, :, 0, :]
        evals = np.linalg.eigvalsh(hb)
        top = evals[-1]
        assert top == pytest.approx(k * beta**4, rel=1e-6)
        assert evals[-1] - evals[-2] == pytest.approx(0.0, abs=1e-4)
        gap = evals[-1] - evals[-3]
        assert gap == pytest.approx(130.907992, rel=1e-6)

    def test_manifold_gap_approaches_quadratic_estimate(self):
        ratios = []
        for beta in (2.0, 2.5, 3.0, 4.0):
            dim = int(beta**2 + 5 * beta + 30)
            p = ModelParams.for_beta(beta, K=10.0)
            h = models.build_full_hamiltonian(p, HilbertDims(2, dim))
            hb = h.mat.reshape(2, dim, 2, dim)[0, :, 0, :]
            evals = np.linalg.eigvalsh(hb)
            ratios.append((evals[-1] - evals[-3]) / (4 * 10.0 * beta**2))
        assert all(np.diff(ratios) > 0)
        assert ratios[-1] > 0.96

    def test_degenerate_pair_is_cat_pair(self):
        k, beta, dim_b = 10.0, 2.0, 30
        p = ModelParams.for_beta(beta, K=k)
        h = models.build_full_hamiltonian(p, HilbertDims(2, dim_b))
        hb = h.mat.reshape(2, dim_b, 2, dim_b)[0, :, 0, :]
        evals, evecs = np.linalg.eigh(hb)
        span = evecs[:, -2:]
        for s in (qops.coherent_state(beta, dim_b), qops.coherent_state(-beta, dim_b)):
            proj = span @ (span.conj().T @ s.data)
            assert np.linalg.norm(proj - s.data) < 1e-5


class TestErrorAndDrive:
    def test_error_hamiltonian_terms(self):
        p = ModelParams(K=1.0, delta_omega=0.3, delta_P=0.2 - 0.1j)
        dims = HilbertDims(2, 6)
        h = models.build_error_hamiltonian(p, dims)
        b = qops.tensor(qops.identity(2), qops.annihilation(6))
        ref = (
            0.3 * (b.dag() @ b)
            + (0.2 - 0.1j) * (b.dag() @ b.dag())
            + (0.2 + 0.1j) * (b @ b)
        )
        np.testing.assert_allclose(h.mat, ref.mat, atol=1e-14)

    def test_linear_drive(self):
        dims = HilbertDims(2, 5)
        h = models.build_linear_drive(0.25, dims)
        b = qops.tensor(qops.identity(2), qops.annihilation(5))
        np.testing.assert_allclose(h.mat, 0.25 * (b + b.dag()).mat, atol=1e-15)


class TestEffectiveReduction:
    def test_parameter_map(self):
        p = ModelParams.for_beta(2.0, K=10.0, lam=0.5, delta=0.1, Omega=0.025)
        eff = models.effective_qrm_params(p)
        assert eff.A == pytest.approx(A_B2, abs=1e-14)
        assert eff.delta_tilde == pytest.approx(DTILDE_01_B2, rel=1e-12)
        assert eff.g == pytest.approx(1.0)
        assert eff.epsilon == pytest.approx(0.2)

    def test_delta_tilde_inversion(self):
        beta = math.sqrt(2)
        delta = models.delta_from_delta_tilde(0.1, beta)
        assert delta == pytest.approx(DELTA_FOR_DTILDE_01_BSQRT2, rel=1e-12)
        assert models.delta_tilde_from_delta(delta, beta) == pytest.approx(0.1)

    def test_ideal_spectrum_is_displaced_ladders(self):
        # A = 1, delta_tilde = 0: eigenvalues n*Delta - g^2/Delta, each twice
        g, n_a = 2.0, 40
        eff = EffectiveQRM(Delta=1.0, g=g, A=1.0)
        h = models.build_effective_qrm(eff, n_a)
        evals = np.linalg.eigvalsh(h.mat)
        for n in range(6):
            target = n - g**2
            pair = evals[2 * n : 2 * n + 2]
            np.testing.assert_allclose(pair, target, atol=0.02)

    def test_bias_lifts_degeneracy(self):
        eff = EffectiveQRM(Delta=1.0, g=1.0, A=1.0, epsilon=0.3)
        evals = np.linalg.eigvalsh(models.build_effective_qrm(eff, 30).mat)
        assert evals[1] - evals[0] == pytest.approx(0.3, abs=1e-6)

    def test_crossing_at_epsilon_equal_delta(self):
        eff = EffectiveQRM(Delta=1.0, g=1.0, A=1.0, epsilon=1.0)
        evals = np.linalg.eigvalsh(models.build_effective_qrm(eff, 40).mat)
        gaps = np.diff(evals)
        # levels 1 and 2 cross: some adjacent gap collapses
        assert np.min(gaps[:8]) < 1e-10

    def test_parity_commutes_without_bias(self):
        n_a = 12
        eff = EffectiveQRM(Delta=1.0, g=0.7, A=1.0, delta_tilde=0.4, epsilon=0.0)
        h = models.build_effective_qrm(eff, n_a).mat
        par = np.kron(
            -np.diag((-1.0) ** np.arange(n_a)), models.SIGMA_Z
        )
        assert np.max(np.abs(h @ par - par @ h)) < 1e-10

    def test_bias_breaks_parity(self):
        n_a = 12
        eff = EffectiveQRM(Delta=1.0, g=0.7, A=1.0, epsilon=0.5)
        h = models.build_effective_qrm(eff, n_a).mat
        par = np.kron(-np.diag((-1.0) ** np.arange(n_a)), models.SIGMA_Z)
        assert np.max(np.abs(h @ par - par @ h)) > 0.1


class TestCollapseOperators:
    def test_zero_rates_omitted(self):
        p = ModelParams(K=1.0, kappa_a=0.01)
        ops = models.collapse_operators(p, HilbertDims(3, 4))
        assert len(ops) == 1
        op, rate = ops[0]
        assert rate == pytest.approx(0.01)
        ref = qops.tensor(qops.annihilation(3), qops.identity(4))
        np.testing.assert_allclose(op.mat, ref.mat)

    def test_full_set_order(self):
        p = ModelParams(
            K=1.0, kappa_a=0.01, kappa_b=0.02, kappa_phi_a=0.03, kappa_phi_b=0.04
        )
        ops = models.collapse_operators(p, HilbertDims(3, 4))
        assert [rate for _, rate in ops] == [0.01, 0.02, 0.03, 0.04]


class TestProjectedMasterEquation:
    def test_channel_structure(self):
        p = ModelParams.for_beta(
            2.0, K=10.0, lam=0.1, kappa_a=0.01, kappa_b=0.02, kappa_phi_a=0.03,
            kappa_phi_b=0.04,
        )
        eff = models.effective_qrm_params(p)
        _, channels = models.build_projected_master_equation(eff, p, n_a=6)
        rates = [rate for _, rate in channels]
        beta2 = 4.0
        assert rates == pytest.approx([0.01, 0.03, 0.02 * beta2, 0.04 * beta2**2])

    def test_flip_rate_source_switch(self):
        p = ModelParams.for_beta(2.0, K=10.0, lam=0.1, kappa_a=0.05, kappa_b=0.02)
        eff = models.effective_qrm_params(p)
        _, chans_b = models.build_projected_master_equation(eff, p, 4, "b")
        _, chans_a = models.build_projected_master_equation(eff, p, 4, "a")
        assert chans_b[-1][1] == pytest.approx(0.02 * 4)
        assert chans_a[-1][1] == pytest.approx(0.05 * 4)

    def test_flip_operator_matches_printed_combination(self):
        p = ModelParams.for_beta(2.0, K=10.0, lam=0.1, kappa_b=0.02)
        eff = models.effective_qrm_params(p)
        _, channels = models.build_projected_master_equation(eff, p, 3)
        flip_op = channels[0][0]
        a_big = eff.A
        expected = np.kron(
            np.eye(3),
            0.5 * (a_big + 1 / a_big) * models.SIGMA_X
            + 0.5 * (a_big - 1 / a_big) * models.SIGMA_Y,
        )
        np.testing.assert_allclose(flip_op.mat, expected, atol=1e-14)
