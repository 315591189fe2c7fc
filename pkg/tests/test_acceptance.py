"""Acceptance gate: one test per criterion, run at the stated tolerances.

Each test soft-collects its sub-checks and prints one PASS/FAIL line per
bound with the measured value, so a red criterion still reports every
number.  Four sub-checks fail by design of the underlying model, not by
implementation error; the assert messages carry the measured values and the
module-level notes below summarize the causes.

Known-red notes
---------------
* criterion 1: the reduced model omits the dispersive frequency pull of the
  cavity (order lambda^2*beta^2/K corrections), so the full-model revival
  drifts out of phase over the 4*pi window; the gap shrinks like 1/K but at
  K = 10 the maximum population deviation is ~0.14, far above 0.02.
* criterion 4 (half-period): at amplitude sqrt(2) the pointer asymmetry
  contributes a second, destructively interfering transfer channel; the
  displaced-overlap-only prediction misses the observed half-period by
  ~23%.  The full two-level matrix element predicts it to <1%.
* criterion 6 (negative static offsets): offsets of -0.5 shrink the
  stabilized well amplitude itself, a static code-space distortion that
  costs ~2.2e-3 infidelity at every commensurate gate time, just above the
  2e-3 budget.  Positive offsets of the same size improve the fidelity.
* criterion 7 (rate doubling): code leakage is fed linearly by dephasing
  jumps at these rates, so doubling the rate doubles the end-time leakage
  (factor 2.0) instead of quadrupling it.
"""

import math

import numpy as np
import pytest
import scipy.linalg

from kerrcat import catspace, cli, config, dynamics, experiments, models, qops
from kerrcat.dynamics import TimeGrid
from kerrcat.experiments import revival_probability_analytic
from kerrcat.models import EffectiveQRM, ModelParams
from kerrcat.qops import HilbertDims


def _report(name, checks):
    lines = [f"[{'PASS' if ok else 'FAIL'}] {msg}" for ok, msg in checks]
    body = "\n".join(lines)
    print(f"\n{name}\n{body}")
    failed = sum(1 for ok, _ in checks if not ok)
    assert failed == 0, f"{name}: {failed} sub-check(s) failed\n{body}"


def test_criterion_1_reduced_model_tracks_full_model():
    params = ModelParams.for_beta(2.0, K=10.0, lam=1.0, delta=0.1)
    dims = HilbertDims(25, 30)
    grid = TimeGrid(0.0, 4.0 * math.pi, 201)

    cat = catspace.cat_basis(2.0, dims.n_b)
    psi0_full = qops.tensor(qops.basis(dims.n_a, 0), cat.c_plus)
    h_full = models.build_full_hamiltonian(params, dims)
    p_full = dynamics.evolve_schrodinger(
        h_full, psi0_full, grid, method="spectral"
    ).overlaps_with(psi0_full)

    h_red = models.build_effective_qrm(models.effective_qrm_params(params), dims.n_a)
    psi0_red = qops.basis((dims.n_a, 2), (0, 1))
    p_red = dynamics.evolve_schrodinger(
        h_red, psi0_red, grid, method="spectral"
    ).overlaps_with(psi0_red)

    dev = float(np.max(np.abs(p_full - p_red)))
    _report(
        "criterion 1",
        [(dev < 0.02, f"max |p_full - p_reduced| = {dev:.4f} (bound 0.02)")],
    )


def test_criterion_2_static_deviations_barely_move_population():
    params = ModelParams.for_beta(2.0, K=10.0, lam=1.0, delta=0.1)
    res = experiments.run_error_robustness(
        params,
        [(0.1, 0.1), (-0.1, -0.1)],
        4.0 * math.pi,
        dims=HilbertDims(46, 30),
    )
    checks = []
    for dp, dev in zip(res.columns["delta_P"], res.columns["deviation"]):
        checks.append(
            (dev < 0.005, f"deviation at offsets {dp:+.1f} = {dev:.2e} (bound 5e-3)")
        )
    _report("criterion 2", checks)


def test_criterion_3_collapse_and_revival():
    params = ModelParams.for_beta(2.0, K=10.0, lam=1.0, delta=0.0)
    grid = TimeGrid(0.0, 4.0 * math.pi, 161)
    res = experiments.run_collapse_revival(params, HilbertDims(46, 30), grid)
    t = res.columns["time"]
    p = res.columns["p_revival_numeric"]
    p_revival = float(p[np.argmin(np.abs(t - 2.0 * math.pi))])
    p_collapse = float(p[np.argmin(np.abs(t - math.pi))])

    eff = EffectiveQRM(Delta=1.0, delta_tilde=0.0, g=2.0, A=1.0, epsilon=0.0)
    h = models.build_effective_qrm(eff, 46)
    psi0 = qops.basis((46, 2), (0, 1))
    numeric = dynamics.evolve_schrodinger(
        h, psi0, grid, method="spectral"
    ).overlaps_with(psi0)
    analytic = revival_probability_analytic(2.0, 1.0, t)
    gap = float(np.max(np.abs(numeric - analytic)))

    _report(
        "criterion 3",
        [
            (p_revival >= 0.95, f"full-model revival = {p_revival:.4f} (bound 0.95)"),
            (p_collapse <= 1e-3, f"full-model collapse = {p_collapse:.2e} (bound 1e-3)"),
            (gap < 1e-2, f"analytic vs ideal-model numerics = {gap:.2e} (bound 1e-2)"),
        ],
    )


def test_criterion_4_crossings_and_tunneling():
    beta = math.sqrt(2.0)
    params = ModelParams.for_beta(
        beta, K=300.0, lam=0.5, delta=models.delta_from_delta_tilde(0.1, beta)
    )
    checks = []

    integer = experiments.run_spectrum(params, [1.0, 2.0, 3.0], n_a=30)
    worst_gap = float(np.max(integer.columns["gap_min"]))
    checks.append(
        (worst_gap < 1e-3, f"max gap at integer bias = {worst_gap:.2e} (bound 1e-3)")
    )
    between = experiments.run_spectrum(params, np.linspace(0.1, 0.9, 9), n_a=30)
    floor = float(np.min(between.columns["gap_min"]))
    checks.append(
        (floor > 5e-2, f"min gap between integers = {floor:.4f} (bound 5e-2)")
    )

    res = experiments.run_tunneling(
        params, [1.0], HilbertDims(24, 20), TimeGrid(0.0, 130.0, 261)
    )
    peak = float(np.max(res.columns["p_target_1"]))
    checks.append((peak > 0.9, f"peak transfer at resonance = {peak:.4f} (bound 0.9)"))

    observed = float(
        res.columns["time"][np.argmax(res.columns["p_target_1"])]
    )
    v_fc = float(res.diagnostics["tunneling_elements_fc"][0])
    predicted = math.pi / (2.0 * v_fc)
    rel = abs(observed - predicted) / predicted
    checks.append(
        (
            rel <= 0.15,
            f"half-period: observed {observed:.1f} vs displaced-overlap "
            f"prediction {predicted:.1f}, rel dev {rel:.1%} (bound 15%)",
        )
    )
    _report("criterion 4", checks)


def test_criterion_5_pair_code_suppression_identity():
    amps = [1.0, math.sqrt(2.0), 2.0, 2.5]
    res = experiments.run_bias_report(amps, amps, HilbertDims(42, 42))
    c = res.columns
    worst = 0.0
    for k in range(res.n_rows):
        supp = math.exp(-2.0 * c["alpha"][k] ** 2)
        for chan in ("flip", "dephasing"):
            got = c[f"pair_{chan}_gap"][k]
            want = c[f"single_{chan}_gap"][k] * supp
            worst = max(worst, abs(got - want) / abs(want))
    _report(
        "criterion 5",
        [(worst < 1e-6, f"max relative identity error = {worst:.2e} (bound 1e-6)")],
    )


def test_criterion_6_x_gate_fidelity():
    dims = HilbertDims(25, 25)
    base_params = ModelParams.for_beta(2.0, K=10.0, lam=1.0, delta=0.0, Omega=0.0125)
    base = experiments.run_xgate(base_params, 2.0, dims).columns["fidelity"][0]
    checks = [(base >= 0.995, f"gate fidelity = {base:.6f} (bound 0.995)")]

    for sign in (+0.5, -0.5):
        err = experiments.run_xgate(
            base_params.with_(delta_omega=sign, delta_P=sign), 2.0, dims
        ).columns["fidelity"][0]
        rise = base - err
        checks.append(
            (
                rise <= 0.002,
                f"infidelity increase at offsets {sign:+.1f} = {rise:.2e} (bound 2e-3)",
            )
        )

    diag = []
    for amp in (1.0, 1.2, 1.4, 1.6, 1.8, 2.0):
        p = ModelParams.for_beta(
            amp, K=10.0, lam=1.0, delta=0.0, Omega=0.025 / amp
        )
        diag.append(experiments.run_xgate(p, amp, dims).columns["fidelity"][0])
    min_step = float(np.min(np.diff(diag)))
    checks.append(
        (
            min_step >= -1e-3,
            f"diagonal sweep non-decreasing: min step = {min_step:.2e} "
            f"(bound -1e-3); fidelities {[f'{f:.4f}' for f in diag]}",
        )
    )
    _report("criterion 6", checks)


def test_criterion_7_decoherence_leakage():
    dims = HilbertDims(25, 25)
    grid = TimeGrid(0.0, 0.125, 26)
    checks = []

    loss = experiments.run_decoherence(
        ModelParams.for_beta(2.0, K=10.0, lam=1.0, kappa_a=0.01, kappa_b=0.01),
        "pair-cat", grid, dims=dims,
    )
    worst = float(np.max(loss.columns["leakage"]))
    checks.append(
        (worst < 1e-3, f"loss-only max leakage = {worst:.2e} (bound 1e-3)")
    )

    ends = {}
    for scale in (1.0, 2.0):
        deph = experiments.run_decoherence(
            ModelParams.for_beta(
                2.0, K=10.0, lam=1.0,
                kappa_phi_a=0.005 * scale, kappa_phi_b=0.005 * scale,
            ),
            "pair-cat", grid, dims=dims,
        )
        ends[scale] = float(deph.columns["leakage"][-1])
    checks.append(
        (
            abs(ends[1.0] - 0.005) <= 0.002,
            f"dephasing end-time leakage = {ends[1.0]:.2e} (band 0.005 +/- 0.002)",
        )
    )
    ratio = ends[2.0] / ends[1.0]
    checks.append(
        (
            abs(ratio - 4.0) <= 1.2,
            f"rate doubling multiplies end leakage by {ratio:.2f} (band 4 +/- 1.2)",
        )
    )
    _report("criterion 7", checks)


def test_criterion_8_solver_guarantees():
    checks = []
    params = ModelParams.for_beta(math.sqrt(2.0), K=10.0, lam=0.5, delta=0.3)
    dims = HilbertDims(12, 20)
    h = models.build_full_hamiltonian(params, dims)
    cat = catspace.cat_basis(math.sqrt(2.0), dims.n_b)
    psi0 = qops.tensor(qops.basis(dims.n_a, 0), cat.c_plus)
    grid = TimeGrid(0.0, 3.0, 31)

    traj = dynamics.evolve_schrodinger(h, psi0, grid, method="spectral")
    drift = max(abs(s.norm() - 1.0) for s in traj.states)
    checks.append((drift < 1e-6, f"state norm drift = {drift:.2e} (bound 1e-6)"))

    channels = models.collapse_operators(
        params.with_(kappa_b=0.02, kappa_phi_b=0.01), dims
    )
    rho_traj = dynamics.evolve_lindblad(h, channels, psi0.to_density(), grid)
    tdrift = max(abs(np.trace(s.data).real - 1.0) for s in rho_traj.states)
    checks.append((tdrift < 1e-8, f"density trace drift = {tdrift:.2e} (bound 1e-8)"))

    final = rho_traj.states[-1].data
    herm = float(np.max(np.abs(final - final.conj().T)))
    checks.append((herm < 1e-9, f"hermiticity defect = {herm:.2e} (bound 1e-9)"))
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (final + final.conj().T))))
    checks.append(
        (min_eig >= -1e-6, f"min density eigenvalue = {min_eig:.2e} (bound -1e-6)")
    )

    closed = dynamics.evolve_lindblad(h, [], psi0.to_density(), grid)
    gap = max(
        float(np.max(np.abs(rho.data - psi.to_density().data)))
        for rho, psi in zip(closed.states, traj.states)
    )
    checks.append(
        (gap < 1e-7, f"closed-system Lindblad vs Schrodinger = {gap:.2e} (bound 1e-7)")
    )

    dim = 60
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    worst = 0.0
    for alpha in (0.5, 1.5, 2.5):
        u = scipy.linalg.expm(alpha * (a.conj().T - a))
        for m in range(0, 11):
            for n in range(0, 11 - m):
                got = catspace.displaced_fock_overlap(m, m + n, alpha)
                worst = max(worst, abs(got - u[m, m + n]))
    checks.append(
        (worst < 1e-8, f"displaced-overlap closed form vs expm = {worst:.2e} (bound 1e-8)")
    )
    _report("criterion 8", checks)


def test_criterion_9_byte_identical_reruns(tmp_path):
    text = (
        "[xgate_sweep]\n"
        "alpha_min = 1.0\nalpha_max = 1.2\nalpha_points = 2\n"
        "beta_min = 1.0\nbeta_max = 1.2\nbeta_points = 2\n"
        "epsilon = 0.2\nn_a = 18\nn_b = 18\n"
        "\n[bias_report]\nalpha = [1.0, 2.0]\nbeta = [2.0]\n"
    )
    payloads = {}
    for threads in (1, 2):
        out = tmp_path / f"threads{threads}"
        cli.run_configs(
            config.parse_config_all(text), str(out),
            fmt="csv", threads=threads, plots=False,
        )
        payloads[threads] = {
            name: (out / name).read_bytes()
            for name in ("xgate_sweep.csv", "bias_report.csv")
        }
    identical = payloads[1] == payloads[2]
    _report(
        "criterion 9",
        [(identical, "rerun with different thread counts is byte-identical")],
    )
