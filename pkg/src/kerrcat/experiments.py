"""Runnable scenarios: each maps one physics question to tabular series.

Every run_* function is pure given its arguments and returns a
ScenarioResult whose `columns` are equal-length 1-D series ready for
delimited output.  Larger-than-tabular payloads (the cavity photon
distribution over time) travel in `matrices`.  `params_echo` records every
resolved input so a run can be reproduced bit-exactly from its own echo.

Sweep-style runs (`run_error_robustness`, `run_tunneling`,
`run_xgate_sweep`) accept `max_workers`; points are independent and are
collected in grid order regardless of scheduling, so the output is
identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import catspace, qops
from .dynamics import TimeGrid, evolution_operator, evolve_lindblad, evolve_schrodinger
from .errors import InvalidParameterError
from .models import (
    ModelParams,
    SIGMA_Z,
    build_error_hamiltonian,
    build_effective_qrm,
    build_full_hamiltonian,
    build_linear_drive,
    collapse_operators,
    delta_tilde_from_delta,
    effective_qrm_params,
)
from .qops import HilbertDims, QOperator, QState


@dataclass
class ScenarioResult:
    """Named, equal-length output series plus a reproducibility echo."""

    name: str
    columns: dict
    params_echo: dict
    matrices: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        lengths = {key: len(series) for key, series in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise InvalidParameterError(f"ragged result columns: {lengths}")
        n = self.n_rows
        for key, mat in self.matrices.items():
            if mat.shape[0] != n:
                raise InvalidParameterError(
                    f"matrix {key!r} has {mat.shape[0]} rows, columns have {n}"
                )

    @property
    def n_rows(self) -> int:
        return 0 if not self.columns else len(next(iter(self.columns.values())))


def _scalar(value):
    """Echo helper: complex -> [re, im] unless purely real."""
    c = complex(value)
    if c.imag == 0.0:
        return float(c.real)
    return [c.real, c.imag]


def _echo_params(params: ModelParams) -> dict:
    return {
        "Delta": params.Delta,
        "delta": params.delta,
        "K": params.K,
        "P": _scalar(params.P),
        "lambda": _scalar(params.lam),
        "Omega": params.Omega,
        "delta_omega": params.delta_omega,
        "delta_P": _scalar(params.delta_P),
        "kappa_a": params.kappa_a,
        "kappa_b": params.kappa_b,
        "kappa_phi_a": params.kappa_phi_a,
        "kappa_phi_b": params.kappa_phi_b,
    }


def _echo(params, dims=None, grid=None, **extra) -> dict:
    out = _echo_params(params)
    if dims is not None:
        out["n_a"], out["n_b"] = dims.n_a, dims.n_b
    if grid is not None:
        out["t_start"] = grid.t_start
        out["t_end"] = grid.t_end
        out["n_points"] = grid.n_points
    out.update(extra)
    return out


def _map_indexed(worker, items, max_workers):
    """Run worker over items, returning results in item order."""
    if max_workers is None or max_workers <= 1 or len(items) <= 1:
        return [worker(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(worker, items))


# ---------------------------------------------------------------------------
# photon round trips on the cat manifold


def revival_probability_analytic(g: float, Delta: float, t):
    """Closed-form return probability exp(-2 (g/Delta)^2 (1 - cos(Delta t))).

    The coupled cavity is dragged around a circle of coherent amplitudes
    gamma(t) = (g/Delta)(exp(-i Delta t) - 1); the overlap with the initial
    vacuum collapses and fully revives with period 2 pi / Delta.
    """
    if Delta == 0:
        raise InvalidParameterError("revival probability needs Delta != 0")
    ratio = (g / Delta) ** 2
    out = np.exp(-2.0 * ratio * (1.0 - np.cos(Delta * np.asarray(t, dtype=float))))
    return float(out) if np.isscalar(t) else out


def run_collapse_revival(
    params: ModelParams, dims: HilbertDims, grid: TimeGrid
) -> ScenarioResult:
    """Round trip of a photon wave packet between the cavity and the qubit.

    Starts from vacuum times the even pointer superposition, evolves under
    the full two-mode Hamiltonian, and reports the numeric return
    probability against the closed-form curve, the cavity photon
    distribution per sample, and the conserved parity expectation.
    """
    if params.delta != 0.0:
        raise InvalidParameterError("collapse/revival run requires delta = 0")
    eff = effective_qrm_params(params)
    beta = abs(params.beta)
    cat = catspace.cat_basis(beta, dims.n_b)
    psi0 = qops.tensor(qops.basis(dims.n_a, 0), cat.c_plus)

    h = build_full_hamiltonian(params, dims)
    traj = evolve_schrodinger(h, psi0, grid, method="spectral")

    p_numeric = traj.overlaps_with(psi0)
    p_analytic = revival_probability_analytic(eff.g, params.Delta, grid.times)
    parity = traj.expect(parity_operator(dims, cat)).real

    # marginal photon distribution of the cavity, one row per sample
    dist = np.empty((grid.n_points, dims.n_a))
    for k, state in enumerate(traj.states):
        dist[k] = np.sum(np.abs(state.data.reshape(dims.as_tuple())) ** 2, axis=1)

    return ScenarioResult(
        name="collapse_revival",
        columns={
            "time": grid.times,
            "p_revival_numeric": p_numeric,
            "p_revival_analytic": p_analytic,
            "parity": parity,
        },
        params_echo=_echo(params, dims, grid),
        matrices={"photon_distribution": dist},
        diagnostics=dict(traj.meta),
    )


def run_error_robustness(
    params: ModelParams,
    deviation_grid,
    t_final: float,
    dims: HilbertDims = HilbertDims(46, 30),
    max_workers: int = 1,
) -> ScenarioResult:
    """Return-probability shift caused by static drive/frequency deviations.

    For each (delta_P, delta_omega) pair the full model plus the deviation
    term is evolved to `t_final` and compared against the unperturbed run.
    """
    if t_final <= 0:
        raise InvalidParameterError("t_final must be > 0")
    points = [(complex(dp), float(dw)) for dp, dw in deviation_grid]
    beta = abs(params.beta)
    cat = catspace.cat_basis(beta, dims.n_b)
    psi0 = qops.tensor(qops.basis(dims.n_a, 0), cat.c_plus)

    h0 = build_full_hamiltonian(params, dims)
    u0 = evolution_operator(h0, t_final)
    p_base = abs(psi0.overlap(u0.apply(psi0))) ** 2

    def one(point):
        dp, dw = point
        if dp == 0 and dw == 0:
            return p_base
        perturbed = params.with_(delta_P=dp, delta_omega=dw)
        h = h0 + build_error_hamiltonian(perturbed, dims)
        u = evolution_operator(h, t_final)
        return abs(psi0.overlap(u.apply(psi0))) ** 2

    p_err = np.array(_map_indexed(one, points, max_workers))
    return ScenarioResult(
        name="error_robustness",
        columns={
            "delta_P": np.array([dp.real for dp, _ in points]),
            "delta_omega": np.array([dw for _, dw in points]),
            "p_with_err": p_err,
            "p_without_err": np.full(len(points), p_base),
            "deviation": np.abs(p_err - p_base),
        },
        params_echo=_echo(
            params,
            dims,
            t_final=t_final,
            deviations=[[dp.real, dw] for dp, dw in points],
        ),
    )


# ---------------------------------------------------------------------------
# bias-driven level crossings


def run_tunneling(
    params: ModelParams,
    epsilon_grid,
    dims: HilbertDims,
    grid: TimeGrid,
    targets=(1, 2, 3),
    max_workers: int = 1,
) -> ScenarioResult:
    """Time-domain population transfer between displaced-well states.

    For each bias value epsilon the single-photon drive amplitude is set to
    Omega = epsilon / (4 beta) and the full model is evolved from the
    positive-branch well ground state.  Populations of that state and of
    the opposite-branch states |n, -x> are tabulated; a resonant bias
    (epsilon equal to an integer multiple of Delta) produces a slow Rabi
    flop whose rate is set by `tunneling_matrix_element`.
    """
    eps_values = [float(e) for e in epsilon_grid]
    if not eps_values:
        raise InvalidParameterError("epsilon_grid must be nonempty")
    beta = abs(params.beta)
    alpha_disp = abs(params.lam) * beta / params.Delta
    cat = catspace.cat_basis(beta, dims.n_b)
    psi0 = catspace.displaced_eigenstate(0, +1, alpha_disp, cat, dims.n_a)
    refs = [catspace.displaced_eigenstate(n, -1, alpha_disp, cat, dims.n_a)
            for n in targets]

    # two flavours of the two-level transfer rate: the closed-form overlap
    # of displaced number states, and the full matrix element (which keeps
    # the pointer-asymmetry contribution of the coupling; at amplitudes
    # below ~2 the two differ noticeably)
    delta_tilde = delta_tilde_from_delta(params.delta, beta)
    h_static = build_full_hamiltonian(
        params.with_(Omega=eps_values[0] / (4.0 * beta)), dims
    ) + build_linear_drive(eps_values[0] / (4.0 * beta), dims)
    elements_fc = [
        abs(catspace.tunneling_matrix_element(0, n, alpha_disp, delta_tilde))
        for n in targets
    ]
    elements_direct = [
        abs(ref.overlap(h_static.apply(psi0))) for ref in refs
    ]

    def one(eps):
        drive = params.with_(Omega=eps / (4.0 * beta))
        h = build_full_hamiltonian(drive, dims) + build_linear_drive(
            drive.Omega, dims
        )
        traj = evolve_schrodinger(h, psi0, grid, method="spectral")
        series = [traj.overlaps_with(psi0)]
        series += [traj.overlaps_with(ref) for ref in refs]
        return series

    blocks = _map_indexed(one, eps_values, max_workers)
    n_t = grid.n_points
    columns = {
        "epsilon": np.repeat(eps_values, n_t),
        "time": np.tile(grid.times, len(eps_values)),
        "p_initial": np.concatenate([b[0] for b in blocks]),
    }
    for j, n in enumerate(targets):
        columns[f"p_target_{n}"] = np.concatenate([b[1 + j] for b in blocks])
    return ScenarioResult(
        name="tunneling",
        columns=columns,
        params_echo=_echo(
            params, dims, grid, epsilon=eps_values, targets=list(targets),
            alpha_displacement=alpha_disp,
        ),
        diagnostics={
            "tunneling_elements_fc": elements_fc,
            "tunneling_elements_direct": elements_direct,
        },
    )


def run_spectrum(
    params: ModelParams,
    epsilon_grid,
    n_a: int,
    n_levels: int = 10,
    include_delta_tilde: bool = False,
    isotropic: bool = True,
) -> ScenarioResult:
    """Low-lying spectrum of the biased qubit-cavity model versus bias.

    With the qubit splitting removed, the ideal (isotropic) model is two
    displaced oscillator ladders that cross exactly at integer bias in
    units of Delta; `gap_min` tracks the smallest spacing among the
    reported levels, so crossings show up as gap_min -> 0.  Including the
    splitting turns them into avoided crossings of width set by the
    tunneling matrix element.  `isotropic=False` keeps the pointer
    asymmetry factor in the coupling, which lifts the exact crossings by
    an amount of order g(1/A - A).
    """
    eps_values = [float(e) for e in epsilon_grid]
    if not eps_values:
        raise InvalidParameterError("epsilon_grid must be nonempty")
    if n_levels < 2:
        raise InvalidParameterError("need at least two levels for a gap")
    eff = effective_qrm_params(params)
    if not include_delta_tilde:
        eff = replace(eff, delta_tilde=0.0)
    if isotropic:
        eff = replace(eff, A=1.0)

    levels = np.empty((len(eps_values), n_levels))
    for k, eps in enumerate(eps_values):
        h = build_effective_qrm(replace(eff, epsilon=eps), n_a)
        vals = np.linalg.eigvalsh(h.mat)
        levels[k] = vals[:n_levels]
    gap_min = np.min(np.diff(levels, axis=1), axis=1)

    columns = {"epsilon": np.array(eps_values), "gap_min": gap_min}
    for j in range(n_levels):
        columns[f"level_{j}"] = levels[:, j]
    return ScenarioResult(
        name="spectrum",
        columns=columns,
        params_echo=_echo(
            params, n_a=n_a, n_levels=n_levels,
            epsilon=eps_values, include_delta_tilde=include_delta_tilde,
            isotropic=isotropic,
        ),
    )


# ---------------------------------------------------------------------------
# bit-flip gate on the two-mode code


@dataclass(frozen=True)
class GateFidelityInput:
    """Inputs for the average-fidelity formula on a d-dimensional code."""

    U_actual: QOperator
    U_target: QOperator
    projector: QOperator
    d: int = 2

    def __post_init__(self):
        p = self.projector
        if self.U_actual.dims != p.dims or self.U_target.dims != p.dims:
            raise InvalidParameterError("operators and projector dims differ")
        rank = np.trace(p.mat).real
        if abs(rank - self.d) > 1e-6:
            raise InvalidParameterError(
                f"projector rank {rank:.6f} does not match code dimension {self.d}"
            )
        if np.max(np.abs((p @ p).mat - p.mat)) > 1e-8:
            raise InvalidParameterError("projector is not idempotent")


def average_gate_fidelity(inp: GateFidelityInput) -> float:
    """State-averaged overlap of the actual and target gate on the code.

    F = [Tr(M M^+) + |Tr M|^2] / (d^2 + d) with
    M = P U_target^+ U_actual P.  Global phases drop out; leakage from the
    code space lowers Tr(M M^+).
    """
    p = inp.projector.mat
    m = p @ inp.U_target.mat.conj().T @ inp.U_actual.mat @ p
    d = inp.d
    return float(
        (np.trace(m @ m.conj().T).real + abs(np.trace(m)) ** 2) / (d * d + d)
    )


def run_xgate(params: ModelParams, alpha: float, dims: HilbertDims) -> ScenarioResult:
    """Bit-flip gate on the two-mode code, driven for half a bias period.

    The single-photon drive (rate epsilon = 4 beta Omega) rotates the code
    pair into each other; at t_gate = pi / epsilon the ideal evolution is
    the swap |mu_+> <-> |mu_->.  Static deviation terms present in `params`
    are included in the propagator, so the same entry point measures both
    the clean gate and its robustness.
    """
    if params.delta != 0.0:
        raise InvalidParameterError("the code requires delta = 0")
    eff = effective_qrm_params(params)
    if eff.epsilon <= 0.0:
        raise InvalidParameterError("Omega must be > 0: it sets the gate speed")
    beta = abs(params.beta)
    t_gate = math.pi / eff.epsilon

    h = build_full_hamiltonian(params, dims) + build_linear_drive(params.Omega, dims)
    if params.delta_omega != 0.0 or params.delta_P != 0:
        h = h + build_error_hamiltonian(params, dims)
    u = evolution_operator(h, t_gate)

    code = catspace.pair_cat_basis(alpha, beta, dims)
    mu_p, mu_m = code.mu_plus.data, code.mu_minus.data
    swap = QOperator(
        np.outer(mu_p, mu_m.conj()) + np.outer(mu_m, mu_p.conj()), dims.as_tuple()
    )
    proj = code.projector
    fid = average_gate_fidelity(GateFidelityInput(u, swap, proj, 2))

    # mean population left outside the code space after the gate
    leak = 0.0
    for vec in (mu_p, mu_m):
        out = u.mat @ vec
        leak += 1.0 - np.vdot(out, proj.mat @ out).real
    leak /= 2.0

    return ScenarioResult(
        name="xgate",
        columns={
            "alpha": np.array([alpha]),
            "beta": np.array([beta]),
            "epsilon": np.array([eff.epsilon]),
            "t_gate": np.array([t_gate]),
            "fidelity": np.array([fid]),
            "leakage": np.array([leak]),
        },
        params_echo=_echo(params, dims, alpha=float(alpha)),
        diagnostics={"lowdin_applied": code.lowdin_applied},
    )


def run_xgate_sweep(
    alpha_grid,
    beta_grid,
    params_template: ModelParams,
    dims: HilbertDims = HilbertDims(25, 25),
    max_workers: int = 1,
) -> ScenarioResult:
    """Gate fidelity over a grid of code amplitudes.

    At every grid point the coupling is rescaled to lambda = alpha * Delta
    / beta (keeping the cavity displacement equal to alpha) and the drive
    to Omega = epsilon / (4 beta) (keeping the gate speed fixed), where
    epsilon comes from the template parameters.  Points run independently;
    results are collected in row-major grid order.
    """
    alphas = [float(a) for a in alpha_grid]
    betas = [float(b) for b in beta_grid]
    if not alphas or not betas:
        raise InvalidParameterError("sweep grids must be nonempty")
    eff_t = effective_qrm_params(params_template)
    if eff_t.epsilon <= 0.0:
        raise InvalidParameterError("template must set Omega > 0")
    eps = eff_t.epsilon

    points = [(a, b) for a in alphas for b in betas]

    def one(point):
        a, b = point
        p = params_template.with_(
            P=params_template.K * b * b,
            lam=a * params_template.Delta / b,
            Omega=eps / (4.0 * b),
        )
        return run_xgate(p, a, dims).columns["fidelity"][0]

    fids = np.array(_map_indexed(one, points, max_workers))

    diagnostics = {}
    if alphas == betas:
        diag = [fids[i * len(betas) + i] for i in range(len(alphas))]
        steps = np.diff(diag)
        diagnostics["diagonal_fidelities"] = [float(f) for f in diag]
        diagnostics["diagonal_min_step"] = float(steps.min()) if len(steps) else 0.0
        diagnostics["diagonal_monotone"] = bool(np.all(steps >= -1e-3))

    return ScenarioResult(
        name="xgate_sweep",
        columns={
            "alpha": np.array([a for a, _ in points]),
            "beta": np.array([b for _, b in points]),
            "fidelity": fids,
        },
        params_echo=_echo(
            params_template, dims,
            alpha=alphas, beta_sweep=betas, epsilon=eps,
        ),
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# open-system leakage


def run_decoherence(
    params: ModelParams,
    code: str,
    grid: TimeGrid,
    dims: HilbertDims = HilbertDims(25, 25),
) -> ScenarioResult:
    """Leakage out of the code space under loss and dephasing channels.

    code = "single-cat": start from vacuum times the even pointer state and
    track the population that leaves the pointer pair of the nonlinear
    mode (reduced state, cavity traced out).
    code = "pair-cat": start from |mu_+> of the two-mode code and track the
    population outside span{|mu_+>, |mu_->}.
    """
    if code not in ("single-cat", "pair-cat"):
        raise InvalidParameterError(f"unknown code {code!r}")
    beta = abs(params.beta)
    h = build_full_hamiltonian(params, dims)
    channels = collapse_operators(params, dims)

    if code == "pair-cat":
        if params.delta != 0.0:
            raise InvalidParameterError("the pair code requires delta = 0")
        alpha = abs(params.lam) * beta / params.Delta
        basis = catspace.pair_cat_basis(alpha, beta, dims)
        rho0 = basis.mu_plus.to_density()
        traj = evolve_lindblad(h, channels, rho0, grid)
        p_plus = traj.overlaps_with(basis.mu_plus)
        p_minus = traj.overlaps_with(basis.mu_minus)
        echo_extra = {"code": code, "alpha": alpha}
    else:
        cat = catspace.cat_basis(beta, dims.n_b)
        rho0 = qops.tensor(qops.basis(dims.n_a, 0), cat.c_plus).to_density()
        traj = evolve_lindblad(h, channels, rho0, grid)
        cp, cm = cat.c_plus.data, cat.c_minus.data
        p_plus = np.empty(grid.n_points)
        p_minus = np.empty(grid.n_points)
        for k, state in enumerate(traj.states):
            reduced = qops.partial_trace(state, keep=1).data
            p_plus[k] = np.vdot(cp, reduced @ cp).real
            p_minus[k] = np.vdot(cm, reduced @ cm).real
        echo_extra = {"code": code}

    return ScenarioResult(
        name="decoherence",
        columns={
            "time": grid.times,
            "leakage": 1.0 - p_plus - p_minus,
            "p_code_plus": p_plus,
            "p_code_minus": p_minus,
        },
        params_echo=_echo(params, dims, grid, **echo_extra),
        diagnostics=dict(traj.meta),
    )


def run_bias_report(
    alpha_grid, beta_grid, dims: HilbertDims, max_workers: int = 1
) -> ScenarioResult:
    """Tabulated noise-bias matrix elements over code amplitudes.

    Each row reports the single-mode pointer gaps and the corresponding
    two-mode code gaps; their ratio is the exponential suppression factor
    exp(-2 alpha^2).
    """
    alphas = [float(a) for a in alpha_grid]
    betas = [float(b) for b in beta_grid]
    if not alphas or not betas:
        raise InvalidParameterError("amplitude grids must be nonempty")
    points = [(a, b) for a in alphas for b in betas]

    def one(point):
        a, b = point
        rep = catspace.bias_report(a, b, dims)
        return (
            rep.single_flip_gap,
            rep.single_dephasing_gap,
            rep.pair_flip_gap,
            rep.pair_dephasing_gap,
            rep.suppression,
        )

    rows = _map_indexed(one, points, max_workers)
    names = [
        "single_flip_gap",
        "single_dephasing_gap",
        "pair_flip_gap",
        "pair_dephasing_gap",
        "suppression",
    ]
    columns = {
        "alpha": np.array([a for a, _ in points]),
        "beta": np.array([b for _, b in points]),
    }
    for j, name in enumerate(names):
        columns[name] = np.array([row[j] for row in rows])
    return ScenarioResult(
        name="bias_report",
        columns=columns,
        params_echo={
            "alpha": alphas, "beta_sweep": betas,
            "n_a": dims.n_a, "n_b": dims.n_b,
        },
    )


# ---------------------------------------------------------------------------


def parity_operator(dims: HilbertDims, basis=None) -> QOperator:
    """Conserved checkerboard operator -(-1)^(a^+a) (x) sigma_z.

    With a cat basis the qubit factor is lifted into the nonlinear mode, so
    the result acts on the full two-mode space and squares to the identity
    on the pointer manifold.  Without a basis the second factor must
    already be a two-level system.
    """
    phases = ((-1.0) ** np.arange(dims.n_a)).astype(np.complex128)
    checker = QOperator(np.diag(phases), dims.n_a)
    if basis is None:
        if dims.n_b != 2:
            raise InvalidParameterError(
                "without a cat basis the second factor must have dimension 2"
            )
        qubit = QOperator(SIGMA_Z, 2)
    else:
        qubit = basis.lift(SIGMA_Z)
    return -1.0 * qops.tensor(checker, qubit)
