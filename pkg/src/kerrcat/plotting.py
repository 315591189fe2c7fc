"""Render a ScenarioResult to a PNG next to its data file.

Headless (Agg) rendering only.  The written files carry no software or
timestamp metadata, so reruns of the same scenario produce the same bytes.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .errors import InvalidParameterError
from .experiments import ScenarioResult

_DPI = 120
# strips the version chunk matplotlib otherwise embeds
_META = {"metadata": {"Software": None}}


def render(result: ScenarioResult, path) -> None:
    """Write a PNG visualising `result` to `path`."""
    fn = _RENDERERS.get(result.name)
    if fn is None:
        raise InvalidParameterError(f"no renderer for scenario {result.name!r}")
    fig = fn(result)
    try:
        # explicit format so callers may hand in a .tmp path and rename
        fig.savefig(path, dpi=_DPI, format="png", **_META)
    finally:
        plt.close(fig)


def _collapse_revival(res):
    c = res.columns
    fig, (ax0, ax1) = plt.subplots(
        2, 1, figsize=(7.0, 6.0), constrained_layout=True
    )
    ax0.plot(c["time"], c["p_revival_numeric"], label="numeric")
    ax0.plot(c["time"], c["p_revival_analytic"], "--", label="analytic")
    ax0.plot(c["time"], c["parity"], ":", lw=1, label="parity")
    ax0.set_xlabel("time")
    ax0.set_ylabel("initial-state population")
    ax0.legend(loc="upper right")
    dist = res.matrices["photon_distribution"]
    im = ax1.imshow(
        dist.T, origin="lower", aspect="auto",
        extent=(c["time"][0], c["time"][-1], 0, dist.shape[1]),
        cmap="magma",
    )
    ax1.set_xlabel("time")
    ax1.set_ylabel("cavity photon number")
    fig.colorbar(im, ax=ax1, label="population")
    return fig


def _error_robustness(res):
    c = res.columns
    fig, ax = plt.subplots(figsize=(6.0, 4.5), constrained_layout=True)
    ax.plot(c["delta_P"], c["deviation"], "o-")
    ax.set_xlabel("drive deviation")
    ax.set_ylabel("population deviation at final time")
    ax.set_yscale("symlog", linthresh=1e-6)
    return fig


def _tunneling(res):
    c = res.columns
    n_t = res.params_echo["n_points"]
    n_eps = res.n_rows // n_t
    targets = [k for k in c if k.startswith("p_target_")]
    fig, ax = plt.subplots(figsize=(7.0, 4.5), constrained_layout=True)
    for j in range(n_eps):
        sl = slice(j * n_t, (j + 1) * n_t)
        eps = c["epsilon"][sl][0]
        ax.plot(c["time"][sl], c["p_initial"][sl], label=f"initial, eps={eps:g}")
        for key in targets:
            ax.plot(c["time"][sl], c[key][sl], "--",
                    label=f"{key[2:]}, eps={eps:g}")
    ax.set_xlabel("time")
    ax.set_ylabel("population")
    ax.legend(fontsize=8)
    return fig


def _spectrum(res):
    c = res.columns
    levels = sorted(
        (k for k in c if k.startswith("level_")),
        key=lambda k: int(k.split("_")[1]),
    )
    fig, ax = plt.subplots(figsize=(6.0, 4.5), constrained_layout=True)
    for key in levels:
        ax.plot(c["epsilon"], c[key], lw=1)
    ax.set_xlabel("bias strength")
    ax.set_ylabel("energy")
    return fig


def _xgate(res):
    c = res.columns
    fig, ax = plt.subplots(figsize=(4.0, 4.0), constrained_layout=True)
    ax.bar(["infidelity", "leakage"], [1.0 - c["fidelity"][0], c["leakage"][0]])
    ax.set_yscale("log")
    ax.set_title(f"alpha={c['alpha'][0]:g}, beta={c['beta'][0]:g}")
    return fig


def _xgate_sweep(res):
    c = res.columns
    alphas = np.unique(c["alpha"])
    betas = np.unique(c["beta"])
    grid = c["fidelity"].reshape(len(alphas), len(betas))
    fig, ax = plt.subplots(figsize=(5.5, 4.5), constrained_layout=True)
    im = ax.pcolormesh(betas, alphas, grid, shading="nearest", cmap="viridis")
    ax.set_xlabel("resonator amplitude")
    ax.set_ylabel("cavity amplitude")
    fig.colorbar(im, ax=ax, label="gate fidelity")
    return fig


def _decoherence(res):
    c = res.columns
    fig, ax = plt.subplots(figsize=(6.0, 4.5), constrained_layout=True)
    ax.plot(c["time"], c["leakage"], label="leakage")
    ax.plot(c["time"], 1.0 - c["p_code_plus"], "--", label="1 - p_plus")
    ax.set_xlabel("time")
    ax.set_ylabel("probability")
    ax.set_yscale("log")
    ax.legend()
    return fig


def _bias_report(res):
    c = res.columns
    fig, ax = plt.subplots(figsize=(6.0, 4.5), constrained_layout=True)
    for beta in np.unique(c["beta"]):
        mask = c["beta"] == beta
        ax.semilogy(c["alpha"][mask], c["pair_flip_gap"][mask], "o",
                    label=f"beta={beta:g}")
    alphas = np.linspace(c["alpha"].min(), c["alpha"].max(), 101)
    scale = c["single_flip_gap"].max()
    ax.semilogy(alphas, scale * np.exp(-2.0 * alphas**2), "k:",
                label="exp(-2 alpha^2) trend")
    ax.set_xlabel("cavity amplitude")
    ax.set_ylabel("flip-channel gap")
    ax.legend(fontsize=8)
    return fig


_RENDERERS = {
    "collapse_revival": _collapse_revival,
    "error_robustness": _error_robustness,
    "tunneling": _tunneling,
    "spectrum": _spectrum,
    "xgate": _xgate,
    "xgate_sweep": _xgate_sweep,
    "decoherence": _decoherence,
    "bias_report": _bias_report,
}
