"""Configuration-driven scenario runner.

`kerrcat run --config file.toml` executes every scenario section in the
config and writes, per scenario, one data file (CSV or JSON), a PNG render,
and companion CSVs for any matrix payloads, plus a single `run_manifest.json`
per invocation.  All files are written atomically (temp file then rename).

Data files are deterministic: numbers are printed with 17 significant
digits, sweep points are collected in index order regardless of the thread
count, and nothing time- or host-dependent goes into them.  Wall-clock
timings live only in the manifest.
"""

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__, config, experiments, plotting
from .config import ScenarioConfig
from .dynamics import TimeGrid
from .errors import ConfigError, KerrcatError
from .experiments import ScenarioResult
from .models import ModelParams


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrcat",
        description="Run cat-qubit simulation scenarios from a config file.",
    )
    parser.add_argument(
        "--list-scenarios",
        action="store_true",
        help="print every scenario with its default parameters and exit",
    )
    sub = parser.add_subparsers(dest="command")
    run = sub.add_parser("run", help="execute the scenarios in a config file")
    run.add_argument("--config", required=True, help="path to a TOML config")
    run.add_argument(
        "--set",
        action="append",
        default=[],
        dest="overrides",
        metavar="KEY=VALUE",
        help="override a config value; KEY may be scenario-qualified "
        "(e.g. xgate.alpha=1.5) or bare to hit every section that takes it",
    )
    run.add_argument("--output-dir", default=".", help="directory for artifacts")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument(
        "--threads",
        type=int,
        default=os.cpu_count() or 1,
        help="worker threads for sweep-style scenarios (default: cores)",
    )
    run.add_argument(
        "--no-plots", action="store_true", help="skip the PNG renders"
    )
    return parser


# ---------------------------------------------------------------------------
# output helpers


def _fmt17(x) -> str:
    return format(float(x), ".17g")


def _atomic_write(path: str, data) -> None:
    tmp = path + ".tmp"
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    return value


def _columns_csv(columns: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns.keys())
    for row in zip(*columns.values()):
        writer.writerow(_fmt17(x) for x in row)
    return buf.getvalue()


def _matrix_csv(matrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in matrix:
        writer.writerow(_fmt17(x) for x in row)
    return buf.getvalue()


def _result_json(res: ScenarioResult) -> str:
    payload = {
        "scenario": res.name,
        "params": _jsonable(res.params_echo),
        "columns": {k: [_fmt17c(x) for x in v] for k, v in res.columns.items()},
        "matrices": {
            k: [[_fmt17c(x) for x in row] for row in m]
            for k, m in res.matrices.items()
        },
        "diagnostics": _jsonable(res.diagnostics),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _fmt17c(x) -> float:
    # round-trip through the same 17-digit decimal the CSV prints, so the
    # two formats carry identical numbers
    return float(_fmt17(x))


def _key_metric(res: ScenarioResult):
    c = res.columns
    if res.name == "collapse_revival":
        half = res.n_rows // 2
        return "revival_peak", float(np.max(c["p_revival_numeric"][half:]))
    if res.name == "error_robustness":
        return "max_deviation", float(np.max(c["deviation"]))
    if res.name == "tunneling":
        peaks = [float(np.max(c[k])) for k in c if k.startswith("p_target_")]
        return "peak_transfer", max(peaks)
    if res.name == "spectrum":
        return "min_gap", float(np.min(c["gap_min"]))
    if res.name == "xgate":
        return "fidelity", float(c["fidelity"][0])
    if res.name == "xgate_sweep":
        return "min_fidelity", float(np.min(c["fidelity"]))
    if res.name == "decoherence":
        return "final_leakage", float(c["leakage"][-1])
    if res.name == "bias_report":
        return "min_suppression", float(np.min(c["suppression"]))
    raise AssertionError(f"unhandled scenario {res.name}")


# ---------------------------------------------------------------------------
# dispatch


def _dispatch(cfg: ScenarioConfig, threads: int) -> ScenarioResult:
    v = cfg.values
    s = cfg.scenario
    if s == "collapse_revival":
        return experiments.run_collapse_revival(
            cfg.model_params(), cfg.dims(), TimeGrid(*cfg.grid_args())
        )
    if s == "error_robustness":
        return experiments.run_error_robustness(
            cfg.model_params(),
            [tuple(pair) for pair in v["deviations"]],
            v["t_final"],
            dims=cfg.dims(),
            max_workers=threads,
        )
    if s == "tunneling":
        return experiments.run_tunneling(
            cfg.model_params(),
            v["epsilon"],
            cfg.dims(),
            TimeGrid(*cfg.grid_args()),
            targets=tuple(v["targets"]),
            max_workers=threads,
        )
    if s == "spectrum":
        eps = np.linspace(v["epsilon_min"], v["epsilon_max"], v["epsilon_points"])
        return experiments.run_spectrum(
            cfg.model_params(),
            eps,
            n_a=v["n_a"],
            n_levels=v["n_levels"],
            include_delta_tilde=v["include_delta_tilde"],
            isotropic=v["isotropic"],
        )
    if s == "xgate":
        return experiments.run_xgate(cfg.model_params(), v["alpha"], cfg.dims())
    if s == "xgate_sweep":
        alphas = np.linspace(v["alpha_min"], v["alpha_max"], v["alpha_points"])
        betas = np.linspace(v["beta_min"], v["beta_max"], v["beta_points"])
        # reference amplitude 2 fixes the gate rate epsilon = 4*beta*Omega
        template = ModelParams.for_beta(
            2.0, K=v["K"], Delta=v["Delta"], lam=1.0, Omega=v["epsilon"] / 8.0
        )
        return experiments.run_xgate_sweep(
            alphas, betas, template, dims=cfg.dims(), max_workers=threads
        )
    if s == "decoherence":
        return experiments.run_decoherence(
            cfg.model_params(), v["code"], TimeGrid(*cfg.grid_args()),
            dims=cfg.dims(),
        )
    if s == "bias_report":
        return experiments.run_bias_report(
            v["alpha"], v["beta"], cfg.dims(), max_workers=threads
        )
    raise AssertionError(f"unhandled scenario {s}")


# ---------------------------------------------------------------------------
# --set plumbing


def _parse_set(item: str):
    if "=" not in item:
        raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
    key, raw = item.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
    try:
        value = tomllib.loads(f"v = {raw}")["v"]
    except tomllib.TOMLDecodeError:
        value = raw  # bare strings, e.g. code=single-cat
    return key, value


def _apply_sets(configs, items):
    for item in items:
        key, value = _parse_set(item)
        if "." in key:
            scenario, inner = key.split(".", 1)
            hits = [i for i, c in enumerate(configs) if c.scenario == scenario]
            if not hits:
                raise ConfigError(
                    f"--set {item!r} targets [{scenario}], "
                    "but the config has no such section"
                )
            for i in hits:
                configs[i] = config.apply_overrides(configs[i], {inner: value})
        else:
            hits = [
                i for i, c in enumerate(configs)
                if key in config.allowed_keys(c.scenario)
            ]
            if not hits:
                options = set()
                for c in configs:
                    options.update(config.allowed_keys(c.scenario))
                raise ConfigError(
                    f"no scenario in this config accepts key {key!r}"
                    + config.suggest_key(key, options)
                )
            for i in hits:
                configs[i] = config.apply_overrides(configs[i], {key: value})
    return configs


# ---------------------------------------------------------------------------
# entry points


def _list_scenarios() -> None:
    for name in config.SCENARIOS:
        print(f"{name}: {config.SCENARIO_SUMMARY[name]}")
        values = config.default_config(name).values
        pairs = ", ".join(f"{k}={config._fmt(v)}" for k, v in values.items())
        print(f"    defaults: {pairs}")


def run_configs(configs, output_dir, fmt="csv", threads=1, plots=True) -> list:
    """Execute resolved configs, write artifacts, return summary dicts."""
    if threads < 1:
        raise ConfigError("threads must be ≥ 1")
    os.makedirs(output_dir, exist_ok=True)

    entries = []
    for cfg in configs:
        started = time.perf_counter()
        res = _dispatch(cfg, threads)
        elapsed = time.perf_counter() - started

        outputs = []
        base = os.path.join(output_dir, cfg.scenario)
        if fmt == "csv":
            data_path = base + ".csv"
            _atomic_write(data_path, _columns_csv(res.columns))
            outputs.append(data_path)
            for key, matrix in res.matrices.items():
                mpath = f"{base}_{key}.csv"
                _atomic_write(mpath, _matrix_csv(matrix))
                outputs.append(mpath)
        else:
            data_path = base + ".json"
            _atomic_write(data_path, _result_json(res))
            outputs.append(data_path)
        if plots:
            png = base + ".png"
            plotting.render(res, png + ".tmp")
            os.replace(png + ".tmp", png)
            outputs.append(png)

        label, value = _key_metric(res)
        entries.append(
            {
                "scenario": cfg.scenario,
                "config": cfg.to_text(),
                "outputs": [os.path.basename(p) for p in outputs],
                "key_metric": {label: value},
                "diagnostics": _jsonable(res.diagnostics),
                "wall_time_s": elapsed,
            }
        )
        print(
            f"{cfg.scenario}: {label}={value:.6g} "
            f"wall={elapsed:.2f}s -> {data_path}"
        )

    manifest = {
        "version": __version__,
        "format": fmt,
        "threads": threads,
        "scenarios": entries,
    }
    _atomic_write(
        os.path.join(output_dir, "run_manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )
    return entries


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.list_scenarios:
        _list_scenarios()
        return 0
    if args.command != "run":
        parser.print_help()
        return 2

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2

    try:
        configs = config.parse_config_all(text)
        configs = _apply_sets(configs, args.overrides)
        run_configs(
            configs,
            args.output_dir,
            fmt=args.format,
            threads=args.threads,
            plots=not args.no_plots,
        )
    except KerrcatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
