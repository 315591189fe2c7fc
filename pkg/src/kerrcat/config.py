"""Scenario configuration: strict TOML parsing with per-scenario defaults.

A config file holds one section per scenario, e.g.::

    [collapse_revival]
    beta = 2.0
    n_points = 201

Every key a section may contain has a default, so an empty section is a
complete run request.  Parsing is strict: unknown keys fail (with a
did-you-mean suggestion), values are type- and range-checked with the
offending key named, and complex values are written as two-element
``[re, im]`` arrays.  A resolved `ScenarioConfig` renders back to text via
`to_text`, and re-parsing that text reproduces an equal config, which is the
round-trip contract the run manifest relies on.

`delta` and `delta_tilde` are alternative spellings of the detuning (the
second is the induced splitting on the cat manifold, see
`models.delta_from_delta_tilde`); a section may set at most one, and the
resolved config always stores plain `delta`.
"""

import difflib
import math
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import models
from .errors import ConfigError
from .models import ModelParams
from .qops import HilbertDims

SQRT2 = math.sqrt(2.0)

SCENARIOS = (
    "collapse_revival",
    "error_robustness",
    "tunneling",
    "spectrum",
    "xgate",
    "xgate_sweep",
    "decoherence",
    "bias_report",
)

# One functional line per scenario, printed by the CLI listing.
SCENARIO_SUMMARY = {
    "collapse_revival": "qubit revival probability and photon statistics under the full model",
    "error_robustness": "final-state population deviation under static drive/frequency offsets",
    "tunneling": "resonant population transfer between displaced well states",
    "spectrum": "low-lying levels of the reduced model versus bias strength",
    "xgate": "code-space X-gate fidelity and leakage for one amplitude pair",
    "xgate_sweep": "gate fidelity over a grid of cavity and resonator amplitudes",
    "decoherence": "code-space leakage under loss and dephasing channels",
    "bias_report": "error-channel gaps and their pair-code suppression factor",
}


@dataclass(frozen=True)
class _Field:
    default: object
    kind: str = "float"  # float | complex | int | bool | choice | floatlist | intlist | pairlist
    minimum: float = None
    exclusive: bool = False
    choices: tuple = ()


def _num(key, val):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key} must be a number")
    out = float(val)
    if not math.isfinite(out):
        raise ConfigError(f"{key} must be finite")
    return out


def _bound_text(f: _Field) -> str:
    op = ">" if f.exclusive else "≥"
    lo = f.minimum
    return f"{op} {int(lo) if lo == int(lo) else lo}"


def _check_bound(key, value, f: _Field):
    if f.minimum is None:
        return
    if value < f.minimum or (f.exclusive and value == f.minimum):
        raise ConfigError(f"{key} must be {_bound_text(f)}")


def _coerce(key: str, val, f: _Field):
    if f.kind == "float":
        out = _num(key, val)
        _check_bound(key, out, f)
        return out
    if f.kind == "complex":
        if isinstance(val, complex):
            re, im = val.real, val.imag
        elif isinstance(val, (list, tuple)):
            if len(val) != 2:
                raise ConfigError(f"{key} must be a two-element [re, im] array")
            re = _num(f"{key}[0]", val[0])
            im = _num(f"{key}[1]", val[1])
        else:
            re, im = _num(key, val), 0.0
        return re if im == 0.0 else complex(re, im)
    if f.kind == "int":
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{key} must be an integer")
        _check_bound(key, val, f)
        return val
    if f.kind == "bool":
        if not isinstance(val, bool):
            raise ConfigError(f"{key} must be a boolean")
        return val
    if f.kind == "choice":
        if not isinstance(val, str) or val not in f.choices:
            raise ConfigError(f"{key} must be one of: " + ", ".join(f.choices))
        return val
    if f.kind == "floatlist":
        if not isinstance(val, (list, tuple)) or not val:
            raise ConfigError(f"{key} must be a nonempty array of numbers")
        out = [_num(f"{key}[{i}]", x) for i, x in enumerate(val)]
        for x in out:
            _check_bound(key, x, f)
        return out
    if f.kind == "intlist":
        if not isinstance(val, (list, tuple)) or not val:
            raise ConfigError(f"{key} must be a nonempty array of integers")
        out = []
        for i, x in enumerate(val):
            if isinstance(x, bool) or not isinstance(x, int):
                raise ConfigError(f"{key}[{i}] must be an integer")
            _check_bound(key, x, f)
            out.append(x)
        return out
    if f.kind == "pairlist":
        if not isinstance(val, (list, tuple)) or not val:
            raise ConfigError(f"{key} must be a nonempty array of [x, y] pairs")
        out = []
        for i, pair in enumerate(val):
            if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                raise ConfigError(f"{key}[{i}] must be a two-element array")
            out.append([_num(f"{key}[{i}][0]", pair[0]), _num(f"{key}[{i}][1]", pair[1])])
        return out
    raise AssertionError(f"unhandled field kind {f.kind}")


def _model_block(beta, K, lam):
    return {
        "beta": _Field(beta, minimum=0.0, exclusive=True),
        "K": _Field(K, minimum=0.0, exclusive=True),
        "Delta": _Field(1.0, minimum=0.0, exclusive=True),
        "lambda": _Field(lam, kind="complex"),
        "delta": _Field(None),
        "delta_tilde": _Field(None),
    }


def _dims_block(n_a, n_b):
    return {
        "n_a": _Field(n_a, kind="int", minimum=2),
        "n_b": _Field(n_b, kind="int", minimum=2),
    }


def _grid_block(t_end, n_points):
    return {
        "t_start": _Field(0.0),
        "t_end": _Field(t_end),
        "n_points": _Field(n_points, kind="int", minimum=2),
    }


def _kappa_block(**defaults):
    return {
        k: _Field(defaults.get(k, 0.0), minimum=0.0)
        for k in ("kappa_a", "kappa_b", "kappa_phi_a", "kappa_phi_b")
    }


# default detuning applied when a section sets neither delta nor delta_tilde;
# decoherence picks per code inside _resolve
_DELTA_DEFAULTS = {
    "collapse_revival": ("delta", 0.0),
    "error_robustness": ("delta", 0.1),
    "tunneling": ("delta_tilde", 0.1),
    "spectrum": ("delta_tilde", 0.1),
    "xgate": ("delta", 0.0),
}

_SCHEMAS = {
    "collapse_revival": {
        **_model_block(2.0, 10.0, 1.0),
        **_dims_block(46, 30),
        **_grid_block(4.0 * math.pi, 201),
    },
    "error_robustness": {
        **_model_block(2.0, 10.0, 1.0),
        **_dims_block(46, 30),
        "t_final": _Field(4.0 * math.pi, minimum=0.0, exclusive=True),
        "deviations": _Field(
            [[-0.1, -0.1], [0.0, 0.0], [0.1, 0.1]], kind="pairlist"
        ),
    },
    "tunneling": {
        **_model_block(SQRT2, 300.0, 0.5),
        "epsilon": _Field([1.0], kind="floatlist"),
        "targets": _Field([1, 2, 3], kind="intlist", minimum=1),
        **_dims_block(24, 20),
        **_grid_block(130.0, 261),
    },
    "spectrum": {
        **_model_block(SQRT2, 300.0, 0.5),
        "epsilon_min": _Field(0.0),
        "epsilon_max": _Field(3.2),
        "epsilon_points": _Field(161, kind="int", minimum=2),
        "n_levels": _Field(10, kind="int", minimum=2),
        "include_delta_tilde": _Field(False, kind="bool"),
        "isotropic": _Field(True, kind="bool"),
        "n_a": _Field(30, kind="int", minimum=2),
    },
    "xgate": {
        "alpha": _Field(2.0, minimum=0.0, exclusive=True),
        **_model_block(2.0, 10.0, 1.0),
        "Omega": _Field(0.0125, minimum=0.0, exclusive=True),
        "delta_omega": _Field(0.0),
        "delta_P": _Field(0.0, kind="complex"),
        **_dims_block(25, 25),
    },
    "xgate_sweep": {
        "alpha_min": _Field(1.0, minimum=0.0, exclusive=True),
        "alpha_max": _Field(2.0, minimum=0.0, exclusive=True),
        "alpha_points": _Field(3, kind="int", minimum=1),
        "beta_min": _Field(1.0, minimum=0.0, exclusive=True),
        "beta_max": _Field(2.0, minimum=0.0, exclusive=True),
        "beta_points": _Field(3, kind="int", minimum=1),
        "K": _Field(10.0, minimum=0.0, exclusive=True),
        "Delta": _Field(1.0, minimum=0.0, exclusive=True),
        "epsilon": _Field(0.1, minimum=0.0, exclusive=True),
        **_dims_block(25, 25),
    },
    "decoherence": {
        "code": _Field("pair-cat", kind="choice", choices=("pair-cat", "single-cat")),
        **_model_block(2.0, 10.0, 1.0),
        **_kappa_block(kappa_phi_a=0.005, kappa_phi_b=0.005),
        **_dims_block(25, 25),
        **_grid_block(0.125, 26),
    },
    "bias_report": {
        "alpha": _Field([1.0, SQRT2, 2.0, 2.5], kind="floatlist",
                        minimum=0.0, exclusive=True),
        "beta": _Field([1.0, SQRT2, 2.0, 2.5], kind="floatlist",
                       minimum=0.0, exclusive=True),
        **_dims_block(42, 42),
    },
}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return f"[{value.real!r}, {value.imag!r}]"
    if isinstance(value, str):
        return f'"{value}"'
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in value) + "]"
    raise AssertionError(f"unrenderable config value {value!r}")


@dataclass(frozen=True)
class ScenarioConfig:
    """One fully resolved scenario section (all defaults applied)."""

    scenario: str
    values: dict = field(default_factory=dict)

    def to_text(self) -> str:
        """Render back to the config format; reparses to an equal config."""
        schema = _SCHEMAS[self.scenario]
        lines = [f"[{self.scenario}]"]
        for key in schema:
            if key in self.values:
                lines.append(f"{key} = {_fmt(self.values[key])}")
        return "\n".join(lines) + "\n"

    def model_params(self) -> ModelParams:
        v = self.values
        if "K" not in v or not isinstance(v.get("beta"), float):
            raise ConfigError(
                f"scenario {self.scenario!r} has no single model parameter set"
            )
        passthrough = (
            "Delta", "delta", "Omega", "delta_omega", "delta_P",
            "kappa_a", "kappa_b", "kappa_phi_a", "kappa_phi_b",
        )
        kw = {name: v[name] for name in passthrough if name in v}
        if "lambda" in v:
            kw["lam"] = v["lambda"]
        return ModelParams.for_beta(v["beta"], K=v["K"], **kw)

    def dims(self) -> HilbertDims:
        return HilbertDims(self.values["n_a"], self.values["n_b"])

    def grid_args(self) -> tuple:
        v = self.values
        return (v["t_start"], v["t_end"], v["n_points"])


def _suggest(key: str, options) -> str:
    close = difflib.get_close_matches(key, list(options), n=1, cutoff=0.6)
    return f"; did you mean {close[0]!r}?" if close else ""


def _resolve(scenario: str, raw: dict) -> ScenarioConfig:
    schema = _SCHEMAS[scenario]
    for key in raw:
        if key not in schema:
            raise ConfigError(
                f"unknown key {key!r} in [{scenario}]" + _suggest(key, schema)
            )

    values = {}
    for key, f in schema.items():
        if key in raw:
            values[key] = _coerce(key, raw[key], f)
        elif f.default is not None:
            values[key] = f.default

    # collapse the two detuning spellings into a single resolved delta
    if "delta" in schema:
        has_d = "delta" in raw
        has_dt = "delta_tilde" in raw
        if has_d and has_dt:
            raise ConfigError(
                f"[{scenario}] sets both delta and delta_tilde; give only one"
            )
        if not (has_d or has_dt):
            if scenario == "decoherence":
                spelling, val = (
                    ("delta", 0.0)
                    if values["code"] == "pair-cat"
                    else ("delta_tilde", 0.01)
                )
            else:
                spelling, val = _DELTA_DEFAULTS[scenario]
        else:
            spelling = "delta" if has_d else "delta_tilde"
            val = values[spelling]
        if spelling == "delta_tilde":
            val = models.delta_from_delta_tilde(val, values["beta"])
        values["delta"] = val
        values.pop("delta_tilde", None)

    if "t_end" in values and values["t_end"] <= values["t_start"]:
        raise ConfigError("t_end must be > t_start")
    if "epsilon_max" in values and values["epsilon_max"] <= values["epsilon_min"]:
        raise ConfigError("epsilon_max must be > epsilon_min")
    for axis in ("alpha", "beta"):
        if f"{axis}_max" in values and values[f"{axis}_max"] < values[f"{axis}_min"]:
            raise ConfigError(f"{axis}_max must be ≥ {axis}_min")

    return ScenarioConfig(scenario, values)


def parse_config_all(text: str) -> list:
    """Parse a config file into one ScenarioConfig per section, in file order."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    configs = []
    for name, body in doc.items():
        if not isinstance(body, dict):
            raise ConfigError(
                f"top-level key {name!r} is not allowed; "
                "every key belongs inside a scenario section"
            )
        if name not in _SCHEMAS:
            raise ConfigError(
                f"unknown scenario [{name}]" + _suggest(name, _SCHEMAS)
            )
        configs.append(_resolve(name, body))
    if not configs:
        raise ConfigError(
            "config defines no scenario section; expected one of: "
            + ", ".join(SCENARIOS)
        )
    return configs


def parse_config(text: str) -> ScenarioConfig:
    """Parse a config containing exactly one scenario section."""
    configs = parse_config_all(text)
    if len(configs) != 1:
        raise ConfigError(
            f"expected exactly one scenario section, found {len(configs)}"
        )
    return configs[0]


def allowed_keys(scenario: str) -> tuple:
    return tuple(_SCHEMAS[scenario])


def suggest_key(key: str, options) -> str:
    """Did-you-mean fragment (possibly empty) for an unrecognized key."""
    return _suggest(key, options)


def default_config(scenario: str) -> ScenarioConfig:
    if scenario not in _SCHEMAS:
        raise ConfigError(
            f"unknown scenario {scenario!r}" + _suggest(scenario, _SCHEMAS)
        )
    return _resolve(scenario, {})


def apply_overrides(cfg: ScenarioConfig, overrides: dict) -> ScenarioConfig:
    """Rebuild a config with ``overrides`` replacing stored values.

    Setting either detuning spelling drops the previously resolved delta, so
    `--set delta_tilde=0.2` works on a config that already carries `delta`.
    """
    raw = dict(cfg.values)
    for key, val in overrides.items():
        if key in ("delta", "delta_tilde"):
            raw.pop("delta", None)
            raw.pop("delta_tilde", None)
        raw[key] = val
    return _resolve(cfg.scenario, raw)
