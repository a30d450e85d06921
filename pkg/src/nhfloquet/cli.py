"""Command-line front end.

Every subcommand resolves a fully explicit configuration (built-in defaults <
``--config`` file < flags) and echoes it into the output header as ``#% key=value``
lines, so an output file can be passed back through ``--config`` to reproduce it.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._version import __version__
from .floquet import Stability, classify_stability, floquet_decompose, population_trace
from .formats import (csv_text, fmt, model_text, parse_model_text, parse_potential_text,
                      potential_text)
from .integrators import IntegrationError
from .lattice import bands_at_k, default_truncation, map_to_potential
from .model import PRESETS, ModelError, TwoLevelModel, make_preset, preset_profile
from .propagator import IntegratorSettings, propagate_matrix
from .scan import (Tolerances, butterfly, compare_dispersion, default_workers, phase_diagram)

PROG = "nhfloquet"

EXIT_OK = 0
EXIT_SELFTEST = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_OUTPUT = 4
EXIT_NUMERIC = 5

SUBCOMMANDS = ("propagate", "floquet", "dynamics", "potential", "bands", "dispersion",
               "phase-diagram", "butterfly", "selftest")

# never echoed: they do not change the content of the output
_NOT_ECHOED = {"output", "workers", "config"}


class CLIError(Exception):
    def __init__(self, code: int, kind: str, message: str):
        super().__init__(message)
        self.code = code
        self.kind = kind


def _config_error(msg):
    return CLIError(EXIT_CONFIG, "config", msg)


class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # negative numbers and ranges ("-10:40:400", "-pi") are values, not flags
        self._negative_number_matcher = re.compile(r"^-(\d|\.\d|pi\b)")

    def error(self, message):
        raise CLIError(EXIT_USAGE, "usage", message)


# value parsing ---------------------------------------------------------------

_NUM = re.compile(r"^\s*([+-]?)\s*((?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(pi)?\s*$")


def parse_number(text) -> float:
    """Float, optionally a multiple of ``pi`` (``pi``, ``-2pi``, ``0.5*pi``)."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _NUM.match(str(text))
    if not m or (m.group(2) is None and m.group(3) is None):
        raise _config_error(f"not a number: {text!r}")
    val = float(m.group(2)) if m.group(2) is not None else 1.0
    if m.group(3):
        val *= np.pi
    return -val if m.group(1) == "-" else val


def parse_range(text) -> np.ndarray:
    """``a:b:n`` -> ``n`` uniformly spaced values including both ends; ``a`` -> ``[a]``."""
    parts = str(text).split(":")
    if len(parts) == 1:
        return np.array([parse_number(parts[0])])
    if len(parts) != 3:
        raise _config_error(f"range must look like a:b:n, got {text!r}")
    a, b = parse_number(parts[0]), parse_number(parts[1])
    try:
        n = int(parts[2])
    except ValueError:
        raise _config_error(f"range count must be an integer, got {parts[2]!r}") from None
    if n < 1:
        raise _config_error(f"range count must be >= 1, got {n}")
    return np.linspace(a, b, n)


def _int(key, v):
    try:
        return int(v)
    except (TypeError, ValueError):
        raise _config_error(f"{key} must be an integer, got {v!r}") from None


# configuration ---------------------------------------------------------------

_MODEL_KEYS = ("preset", "gamma", "imaginary_gamma", "mu", "alpha", "model_file")
_INTEGRATOR_KEYS = ("method", "rtol", "atol", "max_step", "samples", "midpoint_steps")
_TOL_KEYS = ("tol_phase", "tol_edge")
# Floquet-only commands integrate to T without intermediate samples
_ENDPOINT_KEYS = tuple(k for k in _INTEGRATOR_KEYS if k != "samples")

_BASE_DEFAULTS = {
    "method": "adaptive", "rtol": "1e-10", "atol": "1e-12", "max_step": "inf",
    "samples": "1000", "midpoint_steps": "1000000",
    "tol_phase": "1e-06", "tol_edge": "1e-08", "tol_energy": "1e-08",
    "format": "csv", "output": "-",
}

_COMMAND_KEYS = {
    "propagate": _MODEL_KEYS + _INTEGRATOR_KEYS + ("t_end",),
    "floquet": _MODEL_KEYS + _ENDPOINT_KEYS + _TOL_KEYS,
    "dynamics": _MODEL_KEYS + _INTEGRATOR_KEYS + ("initial", "periods"),
    "potential": ("preset", "mu", "alpha", "model_file", "sign"),
    "bands": ("preset", "mu", "alpha", "model_file", "potential_file", "sign", "k", "n_bands",
              "truncation", "tol_energy"),
    "dispersion": ("preset", "mu", "alpha", "gamma_sq", "k_points", "n_bands", "truncation")
    + _ENDPOINT_KEYS + _TOL_KEYS,
    "phase-diagram": ("preset", "gamma", "imaginary_gamma", "mu", "alpha") + _ENDPOINT_KEYS + _TOL_KEYS,
    "butterfly": ("preset", "mu", "q_max", "gamma_sq", "alpha_min", "alpha_max")
    + _ENDPOINT_KEYS + _TOL_KEYS,
    "selftest": (),
}

_COMMAND_DEFAULTS = {
    "propagate": {"imaginary_gamma": "0"},
    "floquet": {"imaginary_gamma": "0", "format": "json"},
    "dynamics": {"imaginary_gamma": "0", "initial": "1,0", "periods": "1"},
    "potential": {"sign": "plus", "format": "text"},
    "bands": {"sign": "plus", "k": "0:pi:101", "n_bands": "5", "truncation": "auto"},
    "dispersion": {"k_points": "101", "n_bands": "5", "truncation": "auto", "output": "dispersion"},
    "phase-diagram": {"imaginary_gamma": "0"},
    "butterfly": {"preset": "H3", "mu": "2", "q_max": "12", "gamma_sq": "0:40:200",
                  "alpha_min": "0", "alpha_max": "1"},
    "selftest": {},
}

# preset-dependent sweep defaults
_PHASE_DEFAULTS = {"H2": ("0:3:201", "0:6:201")}
_DISPERSION_DEFAULTS = {"H2": ("4", "-10:40:400")}


@dataclass
class RunConfig:
    subcommand: str
    params: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.params.get(key, default)

    def header(self) -> list:
        lines = [f"# {PROG} {__version__} {self.subcommand}", f"#% subcommand={self.subcommand}"]
        for k in sorted(self.params):
            if k not in _NOT_ECHOED:
                lines.append(f"#% {k}={self.params[k]}")
        return lines

    def echo(self) -> dict:
        return {k: v for k, v in sorted(self.params.items()) if k not in _NOT_ECHOED}


def read_config_file(path) -> dict:
    """``key=value`` lines, or the ``#% key=value`` header of an output file.

    Other ``#`` lines and blank lines are comments. When any ``#%`` line is
    present the file is treated as program output and only those lines are
    read. A JSON document written by this program is accepted as well (its
    ``config`` object is used).
    """
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _config_error(f"cannot read config {path}: {exc.strerror}") from None
    if text.lstrip().startswith("{"):
        return _json_config(path, text)
    out = {}
    lines = text.splitlines()
    echoed = any(ln.lstrip().startswith("#%") for ln in lines)
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if line.startswith("#%"):
            line = line[2:].strip()
        elif echoed or not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _config_error(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key:
            raise _config_error(f"{path}:{lineno}: empty key")
        out[key] = value.strip()
    return out


def _json_config(path, text) -> dict:
    """Configuration echoed in a JSON output document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise _config_error(f"{path}: malformed JSON: {exc.msg}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("config"), dict):
        raise _config_error(f"{path}: JSON config needs a 'config' object")
    out = {str(k): str(v) for k, v in doc["config"].items()}
    if "subcommand" in doc:
        out["subcommand"] = str(doc["subcommand"])
    return out


def _add_common(p, keys):
    g = p.add_argument_group("output")
    g.add_argument("--config", help="key=value config file (flags override it)")
    g.add_argument("--output", "-o", help="output path ('-' for stdout)")
    g.add_argument("--format", choices=("csv", "json", "text"))
    g.add_argument("--workers", help="worker processes (default $NHFLOQUET_WORKERS or 1)")
    m = p.add_argument_group("model")
    if "preset" in keys:
        m.add_argument("--preset", "--from-model", dest="preset", choices=PRESETS)
    if "gamma" in keys:
        m.add_argument("--gamma", help="static amplitude (phase-diagram: range a:b:n)")
    if "imaginary_gamma" in keys:
        m.add_argument("--imaginary-gamma", dest="imaginary_gamma", action="store_const", const="1",
                       help="use gamma -> i*gamma")
    if "gamma_sq" in keys:
        m.add_argument("--gamma-sq", dest="gamma_sq", help="range a:b:n of gamma^2 (negative: imaginary gamma)")
    if "mu" in keys:
        m.add_argument("--mu", help="drive amplitude (phase-diagram: range a:b:n)")
    if "alpha" in keys:
        m.add_argument("--alpha", help="frequency ratio p/q (H3, H4)")
    if "model_file" in keys:
        m.add_argument("--model-file", dest="model_file", help="model specification file")
    if "method" in keys:
        i = p.add_argument_group("integrator")
        i.add_argument("--method", choices=("adaptive", "midpoint-exponential"))
        i.add_argument("--rtol")
        i.add_argument("--atol")
        i.add_argument("--max-step", dest="max_step")
        if "samples" in keys:
            i.add_argument("--samples", help="dense samples per period")
        i.add_argument("--midpoint-steps", dest="midpoint_steps")
    if "tol_phase" in keys:
        t = p.add_argument_group("tolerances")
        t.add_argument("--tol-phase", dest="tol_phase")
        t.add_argument("--tol-edge", dest="tol_edge")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=PROG, description="Floquet stability of driven non-Hermitian two-level "
                     "systems and the mapped lattice band structure.",
                     argument_default=argparse.SUPPRESS)
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    helps = {
        "propagate": "U(t) over [0, t_end] on a dense grid",
        "floquet": "Floquet decomposition and stability class of U(T)",
        "dynamics": "populations (generalized Rabi oscillations)",
        "potential": "Fourier coefficients of the mapped potential",
        "bands": "plane-wave band structure of a mapped or stored potential",
        "dispersion": "Floquet points vs band curves of V+",
        "phase-diagram": "stability over a (gamma, mu) grid",
        "butterfly": "stability over rational alpha and gamma^2",
        "selftest": "run the invariant checks",
    }
    for name in SUBCOMMANDS:
        keys = _COMMAND_KEYS[name]
        p = sub.add_parser(name, help=helps[name], argument_default=argparse.SUPPRESS)
        _add_common(p, keys)
        if "t_end" in keys:
            p.add_argument("--t-end", dest="t_end")
        if "initial" in keys:
            p.add_argument("--initial", help="initial amplitudes, e.g. 1,0")
            p.add_argument("--periods")
        if "sign" in keys:
            p.add_argument("--sign", choices=("plus", "minus"))
        if "potential_file" in keys:
            p.add_argument("--potential-file", dest="potential_file")
        if "k" in keys:
            p.add_argument("--k", help="range a:b:n of quasi-momenta")
        if "k_points" in keys:
            p.add_argument("--k-points", dest="k_points")
        if "n_bands" in keys:
            p.add_argument("--n-bands", dest="n_bands")
            p.add_argument("--truncation", help="plane-wave half-width M, or 'auto'")
        if "tol_energy" in keys:
            p.add_argument("--tol-energy", dest="tol_energy")
        if "q_max" in keys:
            p.add_argument("--q-max", dest="q_max")
            p.add_argument("--alpha-min", dest="alpha_min")
            p.add_argument("--alpha-max", dest="alpha_max")
    return parser


def parse_config(argv) -> RunConfig:
    """Resolve defaults < config file < flags into an explicit :class:`RunConfig`."""
    ns = vars(build_parser().parse_args(argv))
    sub = ns.pop("subcommand", None)
    if sub is None:
        raise CLIError(EXIT_USAGE, "usage", f"a subcommand is required: {', '.join(SUBCOMMANDS)}")
    from_file = read_config_file(ns["config"]) if "config" in ns else {}
    file_sub = from_file.pop("subcommand", sub)
    if file_sub != sub:
        raise _config_error(f"config file is for '{file_sub}', not '{sub}'")
    allowed = set(_COMMAND_KEYS[sub]) | {"output", "format", "workers", "config"}
    unknown = sorted(set(from_file) - allowed)
    if unknown:
        raise _config_error(f"unknown config key(s) for {sub}: {', '.join(unknown)}")
    flags = {k: str(v) for k, v in ns.items()}
    merged = dict(from_file)
    merged.update(flags)
    if "model_file" in merged and ("preset" in merged or "potential_file" in merged):
        raise _config_error("conflicting model specification: give either a preset or a model file")
    if "potential_file" in merged and "preset" in merged:
        raise _config_error("conflicting model specification: give either a preset or a potential file")

    params = {k: v for k, v in _BASE_DEFAULTS.items() if k in allowed}
    params.update(_COMMAND_DEFAULTS[sub])
    preset = merged.get("preset")
    if sub == "phase-diagram":
        g, m = _PHASE_DEFAULTS.get(preset, ("0:4:201", "0:4:201"))
        params.update(gamma=g, mu=m)
    if sub == "dispersion":
        m, g = _DISPERSION_DEFAULTS.get(preset, ("2", "0:40:400"))
        params.update(mu=m, gamma_sq=g)
    params.update(merged)
    if sub in ("dynamics", "floquet", "propagate") and "model_file" not in params:
        params.setdefault("gamma", "1")
        params.setdefault("mu", "2")
    if sub in ("potential", "bands") and "model_file" not in params and "potential_file" not in params:
        params.setdefault("mu", "2")
    params.setdefault("workers", str(default_workers()))
    cfg = RunConfig(sub, params)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    p = cfg.params
    sub = cfg.subcommand
    if sub == "selftest":
        return
    needs_model = sub not in ("bands",) or "potential_file" not in p
    if needs_model and "preset" not in p and "model_file" not in p:
        raise _config_error(f"{sub} needs --preset or --model-file")
    preset = p.get("preset")
    if preset in ("H3", "H4") and sub != "butterfly" and "alpha" not in p:
        raise _config_error(f"missing required --alpha for preset {preset}")
    if preset not in (None, "H3", "H4") and "alpha" in p:
        raise _config_error(f"--alpha applies only to H3/H4, not {preset}")
    if sub == "butterfly" and preset not in ("H3", "H4"):
        raise _config_error("butterfly needs --preset H3 or H4")
    fmt_ = p.get("format")
    if sub == "potential":
        if fmt_ not in ("text", "json"):
            raise _config_error("potential output format must be text or json")
    elif fmt_ not in ("csv", "json"):
        raise _config_error(f"{sub} output format must be csv or json")
    if _int("workers", p["workers"]) < 1:
        raise _config_error("workers must be >= 1")


# model and settings resolution ----------------------------------------------------

def _gamma_value(p) -> complex:
    g = parse_number(p["gamma"])
    return complex(0, g) if p.get("imaginary_gamma", "0") == "1" else g


def _model(p) -> TwoLevelModel:
    try:
        if "model_file" in p:
            try:
                with open(p["model_file"], encoding="utf-8") as fh:
                    return parse_model_text(fh.read())
            except OSError as exc:
                raise _config_error(f"cannot read model file {p['model_file']}: {exc.strerror}") from None
        return make_preset(p["preset"], _gamma_value(p), parse_number(p["mu"]), p.get("alpha"))
    except ModelError as exc:
        raise _config_error(str(exc)) from None


def _profile_model(p) -> TwoLevelModel:
    """Model whose drive defines a potential (``a`` is irrelevant there)."""
    if "model_file" in p:
        return _model(p)
    try:
        return TwoLevelModel.from_gamma_sq(0.0, preset_profile(p["preset"], parse_number(p["mu"]), p.get("alpha")))
    except ModelError as exc:
        raise _config_error(str(exc)) from None


def _settings(p, dense=None) -> IntegratorSettings:
    try:
        return IntegratorSettings(
            method=p["method"], rel_tol=parse_number(p["rtol"]), abs_tol=parse_number(p["atol"]),
            max_step=float(p["max_step"]),
            dense_samples=_int("samples", p["samples"]) if dense is None else dense,
            midpoint_steps=_int("midpoint_steps", p["midpoint_steps"]))
    except ValueError as exc:
        raise _config_error(str(exc)) from None


def _tolerances(p) -> Tolerances:
    return Tolerances(parse_number(p["tol_phase"]), parse_number(p["tol_edge"]))


def _truncation(p, pot) -> int:
    t = p.get("truncation", "auto")
    return default_truncation(pot) if t == "auto" else _int("truncation", t)


def _cplx(z):
    z = complex(z)
    return [z.real, z.imag]


# emission --------------------------------------------------------------------

def _check_writable(path):
    if path == "-":
        return
    d = os.path.dirname(os.path.abspath(path)) or "."
    if os.path.isdir(path) or not os.path.isdir(d) or not os.access(d, os.W_OK):
        raise CLIError(EXIT_OUTPUT, "output", f"cannot write output {path}")
    if os.path.exists(path) and not os.access(path, os.W_OK):
        raise CLIError(EXIT_OUTPUT, "output", f"cannot write output {path}")


def _write(path, text):
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise CLIError(EXIT_OUTPUT, "output", f"cannot write output {path}: {exc.strerror}") from None


def _table(cfg, columns, rows):
    if cfg.params["format"] == "json":
        rows = [[v if not isinstance(v, (float, np.floating)) or np.isfinite(v) else None for v in r]
                for r in rows]
        doc = {"program": PROG, "version": __version__, "subcommand": cfg.subcommand,
               "config": cfg.echo(), "columns": list(columns), "rows": rows}
        return json.dumps(doc, indent=1, default=_json_default) + "\n"
    return csv_text(columns, rows, cfg.header())


def _json_default(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(type(o))


def _doc(cfg, payload):
    doc = {"program": PROG, "version": __version__, "subcommand": cfg.subcommand, "config": cfg.echo()}
    doc.update(payload)
    return json.dumps(doc, indent=1, default=_json_default) + "\n"


# subcommands -----------------------------------------------------------------

def cmd_propagate(cfg):
    p = cfg.params
    model = _model(p)
    t_end = parse_number(p["t_end"]) if "t_end" in p else model.period
    traj = propagate_matrix(model, t_end, _settings(p))
    cols = ["t", "re_u00", "im_u00", "re_u01", "im_u01", "re_u10", "im_u10", "re_u11", "im_u11",
            "re_det", "im_det"]
    rows = []
    for t, U in zip(traj.times, traj.matrices):
        d = U[0, 0] * U[1, 1] - U[0, 1] * U[1, 0]
        rows.append([float(t)] + [x for z in U.ravel() for x in _cplx(z)] + _cplx(d))
    return _table(cfg, cols, rows)


def cmd_floquet(cfg):
    p = cfg.params
    model = _model(p)
    tol = _tolerances(p)
    traj = propagate_matrix(model, settings=_settings(p, dense=2))
    UT = traj.final
    dec = floquet_decompose(UT, tol.tol_phase, tol.tol_edge)
    u0 = 0.5 * (UT[0, 0] + UT[1, 1])
    cls = classify_stability(u0, tol.tol_phase, tol.tol_edge)
    payload = {
        "class": cls.stability.value,
        "decomposition_class": dec.stability.value,
        "u0_T": _cplx(u0),
        "beta": cls.beta if np.isfinite(cls.beta) else None,
        "im_beta": cls.im_beta,
        "eigenvalues": [_cplx(z) for z in dec.eigenvalues],
        "eigenphases": [_cplx(z) for z in dec.eigenphases],
        "condition_S": dec.condition,
        "U_T": [[_cplx(z) for z in row] for row in UT],
        "period": model.period,
        "error_estimate": traj.error_estimate,
    }
    if p["format"] == "json":
        return _doc(cfg, payload)
    rows = [["class", payload["class"], ""], ["u0_T", *payload["u0_T"]],
            ["beta", payload["beta"] if payload["beta"] is not None else float("nan"), ""]]
    rows += [[f"eigenvalue_{i}", *v] for i, v in enumerate(payload["eigenvalues"])]
    return csv_text(["quantity", "re", "im"], rows, cfg.header())


def cmd_dynamics(cfg):
    p = cfg.params
    model = _model(p)
    try:
        initial = [complex(parse_number(x)) for x in p["initial"].split(",")]
    except CLIError:
        raise _config_error(f"initial must be two numbers, got {p['initial']!r}") from None
    tr = population_trace(model, initial, _int("periods", p["periods"]), _settings(p))
    pu, pd = tr.p_up, tr.p_down
    rows = [[float(t), float(a), float(b), float(a + b), float(a - b)]
            for t, a, b in zip(tr.times, pu, pd)]
    return _table(cfg, ["t", "p_up", "p_down", "p_sum", "p_diff"], rows)


def cmd_potential(cfg):
    p = cfg.params
    pot = map_to_potential(_profile_model(p), p["sign"])
    if p["format"] == "json":
        return _doc(cfg, {"lattice_constant": pot.lattice_constant, "sign": pot.sign,
                          "fourier": [[n, v.real, v.imag] for n, v in pot.fourier.items()]})
    return potential_text(pot, cfg.header())


def cmd_bands(cfg):
    p = cfg.params
    if "potential_file" in p:
        try:
            with open(p["potential_file"], encoding="utf-8") as fh:
                pot = parse_potential_text(fh.read())
        except OSError as exc:
            raise _config_error(f"cannot read potential file: {exc.strerror}") from None
        except ValueError as exc:
            raise _config_error(f"malformed potential file: {exc}") from None
    else:
        pot = map_to_potential(_profile_model(p), p["sign"])
    ks = parse_range(p["k"])
    nb = _int("n_bands", p["n_bands"])
    M = _truncation(p, pot)
    tol_e = parse_number(p["tol_energy"])
    rows = []
    for k in ks:
        try:
            sol = bands_at_k(pot, k, M, tol_e)
        except ValueError as exc:
            raise _config_error(str(exc)) from None
        for i in range(nb):
            E = sol.eigenvalues[i]
            rows.append([float(k), i, E.real, E.imag, bool(sol.real_flags[i])])
    return _table(cfg, ["k", "band_index", "re_E", "im_E", "real_flag"], rows)


def cmd_dispersion(cfg):
    p = cfg.params
    cmp_ = compare_dispersion(
        p["preset"], parse_number(p["mu"]), parse_range(p["gamma_sq"]), p.get("alpha"),
        n_k=_int("k_points", p["k_points"]), n_bands=_int("n_bands", p["n_bands"]),
        M=None if p["truncation"] == "auto" else _int("truncation", p["truncation"]),
        settings=_settings(p, dense=2), tol=_tolerances(p), workers=_int("workers", p["workers"]))
    fd = cmp_.floquet
    beta, gsq = fd.stable_points()
    fl_rows = [[float(b), float(g), float(d)] for b, g, d in zip(beta, gsq, cmp_.discrepancies)]
    band_rows = []
    for x, Es in zip(cmp_.band_k, cmp_.band_energies):
        for i, E in enumerate(Es):
            band_rows.append([float(x), i, E.real, E.imag])
    summary = {"mu": cmp_.mu, "stable_points": len(beta), "max_discrepancy": cmp_.max_discrepancy,
               "negative_gamma_sq_stable": int(np.sum(gsq < 0)), "truncation": cmp_.truncation,
               "period": fd.period}
    return {
        "_floquet.csv": _table(cfg, ["beta", "gamma_sq", "band_distance"], fl_rows),
        "_bands.csv": _table(cfg, ["kL", "band_index", "re_E", "im_E"], band_rows),
        "_summary.json": _doc(cfg, summary),
    }


def cmd_phase_diagram(cfg):
    p = cfg.params
    gammas = parse_range(p["gamma"])
    if p.get("imaginary_gamma", "0") == "1":
        gammas = 1j * gammas
    mus = parse_range(p["mu"])
    for name, arr in (("gamma", gammas), ("mu", mus)):
        if len(arr) < 2:
            raise _config_error(f"phase-diagram needs at least 2 points along {name}")
    pd = phase_diagram(p["preset"], gammas, mus, p.get("alpha"), _settings(p, dense=2),
                       _tolerances(p), _int("workers", p["workers"]))
    return _table(cfg, pd.columns, list(pd.rows()))


def cmd_butterfly(cfg):
    p = cfg.params
    data = butterfly(p["preset"], parse_number(p["mu"]), _int("q_max", p["q_max"]),
                     parse_range(p["gamma_sq"]),
                     (parse_number(p["alpha_min"]), parse_number(p["alpha_max"])),
                     _settings(p, dense=2), _tolerances(p), _int("workers", p["workers"]))
    return _table(cfg, data.columns, list(data.rows()))


def cmd_selftest(cfg):
    from .selftest import run_selftest
    results = run_selftest()
    lines = [f"{'PASS' if ok else 'FAIL'} {name}{'' if ok else ': ' + msg}" for name, ok, msg in results]
    n_fail = sum(1 for _, ok, _ in results if not ok)
    lines.append(f"selftest passed={len(results) - n_fail} failed={n_fail}")
    return "\n".join(lines) + "\n", n_fail


COMMANDS = {
    "propagate": cmd_propagate, "floquet": cmd_floquet, "dynamics": cmd_dynamics,
    "potential": cmd_potential, "bands": cmd_bands, "dispersion": cmd_dispersion,
    "phase-diagram": cmd_phase_diagram, "butterfly": cmd_butterfly,
}


def run(argv=None) -> int:
    """Entry point; returns the process exit code."""
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
        if cfg.subcommand == "selftest":
            text, n_fail = cmd_selftest(cfg)
            _write(cfg.params.get("output", "-"), text)
            return EXIT_SELFTEST if n_fail else EXIT_OK
        out = cfg.params["output"]
        if cfg.subcommand == "dispersion":
            for suffix in ("_floquet.csv", "_bands.csv", "_summary.json"):
                _check_writable(out + suffix)
            for suffix, text in cmd_dispersion(cfg).items():
                _write(out + suffix, text)
            return EXIT_OK
        _check_writable(out)
        _write(out, COMMANDS[cfg.subcommand](cfg))
        return EXIT_OK
    except CLIError as exc:
        _report(exc.code, exc.kind, str(exc))
        return exc.code
    except (IntegrationError, np.linalg.LinAlgError, FloatingPointError) as exc:
        _report(EXIT_NUMERIC, "numeric", str(exc))
        return EXIT_NUMERIC
    except ValueError as exc:
        # ModelError and other invalid-parameter errors raised below the CLI layer
        _report(EXIT_CONFIG, "config", str(exc))
        return EXIT_CONFIG


def _report(code, kind, message):
    msg = message.replace("\n", " ").replace('"', "'")
    sys.stderr.write(f'{PROG}: error code={code} kind={kind} message="{msg}"\n')


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
