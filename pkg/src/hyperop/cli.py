"""Command-line front end.

Subcommands: ``derive``, ``taylor``, ``response``, ``zubarev``,
``dissipative``, ``verify-all``, ``schema``.  Scenarios are JSON files
validated against the schemas printed by ``schema``; unknown keys are
rejected.  Outputs are written atomically (temp file + rename) into the
``--out`` directory, embed the full configuration echo plus the library
version, and are byte-identical for identical configuration and seed.
Exit codes: 0 success, 1 task failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile

import numpy as np
import jsonschema
import scipy.linalg

from . import __version__
from .errors import ConfigError, DimensionCap, HyperopError
from .hyperops import quantum_derivative, alpha_estimate, convergence_verdict, series_derivative
from .models import MODEL_KINDS, ModelSpec, build_model
from .nonequilibrium import (
    ForceProtocol,
    eta_prime_ode,
    eta_terms,
    log_partition,
    zubarev_density,
    EntropyExpansion,
)
from .operators import (
    BUILTIN_FUNCTIONS,
    Operator,
    apply_scalar_function,
    operator_norm,
    spectral_decompose,
)
from .response import ResponseSetup, conductivity_grid, current_from
from .dissipative import DissipativeModel, entropy_operator, master_evolve
from .taylor import taylor_sum
from . import verify as verify_mod

log = logging.getLogger("hyperop")

#: Dense d^2 x d^2 superoperators are materialized only up to this dimension.
HYPEROP_MATERIALIZE_CAP = 32

_NUM = {"type": "number"}
_INT = {"type": "integer"}

_OPERATOR_SCHEMA = {
    "type": "object",
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "re": {"type": "array", "items": {"type": "array", "items": _NUM}},
        "im": {"type": "array", "items": {"type": "array", "items": _NUM}},
    },
    "required": ["dim", "re", "im"],
    "additionalProperties": False,
}

_OPREF_SCHEMA = {"oneOf": [{"type": "string"}, _OPERATOR_SCHEMA]}

_MODEL_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(MODEL_KINDS)},
        "sites": {"type": "integer", "minimum": 1},
        "jxy": _NUM,
        "jz": _NUM,
        "field": _NUM,
        "hamiltonian": _OPERATOR_SCHEMA,
    },
    "required": ["kind"],
    "additionalProperties": False,
}

_FORCE_SCHEMA = {
    "type": "object",
    "properties": {
        "amplitude": _NUM,
        "waveform": {"enum": ["cos", "step"]},
        "omega": _NUM,
        "epsilon": {"type": "number", "exclusiveMinimum": 0},
        "t_start": _NUM,
    },
    "required": ["amplitude", "waveform", "epsilon"],
    "additionalProperties": False,
}

TASK_SCHEMAS = {
    "derive": {
        "type": "object",
        "properties": {
            "task": {"const": "derive"},
            "model": _MODEL_SCHEMA,
            "f": {"enum": sorted(BUILTIN_FUNCTIONS)},
            "dA": _OPREF_SCHEMA,
            "shift": _NUM,
            "alpha_terms": {"type": "integer", "minimum": 1},
            "series_terms": {"type": "integer", "minimum": 0},
            "seed": _INT,
        },
        "required": ["model", "f", "dA"],
        "additionalProperties": False,
    },
    "taylor": {
        "type": "object",
        "properties": {
            "task": {"const": "taylor"},
            "model": _MODEL_SCHEMA,
            "f": {"enum": sorted(BUILTIN_FUNCTIONS)},
            "B": _OPREF_SCHEMA,
            "shift": _NUM,
            "x": _NUM,
            "n_terms": {"type": "integer", "minimum": 0},
            "seed": _INT,
        },
        "required": ["model", "f", "B", "x", "n_terms"],
        "additionalProperties": False,
    },
    "response": {
        "type": "object",
        "properties": {
            "task": {"const": "response"},
            "model": _MODEL_SCHEMA,
            "A_op": _OPREF_SCHEMA,
            "J": _OPREF_SCHEMA,
            "beta": {"type": "number", "exclusiveMinimum": 0},
            "epsilon": {"type": "number", "exclusiveMinimum": 0},
            "hbar": {"type": "number", "exclusiveMinimum": 0},
            "omega": {
                "type": "object",
                "properties": {
                    "min": _NUM,
                    "max": _NUM,
                    "count": {"type": "integer", "minimum": 1},
                },
                "required": ["min", "max", "count"],
                "additionalProperties": False,
            },
            "methods": {
                "type": "array",
                "items": {"enum": ["resolvent", "series", "time-integral", "large-omega"]},
                "minItems": 1,
            },
            "series_terms": {"type": "integer", "minimum": 0},
            "seed": _INT,
        },
        "required": ["model", "beta", "epsilon", "omega"],
        "additionalProperties": False,
    },
    "zubarev": {
        "type": "object",
        "properties": {
            "task": {"const": "zubarev"},
            "model": _MODEL_SCHEMA,
            "A_op": _OPREF_SCHEMA,
            "beta": {"type": "number", "exclusiveMinimum": 0},
            "force": _FORCE_SCHEMA,
            "grid": {
                "type": "object",
                "properties": {"t_end": _NUM, "dt": {"type": "number", "exclusiveMinimum": 0}},
                "required": ["t_end", "dt"],
                "additionalProperties": False,
            },
            "orders": {"type": "integer", "minimum": 1},
            "observables": {"type": "array", "items": {"type": "string"}},
            "stride": {"type": "integer", "minimum": 1},
            "seed": _INT,
        },
        "required": ["model", "A_op", "beta", "force", "grid"],
        "additionalProperties": False,
    },
    "dissipative": {
        "type": "object",
        "properties": {
            "task": {"const": "dissipative"},
            "model": _MODEL_SCHEMA,
            "Lambda": _OPERATOR_SCHEMA,
            "t_end": {"type": "number", "exclusiveMinimum": 0},
            "dt": {"type": "number", "exclusiveMinimum": 0},
            "hbar": {"type": "number", "exclusiveMinimum": 0},
            "entropy_stride": {"type": "integer", "minimum": 1},
            "seed": _INT,
        },
        "required": ["model", "Lambda", "t_end", "dt"],
        "additionalProperties": False,
    },
    "verify-all": {
        "type": "object",
        "properties": {
            "task": {"const": "verify-all"},
            "scale": {"enum": ["full", "quick", "smoke"]},
            "seed": _INT,
        },
        "additionalProperties": False,
    },
}


def _jsonable(value):
    """Recursively convert numpy scalars/arrays so json.dumps is deterministic."""
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def render_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def render_csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def atomic_write(path: str, text: str) -> None:
    """Write via a temp file in the target directory; no partial artifacts."""
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hyperop-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_config(path: str, task: str) -> dict:
    try:
        with open(path) as handle:
            cfg = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        jsonschema.validate(cfg, TASK_SCHEMAS[task])
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"config does not match the {task} schema: {exc.message}") from exc
    declared = cfg.get("task")
    if declared is not None and declared != task:
        raise ConfigError(f"config declares task {declared!r}, command is {task!r}")
    return cfg


def _build_model(cfg: dict) -> tuple[Operator, dict]:
    m = dict(cfg["model"])
    kind = m.pop("kind")
    ham = m.pop("hamiltonian", None)
    spec = ModelSpec(
        kind=kind,
        sites=m.pop("sites", 1),
        jxy=m.pop("jxy", 1.0),
        jz=m.pop("jz", 0.0),
        field=m.pop("field", 0.0),
        hamiltonian=Operator.from_json(ham) if ham is not None else None,
    )
    return build_model(spec)


def _resolve_opref(ref, observables: dict, dim: int) -> Operator:
    if isinstance(ref, str):
        if ref not in observables:
            known = ", ".join(sorted(observables))
            raise ConfigError(f"unknown observable {ref!r}; model provides: {known}")
        return observables[ref]
    op = Operator.from_json(ref)
    if op.dim != dim:
        raise ConfigError(f"operator dimension {op.dim} does not match model dimension {dim}")
    return op


# -- task runners --------------------------------------------------------------


def run_derive(cfg: dict, fmt: str, threads: int) -> tuple[str, str]:
    h, obs = _build_model(cfg)
    if h.dim > HYPEROP_MATERIALIZE_CAP:
        raise DimensionCap(
            f"dense superoperators are materialized only up to dim {HYPEROP_MATERIALIZE_CAP}"
        )
    f = BUILTIN_FUNCTIONS[cfg["f"]]()
    da = _resolve_opref(cfg["dA"], obs, h.dim)
    shift = cfg.get("shift", 0.0)
    a = Operator(h.mat + shift * np.eye(h.dim))
    deriv = quantum_derivative(f, a)
    applied = deriv.apply(da)
    n_alpha = cfg.get("alpha_terms", 8)
    roots = alpha_estimate(a, da, n_alpha)
    verdict = convergence_verdict(roots)
    n_series = cfg.get("series_terms", 30)
    series_err = operator_norm(series_derivative(f, a, da, n_series) - applied)
    payload = {
        "version": __version__,
        "config": cfg,
        "results": {
            "derivative_applied": applied.to_json(),
            "alpha_sequence": list(roots),
            "alpha_verdict": verdict,
            "series_terms": n_series,
            "series_vs_kernel": series_err,
        },
    }
    if fmt == "json":
        return "derive.json", render_json(payload)
    rows = [[n + 1, float(r)] for n, r in enumerate(roots)]
    return "derive.csv", render_csv(["n", "alpha_root"], rows)


def run_taylor(cfg: dict, fmt: str, threads: int) -> tuple[str, str]:
    h, obs = _build_model(cfg)
    f = BUILTIN_FUNCTIONS[cfg["f"]]()
    b = _resolve_opref(cfg["B"], obs, h.dim)
    shift = cfg.get("shift", 0.0)
    a = Operator(h.mat + shift * np.eye(h.dim))
    x = cfg["x"]
    n_terms = cfg["n_terms"]
    exact = apply_scalar_function(spectral_decompose(Operator(a.mat + x * b.mat)), f)
    rows = []
    for n in range(n_terms + 1):
        err = operator_norm(taylor_sum(f, a, b, x, n, order_cap=max(n_terms, 1)) - exact)
        rows.append([n, err])
    if fmt == "csv":
        return "taylor.csv", render_csv(["order", "remainder_norm"], rows)
    payload = {
        "version": __version__,
        "config": cfg,
        "results": {"remainders": [{"order": n, "norm": e} for n, e in rows]},
    }
    return "taylor.json", render_json(payload)


def run_response(cfg: dict, fmt: str, threads: int) -> tuple[str, str]:
    h, obs = _build_model(cfg)
    if "J" in cfg:
        j = _resolve_opref(cfg["J"], obs, h.dim)
    elif "A_op" in cfg:
        j = current_from(h, _resolve_opref(cfg["A_op"], obs, h.dim), cfg.get("hbar", 1.0))
    else:
        raise ConfigError("response task needs either J or A_op")
    setup = ResponseSetup(h, j, cfg["beta"], cfg["epsilon"], cfg.get("hbar", 1.0))
    og = cfg["omega"]
    omegas = np.linspace(og["min"], og["max"], og["count"])
    methods = cfg.get("methods", ["resolvent"])
    n_terms = cfg.get("series_terms", 12)
    rows = []
    results = []
    for method in methods:
        out = conductivity_grid(setup, omegas, method, n_terms=n_terms, threads=threads)
        for res in out:
            rows.append([float(res.omega), res.sigma.real, res.sigma.imag, method, setup.epsilon])
            results.append(
                {"omega": float(res.omega), "re_sigma": res.sigma.real,
                 "im_sigma": res.sigma.imag, "method": method}
            )
    if fmt == "csv":
        return "response.csv", render_csv(
            ["omega", "re_sigma", "im_sigma", "method", "epsilon"], rows
        )
    payload = {"version": __version__, "config": cfg, "results": results}
    return "response.json", render_json(payload)


def run_zubarev(cfg: dict, fmt: str, threads: int) -> tuple[str, str]:
    h, obs = _build_model(cfg)
    a_op = _resolve_opref(cfg["A_op"], obs, h.dim)
    beta = cfg["beta"]
    fc = cfg["force"]
    if "t_start" in fc:
        proto = ForceProtocol(fc["amplitude"], fc["waveform"], fc["epsilon"],
                              fc["t_start"], fc.get("omega", 0.0))
    else:
        proto = ForceProtocol.auto_start(fc["amplitude"], fc["waveform"],
                                         fc["epsilon"], fc.get("omega", 0.0))
    t_end = cfg["grid"]["t_end"]
    dt = cfg["grid"]["dt"]
    steps = max(2, int(np.ceil((t_end - proto.t_start) / dt)))
    grid = np.linspace(proto.t_start, t_end, steps + 1)
    trajectory = eta_prime_ode(h, a_op, proto, beta, grid)

    orders = cfg.get("orders", 2)
    terms = eta_terms(h, a_op, proto, beta, t_end, orders, dt=dt)
    phi = log_partition(h, beta)
    residuals = []
    acc = np.zeros_like(h.mat)
    final = trajectory.final.mat
    for term in terms:
        acc = acc + term.mat
        residuals.append(float(np.linalg.norm(final - acc, 2)))
    rho1 = zubarev_density(EntropyExpansion(phi, beta, tuple(terms[:1])), h)

    stride = cfg.get("stride", max(1, trajectory.grid.size // 400))
    names = cfg.get("observables")
    if names:
        observables = {name: _resolve_opref(name, obs, h.dim) for name in names}
        header = ["t"] + list(names)
        rows = []
        for k in range(0, trajectory.grid.size, stride):
            state = trajectory.states[k]
            rows.append([float(trajectory.grid[k])] +
                        [float(np.real(np.trace(state @ op.mat))) for op in observables.values()])
    else:
        d = h.dim
        header = ["t"] + [f"{p}_{i}{j}" for i in range(d) for j in range(d) for p in ("re", "im")]
        rows = []
        for k in range(0, trajectory.grid.size, stride):
            state = trajectory.states[k]
            flat: list[float] = []
            for i in range(d):
                for j in range(d):
                    flat.extend([float(state[i, j].real), float(state[i, j].imag)])
            rows.append([float(trajectory.grid[k])] + flat)
    if fmt == "csv":
        return "zubarev.csv", render_csv(header, rows)
    payload = {
        "version": __version__,
        "config": cfg,
        "results": {
            "phi": phi,
            "term_norms": [operator_norm(term) for term in terms],
            "ode_minus_partial_sums": residuals,
            "first_order_state": rho1.to_json(),
            "integrator": trajectory.method_meta,
        },
    }
    return "zubarev.json", render_json(payload)


def run_dissipative(cfg: dict, fmt: str, threads: int) -> tuple[str, str]:
    h, _ = _build_model(cfg)
    lam = Operator.from_json(cfg["Lambda"])
    model = DissipativeModel(h, lam, cfg.get("hbar", 1.0))
    t_end = cfg["t_end"]
    dt = cfg["dt"]
    steps = max(2, int(np.ceil(t_end / dt)))
    grid = np.linspace(0.0, t_end, steps + 1)
    d = h.dim
    rho0 = Operator(np.eye(d) / d)
    trajectory = master_evolve(model, rho0, grid)
    stride = cfg.get("entropy_stride", max(1, steps // 8))
    rows = []
    for k in range(0, grid.size, stride):
        t = float(grid[k])
        state = trajectory.states[k]
        entry = [t, float(np.real(np.trace(state))), float(np.linalg.norm(state, 2))]
        if t > 0:
            eta = entropy_operator(model, rho0, t, steps=max(40, int(np.ceil(t / dt / 2))))
            entry.append(float(np.linalg.norm(scipy.linalg.expm(-eta.mat) - state, 2)))
        else:
            entry.append(0.0)
        rows.append(entry)
    header = ["t", "trace", "norm", "entropy_residual"]
    if fmt == "csv":
        return "dissipative.csv", render_csv(header, rows)
    payload = {
        "version": __version__,
        "config": cfg,
        "results": [dict(zip(header, row)) for row in rows],
    }
    return "dissipative.json", render_json(payload)


def run_verify_all(cfg: dict, fmt: str, threads: int, seed: int) -> tuple[str, str, bool]:
    scale = cfg.get("scale", "full")
    report = verify_mod.verify_all(seed=seed, scale=scale)
    for item in report["criteria"]:
        status = "PASS" if item["passed"] else "FAIL"
        print(f"criterion {item['number']:2d} [{status}] {item['name']}")
    if fmt == "csv":
        rows = [[c["number"], c["name"], str(c["passed"]).lower()] for c in report["criteria"]]
        return "verify-all.csv", render_csv(["number", "name", "passed"], rows), report["all_passed"]
    return "verify-all.json", render_verify_report(report), report["all_passed"]


def render_verify_report(report: dict) -> str:
    return render_json(report)


# -- entry point ----------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hyperop",
        description="Superoperator calculus and response theory on dense operators.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("derive", "taylor", "response", "zubarev", "dissipative", "verify-all"):
        p = sub.add_parser(name, help=f"run the {name} task")
        p.add_argument("--config", help="scenario JSON path")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed (default: config value or 0)")
        p.add_argument("--threads", type=int, default=1)
    sub.add_parser("schema", help="print the scenario JSON schemas")
    return parser


DEFAULT_VERIFY_CONFIG = {"task": "verify-all", "scale": "full"}

_RUNNERS = {
    "derive": run_derive,
    "taylor": run_taylor,
    "response": run_response,
    "zubarev": run_zubarev,
    "dissipative": run_dissipative,
}


def main(argv=None) -> int:
    level = os.environ.get("HYPEROP_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = make_parser().parse_args(argv)

    if args.command == "schema":
        print(render_json(TASK_SCHEMAS), end="")
        return 0

    try:
        if args.config is not None:
            cfg = load_config(args.config, args.command)
        elif args.command == "verify-all":
            cfg = dict(DEFAULT_VERIFY_CONFIG)
        else:
            raise ConfigError(f"the {args.command} task requires --config")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    seed = args.seed if args.seed is not None else cfg.get("seed", 0)

    try:
        os.makedirs(args.out, exist_ok=True)
        if args.command == "verify-all":
            name, text, all_passed = run_verify_all(cfg, args.format, args.threads, seed)
            path = os.path.join(args.out, name)
            atomic_write(path, text)
            log.info("wrote %s", path)
            print(f"report: {path}")
            return 0 if all_passed else 1
        name, text = _RUNNERS[args.command](cfg, args.format, args.threads)
        path = os.path.join(args.out, name)
        atomic_write(path, text)
        log.info("wrote %s", path)
        print(f"wrote: {path}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except HyperopError as exc:
        print(f"task error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - surface as task failure per contract
        print(f"task error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
