"""Command-line front end.

One binary with subcommands; inputs come from a JSON config file
validated against CONFIG_SCHEMA, with command-line flags taking
precedence over config values.  All file outputs are deterministic for a
fixed config and seed: CSV numbers carry 17 significant digits and JSON
is written with sorted keys.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import jsonschema

from . import bifurcation
from ._jsonloc import json_path_lines, schema_path_string
from .contour import contour_condition, fiber_jacobian, rank_defect
from .core import GyrostatParams, IntegralConstants, State, integrals
from .dynamics import integrate, project
from .errors import GyrostatError, InvalidInputError, NumericalError
from .rpm.boundary import boundary_with_velocities
from .rpm.fibers import fiber_counts
from .rpm.mapping import rpm_map
from .sampling import sample_regions
from .svgplot import render_rpm_svg

__all__ = ["main", "CONFIG_SCHEMA"]


def _vec3_schema():
    return {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}


CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "gyrorpm run configuration",
    "type": "object",
    "required": ["params"],
    "additionalProperties": False,
    "properties": {
        "params": {
            "type": "object",
            "required": ["A", "lambda"],
            "additionalProperties": False,
            "properties": {
                "A": {
                    "type": "array",
                    "items": {"type": "number", "exclusiveMinimum": 0},
                    "minItems": 3,
                    "maxItems": 3,
                },
                "lambda": _vec3_schema(),
            },
        },
        "k": _vec3_schema(),
        "omega0": _vec3_schema(),
        "nu0": _vec3_schema(),
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
        "tol": {"type": "number", "minimum": 1e-14, "maximum": 1e-3},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "resolution": {
            "oneOf": [
                {"type": "integer", "minimum": 3},
                {"type": "array", "items": {"type": "integer", "minimum": 1},
                 "minItems": 2, "maxItems": 2},
            ]
        },
        "sigma_samples": {"type": "integer", "minimum": 16},
        "k3_slices": {"type": "array", "items": {"type": "number"}},
        "sigma_tol": {"type": "number", "exclusiveMinimum": 0},
        "n_region_samples": {"type": "integer", "minimum": 1},
        "eps": {"type": "number", "exclusiveMinimum": 0},
    },
}

_DEFAULTS = {
    "seed": 0,
    "threads": None,
    "tol": 1e-10,
    "t_end": 10.0,
    "resolution": [64, 128],
    "sigma_samples": 512,
    "k3_slices": [0.0],
    "sigma_tol": 1e-9,
    "n_region_samples": 3,
    "eps": 1e-10,
}


class ConfigError(InvalidInputError):
    pass


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def load_config(path: str) -> dict:
    """Parse and schema-validate a JSON config, errors carry file:line."""
    with open(path) as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        lines = json_path_lines(text)
        msgs = []
        for e in errors[:8]:
            p = schema_path_string(e.absolute_path) or "(root)"
            ln = lines.get(p, 1)
            msgs.append(f"{path}:{ln}: {p}: {e.message}")
        raise ConfigError("\n".join(msgs))
    return obj


def _parse_vec3(text: str, name: str):
    try:
        parts = [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"--{name}: expected three comma-separated numbers, got {text!r}") from exc
    if len(parts) != 3:
        raise ConfigError(f"--{name}: expected three components, got {len(parts)}")
    return parts


def _parse_resolution(text: str):
    t = text.lower().replace("x", ",")
    parts = t.split(",")
    if len(parts) == 1:
        return int(parts[0])
    if len(parts) == 2:
        return [int(parts[0]), int(parts[1])]
    raise ConfigError(f"--resolution: expected LEVEL or ROWSxCOLS, got {text!r}")


def resolve_config(args) -> dict:
    """defaults < config file < command-line flags."""
    cfg = dict(_DEFAULTS)
    if args.config:
        cfg.update(load_config(args.config))
    flag_map = {
        "seed": args.seed,
        "threads": args.threads,
        "k": _parse_vec3(args.k, "k") if getattr(args, "k", None) else None,
        "omega0": _parse_vec3(args.omega0, "omega0") if getattr(args, "omega0", None) else None,
        "nu0": _parse_vec3(args.nu0, "nu0") if getattr(args, "nu0", None) else None,
        "tol": getattr(args, "tol", None),
        "t_end": getattr(args, "t_end", None),
        "resolution": _parse_resolution(args.resolution) if getattr(args, "resolution", None) else None,
        "sigma_samples": getattr(args, "sigma_samples", None),
        "k3_slices": ([float(v) for v in args.k3_slice] if getattr(args, "k3_slice", None) else None),
        "sigma_tol": getattr(args, "sigma_tol", None),
        "n_region_samples": getattr(args, "n_samples", None),
        "eps": getattr(args, "eps", None),
    }
    if getattr(args, "A", None) or getattr(args, "lam", None):
        if not (getattr(args, "A", None) and getattr(args, "lam", None)):
            raise ConfigError("--A and --lambda must be given together")
        cfg["params"] = {"A": _parse_vec3(args.A, "A"),
                         "lambda": _parse_vec3(args.lam, "lambda")}
    for key, val in flag_map.items():
        if val is not None:
            cfg[key] = val
    if cfg.get("threads") is None:
        env = os.environ.get("RPM_THREADS")
        if env:
            try:
                cfg["threads"] = int(env)
            except ValueError as exc:
                raise ConfigError(f"RPM_THREADS must be an integer, got {env!r}") from exc
    if "params" not in cfg:
        raise ConfigError("no gyrostat parameters: provide a config file or --A/--lambda")
    return cfg


def _params(cfg) -> GyrostatParams:
    return GyrostatParams.from_dict(cfg["params"])


def _k(cfg) -> IntegralConstants:
    if "k" not in cfg:
        raise ConfigError("this command needs integral constants: set k in the config or pass --k")
    return IntegralConstants(*cfg["k"])


def _outpath(args, name: str) -> str:
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ----------------------------------------------------------------------
# subcommands

def cmd_bifurcation(args) -> int:
    cfg = resolve_config(args)
    params = _params(cfg)
    params.require_generic()

    samples = bifurcation.curve_samples(params, cfg["sigma_samples"])
    with open(_outpath(args, "curve.csv"), "w") as fh:
        fh.write("sigma,k1,k2,branch\n")
        for s in samples:
            fh.write(f"{_fmt(s.sigma)},{_fmt(s.k1)},{_fmt(s.k2)},{s.branch.value}\n")

    for i, k3 in enumerate(cfg["k3_slices"]):
        with open(_outpath(args, f"sigma_slice_{i}.csv"), "w") as fh:
            fh.write("part,param,k1,k2,k3\n")
            for s in samples:
                if s.k1 >= k3 * k3:
                    fh.write(f"C1,{_fmt(s.sigma)},{_fmt(s.k1)},{_fmt(s.k2)},{_fmt(k3)}\n")
            k1w = k3 * k3
            if k1w > 0:
                try:
                    f_val = bifurcation.branch_low(k1w, params)
                    g_val = bifurcation.branch_high(k1w, params)
                except GyrostatError:
                    continue
                for t in np.linspace(0.0, 1.0, 129):
                    k2w = f_val + t * (g_val - f_val)
                    fh.write(f"C2,{_fmt(t)},{_fmt(k1w)},{_fmt(k2w)},{_fmt(k3)}\n")

    regions = sample_regions(params, cfg["n_region_samples"], seed=cfg["seed"],
                             tol=cfg["sigma_tol"])
    _write_json(_outpath(args, "region_samples.json"), {
        "convention": bifurcation.REGION_CONVENTION,
        "seed": cfg["seed"],
        "tolerance": cfg["sigma_tol"],
        "samples": {
            label.value: [list(k.astuple()) for k in ks]
            for label, ks in regions.items()
        },
    })
    return 0


def cmd_classify(args) -> int:
    cfg = resolve_config(args)
    params = _params(cfg)
    k = _k(cfg)
    label = bifurcation.classify(k, params, tol=cfg["sigma_tol"])
    report = rpm_map(k, params, resolution=cfg["resolution"],
                     with_boundary=False, threads=cfg["threads"])
    out = {
        "k": list(k.astuple()),
        "label": label.value,
        "jk_type": bifurcation.jk_type(label),
        "torus_count": bifurcation.torus_count(label),
        "rpm_components": report.n_components,
        "count_profiles": [list(c.count_profile) for c in report.components],
        "tolerance": cfg["sigma_tol"],
        "convention": bifurcation.REGION_CONVENTION,
    }
    tc = out["torus_count"]
    if tc == 2 and report.n_components == 1:
        out["note"] = ("two tori project to overlapping sphere regions at this k3; "
                       "their union is a single visible component")
    print(json.dumps(out, indent=2, sort_keys=True))
    _write_json(_outpath(args, "classify.json"), out)
    return 0


def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    params = _params(cfg)
    if "omega0" not in cfg or "nu0" not in cfg:
        raise ConfigError("simulate needs omega0 and nu0 (config keys or flags)")
    state0 = State.normalized(cfg["omega0"], cfg["nu0"])
    traj = integrate(state0, params, t_end=cfg["t_end"], tol=cfg["tol"])
    traj.to_csv(_outpath(args, "trajectory.csv"))

    k0 = integrals(state0, params)
    batch = fiber_counts(project(traj).points, k0, params)
    contained = float(np.mean(batch.counts >= 1))
    out = {
        "k": list(k0.astuple()),
        "t_end": cfg["t_end"],
        "tol": cfg["tol"],
        "steps": len(traj),
        "drift": {
            "k1": traj.drift.k1, "k2": traj.drift.k2, "k3": traj.drift.k3,
            "nu_norm": traj.drift.nu_norm,
        },
        "contained_fraction": contained,
    }
    if args.check_reverse:
        back = integrate(traj.state(len(traj) - 1), params,
                         t_end=cfg["t_end"], tol=cfg["tol"], reverse=True)
        end = back.state(len(back) - 1)
        out["reverse_error"] = float(
            max(np.max(np.abs(end.omega - state0.omega)),
                np.max(np.abs(end.nu - state0.nu)))
        )
    _write_json(_outpath(args, "containment.json"), out)
    return 0


def cmd_boundary(args) -> int:
    cfg = resolve_config(args)
    params = _params(cfg)
    k = _k(cfg)
    pairs = boundary_with_velocities(k, params)
    with open(_outpath(args, "boundary.csv"), "w") as fh:
        fh.write("curve_id,sign_pattern,nu1,nu2,nu3\n")
        for i, (curve, _) in enumerate(pairs):
            s1, s2 = curve.sign_pattern
            tag = f"{'+' if s1 > 0 else '-'}{'+' if s2 > 0 else '-'}"
            for p in curve.points:
                fh.write(f"{i},{tag},{_fmt(p[0])},{_fmt(p[1])},{_fmt(p[2])}\n")
    with open(_outpath(args, "boundary_states.csv"), "w") as fh:
        fh.write("curve_id,omega1,omega2,omega3,nu1,nu2,nu3\n")
        for i, (curve, ws) in enumerate(pairs):
            for w, p in zip(ws, curve.points):
                fh.write(f"{i}," + ",".join(_fmt(v) for v in (*w, *p)) + "\n")
    return 0


def cmd_rpm_map(args) -> int:
    cfg = resolve_config(args)
    params = _params(cfg)
    k = _k(cfg)
    report = rpm_map(k, params, resolution=cfg["resolution"], threads=cfg["threads"])
    payload = report.to_dict()
    payload["params"] = cfg["params"]
    _write_json(_outpath(args, "rpm_map.json"), payload)
    if args.svg:
        render_rpm_svg(report, _outpath(args, args.svg))
    return 0


def cmd_check(args) -> int:
    cfg = resolve_config(args)
    params = _params(cfg)
    data = np.genfromtxt(args.states, delimiter=",", names=True)
    if data.ndim == 0:
        data = data.reshape(1)
    needed = ["omega1", "omega2", "omega3", "nu1", "nu2", "nu3"]
    names = data.dtype.names or ()
    missing = [c for c in needed if c not in names]
    if missing:
        raise ConfigError(f"{args.states}: missing columns {missing}")
    with open(_outpath(args, "check.csv"), "w") as fh:
        fh.write("contour_condition,sv1,sv2,sv3,rank_defect\n")
        for row in data:
            omega = np.array([row["omega1"], row["omega2"], row["omega3"]])
            nu = np.array([row["nu1"], row["nu2"], row["nu3"]])
            state = State.normalized(omega, nu)
            cc = contour_condition(state, params)
            sv = fiber_jacobian(state, params).singular_values
            rd = rank_defect(state, params, eps=cfg["eps"])
            fh.write(",".join([_fmt(cc), *(_fmt(v) for v in sv), str(rd)]) + "\n")
    return 0


def cmd_schema(args) -> int:
    print(json.dumps(CONFIG_SCHEMA, indent=2, sort_keys=True))
    return 0


# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file (see the schema subcommand)")
    common.add_argument("--out-dir", default=".", help="directory for output files")
    common.add_argument("--A", help="inertia moments, e.g. 1,2,3")
    common.add_argument("--lambda", dest="lam", help="gyrostatic moment, e.g. 0.1,0.2,0.3")
    common.add_argument("--seed", type=int, help="random seed for sampling commands")
    common.add_argument("--threads", type=int,
                        help="worker threads (falls back to RPM_THREADS)")

    p = argparse.ArgumentParser(
        prog="gyrorpm",
        description="Regions of possible motion, bifurcation sets and visible "
                    "contours of the free gyrostat.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bifurcation", parents=[common],
                        help="bifurcation curve CSV, set slices, region samples")
    sp.add_argument("--sigma-samples", type=int, dest="sigma_samples")
    sp.add_argument("--k3-slice", action="append", dest="k3_slice")
    sp.add_argument("--n-samples", type=int, dest="n_samples")
    sp.add_argument("--sigma-tol", type=float, dest="sigma_tol")
    sp.set_defaults(func=cmd_bifurcation)

    sp = sub.add_parser("classify", parents=[common],
                        help="region label and level topology for one k")
    sp.add_argument("--k", help="integral constants k1,k2,k3")
    sp.add_argument("--resolution")
    sp.add_argument("--sigma-tol", type=float, dest="sigma_tol")
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("simulate", parents=[common],
                        help="integrate a trajectory, export CSV and containment report")
    sp.add_argument("--omega0")
    sp.add_argument("--nu0")
    sp.add_argument("--t-end", type=float, dest="t_end")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--check-reverse", action="store_true")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("boundary", parents=[common],
                        help="generalized boundary curves as CSV")
    sp.add_argument("--k")
    sp.set_defaults(func=cmd_boundary)

    sp = sub.add_parser("rpm-map", parents=[common],
                        help="fiber-count map, components and boundary as JSON")
    sp.add_argument("--k")
    sp.add_argument("--resolution")
    sp.add_argument("--svg", help="also render an SVG with this file name")
    sp.set_defaults(func=cmd_rpm_map)

    sp = sub.add_parser("check", parents=[common],
                        help="contour condition, singular values and rank defect per state")
    sp.add_argument("--states", required=True, help="CSV with omega1..3,nu1..3 columns")
    sp.add_argument("--eps", type=float)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("schema", help="print the JSON config schema")
    sp.set_defaults(func=cmd_schema)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
