"""Config-driven command line: simulate, analytic, ensemble, steer, verify-algebra.

One JSON config file describes a run; individual keys can be overridden on
the command line with ``--set section.key=value``.  Every output file
carries the SHA-256 hash of the fully resolved config, so any artifact can
be reproduced exactly.  Data goes to files (CSV) and to a single JSON
document on stdout; diagnostics go to stderr only.

Exit codes: 0 success, 1 usage/config error, 2 leakage-flagged trajectory
(simulate), 3 ensemble did not fully converge.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import ACTIVE_KERNEL
from .analytic import (
    attractor_direction,
    auxiliary_flow,
    double_well_potential,
    euclidean_action,
    euclidean_potential,
    instanton_sigma_z,
    wei_norman_evaluate,
)
from .drive import DriveSpec, ModelParams, resonance_frequency
from .ensemble import EnsembleSpec, run_ensemble
from .hamiltonian import HamiltonianBuilder, effective_coupling_vector
from .hilbert import (
    CavityPrep,
    FockTruncation,
    build_casimir_ladder,
    build_standard_operators,
    prepare_state,
)
from .integrator import IntegratorConfig, evolve

SCHEMA_VERSION = 1

DEFAULT_CONFIG = {
    "model": {
        "omega_0": 5.0,
        "omega_q": 5.0,
        "n_max": 45,
        "half_qubit_term": True,
    },
    "drive": {
        "variant": "circular_pt",
        "g0": 0.05,
        "omega_g": None,  # null -> sum-frequency resonance omega_0 + omega_q
        "phi_x": 0.0,
        "phi_y": 0.0,
        "eta": 1.0,
        # exp_plus is the convention that makes the ground state the
        # attractor under this package's sigma_z|e> = +|e> convention
        "sign_convention": "exp_plus",
    },
    "integrator": {
        "rel_tol": 1e-7,
        "abs_tol": 1e-9,
        "max_step": None,  # null -> unlimited
        "initial_step": 0.0,
        "renormalize_threshold": 1e3,
        "t_end": None,  # null -> 8 / g0
        "n_time_samples": 400,
    },
    "ensemble": {
        "n_samples": 1000,
        "seed": 20240901,
        "cavity_mean_range": [0.0, 5.0],
        "cavity_prep_kind": "coherent",
        "convergence_threshold": -0.99,
        "keep_trajectories": 8,
    },
    "output_dir": "ptrabi_out",
}

# keys a user-provided config file must spell out explicitly
REQUIRED_KEYS = [("model", "omega_0"), ("model", "omega_q"), ("model", "n_max"), ("drive", "g0")]

_TYPES = {
    ("model", "omega_0"): (int, float),
    ("model", "omega_q"): (int, float),
    ("model", "n_max"): (int,),
    ("model", "half_qubit_term"): (bool,),
    ("drive", "variant"): (str,),
    ("drive", "g0"): (int, float),
    ("drive", "omega_g"): (int, float, type(None)),
    ("drive", "phi_x"): (int, float),
    ("drive", "phi_y"): (int, float),
    ("drive", "eta"): (int, float),
    ("drive", "sign_convention"): (str,),
    ("integrator", "rel_tol"): (int, float),
    ("integrator", "abs_tol"): (int, float),
    ("integrator", "max_step"): (int, float, type(None)),
    ("integrator", "initial_step"): (int, float),
    ("integrator", "renormalize_threshold"): (int, float),
    ("integrator", "t_end"): (int, float, type(None)),
    ("integrator", "n_time_samples"): (int,),
    ("ensemble", "n_samples"): (int,),
    ("ensemble", "seed"): (int,),
    ("ensemble", "cavity_mean_range"): (list,),
    ("ensemble", "cavity_prep_kind"): (str,),
    ("ensemble", "convergence_threshold"): (int, float),
    ("ensemble", "keep_trajectories"): (int,),
}


class ConfigError(ValueError):
    """Config file or override rejected; the message names the offending key."""


def _validate_section(name: str, given: dict, defaults: dict) -> dict:
    out = dict(defaults)
    for key, value in given.items():
        if key not in defaults:
            raise ConfigError(f"unknown key {name}.{key}")
        expected = _TYPES[(name, key)]
        if not isinstance(value, expected) or (
            isinstance(value, bool) and bool not in expected
        ):
            names = "/".join(t.__name__ for t in expected)
            raise ConfigError(f"{name}.{key}: expected {names}, got {type(value).__name__}")
        out[key] = value
    return out


def load_config(path=None, overrides=()) -> dict:
    """Resolve defaults + optional config file + --set overrides, validated."""
    cfg = {k: (dict(v) if isinstance(v, dict) else v) for k, v in DEFAULT_CONFIG.items()}
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a JSON object")
        raw.pop("schema_version", None)
        for section, body in raw.items():
            if section == "output_dir":
                if not isinstance(body, str):
                    raise ConfigError("output_dir: expected str")
                cfg["output_dir"] = body
                continue
            if section not in ("model", "drive", "integrator", "ensemble"):
                raise ConfigError(f"unknown key {section}")
            if not isinstance(body, dict):
                raise ConfigError(f"{section}: expected a JSON object")
            cfg[section] = _validate_section(section, body, DEFAULT_CONFIG[section])
        for sec, key in REQUIRED_KEYS:
            if sec not in raw or key not in raw.get(sec, {}):
                raise ConfigError(f"missing required key {sec}.{key}")
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        dotted, _, text = item.partition("=")
        parts = dotted.split(".")
        if dotted == "output_dir":
            cfg["output_dir"] = text
            continue
        if len(parts) != 2 or parts[0] not in ("model", "drive", "integrator", "ensemble"):
            raise ConfigError(f"--set: unknown key {dotted}")
        section, key = parts
        if key not in DEFAULT_CONFIG[section]:
            raise ConfigError(f"--set: unknown key {dotted}")
        cfg[section] = _validate_section(
            section, {key: _parse_override(text)}, cfg[section]
        )
    return cfg


def _parse_override(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text  # bare strings may be given unquoted


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _resolved(cfg: dict):
    """Turn the validated dict into model/drive/integrator objects."""
    m, d, i = cfg["model"], cfg["drive"], cfg["integrator"]
    trunc = FockTruncation(m["n_max"])
    params = ModelParams(omega_0=float(m["omega_0"]), omega_q=float(m["omega_q"]), trunc=trunc)
    omega_g = d["omega_g"]
    if omega_g is None:
        omega_g = resonance_frequency(params, "anti_jc")
    drive = DriveSpec(
        variant=d["variant"],
        g0=float(d["g0"]),
        omega_g=float(omega_g),
        phi_x=float(d["phi_x"]),
        phi_y=float(d["phi_y"]),
        eta=float(d["eta"]),
        sign_convention=d["sign_convention"],
    )
    t_end = i["t_end"]
    if t_end is None:
        t_end = 8.0 / drive.g0
    sample_times = tuple(np.linspace(0.0, float(t_end), i["n_time_samples"]).tolist())
    integ = IntegratorConfig(
        rel_tol=float(i["rel_tol"]),
        abs_tol=float(i["abs_tol"]),
        max_step=math.inf if i["max_step"] is None else float(i["max_step"]),
        initial_step=float(i["initial_step"]),
        renormalize_threshold=float(i["renormalize_threshold"]),
        sample_times=sample_times,
    )
    return params, drive, integ


def format_float(x: float) -> str:
    return f"{x:.17g}"


def write_trajectory_csv(path: Path, record, cfg_hash: str) -> None:
    lines = [
        f"# schema_version={SCHEMA_VERSION}",
        f"# config_hash={cfg_hash}",
        "t,sx,sy,sz,n_photon,log_norm,leakage",
    ]
    for k in range(record.times.size):
        b = record.bloch[k]
        lines.append(
            ",".join(
                format_float(v)
                for v in (
                    record.times[k],
                    b.x,
                    b.y,
                    b.z,
                    record.photon_expectation[k],
                    record.log_norm[k],
                    record.leakage[k],
                )
            )
        )
    path.write_text("\n".join(lines) + "\n")


def _emit(doc: dict) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def _json_out(obj: dict, path: Path) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _parse_cavity(text: str) -> CavityPrep:
    if text == "vacuum":
        return CavityPrep(kind="vacuum")
    kind, _, arg = text.partition(":")
    if kind == "fock" and arg:
        return CavityPrep(kind="fock", fock_level=int(arg))
    if kind == "coherent" and arg:
        return CavityPrep(kind="coherent", mean_photons=float(arg))
    raise ConfigError(f"cavity must be vacuum, fock:N, or coherent:NBAR, got {text!r}")


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args.set or ())
    h = config_hash(cfg)
    params, drive, integ = _resolved(cfg)
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    state = prepare_state(args.theta, args.phi, _parse_cavity(args.cavity), params.trunc)
    builder = HamiltonianBuilder(
        params=params, drive=drive, form=args.form,
        half_qubit_term=cfg["model"]["half_qubit_term"],
    )
    record = evolve(state, builder, integ)
    csv_path = outdir / "trajectory.csv"
    write_trajectory_csv(csv_path, record, h)
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": h,
        "kernel": ACTIVE_KERNEL,
        "theta": args.theta,
        "phi": args.phi,
        "cavity": args.cavity,
        "form": args.form,
        "trusted": record.trusted,
        "final_sz": record.bloch[-1].z,
        "max_leakage": float(np.max(record.leakage)),
        "trajectory_csv": str(csv_path),
    }
    _json_out(meta, outdir / "trajectory_meta.json")
    _emit(meta)
    return 0 if record.trusted else 2


def cmd_analytic(args) -> int:
    cfg = load_config(args.config, args.set or ())
    h = config_hash(cfg)
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    alpha, sz0 = args.alpha, args.sigma_z0
    times = np.linspace(0.0, args.t_end, args.n_points)
    coeffs = wei_norman_evaluate(alpha, cfg["model"]["omega_0"], times)
    sz = instanton_sigma_z(sz0, alpha, times)
    x0 = 0.5 * (1.0 - sz0)
    x = auxiliary_flow(x0, alpha, times)
    lines = [
        f"# schema_version={SCHEMA_VERSION}",
        f"# config_hash={h}",
        "t,f1_im,f3,sigma_z_instanton,x_aux,U,V",
    ]
    for k in range(times.size):
        lines.append(
            ",".join(
                format_float(v)
                for v in (
                    times[k],
                    coeffs.f1[k].imag,
                    coeffs.f3[k].real,
                    sz[k],
                    x[k],
                    double_well_potential(x[k], alpha),
                    euclidean_potential(x[k], alpha),
                )
            )
        )
    csv_path = outdir / "analytic.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": h,
        "alpha": alpha,
        "sigma_z0": sz0,
        "euclidean_action": euclidean_action(alpha),
        "analytic_csv": str(csv_path),
    }
    _json_out(meta, outdir / "analytic_meta.json")
    _emit(meta)
    return 0


def _ensemble_spec(cfg: dict) -> EnsembleSpec:
    params, drive, integ = _resolved(cfg)
    e = cfg["ensemble"]
    lo, hi = e["cavity_mean_range"]
    return EnsembleSpec(
        n_samples=e["n_samples"],
        seed=e["seed"],
        drive=drive,
        params=params,
        integrator=integ,
        cavity_mean_range=(float(lo), float(hi)),
        cavity_prep_kind=e["cavity_prep_kind"],
        convergence_threshold=float(e["convergence_threshold"]),
        half_qubit_term=cfg["model"]["half_qubit_term"],
    )


def cmd_ensemble(args) -> int:
    cfg = load_config(args.config, args.set or ())
    h = config_hash(cfg)
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    spec = _ensemble_spec(cfg)
    summary, kept, ref = run_ensemble(
        spec, workers=args.workers, keep_trajectories=cfg["ensemble"]["keep_trajectories"]
    )
    doc = {"schema_version": SCHEMA_VERSION, "config_hash": h}
    doc.update(summary.to_dict())
    _json_out(doc, outdir / "summary.json")
    write_trajectory_csv(outdir / "reference_trajectory.csv", ref, h)
    for j, rec in enumerate(kept):
        write_trajectory_csv(outdir / f"trajectory_{j:04d}.csv", rec, h)
    _emit(
        {
            "schema_version": SCHEMA_VERSION,
            "config_hash": h,
            "summary_json": str(outdir / "summary.json"),
            "fraction_converged": summary.fraction_converged,
            "n_untrusted": summary.n_untrusted,
            "alpha_fit": summary.alpha_fit,
        }
    )
    return 0 if (summary.n_trusted > 0 and summary.fraction_converged == 1.0) else 3


def cmd_steer(args) -> int:
    cfg = load_config(args.config, args.set or ())
    # steering runs an elliptical drive with the requested geometry
    Phi = args.Phi
    overrides = {
        "variant": "elliptical",
        "eta": args.eta,
        "phi_x": Phi,
        "phi_y": -Phi,
        "sign_convention": "exp_plus",
    }
    cfg = dict(cfg)
    cfg["drive"] = {**cfg["drive"], **overrides}
    h = config_hash(cfg)
    outdir = Path(cfg["output_dir"])
    outdir.mkdir(parents=True, exist_ok=True)
    params, drive, integ = _resolved(cfg)
    predicted = attractor_direction(effective_coupling_vector(drive.g0, args.eta, Phi))

    # fixed seed state away from the poles and the drive plane
    state = prepare_state(1.0, 0.5, CavityPrep(kind="coherent", mean_photons=2.0), params.trunc)
    builder = HamiltonianBuilder(
        params=params, drive=drive, form="full_rabi",
        half_qubit_term=cfg["model"]["half_qubit_term"],
    )
    record = evolve(state, builder, integ)
    n_tail = max(1, record.times.size // 10)
    tail = np.array([[b.x, b.y, b.z] for b in record.bloch[-n_tail:]])
    mean = tail.mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        measured = np.array([0.0, 0.0, 0.0])
        angular_error = math.nan
    else:
        measured = mean / norm
        cosang = float(np.clip(np.dot(measured, predicted.as_array()), -1.0, 1.0))
        angular_error = math.acos(cosang)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": h,
        "eta": args.eta,
        "Phi": Phi,
        "predicted_attractor": [predicted.x, predicted.y, predicted.z],
        "measured_attractor": measured.tolist(),
        "angular_error": angular_error,
        "trusted": record.trusted,
    }
    _json_out(doc, outdir / "steer.json")
    _emit(doc)
    return 0


def cmd_verify_algebra(args) -> int:
    n_max = args.n_max
    if n_max < 4:
        raise ConfigError(f"verify-algebra needs n_max >= 4, got {n_max}")
    trunc = FockTruncation(n_max)
    ops = build_standard_operators(trunc)
    casimir, b, b_dag = build_casimir_ladder(trunc)
    sz = ops.sigma_z.entries
    bm, bd, c = b.entries, b_dag.entries, casimir.entries

    def comm(x, y):
        return x @ y - y @ x

    c_inv = np.diag(1.0 / np.diag(c))
    raw = {
        "sz_b": comm(sz, bm) + 2.0 * bm,
        "sz_b_dagger": comm(sz, bd) - 2.0 * bd,
        "b_b_dagger": comm(bm, bd) - (c_inv - np.eye(trunc.dim)) @ sz,
    }
    # interior projection removes the top two Fock levels
    proj = np.ones(trunc.dim)
    proj[-4:] = 0.0
    P = np.diag(proj)
    residuals = {k: float(np.linalg.norm(P @ v @ P)) for k, v in raw.items()}
    residuals_unprojected = {k: float(np.linalg.norm(v)) for k, v in raw.items()}
    ok = all(v < 1e-10 for v in residuals.values())
    doc = {
        "schema_version": SCHEMA_VERSION,
        "n_max": n_max,
        "interior_residuals": residuals,
        "unprojected_residuals": residuals_unprojected,
        "pass": ok,
    }
    _emit(doc)
    return 0 if ok else 4


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ptrabi",
        description="Quantum Rabi model under complex PT-symmetric parametric driving",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (defaults used when omitted)")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override one config key (repeatable)")

    p = sub.add_parser("simulate", help="integrate one trajectory, write CSV + metadata")
    add_common(p)
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--phi", type=float, default=0.0)
    p.add_argument("--cavity", default="vacuum", help="vacuum | fock:N | coherent:NBAR")
    p.add_argument("--form", default="full_rabi", choices=["full_rabi", "jc", "anti_jc"])
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analytic", help="tabulate the closed-form flow and instanton")
    add_common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--sigma-z0", dest="sigma_z0", type=float, default=1.0)
    p.add_argument("--t-end", dest="t_end", type=float, default=10.0)
    p.add_argument("--n-points", dest="n_points", type=int, default=201)
    p.set_defaults(func=cmd_analytic)

    p = sub.add_parser("ensemble", help="seeded random-initial-state sweep + summary")
    add_common(p)
    p.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${'{'}PTRABI_WORKERS{'}'} or cpu count)")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("steer", help="predicted vs measured attractor for an elliptical drive")
    add_common(p)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--Phi", type=float, default=0.0)
    p.set_defaults(func=cmd_steer)

    p = sub.add_parser("verify-algebra", help="commutator residuals of the ladder algebra")
    p.add_argument("--n-max", dest="n_max", type=int, default=10)
    p.set_defaults(func=cmd_verify_algebra)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
