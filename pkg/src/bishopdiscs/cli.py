"""Command-line entry point.

Subcommands:

* ``check-ops``  -- run the operator identity battery; exit 1 on failure,
                    naming the first broken identity.
* ``model``      -- build a model-quadric Bishop disc (delta = 0 closed
                    form), emit its boundary curve and diagnostics.
* ``solve``      -- continuation solve at positive delta for one (r, c).
* ``family``     -- sweep a parameter box, run the rank and foliation
                    reports, export the swept point cloud.
* ``validate``   -- recompute the residuals of a stored disc file and
                    compare against its recorded diagnostics.

Exit codes: 0 success, 1 identity-gate failure, 2 configuration error,
3 convergence failure.  All JSON output is canonical (sorted keys), so
identical configurations produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .configio import config_hash, load_config, parse_config
from .diagnostics import corrupted_hilbert, identity_errors
from .errors import ConfigError, ConvergenceError
from .family import atomic_write_json, boundary_point_cloud, \
    foliation_report, rank_report, sweep
from .model import build_ellipse_map, model_disc
from .solver import SolverConfig, _EllipticProblem, continuation_solve
from .structures import holomorphy_residual

IDENTITY_TOL = 1e-8


def _write_json(path, payload):
    atomic_write_json(path, payload)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _parse_c(text):
    if not text:
        return ()
    return tuple(float(v) for v in text.split(","))


def _apply_grid_flag(cfg: SolverConfig, flag: str) -> SolverConfig:
    if not flag:
        return cfg
    try:
        n_theta, n_radial, n_coef = (int(v) for v in flag.split(","))
    except ValueError as exc:
        raise ConfigError(
            f"--grid expects N_THETA,N_RHO,N_C, got {flag!r}"
        ) from exc
    cfg.n_theta, cfg.n_radial, cfg.n_coef = n_theta, n_radial, n_coef
    return cfg


def cmd_check_ops(args) -> int:
    raw = load_config(args.config) if args.config else {"manifold": {"n": 2, "gamma": 0.0}}
    n_theta, n_radial = 64, 24
    if args.grid:
        parts = [int(v) for v in args.grid.split(",")]
        n_theta, n_radial = parts[0], parts[1]
    fault = raw.get("fault_injection")
    if fault:
        with corrupted_hilbert(fault.get("scale", 1.001)):
            errors = identity_errors(n_theta, n_radial)
    else:
        errors = identity_errors(n_theta, n_radial)
    failing = sorted(k for k, v in errors.items() if v > IDENTITY_TOL)
    report = {
        "n_theta": n_theta,
        "n_radial": n_radial,
        "tolerance": IDENTITY_TOL,
        "errors": errors,
        "pass": not failing,
        "first_failure": failing[0] if failing else None,
    }
    out = os.path.join(args.out, "check_ops.json")
    _write_json(out, report)
    if failing:
        print(f"identity gate FAILED: {failing[0]} "
              f"(error {errors[failing[0]]:.3e} > {IDENTITY_TOL})")
        return 1
    print(f"identity gate passed: max error "
          f"{max(errors.values()):.3e} <= {IDENTITY_TOL}")
    return 0


def _curve_rows(r, c, theta, curve):
    rows = []
    for t in range(len(theta)):
        coords = []
        for comp in range(curve.shape[1]):
            coords += [curve[t, comp].real, curve[t, comp].imag]
        rows.append([r, *c, float(theta[t]), *coords])
    return rows


def _curve_header(n, n_c):
    cols = ["r"] + [f"c{j}" for j in range(3, 3 + n_c)] + ["theta"]
    for comp in range(n):
        cols += [f"X{2 * comp + 1}", f"X{2 * comp + 2}"]
    return cols


def cmd_model(args) -> int:
    raw = load_config(args.config)
    spec, _, cfg = parse_config(raw)
    r = args.r if args.r is not None else raw.get("r", 1.0)
    c = _parse_c(args.c) if args.c else tuple(raw.get("c", [0.0] * (spec.n - 2)))
    emap = build_ellipse_map(spec.gamma, tol=1e-9)
    disc = model_disc(spec, r, c, emap=emap)
    n_theta = cfg.n_theta
    curve = disc.boundary_curve(n_theta)
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    _write_csv(
        os.path.join(args.out, "model_disc.csv"),
        _curve_header(spec.n, spec.n - 2),
        _curve_rows(r, c, theta, curve),
    )
    report = {
        "r": r,
        "c": list(c),
        "gamma": spec.gamma,
        "ellipse_degree": emap.degree,
        "ellipse_boundary_residual": emap.boundary_residual,
        "attachment_residual": disc.attachment_residual(),
        "holomorphy_residual": disc.holomorphy_residual(),
        "config_hash": config_hash(raw),
    }
    _write_json(os.path.join(args.out, "model_diagnostics.json"), report)
    print(f"model disc written: attachment "
          f"{report['attachment_residual']:.3e}")
    return 0


def cmd_solve(args) -> int:
    raw = load_config(args.config)
    spec, structure, cfg = parse_config(raw)
    cfg = _apply_grid_flag(cfg, args.grid)
    if args.ladder:
        cfg.ladder_steps = args.ladder
    delta = args.delta if args.delta is not None else raw.get("delta", 0.0)
    r = args.r if args.r is not None else raw.get("r", 1.0)
    c = _parse_c(args.c) if args.c else tuple(raw.get("c", [0.0] * (spec.n - 2)))
    disc = continuation_solve(spec, structure, delta, r, c, cfg=cfg)
    payload = {
        "manifold": raw["manifold"],
        "structure": raw.get("structure", structure.to_config()),
        "grid": {"n_theta": cfg.n_theta, "n_radial": cfg.n_radial,
                 "n_coef": cfg.n_coef},
        "config_hash": config_hash(raw),
        "disc": disc.to_payload(),
    }
    _write_json(os.path.join(args.out, "disc.json"), payload)
    curve = disc.boundary_curve()
    _write_csv(
        os.path.join(args.out, "disc_boundary.csv"),
        _curve_header(spec.n, spec.n - 2),
        _curve_rows(r, c, disc.Z.grid.theta, curve),
    )
    d = disc.diagnostics
    print(f"solved delta={delta}: boundary {d['boundary_residual']:.3e}, "
          f"holomorphy {d['holomorphy_residual']:.3e}")
    return 0


def cmd_family(args) -> int:
    raw = load_config(args.config)
    spec, structure, cfg = parse_config(raw)
    cfg = _apply_grid_flag(cfg, args.grid)
    delta = args.delta if args.delta is not None else raw.get("delta", 0.0)
    box = raw.get("box")
    if not box:
        raise ConfigError("family command needs a 'box' block in the config")
    r_values = np.linspace(box["r_range"][0], box["r_range"][1],
                           box["r_count"]).tolist()
    if spec.n > 2 and "c_range" in box:
        c_axis = np.linspace(box["c_range"][0], box["c_range"][1],
                             box.get("c_count", 1))
        c_values = [(float(v),) * (spec.n - 2) if spec.n - 2 == 1
                    else tuple([float(v)] * (spec.n - 2)) for v in c_axis]
    else:
        c_values = None
    provenance = config_hash(raw) + f"-d{delta}"
    checkpoint = os.path.join(args.out, "family_checkpoint.json")
    family = sweep(
        spec, structure, delta, r_values, c_values, cfg=cfg,
        checkpoint_path=checkpoint, provenance=provenance,
    )
    fol_cfg = raw.get("foliation", {})
    report = {
        "family": family.diagnostics_report(),
        "rank": rank_report(family),
        "foliation": foliation_report(
            family,
            epsilon=fol_cfg.get("epsilon", 0.05),
            coverage_samples=fol_cfg.get("coverage_samples", 1000),
            margin=fol_cfg.get("margin", 0.1),
        ),
    }
    _write_json(os.path.join(args.out, "family_report.json"), report)
    _write_csv(
        os.path.join(args.out, "family_cloud.csv"),
        _curve_header(spec.n, spec.n - 2),
        boundary_point_cloud(family),
    )
    print(f"family solved: {len(family.solved_keys())}/"
          f"{len(family.keys())} nodes, "
          f"min Hausdorff {report['foliation']['min_pairwise_hausdorff']:.3f}, "
          f"coverage {report['foliation']['coverage_fraction']:.3f}")
    return 0


def cmd_validate(args) -> int:
    try:
        with open(args.disc_file) as fh:
            payload = json.load(fh)
        manifold = payload["manifold"]
        structure_cfg = payload["structure"]
        grid_cfg = payload["grid"]
        disc_data = payload["disc"]
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        raise ConfigError(f"unreadable disc file: {exc}") from exc
    from .manifolds import SubmanifoldSpec
    from .structures import AlmostComplexStructure

    spec = SubmanifoldSpec.from_config(manifold)
    structure = AlmostComplexStructure.from_config(structure_cfg)
    cfg = SolverConfig(
        n_coef=grid_cfg["n_coef"], n_radial=grid_cfg["n_radial"],
        n_theta=grid_cfg["n_theta"],
    )
    coeffs = np.array(
        [[complex(a, b) for a, b in row]
         for row in disc_data["coefficients"]]
    )
    prob = _EllipticProblem(spec, structure, disc_data["delta"], cfg)
    _, Z = prob.residual(coeffs)
    boundary = prob.boundary_residual(Z)
    holo = holomorphy_residual(prob.structure_delta, Z)
    stored = disc_data["diagnostics"]
    ok = (
        boundary <= 2.0 * max(stored["boundary_residual"], 1e-14)
        and holo <= 2.0 * max(stored["holomorphy_residual"], 1e-14)
    )
    print(
        f"recomputed boundary {boundary:.3e} (stored "
        f"{stored['boundary_residual']:.3e}), holomorphy {holo:.3e} "
        f"(stored {stored['holomorphy_residual']:.3e}): "
        f"{'OK' if ok else 'MISMATCH'}"
    )
    if not ok:
        raise ConvergenceError(
            "stored diagnostics do not reproduce",
            {"boundary": boundary, "holomorphy": holo},
        )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bishop",
        description="Bishop discs near elliptic points of real "
                    "submanifolds in almost complex C^n",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="run config JSON")
        else:
            p.add_argument("--config", help="run config JSON")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("check-ops", help="run the operator identity gate")
    common(p, needs_config=False)
    p.add_argument("--grid", help="N_THETA,N_RHO override")
    p.set_defaults(func=cmd_check_ops)

    p = sub.add_parser("model", help="closed-form model disc")
    common(p)
    p.add_argument("--r", type=float)
    p.add_argument("--c", help="comma-separated imaginary centres")
    p.set_defaults(func=cmd_model)

    p = sub.add_parser("solve", help="continuation solve for one disc")
    common(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--c", help="comma-separated imaginary centres")
    p.add_argument("--grid", help="N_THETA,N_RHO,N_C override")
    p.add_argument("--ladder", type=int, help="continuation rungs")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("family", help="sweep a parameter box")
    common(p)
    p.add_argument("--delta", type=float)
    p.add_argument("--grid", help="N_THETA,N_RHO,N_C override")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("validate", help="re-check a stored disc file")
    p.add_argument("disc_file")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out", None):
        os.makedirs(args.out, exist_ok=True)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
