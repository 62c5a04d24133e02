"""Batch entry point: rupture-lab {solve|continue|diagnose|blowup|rupture}.

Each subcommand reads a JSON config (with --set key=value overrides), validates
everything up front, computes, and writes outputs atomically. Exit codes:
0 success, 1 config or input error, 2 numerical failure.
"""

import argparse
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import blowup as bl
from . import diagnostics as dg
from . import rupture as rp
from .field import (FieldError, ScalarField, annulus_grid, disk_grid, interval_grid,
                    load_field, rectangle_grid, save_field)
from .profiles import ProfileError, harmonic_test_field, radial_exact
from .solver import SolveConfig, SolverError, continue_pullin, solve_dirichlet


class ConfigError(ValueError):
    pass


def _threads():
    raw = os.environ.get("RUPTURE_LAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _write_text_atomic(path, text):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _check_writable(cfg, keys):
    for key in keys:
        path = cfg.get(key)
        if path is None:
            continue
        d = os.path.dirname(os.fspath(path)) or "."
        if not os.path.isdir(d) or not os.access(d, os.W_OK):
            raise ConfigError(f"output path for '{key}' is not writable: {path}")


def _need(cfg, key, kind=None):
    if key not in cfg:
        raise ConfigError(f"config missing required key '{key}'")
    val = cfg[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"config key '{key}' has the wrong type")
    return val


def _build_grid(spec):
    kind = _need(spec, "kind", str)
    if kind == "interval":
        return interval_grid(float(_need(spec, "a")), float(_need(spec, "b")),
                             int(_need(spec, "n")))
    if kind == "rectangle":
        return rectangle_grid(_need(spec, "lo"), _need(spec, "hi"), float(_need(spec, "h")))
    if kind == "disk":
        return disk_grid(_need(spec, "center"), float(_need(spec, "radius")),
                         float(_need(spec, "h")))
    if kind == "annulus":
        return annulus_grid(_need(spec, "center"), float(_need(spec, "r_inner")),
                            float(_need(spec, "r_outer")), float(_need(spec, "h")))
    raise ConfigError(f"unknown domain kind '{kind}'")


def _build_bc(spec, p, dim):
    kind = _need(spec, "kind", str)
    if kind == "radial_exact":
        return radial_exact(max(dim, 2), p)
    if kind == "constant":
        val = float(_need(spec, "value"))

        def const(*coords):
            return np.full_like(np.asarray(coords[0], dtype=float), val)
        return const
    raise ConfigError(f"unknown bc kind '{kind}'")


def _solver_cfg(cfg):
    spec = cfg.get("solver", {})
    try:
        return SolveConfig(
            max_newton_iters=int(spec.get("max_newton_iters", 40)),
            residual_tol=float(spec.get("residual_tol", 1e-9)),
            damping=float(spec.get("damping", 0.5)),
            delta=float(spec.get("delta", 0.0)))
    except ValueError as err:
        raise ConfigError(f"solver config invalid: {err}")


def _check_p(cfg):
    p = float(_need(cfg, "p"))
    if p <= 1:
        raise ConfigError("config key 'p' must exceed 1")
    return p


def cmd_solve(cfg):
    p = _check_p(cfg)
    grid = _build_grid(_need(cfg, "domain", dict))
    bc = _build_bc(_need(cfg, "bc", dict), p, grid.dim)
    out = _need(cfg, "output", str)
    _check_writable(cfg, ["output"])
    scfg = _solver_cfg(cfg)
    try:
        result = solve_dirichlet(grid, p, bc, cfg=scfg)
    except SolverError as err:
        if err.last is not None:
            save_field(err.last, out + ".last.json")
            print(f"solver failed; last iterate dumped to {out}.last.json", file=sys.stderr)
        print(f"error: {err} {err.diagnostics}", file=sys.stderr)
        return 2
    save_field(result.u, out)
    print(f"solved: residual {result.residual_norm:.3e} in {result.newton_iters} iterations"
          + ("  [regularization-dominated]" if result.regularization_dominated else ""))
    return 0


def cmd_continue(cfg):
    p = _check_p(cfg)
    grid = _build_grid(_need(cfg, "domain", dict))
    step = float(cfg.get("step", 0.1))
    stop_gap = float(cfg.get("stop_gap", 0.05))
    branch_csv = _need(cfg, "branch_csv", str)
    prefix = cfg.get("snapshot_prefix", "snapshot")
    _check_writable(cfg, ["branch_csv"])
    scfg = _solver_cfg(cfg)
    gaps = [float(v) for v in cfg.get("snapshot_min_gaps", [])]
    lams = [float(v) for v in cfg.get("snapshot_lambdas", [])]
    try:
        branch = continue_pullin(grid, p, scfg, step=step, stop_gap=stop_gap,
                                 snapshot_gaps=gaps, snapshot_lambdas=lams)
    except SolverError as err:
        print(f"error: {err} {err.diagnostics}", file=sys.stderr)
        return 2
    _write_text_atomic(branch_csv, branch.to_csv())
    for (kind, value), snap in branch.snapshots.items():
        save_field(snap, f"{prefix}_{kind}_{value:g}.json")
    if branch.lambda_star is not None:
        print(f"lambda* estimate: {branch.lambda_star:.10g}")
    print(f"branch: {len(branch.points)} points, final min_gap "
          f"{branch.points[-1].min_gap:.6g}")
    return 0


def cmd_diagnose(cfg):
    field_path = _need(cfg, "field", str)
    if not os.path.exists(field_path):
        raise ConfigError(f"field file not found: {field_path}")
    u = load_field(field_path)
    centers = [tuple(float(v) for v in c) for c in _need(cfg, "centers", list)]
    radii = [float(r) for r in _need(cfg, "radii", list)]
    for x in centers:
        if len(x) != u.grid.dim:
            raise ConfigError(f"center {x} does not match field dimension {u.grid.dim}")
        if not u.grid.contains_ball(x, max(radii)):
            raise ConfigError(f"center {x} with radius {max(radii)} exits the field hull")
    _check_writable(cfg, ["report_csv", "verdicts_json"])
    seed = int(cfg.get("seed", 0))
    budget = int(cfg.get("holder_budget", 200000))
    delta = cfg.get("delta")
    delta = float(delta) if delta is not None else None
    report = dg.sweep_report(u, centers, radii, delta=delta, seed=seed,
                             holder_budget=budget, threads=_threads())
    if "report_csv" in cfg:
        _write_text_atomic(cfg["report_csv"], report.to_csv())
    if "verdicts_json" in cfg:
        docs = [json.loads(v.to_json()) for v in report.verdicts]
        payload = {"verdicts": docs, "holder": report.holder, "summary": report.summary}
        _write_text_atomic(cfg["verdicts_json"], json.dumps(payload, indent=1,
                                                            default=float) + "\n")
    failed = [v for v in report.verdicts if v.passed is False]
    print(f"diagnose: {len(report.rows)} rows, {len(report.verdicts)} verdicts, "
          f"{len(failed)} failed")
    return 0


def cmd_blowup(cfg):
    field_path = _need(cfg, "field", str)
    if not os.path.exists(field_path):
        raise ConfigError(f"field file not found: {field_path}")
    u = load_field(field_path)
    center = tuple(float(v) for v in _need(cfg, "center", list))
    lambdas = [float(v) for v in _need(cfg, "lambdas", list)]
    admissible = bl.max_admissible_lambda(u, center)
    if admissible <= 0 or max(lambdas) > admissible + 1e-12:
        raise ConfigError(f"lambdas exceed the admissible window ({admissible:.6g}) "
                          f"for center {center}")
    _check_writable(cfg, ["sequence_json", "profile_json"])
    tol = float(cfg.get("tol", 0.05))
    try:
        res = bl.blowup_analyze(u, center, lambdas, tol=tol)
    except (FieldError, ProfileError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    if "sequence_json" in cfg:
        doc = json.loads(res.sequence.to_json())
        doc.update({"verdict": res.verdict(), "profile_residual": res.profile_residual})
        _write_text_atomic(cfg["sequence_json"], json.dumps(doc, indent=1) + "\n")
    if "profile_json" in cfg:
        _write_text_atomic(cfg["profile_json"], res.profile.to_json() + "\n")
    print(f"blowup: verdict {res.verdict()}, final deviation {res.final_deviation:.4g}, "
          f"profile residual {res.profile_residual:.4g}")
    return 0


def cmd_rupture(cfg):
    field_path = _need(cfg, "field", str)
    if not os.path.exists(field_path):
        raise ConfigError(f"field file not found: {field_path}")
    u = load_field(field_path)
    taus = [float(t) for t in _need(cfg, "taus", list)]
    if any(t <= 0 for t in taus):
        raise ConfigError("taus must be positive")
    _check_writable(cfg, ["components_csv", "verdict_json"])
    check = rp.discreteness_check(u, taus)
    masks = check.pop("masks")
    scales = cfg.get("scales")
    finest = masks[-1]
    if scales is None:
        base = max((c.diameter for c in finest.components), default=0.0)
        base = max(base, 8 * u.grid.h)
        scales = list(np.geomspace(base, 10 * base, 5))
    est = rp.box_dimension(masks[0], scales)
    if "components_csv" in cfg:
        lines = ["id,centroid_x,centroid_y,diameter,node_count,tau"]
        for m in masks:
            lines.extend(m.to_csv().splitlines()[1:])
        _write_text_atomic(cfg["components_csv"], "\n".join(lines) + "\n")
    if "verdict_json" in cfg:
        doc = {"discreteness": check,
               "box_dimension": {"scales": est.scales, "counts": est.counts,
                                 "slope": est.slope, "slope_stderr": est.slope_stderr,
                                 "defined": est.defined}}
        _write_text_atomic(cfg["verdict_json"], json.dumps(doc, indent=1, default=float) + "\n")
    print(f"rupture: discreteness {'pass' if check['pass'] else 'fail'}, "
          f"box slope {est.slope:.4g}")
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "continue": cmd_continue,
    "diagnose": cmd_diagnose,
    "blowup": cmd_blowup,
    "rupture": cmd_rupture,
}


def _apply_overrides(cfg, pairs):
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got '{pair}'")
        key, raw = pair.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = cfg
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"--set path '{key}' crosses a non-object value")
        node[parts[-1]] = value
    return cfg


def main(argv=None):
    parser = argparse.ArgumentParser(prog="rupture-lab",
                                     description="rupture solution laboratory")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry (dotted path, JSON value)")
    args = parser.parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a JSON object")
        cfg = _apply_overrides(cfg, getattr(args, "set"))
        return COMMANDS[args.command](cfg)
    except (ConfigError, FieldError, json.JSONDecodeError, FileNotFoundError,
            KeyError, TypeError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
