"""Batch command line front end.

Every command reads an optional JSON run-config (``--config``); command line
flags override values from the file.  The effective configuration is
recorded in the ``#`` header line of every CSV written.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure
in ``--strict`` mode (or a failed ``selfcheck``).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import __version__
from .closedform import identity_model, mp_density, mp_params, mp_stieltjes
from .errors import SepLSDError
from .io import model_from_dict, read_sample, write_csv, write_density, write_sample
from .lsd import cdf_from_density, default_grid, invert_density, point_mass_zero, stieltjes_batch
from .measure import measure_from_dict, validate_model
from .metrics import compare, kolmogorov_distance
from .simulator import esd, simulate_exponential_study
from .solver import SolverConfig, solve_grid

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(Exception):
    pass


def _line_of(text: str, key: str) -> int | None:
    for i, line in enumerate(text.splitlines(), start=1):
        if f'"{key}"' in line:
            return i
    return None


def _read_json(path: str) -> tuple[dict, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}:1: top level must be a JSON object")
    return data, text


def _load_model(value, origin: str = "<config>", text: str = ""):
    if isinstance(value, str):
        data, text = _read_json(value)
        origin = value
    elif isinstance(value, dict):
        data = value
    else:
        raise ConfigError("config needs a 'model' (file path or inline object)")
    for key in ("c", "H", "G"):
        try:
            if key not in data:
                raise KeyError(f"missing '{key}'")
            if key == "c":
                float(data["c"])
            else:
                measure_from_dict(data[key])
        except (SepLSDError, KeyError, TypeError, ValueError, AttributeError) as exc:
            line = _line_of(text, key) if text else None
            anchor = f"{origin}:{line}" if line else origin
            raise ConfigError(f"{anchor}: invalid model field '{key}': {exc}") from exc
    spec = model_from_dict(data)
    report = validate_model(spec)
    if not report.ok:
        raise ConfigError(f"{origin}: model fails validation: " + "; ".join(report.failures))
    return spec


def _solver_config(cfg: dict, args, **defaults) -> SolverConfig:
    params = dict(defaults)
    params.update(cfg.get("solver", {}))
    for name in ("tol", "max_iters", "damping", "method"):
        v = getattr(args, name, None)
        if v is not None:
            params[name] = v
    known = {f.name for f in fields(SolverConfig)}
    unknown = set(params) - known
    if unknown:
        raise ConfigError(f"unknown solver option(s): {', '.join(sorted(unknown))}")
    try:
        return SolverConfig(**params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from exc


def _grid(cfg: dict, key: str) -> np.ndarray | None:
    if key in cfg:
        g = cfg[key]
        if isinstance(g, list):
            return np.asarray(g, dtype=float)
        num = int(g.get("num", 0))
        if num < 1:
            raise ConfigError(f"{key}: grid is empty")
        if g.get("spacing", "linear") == "log":
            return np.geomspace(float(g["start"]), float(g["stop"]), num)
        return np.linspace(float(g["start"]), float(g["stop"]), num)
    return None


def _zs(cfg: dict) -> np.ndarray:
    if "zs" in cfg:
        zs = np.array([complex(re, im) for re, im in cfg["zs"]])
    elif "z_grid" in cfg:
        g = cfg["z_grid"]
        num = int(g.get("num", 0))
        if num < 1:
            raise ConfigError("z_grid: grid is empty")
        re = np.linspace(float(g["re_start"]), float(g["re_stop"]), num)
        zs = re + 1j * float(g["im"])
    else:
        raise ConfigError("config needs 'zs' or 'z_grid'")
    if zs.size == 0:
        raise ConfigError("z grid is empty")
    if np.any(zs.imag <= 0):
        raise ConfigError("all z must have Im z > 0")
    return zs


@contextmanager
def _output(path: str | None):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as f:
            yield f


def _merged(args) -> dict:
    cfg: dict = {}
    if args.config:
        cfg, _ = _read_json(args.config)
    for key in ("model", "out", "c", "K", "p", "seed", "alpha", "beta", "sample", "reference"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "seeds", None):
        cfg["seeds"] = args.seeds
    return cfg


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("SEPLSD_THREADS", "1")))
    except ValueError:
        return 1


def cmd_solve(args) -> int:
    cfg = _merged(args)
    spec = _load_model(cfg.get("model"))
    zs = _zs(cfg)
    config = _solver_config(cfg, args, homotopy=False)
    sol = solve_grid(spec, zs, config, workers=_workers())
    K = spec.K
    cols = ["re_z", "im_z"]
    cols += [f"{p}_{v}{r}" for v in ("h", "g") for r in range(1, K + 1) for p in ("re", "im")]
    cols += ["residual", "iterations", "converged"]
    rows = []
    for i in range(len(sol)):
        row = [sol.z[i].real, sol.z[i].imag]
        for arr in (sol.h[i], sol.g[i]):
            for v in arr:
                row += [v.real, v.imag]
        row += [sol.residual[i], int(sol.iterations[i]), bool(sol.converged[i])]
        rows.append(row)
    meta = {"command": "solve", "model": spec.digest(), "solver": asdict(config), "version": __version__}
    with _output(cfg.get("out")) as f:
        write_csv(f, cols, rows, meta)
    if args.strict and not np.all(sol.converged):
        print(f"{int((~sol.converged).sum())} point(s) did not converge", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_density(args) -> int:
    cfg = _merged(args)
    spec = _load_model(cfg.get("model"))
    xs = _grid(cfg, "x_grid")
    if xs is None:
        xs = default_grid(spec, int(cfg.get("grid_points", 2000)))
    if xs.size == 0:
        raise ConfigError("x grid is empty")
    if np.any(xs <= 0):
        raise ConfigError("x grid must be positive (the atom at 0 is reported separately)")
    config = _solver_config(cfg, args, method="newton", tol=1e-10)
    eps = cfg.get("eps_schedule", [1e-2, 3e-3, 1e-3, 3e-4])
    try:
        grid = invert_density(spec, xs, config, eps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    summary = {
        "point_mass_zero": grid.point_mass_zero,
        "mass_defect": grid.total_mass - 1.0,
        "clipped_fraction": grid.clipped_fraction,
        "nonconverged_fraction": grid.nonconverged_fraction,
    }
    meta = {"command": "density", "model": spec.digest(), "solver": asdict(config), "version": __version__}
    with _output(cfg.get("out")) as f:
        write_density(f, grid, meta)
    print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    if args.strict and grid.nonconverged_fraction > 0:
        return EXIT_NUMERIC
    return EXIT_OK


def _study_params(cfg: dict) -> tuple[float, int, int]:
    try:
        c, K, p = float(cfg["c"]), int(cfg.get("K", 1)), int(cfg.get("p", 500))
    except KeyError as exc:
        raise ConfigError(f"missing parameter {exc}") from exc
    if not c > 0 or K < 1 or p < 2:
        raise ConfigError("need c > 0, K >= 1, p >= 2")
    return c, K, p


def cmd_simulate(args) -> int:
    cfg = _merged(args)
    c, K, p = _study_params(cfg)
    seed = int(cfg.get("seed", 0))
    basis = cfg.get("basis_mode", "haar")
    sample, model = simulate_exponential_study(c, K, p, seed, basis_mode=basis)
    meta = {"command": "simulate", "c": c, "basis_mode": basis, "model": model.digest(), "version": __version__}
    with _output(cfg.get("out")) as f:
        write_sample(f, sample, meta)
    return EXIT_OK


def _predicted_cdf(model, cfg, args):
    config = _solver_config(cfg, args, method="newton", tol=1e-10)
    xs = default_grid(model, int(cfg.get("grid_points", 800)))
    grid = invert_density(model, xs, config, cfg.get("eps_schedule", [1e-2, 3e-3, 1e-3, 3e-4]))
    return grid, cdf_from_density(grid)


def cmd_compare(args) -> int:
    cfg = _merged(args)
    runs = []
    if "sample" in cfg:
        sample = read_sample(cfg["sample"])
        emp = esd(sample)
        if "reference" in cfg:
            ref = esd(read_sample(cfg["reference"]))
            rep = compare(emp, ref)
        else:
            model = _load_model(cfg.get("model"))
            grid, pred = _predicted_cdf(model, cfg, args)
            rep = compare(emp, pred, grid)
        runs.append({"sample": cfg["sample"], **rep.to_dict()})
    else:
        c, K, p = _study_params(cfg)
        for seed in cfg.get("seeds", [cfg.get("seed", 0)]):
            sample, model = simulate_exponential_study(c, K, p, int(seed))
            grid, pred = _predicted_cdf(model, cfg, args)
            rep = compare(esd(sample), pred, grid)
            runs.append({"K": K, "c": c, "p": p, "seed": int(seed), **rep.to_dict()})
    out = {"runs": runs, "max_kolmogorov": max(r["kolmogorov"] for r in runs)}
    with _output(cfg.get("out")) as f:
        f.write(json.dumps(out, indent=2, sort_keys=True) + "\n")
    if args.strict and any(r["warnings"] for r in runs):
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_closedform(args) -> int:
    cfg = _merged(args)
    try:
        params = mp_params(cfg.get("alpha", [1.0]), cfg.get("beta", [1.0]), float(cfg.get("c", 0.5)))
    except (SepLSDError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    lo, hi = params.edges
    meta = {"command": "closedform", "gamma": params.gamma, "c": params.c,
            "edges": [lo, hi], "point_mass_zero": params.point_mass_zero, "version": __version__}
    with _output(cfg.get("out")) as f:
        if "zs" in cfg or "z_grid" in cfg:
            zs = _zs(cfg)
            s = np.atleast_1d(mp_stieltjes(zs, params))
            write_csv(f, ["re_z", "im_z", "re_s", "im_s"], zip(zs.real, zs.imag, s.real, s.imag), meta)
        else:
            xs = _grid(cfg, "x_grid")
            if xs is None:
                xs = np.linspace(max(lo, 1e-6) * 0.5, hi * 1.1, 200)
            if xs.size == 0:
                raise ConfigError("x grid is empty")
            write_csv(f, ["x", "density"], zip(xs, np.atleast_1d(mp_density(xs, params))), meta)
    return EXIT_OK


def selfcheck() -> list[tuple[str, bool, str]]:
    """Small battery of analytic checks; returns (name, passed, detail)."""
    out = []
    spec = identity_model([1.0, 2.0], [1.0, 0.5], 0.5)
    params = mp_params([1.0, 2.0], [1.0, 0.5], 0.5)
    zs = np.linspace(0.1, 5, 25) + 0.5j
    sol = solve_grid(spec, zs, SolverConfig(homotopy=False))
    s = stieltjes_batch(spec, sol)
    err = float(np.abs(s["primary"] - mp_stieltjes(zs, params)).max())
    out.append(("closed-form agreement", err <= 1e-8, f"max error {err:.2e}"))
    tri = float(max(np.abs(s["primary"] - s["alt1"]).max(), np.abs(s["primary"] - s["alt2"]).max()))
    out.append(("characterization agreement", tri <= 1e-8, f"max gap {tri:.2e}"))
    m0 = point_mass_zero(identity_model([1.0], [1.0], 2.5))
    out.append(("point mass at zero", m0 == 1 - 1 / 2.5, f"{m0}"))
    grid = invert_density(spec, default_grid(spec, 1500), SolverConfig(method="newton", tol=1e-10))
    out.append(("mass conservation", abs(grid.total_mass - 1) <= 5e-3, f"total {grid.total_mass:.5f}"))
    emp = esd(simulate_exponential_study(0.5, 1, 200, 1)[0])
    out.append(("ESD self distance", kolmogorov_distance(emp, emp) == 0.0, "0"))
    return out


def cmd_selfcheck(args) -> int:
    results = selfcheck()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="seplsd", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, model=True):
        p.add_argument("--config", help="JSON run-config file")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--strict", action="store_true", help="exit 3 on numerical failure")
        if model:
            p.add_argument("--model", help="JSON model file {c, H, G}")

    def solver_flags(p):
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iters", dest="max_iters", type=int)
        p.add_argument("--damping", type=float)
        p.add_argument("--method", choices=["picard", "newton"])

    def study_flags(p):
        p.add_argument("--c", type=float)
        p.add_argument("--K", type=int)
        p.add_argument("--p", type=int)

    p = sub.add_parser("solve", help="solve the fixed-point system on a z grid")
    common(p)
    solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("density", help="invert the Stieltjes transform on an x grid")
    common(p)
    solver_flags(p)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("simulate", help="simulate the exponential-scalings study")
    common(p, model=False)
    study_flags(p)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="Kolmogorov distance between simulated ESD and predicted LSD")
    common(p)
    study_flags(p)
    solver_flags(p)
    p.add_argument("--seed", type=int)
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--sample", help="eigenvalue CSV to compare instead of simulating")
    p.add_argument("--reference", help="second eigenvalue CSV (compare two samples)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("closedform", help="Marchenko-Pastur transform/density for identity scalings")
    common(p, model=False)
    p.add_argument("--alpha", type=float, nargs="+")
    p.add_argument("--beta", type=float, nargs="+")
    p.add_argument("--c", type=float)
    p.set_defaults(func=cmd_closedform)

    p = sub.add_parser("selfcheck", help="run a quick battery of analytic checks")
    p.set_defaults(func=cmd_selfcheck)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError, TypeError, AttributeError, IndexError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
