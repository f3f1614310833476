"""Command-line driver: config in, reports / CSV / SVG out.

Subcommands: dimensions, tube, render, decomposition, all.
Exit codes: 0 success, 1 tolerance failure, 2 config error, 3 budget guard.
All emitted CSV and SVG bytes are deterministic for a fixed config.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import SystemConfig, load_config
from .decomposition import exterior_decomposition_check
from .errors import BudgetError, ConfigError, FractubeError
from .spectrum import Window, complex_dimensions
from .tiling import build_tiling, check_hull_boundary_condition, export_tiling_svg, tiling_tube_oracle
from .tube import tiling_tube_formula


def _g17(x) -> str:
    return format(float(x), ".17g")


def _worker_count() -> int:
    raw = os.environ.get("FRACTUBE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _window(cfg: SystemConfig) -> Window:
    return Window(sigma_min=cfg.window.sigma_min, t_max=cfg.window.t_max)


def _eps_grid(cfg: SystemConfig, tiling) -> np.ndarray:
    eps_max = cfg.evaluation.eps_max if cfg.evaluation.eps_max else tiling.max_inradius()
    eps_min = cfg.evaluation.eps_min if cfg.evaluation.eps_min else eps_max * 1e-3
    if not 0 < eps_min <= eps_max:
        raise ConfigError("need 0 < eps_min <= eps_max")
    return np.geomspace(eps_min, eps_max, cfg.evaluation.grid_points)


def _write(out_dir: str, name: str, text: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def run_dimensions(cfg: SystemConfig, out_dir: str) -> int:
    dims = complex_dimensions(cfg.to_system().ratios, _window(cfg))
    lines = [f"label: {cfg.label}", f"dimension D = {_g17(dims.D)}"]
    if dims.kind == "lattice":
        lat = dims.lattice
        lines.append(
            f"classification: lattice ({lat.certainty}), r = {_g17(lat.r)}, "
            f"exponents = {lat.exponents}, max_error = {_g17(lat.max_error)}"
        )
        lines.append(f"oscillatory period p = {_g17(lat.period)}")
    else:
        lines.append(f"classification: nonlattice (log-ratio defect {_g17(dims.lattice.max_error)})")
        lines.append(f"argument-principle census (upper window): {dims.census}")
    lines.append(f"window: sigma_min = {_g17(dims.window.sigma_min)}, t_max = {_g17(dims.window.t_max)}")
    lines.append(f"roots in window: {len(dims.roots)}")
    lines.append("      Re(omega)           Im(omega)           Re(res)             Im(res)")
    for cd in dims.roots:
        lines.append(
            f"  {_g17(cd.omega.real):>20} {_g17(cd.omega.imag):>20} "
            f"{_g17(cd.residue.real):>20} {_g17(cd.residue.imag):>20}"
        )
    text = "\n".join(lines) + "\n"
    path = _write(out_dir, f"{cfg.label}-dimensions.txt", text)
    sys.stdout.write(text)
    sys.stdout.write(f"wrote {path}\n")
    return 0


def run_tube(cfg: SystemConfig, out_dir: str, tolerance: float = 1e-3) -> int:
    system = cfg.to_system()
    tiling = build_tiling(system)
    dims = complex_dimensions(system.ratios, _window(cfg))
    grid = _eps_grid(cfg, tiling)
    ev = tiling_tube_formula(tiling, dims, grid, n_max=cfg.evaluation.n_max)
    workers = _worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            oracle = np.array(list(pool.map(lambda e: tiling_tube_oracle(tiling, e), grid)))
    else:
        oracle = np.array([tiling_tube_oracle(tiling, e) for e in grid])
    abs_err = np.abs(ev.values - oracle)
    rel_err = abs_err / np.abs(oracle)
    rows = ["eps,V_formula,V_oracle,abs_err,rel_err,tail_bound"]
    for i in range(len(grid)):
        rows.append(
            ",".join(
                _g17(v)
                for v in (grid[i], ev.values[i], oracle[i], abs_err[i], rel_err[i], ev.tail_bounds[i])
            )
        )
    path = _write(out_dir, f"{cfg.label}-tube.csv", "\n".join(rows) + "\n")
    max_rel = float(np.max(rel_err))
    sys.stdout.write(
        f"{cfg.label}: max_rel_err = {_g17(max_rel)} over {len(grid)} eps points "
        f"(n_max = {cfg.evaluation.n_max}, max tail bound = {_g17(np.max(ev.tail_bounds))}, "
        f"max |Im V| = {_g17(ev.max_imag)})\nwrote {path}\n"
    )
    if max_rel > tolerance:
        sys.stdout.write(f"TOLERANCE EXCEEDED: {_g17(max_rel)} > {_g17(tolerance)}\n")
        return 1
    return 0


def run_render(cfg: SystemConfig, out_dir: str, depth: int = 4) -> int:
    if cfg.dimension != 2:
        raise ConfigError("nothing to render: the system lives on the line")
    tiling = build_tiling(cfg.to_system(), depth_cap=max(depth, 12))
    svg = export_tiling_svg(tiling, depth)
    path = _write(out_dir, f"{cfg.label}-depth{depth}.svg", svg)
    sys.stdout.write(f"wrote {path}\n")
    return 0


def run_decomposition(cfg: SystemConfig, out_dir: str) -> int:
    if cfg.dimension != 2:
        raise ConfigError("the decomposition check needs a planar system")
    system = cfg.to_system()
    tiling = build_tiling(system)
    g = tiling.max_inradius()
    eps_values = np.linspace(0.2, 1.0, 5) * g
    report = exterior_decomposition_check(
        system, eps_values, resolution=cfg.evaluation.raster_cells, tiling=tiling
    )
    boundary = check_hull_boundary_condition(system)
    lines = [
        f"label: {cfg.label}",
        f"raster: {cfg.evaluation.raster_cells} cells/side, cell = {_g17(report.cell)}, "
        f"cloud covering radius = {_g17(report.cloud_radius)}",
        f"hull boundary in attractor: {'PASS' if boundary.passed else 'FAIL'} "
        f"(max violation {_g17(boundary.max_violation)}, cloud resolution {_g17(boundary.resolution)})",
        "eps,measured_ext_nbhd,predicted_tiling_plus_hull,rel_gap,within_tol",
    ]
    for i in range(len(report.eps)):
        lines.append(
            ",".join(
                [
                    _g17(report.eps[i]),
                    _g17(report.measured[i]),
                    _g17(report.predicted[i]),
                    _g17(report.rel_gap[i]),
                    "yes" if report.passes[i] else "no",
                ]
            )
        )
    verdict = "HOLDS" if (report.identity_holds and boundary.passed) else "FAILS"
    lines.append(f"verdict: decomposition identity {verdict}")
    text = "\n".join(lines) + "\n"
    path = _write(out_dir, f"{cfg.label}-decomposition.txt", text)
    sys.stdout.write(text)
    sys.stdout.write(f"wrote {path}\n")
    return 0


def run_all(cfg: SystemConfig, out_dir: str, tolerance: float, depth: int) -> int:
    worst = run_dimensions(cfg, out_dir)
    worst = max(worst, run_tube(cfg, out_dir, tolerance))
    if cfg.dimension == 2:
        worst = max(worst, run_render(cfg, out_dir, depth))
        worst = max(worst, run_decomposition(cfg, out_dir))
    else:
        sys.stdout.write("render/decomposition skipped: one-dimensional system\n")
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fractube", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("dimensions", "tube", "render", "decomposition", "all"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a TOML system config")
        p.add_argument("--out", default=".", help="output directory")
        if name in ("tube", "all"):
            p.add_argument("--nmax", type=int, default=None, help="lattice ladder truncation")
            p.add_argument("--tolerance", type=float, default=1e-3)
            p.add_argument("--grid", type=int, default=None, help="number of eps grid points")
        if name in ("render", "all"):
            p.add_argument("--depth", type=int, default=4)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if getattr(args, "nmax", None):
            cfg = _override_eval(cfg, n_max=args.nmax)
        if getattr(args, "grid", None):
            cfg = _override_eval(cfg, grid_points=args.grid)
        if args.command == "dimensions":
            return run_dimensions(cfg, args.out)
        if args.command == "tube":
            return run_tube(cfg, args.out, args.tolerance)
        if args.command == "render":
            return run_render(cfg, args.out, args.depth)
        if args.command == "decomposition":
            return run_decomposition(cfg, args.out)
        return run_all(cfg, args.out, args.tolerance, args.depth)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except BudgetError as exc:
        sys.stderr.write(f"budget guard: {exc}\n")
        return 3
    except FractubeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def _override_eval(cfg: SystemConfig, **kwargs) -> SystemConfig:
    from dataclasses import replace

    return replace(cfg, evaluation=replace(cfg.evaluation, **kwargs))


if __name__ == "__main__":
    sys.exit(main())
