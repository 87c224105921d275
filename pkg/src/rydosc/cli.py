"""Command-line front end: ``rydosc {simulate,sweep,coupling,wigner,feasibility}``.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
failures (truncation, stiffness, grid or quadrature errors).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .atomfield import (
    Trajectory,
    closed_form_coupling,
    gamma_cartesian,
    integrated_coupling,
)
from .config import RunConfig, load_config
from .errors import ConfigError, DomainError, RydoscError
from .observables import minimize_variance, negative_volume, wigner
from .propagator import edge_population
from .sweep import SweepSpec, feasibility_report, run_sweep, save_result, simulate_point, write_wigner_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _dump(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f, indent=1, sort_keys=True, default=_plain)
        f.write("\n")


def _plain(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _stamp():
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    changes = {}
    if args.fock_dim is not None:
        changes["fock_dim"] = args.fock_dim
    if args.render:
        changes["render"] = True
    return cfg.replace(**changes) if changes else cfg


def _wigner_kw(cfg: RunConfig) -> dict:
    return {k: cfg.wigner[k] for k in ("extent", "points") if k in cfg.wigner}


def cmd_simulate(cfg: RunConfig, out: Path) -> dict:
    rho, steady = simulate_point(cfg.model_params(), cfg.k_atoms, cfg.engine)
    with open(out / "rho.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["n", "m", "re", "im"])
        for n in range(rho.dimension):
            for m in range(rho.dimension):
                z = rho.data[n, m]
                w.writerow([n, m, repr(float(z.real)), repr(float(z.imag))])
    grid = wigner(rho, **_wigner_kw(cfg))
    rep = minimize_variance(rho)
    summary = {
        "config": cfg.to_dict(),
        "G": cfg.coupling(),
        "observables": {
            "v_neg": negative_volume(grid),
            "min_variance": rep.variance_min,
            "phi_min": None if rep.degenerate else rep.phi_min,
            "mean_n": rho.mean_number(),
            "purity": rho.purity(),
            "wigner_normalization": grid.normalization(),
        },
        "diagnostics": {
            "top_population": edge_population(rho),
            "truncation_ok": edge_population(rho) <= rho.space.tail_tolerance,
            "steady": steady,
            "phi_degenerate": rep.degenerate,
        },
        "provenance": {"version": __version__, "created": _stamp()},
    }
    _dump(summary, out / "summary.json")
    if cfg.render:
        from .plotting import plot_wigner

        plot_wigner(grid, out / "wigner.png", f"G={cfg.coupling():.3g}, |beta|^2={cfg.beta_sq:g}, k={cfg.k_atoms}")
    return summary


def cmd_sweep(cfg: RunConfig, out: Path, workers: int | None = None) -> Path:
    if not cfg.sweep:
        raise ConfigError("the sweep subcommand needs a 'sweep' block in the configuration")
    spec = SweepSpec.from_dict(cfg.sweep)
    if cfg.fock_dim != RunConfig().fock_dim and "fock_dim" not in spec.fixed:
        spec = SweepSpec.from_dict(dict(spec.to_dict(), fixed=dict(spec.fixed, fock_dim=cfg.fock_dim)))
    result = run_sweep(spec, workers=workers)
    path = save_result(result, out)
    if cfg.render and min(result.axis1.size, result.axis2.size) >= 2:
        from .plotting import plot_sweep

        for obs in spec.observables:
            plot_sweep(result, obs, path / f"{obs}.png")
    return path


def coupling_profile(cfg: RunConfig, a_max: float = 3.0, points: int = 601):
    params = cfg.physical_or_reference()
    A = np.linspace(-a_max, a_max, points)
    R = (A * params.Z0, np.zeros_like(A), np.full_like(A, params.Z0))
    gx, gy, gz = gamma_cartesian(params, R)
    return A, np.asarray(gx), np.asarray(gy), np.asarray(gz)


def cmd_coupling(cfg: RunConfig, out: Path, a_max: float = 3.0, points: int = 601) -> dict:
    params = cfg.physical_or_reference()
    A, gx, gy, gz = coupling_profile(cfg, a_max, points)
    with open(out / "coupling_profile.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["A", "gamma_x", "gamma_y", "gamma_z"])
        for row in zip(A, gx, gy, gz):
            w.writerow([repr(float(v)) for v in row])
    traj = Trajectory.from_params(params)
    summary = {
        "units": "gamma columns in rad/s; G values dimensionless",
        "G_single": integrated_coupling(params, traj, "single"),
        "G2": integrated_coupling(params, traj, "two_phonon"),
        "G2_quad": integrated_coupling(params, traj, "quadrupole"),
        "G_single_closed_form": closed_form_coupling(params, "single"),
        "G2_closed_form": closed_form_coupling(params, "two_phonon"),
        "G2_quad_closed_form": closed_form_coupling(params, "quadrupole"),
    }
    _dump(summary, out / "coupling.json")
    if cfg.render:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        top = np.max(np.abs(gz))
        fig, ax = plt.subplots(figsize=(4.6, 3.2))
        ax.plot(A, gx / top, "--", label="x")
        ax.plot(A, gy / top, "-.", label="y")
        ax.plot(A, gz / top, "-", label="z")
        ax.set_xlabel("A")
        ax.set_ylabel("gamma / max gamma_z")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(out / "coupling_profile.png", dpi=120)
        plt.close(fig)
    return summary


def cmd_wigner(cfg: RunConfig, out: Path):
    rho, _ = simulate_point(cfg.model_params(), cfg.k_atoms, cfg.engine)
    grid = wigner(rho, **_wigner_kw(cfg))
    write_wigner_csv(grid, out / "wigner.csv")
    if cfg.render:
        from .plotting import plot_wigner

        plot_wigner(grid, out / "wigner.png")
    return grid


def cmd_feasibility(cfg: RunConfig, out: Path) -> dict:
    rep = feasibility_report(cfg.physical_or_reference(), temperature=cfg.temperature, nbar_th=cfg.nbar_th or None)
    _dump(rep, out / "feasibility.json")
    return rep


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", default=".", help="output directory (default: current)")
    common.add_argument("--render", action="store_true", help="also write PNG heatmaps")
    common.add_argument("--fock-dim", type=int, help="override the Fock truncation N")
    common.add_argument("--seed", type=int, help="reserved; no stochastic components yet")

    parser = argparse.ArgumentParser(prog="rydosc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="evolve one state, write rho.csv and summary.json")
    p = sub.add_parser("sweep", parents=[common], help="run a 2-D parameter grid")
    p.add_argument("--workers", type=int, help="worker processes (default: all cores)")
    p = sub.add_parser("coupling", parents=[common], help="coupling profile and integrated couplings")
    p.add_argument("--a-max", type=float, default=3.0, help="profile range in units of Z0")
    p.add_argument("--points", type=int, default=601)
    sub.add_parser("wigner", parents=[common], help="Wigner grid of the simulated state as CSV")
    sub.add_parser("feasibility", parents=[common], help="couplings and timing for physical parameters")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            s = cmd_simulate(cfg, out)
            print(json.dumps(s["observables"], default=_plain))
        elif args.command == "sweep":
            print(cmd_sweep(cfg, out, args.workers))
        elif args.command == "coupling":
            s = cmd_coupling(cfg, out, args.a_max, args.points)
            print(json.dumps(s))
        elif args.command == "wigner":
            g = cmd_wigner(cfg, out)
            print(f"V_neg = {negative_volume(g):.6f}")
        elif args.command == "feasibility":
            print(json.dumps(cmd_feasibility(cfg, out), default=_plain))
    except (ConfigError, DomainError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except RydoscError as e:
        print(f"numerical error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
