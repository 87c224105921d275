"""Parameter grids over the two-phonon scheme, Wigner snapshots and the feasibility report.

A cell is one full simulation: ``k`` atoms through the exact channel, or
``k/r`` of master-equation evolution. Cells share nothing and run in a
process pool; results are gathered back in grid order.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .atomfield import PhysicalParams, closed_form_coupling, integrated_coupling, nbar_from_temperature
from .errors import ConfigError, RydoscError
from .fock import AtomState, FockSpace, thermal_state, vacuum
from .lindblad import MasterEquation, ThermalBath, evolve, thermal_step
from .observables import minimize_variance, negative_volume, wigner
from .propagator import PassageChannel, edge_population, iterate_passages

ENGINES = ("exact_channel", "master_equation")
OBSERVABLES = ("v_neg", "min_variance", "phi_min", "mean_n")
SCALES = ("linear", "log")

#: model parameters a cell needs; axes override entries of ``fixed``
DEFAULTS = {
    "mode": "two_phonon",
    "G": 0.2,
    "beta_sq": 0.2,
    "theta": 0.0,
    "gamma_over_rate": 0.0,
    "nbar_th": 0.0,
    "init": "vacuum",
    "nbar_init": None,
    "fock_dim": 40,
}
ALIASES = {"G2": "G", "G_2": "G", "beta2": "beta_sq", "Gamma_m_over_r": "gamma_over_rate"}

#: parameter points marked in the negativity/squeezing maps, as (G2, |beta|^2)
MARKED_POINTS = ((0.06, 0.1), (0.2, 0.2), (1.0, 0.1), (1.0, 0.4))


def _canonical(name: str) -> str:
    name = ALIASES.get(name, name)
    if name not in DEFAULTS:
        raise ConfigError(f"unknown model parameter {name!r}")
    return name


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    n_points: int
    scale: str = "linear"

    def __post_init__(self):
        _canonical(self.name)
        if self.scale not in SCALES:
            raise ConfigError(f"axis scale must be one of {SCALES}")
        if int(self.n_points) != self.n_points or self.n_points < 1:
            raise ConfigError("axis needs a positive integer number of points")
        if self.n_points == 1 and self.min != self.max:
            raise ConfigError("a single-point axis needs min == max")
        if self.scale == "log" and not (self.min > 0 and self.max > 0):
            raise ConfigError("log axis bounds must be positive")

    def values(self) -> np.ndarray:
        if self.n_points == 1:
            return np.array([float(self.min)])
        if self.scale == "log":
            return np.geomspace(self.min, self.max, int(self.n_points))
        return np.linspace(self.min, self.max, int(self.n_points))


@dataclass(frozen=True)
class SweepSpec:
    axis1: Axis
    axis2: Axis
    fixed: dict = field(default_factory=dict)
    k_atoms: int = 30
    engine: str = "exact_channel"
    observables: tuple = OBSERVABLES

    def __post_init__(self):
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}")
        bad = set(self.observables) - set(OBSERVABLES)
        if bad:
            raise ConfigError(f"unknown observables {sorted(bad)}")
        if int(self.k_atoms) != self.k_atoms or self.k_atoms < 0:
            raise ConfigError("k_atoms must be a non-negative integer")
        if _canonical(self.axis1.name) == _canonical(self.axis2.name):
            raise ConfigError("the two axes must vary different parameters")
        for key in self.fixed:
            _canonical(key)
        object.__setattr__(self, "observables", tuple(self.observables))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["observables"] = list(self.observables)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepSpec":
        try:
            return cls(
                axis1=Axis(**d["axis1"]),
                axis2=Axis(**d["axis2"]),
                fixed=dict(d.get("fixed", {})),
                k_atoms=d.get("k_atoms", 30),
                engine=d.get("engine", "exact_channel"),
                observables=tuple(d.get("observables", OBSERVABLES)),
            )
        except (KeyError, TypeError) as e:
            raise ConfigError(f"malformed sweep spec: {e}") from None

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def negativity_map_spec(n_g: int = 41, n_beta: int = 26, k_atoms: int = 30, **fixed) -> SweepSpec:
    """G2 in [0, 1] by |beta|^2 in [0, 0.5], vacuum start, exact channel."""
    return SweepSpec(
        Axis("G", 0.0, 1.0, n_g),
        Axis("beta_sq", 0.0, 0.5, n_beta),
        fixed=fixed,
        k_atoms=k_atoms,
        engine="exact_channel",
    )


def thermal_map_spec(
    G: float = 0.2, beta_sq: float = 0.2, n_gamma: int = 31, n_nbar: int = 31, gamma_max: float = 0.02, nbar_max: float = 1.0
) -> SweepSpec:
    """Gamma_m/r by bath occupation, thermal start at the bath occupation, master equation."""
    return SweepSpec(
        Axis("gamma_over_rate", 0.0, gamma_max, n_gamma),
        Axis("nbar_th", 0.0, nbar_max, n_nbar),
        fixed={"G": G, "beta_sq": beta_sq, "init": "thermal"},
        k_atoms=30,
        engine="master_equation",
    )


# ---------------------------------------------------------------------------
# single cell


def resolve_params(fixed: dict, **overrides) -> dict:
    p = dict(DEFAULTS)
    for k, v in list(fixed.items()) + list(overrides.items()):
        p[_canonical(k)] = v
    if p["init"] not in ("vacuum", "thermal"):
        raise ConfigError("init must be 'vacuum' or 'thermal'")
    return p


def initial_state(p: dict, space: FockSpace):
    if p["init"] == "vacuum":
        return vacuum(space)
    nbar = p["nbar_init"] if p["nbar_init"] is not None else p["nbar_th"]
    return thermal_state(space, float(nbar))


def simulate_point(p: dict, k_atoms: int, engine: str = "exact_channel", **kw):
    """Oscillator state after ``k_atoms`` atoms (or ``k_atoms/r`` of evolution).

    Returns ``(state, steady)``; ``steady`` is None for the exact channel.
    """
    space = FockSpace(int(p["fock_dim"]))
    atom = AtomState.from_population(float(p["beta_sq"]), float(p["theta"]))
    rho0 = initial_state(p, space)
    g = float(p["gamma_over_rate"])
    bath = ThermalBath(g, float(p["nbar_th"])) if g > 0 else None
    if engine == "exact_channel":
        ch = PassageChannel(p["mode"], float(p["G"]), atom)
        between = thermal_step(bath, 1.0, space) if bath else None
        return iterate_passages(ch, rho0, int(k_atoms), between=between), None
    if engine == "master_equation":
        me = MasterEquation(p["mode"], float(p["G"]), atom, 1.0, bath)
        ev = evolve(me, rho0, float(k_atoms), **kw)
        return ev.final, ev.steady
    raise ConfigError(f"engine must be one of {ENGINES}")


def observe(rho, observables=OBSERVABLES) -> dict:
    out = {}
    if "v_neg" in observables:
        out["v_neg"] = negative_volume(wigner(rho))
    if "min_variance" in observables or "phi_min" in observables:
        rep = minimize_variance(rho)
        if "min_variance" in observables:
            out["min_variance"] = rep.variance_min
        if "phi_min" in observables:
            out["phi_min"] = float("nan") if rep.degenerate else rep.phi_min
    if "mean_n" in observables:
        out["mean_n"] = rho.mean_number()
    return out


def evaluate_cell(task):
    """Worker entry point: ``(i, j, params, k, engine, observables)`` -> cell record."""
    i, j, p, k, engine, observables = task
    diag = {"top_population": None, "truncation_ok": False, "steady": None, "error": None}
    values = {name: float("nan") for name in observables}
    try:
        rho, steady = simulate_point(p, k, engine)
        edge = edge_population(rho)
        diag.update(top_population=edge, truncation_ok=edge <= rho.space.tail_tolerance, steady=steady)
        values.update(observe(rho, observables))
    except RydoscError as e:
        diag["error"] = f"{type(e).__name__}: {e}"
    return {"i": i, "j": j, "values": values, "diagnostics": diag}


# ---------------------------------------------------------------------------
# grids


@dataclass
class SweepResult:
    spec: SweepSpec
    axis1: np.ndarray
    axis2: np.ndarray
    cells: list
    provenance: dict

    def grid(self, observable: str) -> np.ndarray:
        out = np.full((self.axis1.size, self.axis2.size), np.nan)
        for c in self.cells:
            out[c["i"], c["j"]] = c["values"].get(observable, np.nan)
        return out

    def cell(self, i: int, j: int) -> dict:
        return self.cells[i * self.axis2.size + j]

    def nearest(self, v1: float, v2: float) -> dict:
        return self.cell(int(np.argmin(np.abs(self.axis1 - v1))), int(np.argmin(np.abs(self.axis2 - v2))))

    def flagged(self) -> list:
        return [c for c in self.cells if c["diagnostics"]["error"] or not c["diagnostics"]["truncation_ok"]]

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "provenance": self.provenance,
            "axes": {self.spec.axis1.name: self.axis1.tolist(), self.spec.axis2.name: self.axis2.tolist()},
            "cells": self.cells,
        }


def provenance(spec: SweepSpec) -> dict:
    fock_dim = resolve_params(spec.fixed)["fock_dim"]
    return {
        "engine": spec.engine,
        "fock_dim": fock_dim,
        "tail_tolerance": FockSpace(fock_dim).tail_tolerance,
        "rtol": 1e-8,
        "atol": 1e-10,
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "spec_hash": spec.digest(),
    }


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Evaluate every cell; per-cell failures are recorded, not raised.

    ``workers=1`` runs serially in this process; otherwise a process pool
    (default: all cores) is used and results are put back in grid order.
    """
    a1, a2 = spec.axis1.values(), spec.axis2.values()
    tasks = []
    for i, v1 in enumerate(a1):
        for j, v2 in enumerate(a2):
            p = resolve_params(spec.fixed, **{spec.axis1.name: float(v1), spec.axis2.name: float(v2)})
            tasks.append((i, j, p, int(spec.k_atoms), spec.engine, spec.observables))
    workers = workers or len(os.sched_getaffinity(0)) or 1
    if workers == 1 or len(tasks) == 1:
        cells = [evaluate_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            cells = list(pool.map(evaluate_cell, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
    cells.sort(key=lambda c: (c["i"], c["j"]))
    return SweepResult(spec, a1, a2, cells, provenance(spec))


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def run_directory(root, digest: str) -> Path:
    """Fresh ``<root>/<UTC timestamp>-<digest>``; never reuses an existing directory."""
    root = Path(root)
    stamp = time.strftime("%Y%m%dT%H%M%SZ", time.gmtime())
    base = root / f"{stamp}-{digest}"
    path, n = base, 1
    while path.exists():
        path = Path(f"{base}.{n}")
        n += 1
    path.mkdir(parents=True)
    return path


def save_result(result: SweepResult, root) -> Path:
    """Write ``result.json`` and ``result.csv`` into a new run directory and return it."""
    path = run_directory(root, result.spec.digest())
    doc = result.to_dict()
    doc["provenance"] = dict(doc["provenance"], created=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()))
    with open(path / "result.json", "w") as f:
        json.dump(doc, f, indent=1, default=_json_default, allow_nan=True)
    obs = list(result.spec.observables)
    with open(path / "result.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow([result.spec.axis1.name, result.spec.axis2.name] + obs + ["truncation_ok", "error"])
        for c in result.cells:
            d = c["diagnostics"]
            w.writerow(
                [repr(float(result.axis1[c["i"]])), repr(float(result.axis2[c["j"]]))]
                + [repr(float(c["values"][k])) for k in obs]
                + [int(bool(d["truncation_ok"])), d["error"] or ""]
            )
    return path


# ---------------------------------------------------------------------------
# snapshots and feasibility


def write_wigner_csv(grid, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "p", "W"])
        for i, x in enumerate(grid.x):
            for j, p in enumerate(grid.p):
                w.writerow([f"{x:.10g}", f"{p:.10g}", f"{grid.values[i, j]:.12e}"])


def snapshot_wigner(points=MARKED_POINTS, k_atoms: int = 30, out_dir=None, **fixed) -> dict:
    """Wigner grids at ``(G2, |beta|^2)`` points; written as CSV (x, p, W) when ``out_dir`` is given."""
    grids = {}
    for g2, b in points:
        p = resolve_params(fixed, G=float(g2), beta_sq=float(b))
        rho, _ = simulate_point(p, k_atoms)
        grids[(g2, b)] = wigner(rho)
        if out_dir is not None:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            write_wigner_csv(grids[(g2, b)], Path(out_dir) / f"wigner_G{g2:g}_b{b:g}.csv")
    return grids


#: Rydberg-state lifetime for n ~ 100 (s)
RYDBERG_LIFETIME = 100e-6


def feasibility_report(params: PhysicalParams, temperature: float | None = None, nbar_th: float | None = None) -> dict:
    """Couplings, thermal occupation and timing for a physical parameter set.

    The single-atom condition asks for an atom spacing ``v/r`` at least ten
    times the interaction length ``2 Z0``; the lifetime condition asks for the
    flight time ``Z0/v`` to be below a tenth of the Rydberg lifetime.
    """
    spacing = params.v / params.rate
    t_int = params.Z0 / params.v
    rep = {
        "G_single": integrated_coupling(params, which="single"),
        "G2": integrated_coupling(params, which="two_phonon"),
        "G2_quad": integrated_coupling(params, which="quadrupole"),
        "G2_closed_form": closed_form_coupling(params, "two_phonon"),
        "G2_quad_closed_form": closed_form_coupling(params, "quadrupole"),
        "atom_spacing_m": spacing,
        "interaction_time_s": t_int,
        "atoms_in_flight": 2 * params.Z0 * params.rate / params.v,
        "single_atom_ok": spacing >= 10 * 2 * params.Z0,
        "lifetime_ok": t_int <= 0.1 * RYDBERG_LIFETIME,
    }
    if temperature is not None:
        rep["temperature_K"] = temperature
        rep["nbar_th_from_T"] = nbar_from_temperature(params.omega_osc, temperature)
    if nbar_th is not None:
        rep["nbar_th"] = nbar_th
    return rep
