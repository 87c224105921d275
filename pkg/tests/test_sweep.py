import csv
import json

import numpy as np
import pytest

from rydosc.atomfield import PhysicalParams
from rydosc.errors import ConfigError
from rydosc.sweep import (
    Axis,
    SweepSpec,
    feasibility_report,
    negativity_map_spec,
    observe,
    resolve_params,
    run_sweep,
    save_result,
    simulate_point,
    snapshot_wigner,
    thermal_map_spec,
)

CS = PhysicalParams.cesium_reference()


def small_spec(**kw):
    base = dict(axis1=Axis("G", 0.1, 0.2, 2), axis2=Axis("beta_sq", 0.1, 0.2, 2), k_atoms=10, fixed={"fock_dim": 30})
    base.update(kw)
    return SweepSpec(**base)


def test_single_cell_equals_direct_call():
    spec = small_spec(axis1=Axis("G", 0.2, 0.2, 1), axis2=Axis("beta_sq", 0.2, 0.2, 1))
    res = run_sweep(spec, workers=1)
    rho, _ = simulate_point(resolve_params({"fock_dim": 30}, G=0.2, beta_sq=0.2), 10)
    direct = observe(rho)
    got = res.cell(0, 0)["values"]
    for k, v in direct.items():
        assert got[k] == v


def test_cells_independent_of_axis_order():
    a = run_sweep(small_spec(), workers=1)
    b = run_sweep(small_spec(axis1=Axis("beta_sq", 0.1, 0.2, 2), axis2=Axis("G", 0.1, 0.2, 2)), workers=1)
    assert np.array_equal(a.grid("v_neg"), b.grid("v_neg").T)
    assert a.nearest(0.2, 0.1)["values"] == b.nearest(0.1, 0.2)["values"]


def test_pool_matches_serial():
    a = run_sweep(small_spec(), workers=1)
    b = run_sweep(small_spec(), workers=2)
    assert json.dumps(a.to_dict(), sort_keys=True) == json.dumps(b.to_dict(), sort_keys=True)


def _engine_gap(G, beta_sq=0.2):
    p = resolve_params({"fock_dim": 50}, G=G, beta_sq=beta_sq)
    exact, _ = simulate_point(p, 30, "exact_channel")
    me, _ = simulate_point(p, 30, "master_equation")
    return abs(observe(exact, ("v_neg",))["v_neg"] - observe(me, ("v_neg",))["v_neg"])


@pytest.mark.parametrize("G", [0.02, 0.03, 0.04])
def test_engines_agree_at_weak_coupling(G):
    assert _engine_gap(G) <= 5e-3


@pytest.mark.xfail(strict=True, reason="master equation drops O(G^2) per-atom terms; gap is 6.2e-3 here")
def test_engines_agree_at_upper_edge():
    assert _engine_gap(0.05) <= 5e-3


def test_thermal_map_trends():
    spec = thermal_map_spec(n_gamma=3, n_nbar=2, gamma_max=0.01, nbar_max=0.2)
    spec = SweepSpec(spec.axis1, spec.axis2, spec.fixed, 15, spec.engine, ("v_neg",))
    v = run_sweep(spec, workers=1).grid("v_neg")
    assert np.all(np.diff(v, axis=0) < 0)  # more damping, less negativity
    assert np.all(np.diff(v, axis=1) < 0)  # hotter bath, less negativity


def test_failures_recorded_per_cell():
    spec = small_spec(axis1=Axis("beta_sq", 0.1, 0.3, 2), axis2=Axis("G", 0.2, 0.2, 1), fixed={"fock_dim": 16})
    res = run_sweep(spec, workers=1)
    bad = res.flagged()
    assert len(bad) == 1 and "TruncationError" in bad[0]["diagnostics"]["error"]
    assert np.isnan(res.grid("v_neg")[1, 0])


def test_persistence(tmp_path):
    res = run_sweep(small_spec(), workers=1)
    first = save_result(res, tmp_path)
    second = save_result(res, tmp_path)
    assert first != second and res.spec.digest() in first.name
    doc = json.loads((first / "result.json").read_text())
    assert SweepSpec.from_dict(doc["spec"]) == res.spec
    assert doc["provenance"]["spec_hash"] == res.spec.digest()
    rows = list(csv.DictReader(open(first / "result.csv")))
    assert len(rows) == 4 and float(rows[0]["v_neg"]) == res.cell(0, 0)["values"]["v_neg"]


def test_spec_validation():
    with pytest.raises(ConfigError):
        Axis("G", 0.1, 0.2, 1)
    with pytest.raises(ConfigError):
        Axis("nonsense", 0, 1, 2)
    with pytest.raises(ConfigError):
        Axis("G", 0.0, 1.0, 3, "log")
    with pytest.raises(ConfigError):
        small_spec(axis2=Axis("G2", 0.1, 0.2, 2))
    with pytest.raises(ConfigError):
        SweepSpec.from_dict({"axis1": {"name": "G"}})
    spec = negativity_map_spec()
    assert spec.axis1.values().size == 41 and spec.axis2.values()[-1] == 0.5
    assert np.allclose(Axis("nbar_th", 0.01, 1.0, 3, "log").values(), [0.01, 0.1, 1.0])


def test_snapshot_writes_csv(tmp_path):
    grids = snapshot_wigner(points=((0.0, 0.2), (0.2, 0.2)), k_atoms=5, out_dir=tmp_path, fock_dim=30)
    vac = grids[(0.0, 0.2)]
    xx, pp = np.meshgrid(vac.x, vac.p, indexing="ij")
    assert np.allclose(vac.values, np.exp(-xx**2 - pp**2) / np.pi, atol=1e-14)
    rows = list(csv.reader(open(tmp_path / "wigner_G0.2_b0.2.csv")))
    g = grids[(0.2, 0.2)]
    assert rows[0] == ["x", "p", "W"] and len(rows) == g.x.size * g.p.size + 1
    assert float(rows[1][2]) == pytest.approx(g.values[0, 0], rel=1e-11)


def test_feasibility_reference():
    rep = feasibility_report(CS, temperature=0.01)
    assert rep["G2"] == pytest.approx(rep["G2_closed_form"], rel=1e-6)
    assert rep["atom_spacing_m"] == pytest.approx(1e-4)
    assert rep["single_atom_ok"] and rep["lifetime_ok"]
    assert rep["nbar_th_from_T"] < 1e-6


def test_feasibility_charge_scaling_and_crowding():
    base = feasibility_report(CS)
    doubled = feasibility_report(CS.with_(Q=2 * CS.Q))
    assert doubled["G2"] == pytest.approx(4 * base["G2"], rel=1e-8)
    assert doubled["G_single"] == pytest.approx(2 * base["G_single"], rel=1e-8)
    crowded = feasibility_report(CS.with_(rate=1e7))
    assert not crowded["single_atom_ok"]
