import warnings
from math import pi, sqrt

import numpy as np
import pytest
import sympy as sp

from rydosc.atomfield import (
    E_CHARGE,
    EPS0,
    HBAR,
    PhysicalParams,
    Trajectory,
    closed_form_coupling,
    eliminate_p_manifold,
    four_level_matrices,
    gamma_cartesian,
    gamma_components,
    gamma_quadrupole,
    gamma_single,
    gamma_two_phonon,
    integrated_coupling,
    nbar_from_temperature,
    seven_level_matrices,
)
from rydosc.errors import DomainError

CS = PhysicalParams.cesium_reference()


def _k(params, mu, R):
    X, Y, Z = R
    return params.Q * mu * params.z_osc / (4 * pi * EPS0 * HBAR * (X * X + Y * Y + Z * Z) ** 2.5)


def random_positions(n=10, seed=0):
    rng = np.random.default_rng(seed)
    return [tuple(rng.uniform(-2, 2, 2) * CS.Z0) + (rng.uniform(0.3, 2) * CS.Z0,) for _ in range(n)]


def test_four_level_matrix_values():
    m = four_level_matrices()
    mx = -np.array([[0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0], [1, 0, 0, 0]]) / 3
    my = -np.array([[0, 0, 0, 1j], [0, 0, 1j, 0], [0, -1j, 0, 0], [-1j, 0, 0, 0]]) / 3
    mz = -np.array([[0, -1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]) / 3
    assert np.allclose(m.Mx, mx, atol=1e-15)
    assert np.allclose(m.My, my, atol=1e-15)
    assert np.allclose(m.Mz, mz, atol=1e-15)
    for x in m:
        assert np.allclose(x, x.conj().T)


def test_seven_level_row_values():
    m, mp = seven_level_matrices()
    r2, r6 = sqrt(2), sqrt(6)
    # columns: P1/2,-1/2  P1/2,1/2  P3/2,-1/2  P3/2,1/2  P3/2,3/2
    x = [-1 / 3, 0, 1 / (3 * r2), 0, -1 / r6]
    y = [1j / 3, 0, -1j / (3 * r2), 0, -1j / r6]
    z = [0, -1 / 3, 0, r2 / 3, 0]
    for row, mats in ((0, m), (1, mp)):
        assert np.allclose(mats.Mx[row, 2:], x, atol=1e-15)
        assert np.allclose(mats.My[row, 2:], y, atol=1e-15)
        assert np.allclose(mats.Mz[row, 2:], z, atol=1e-15)
        for a in mats:
            assert np.allclose(a, a.conj().T)


def test_gamma_single_on_axis():
    k = CS.Q * CS.mu0 * CS.z_osc / (4 * pi * EPS0 * HBAR)
    assert gamma_single(CS, (0.0, 0.0, CS.Z0)) == pytest.approx(k * (2 / 3) / CS.Z0**3, rel=1e-14)


def test_gamma_single_zero_crossing():
    assert abs(gamma_single(CS, (sqrt(2) * CS.Z0, 0.0, CS.Z0))) < 1e-12 * abs(gamma_single(CS, (0, 0, CS.Z0)))


def test_gamma_single_shape_against_symbolic():
    A = sp.symbols("A", real=True)
    shape = (3 - (A**2 + 1)) / (A**2 + 1) ** sp.Rational(5, 2) / 2  # (3Z^2 - R^2)/R^5 over its A=0 value, Z=1
    g0 = gamma_single(CS, (0.0, 0.0, CS.Z0))
    for a in np.linspace(-3, 3, 13):
        assert gamma_single(CS, (a * CS.Z0, 0.0, CS.Z0)) / g0 == pytest.approx(float(shape.subs(A, a)), rel=1e-12, abs=1e-15)


def test_profile_y_zero_and_ratio():
    # gamma_z/gamma_x along R = (A Z0, 0, Z0) follows from the component definitions
    A = np.linspace(-3, 3, 61)
    A = A[A != 0]
    gx, gy, gz = gamma_cartesian(CS, (A * CS.Z0, 0 * A, CS.Z0 + 0 * A))
    assert np.all(gy == 0)
    assert np.allclose(gz / gx, (2 - A**2) / (3 * A), rtol=1e-10)


def test_components_symmetry_and_symbolic():
    gp, gm, gz, gpp, gpm, gpz = gamma_components(CS, (0.7 * CS.Z0, 0.0, CS.Z0))
    assert gp == gm and np.isreal(gp)
    assert gamma_components(CS, (0.0, 0.0, CS.Z0))[2] == pytest.approx(gamma_single(CS, (0.0, 0.0, CS.Z0)))
    X, Y, Z = sp.symbols("X Y Z", real=True)
    R2 = X**2 + Y**2 + Z**2
    exprs = [Z * (X + sp.I * Y), Z * (X - sp.I * Y), (3 * Z**2 - R2) / 3]
    pos = (CS.Z0, 0.0, CS.Z0)
    k, kp = _k(CS, CS.mu0, pos), _k(CS, CS.mu0p, pos)
    vals = [complex(e.subs({X: pos[0], Y: pos[1], Z: pos[2]})) for e in exprs]
    got = gamma_components(CS, pos)
    assert np.allclose(got[:3], np.array(vals) * k, rtol=1e-12)
    assert np.allclose(got[3:], np.array(vals) * kp, rtol=1e-12)


@pytest.mark.parametrize("R", random_positions())
def test_two_phonon_identity(R):
    gp, gm, gz, gpp, gpm, gpz = gamma_components(CS, R)
    rhs = 1.5 / CS.Delta * (gpm * gp + gm * gpp + 2 * gz * gpz)
    assert gamma_two_phonon(CS, R) == pytest.approx(rhs.real, rel=1e-12)
    assert abs(rhs.imag) < 1e-12 * abs(rhs.real)


def test_two_phonon_on_axis_and_sign():
    pref = (CS.Q * CS.z_osc / (4 * pi * HBAR * EPS0)) ** 2 * CS.mu0 * CS.mu0p / CS.Delta
    assert gamma_two_phonon(CS, (0, 0, CS.Z0)) == pytest.approx(pref * (4 / 3) / CS.Z0**6, rel=1e-13)
    flipped = CS.with_(Delta=-CS.Delta)
    assert gamma_two_phonon(flipped, (0, 0, CS.Z0)) == pytest.approx(-gamma_two_phonon(CS, (0, 0, CS.Z0)))


def test_quadrupole_examples():
    pref = CS.Q * CS.mu0 * CS.z_osc**2 / (4 * pi * EPS0 * HBAR)
    assert gamma_quadrupole(CS, (0, 0, CS.Z0)) == pytest.approx(pref / CS.Z0**4, rel=1e-13)
    # 5 Z^2 = 3 R^2  <=>  X^2 = (2/3) Z^2
    assert abs(gamma_quadrupole(CS, (sqrt(2 / 3) * CS.Z0, 0, CS.Z0))) < 1e-10 * pref / CS.Z0**4
    X, Y, Z = sp.symbols("X Y Z", real=True)
    R2 = X**2 + Y**2 + Z**2
    expr = Z * (5 * Z**2 - 3 * R2) / 2 / R2 ** sp.Rational(7, 2)
    for R in random_positions(5, seed=3):
        ref = pref * float(expr.subs({X: R[0], Y: R[1], Z: R[2]}))
        assert gamma_quadrupole(CS, R) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("which", ["single", "two_phonon", "quadrupole"])
def test_integrated_matches_closed_form(which):
    assert integrated_coupling(CS, which=which) == pytest.approx(closed_form_coupling(CS, which), rel=1e-8)


def test_cesium_orders_of_magnitude():
    g2 = integrated_coupling(CS, which="two_phonon")
    gq = integrated_coupling(CS, which="quadrupole")
    assert 0.5e-5 <= g2 <= 2e-5
    assert 0.5e-9 <= gq <= 2e-9


def test_integrated_scaling_laws():
    base2 = integrated_coupling(CS, which="two_phonon")
    baseq = integrated_coupling(CS, which="quadrupole")
    assert integrated_coupling(CS.with_(Z0=2 * CS.Z0), which="two_phonon") == pytest.approx(base2 / 32, rel=1e-8)
    assert integrated_coupling(CS.with_(v=2 * CS.v), which="two_phonon") == pytest.approx(base2 / 2, rel=1e-8)
    assert integrated_coupling(CS.with_(Z0=2 * CS.Z0), which="quadrupole") == pytest.approx(baseq / 8, rel=1e-8)
    assert integrated_coupling(CS.with_(v=2 * CS.v), which="quadrupole") == pytest.approx(baseq / 2, rel=1e-8)
    assert integrated_coupling(CS.with_(Q=2 * CS.Q), which="two_phonon") == pytest.approx(4 * base2, rel=1e-8)


def test_explicit_trajectory_equivalent():
    t = Trajectory(CS.v, CS.Z0)
    assert integrated_coupling(CS, t) == pytest.approx(integrated_coupling(CS))
    with pytest.raises(DomainError):
        Trajectory(10.0, 0.0)


@pytest.mark.parametrize("R", random_positions(10, seed=7))
def test_elimination_matches_closed_form(R):
    eff = eliminate_p_manifold(CS, R)
    g2 = gamma_two_phonon(CS, R)
    assert eff.two_phonon.real == pytest.approx(g2, rel=1e-10)
    gp, gm, gz, gpp, gpm, gpz = gamma_components(CS, R)
    assert eff.shift_s == pytest.approx(3 / CS.Delta * (gm * gp + gz**2).real, rel=1e-10)
    assert eff.shift_sp == pytest.approx(3 / CS.Delta * (gpm * gpp + gpz**2).real, rel=1e-10)


def test_elimination_equal_dipoles_equal_shifts():
    eff = eliminate_p_manifold(CS, (0.4 * CS.Z0, 0.0, CS.Z0))
    assert eff.shift_s == pytest.approx(eff.shift_sp, rel=1e-12)


def test_elimination_zero_coupling_and_errors():
    far = (0.0, 0.0, 1e6)  # couplings vanish to double precision relative to Delta
    eff = eliminate_p_manifold(CS.with_(Q=1e-60), far)
    assert np.max(np.abs(eff.block)) < 1e-100
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        eliminate_p_manifold(CS, (0.0, 0.0, CS.Z0))
    with pytest.warns(RuntimeWarning):
        eliminate_p_manifold(CS.with_(Delta=1.0), (0.0, 0.0, CS.Z0))


def test_nbar_from_temperature():
    assert nbar_from_temperature(CS.omega_osc, 1e-6) == 0.0
    T = HBAR * CS.omega_osc / (1.380649e-23 * np.log(2))
    assert nbar_from_temperature(CS.omega_osc, T) == pytest.approx(1.0, rel=1e-12)
    assert nbar_from_temperature(2 * pi * 3e9, 0.01) == pytest.approx(5.6e-7, rel=0.01)
    with pytest.raises(DomainError):
        nbar_from_temperature(CS.omega_osc, 0.0)


def test_params_validation():
    with pytest.raises(DomainError):
        CS.with_(Q=-1.0)
    with pytest.raises(DomainError):
        CS.with_(Delta=0.0)
    assert CS.Q == pytest.approx(200 * E_CHARGE)
