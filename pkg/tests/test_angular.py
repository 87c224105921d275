from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from sympy import Rational
from sympy.physics.wigner import wigner_3j as sym_3j
from sympy.physics.wigner import wigner_6j as sym_6j

from rydosc.angular import cartesian_elements, dipole_matrix_element, wigner_3j, wigner_6j
from rydosc.errors import DomainError

H = Fraction(1, 2)


def test_3j_closed_form():
    assert wigner_3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / np.sqrt(3), abs=1e-15)


def test_3j_selection_rules():
    assert wigner_3j(1, 1, 1, 1, 1, 0) == 0.0
    assert wigner_3j(1, 1, 3, 0, 0, 0) == 0.0
    assert wigner_3j(1, 1, 1, 0, 0, 0) == 0.0  # odd sum with all m = 0


def test_3j_half_integer_against_sympy():
    val = wigner_3j(H, 1, H, H, 0, -H)
    assert val == pytest.approx(float(sym_3j(Rational(1, 2), 1, Rational(1, 2), Rational(1, 2), 0, Rational(-1, 2))), abs=1e-14)


def _halves(lo, hi):
    return [Fraction(k, 2) for k in range(2 * lo, 2 * hi + 1)]


def test_3j_exhaustive_against_sympy():
    js = _halves(0, 2)
    count = 0
    for j1, j2, j3 in product(js, js, js):
        for m1, m2 in product(_halves(-2, 2), _halves(-2, 2)):
            m3 = -m1 - m2
            ours = wigner_3j(j1, j2, j3, m1, m2, m3)
            if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
                assert ours == 0.0
                continue
            if (j1 - m1).denominator != 1 or (j2 - m2).denominator != 1 or (j3 - m3).denominator != 1:
                continue
            ref = float(sym_3j(*(Rational(x.numerator, x.denominator) for x in (j1, j2, j3, m1, m2, m3))))
            assert ours == pytest.approx(ref, abs=1e-12)
            count += 1
    assert count > 200


def test_6j_closed_form_and_triangle():
    # {a b c; 0 c b} = (-1)^(a+b+c) / sqrt((2b+1)(2c+1))
    assert wigner_6j(1, 1, 1, 0, 1, 1) == pytest.approx(-1 / 3, abs=1e-15)
    assert wigner_6j(1, 1, 3, 1, 1, 1) == 0.0


def test_6j_against_sympy():
    js = _halves(0, 2)
    rng = np.random.default_rng(5)
    checked = 0
    for _ in range(2000):
        args = [js[i] for i in rng.integers(0, len(js), 6)]
        ours = wigner_6j(*args)
        try:
            ref = float(sym_6j(*(Rational(x.numerator, x.denominator) for x in args)))
        except ValueError:
            # sympy rejects non-integer perimeters; ours must be zero there
            assert ours == 0.0
            continue
        assert ours == pytest.approx(ref, abs=1e-12)
        checked += 1
    assert checked > 50


def test_non_half_integer_rejected():
    with pytest.raises(DomainError):
        wigner_3j(0.3, 1, 1, 0, 0, 0)
    with pytest.raises(DomainError):
        wigner_6j(1, 1, 1, 1, 1, 0.25)
    with pytest.raises(DomainError):
        dipole_matrix_element(1, H, H, 2, 0, H, H)


def test_dipole_z_element():
    # |S1/2, 1/2> <-> |P1/2, 1/2> carries -1/3 in M_z
    assert dipole_matrix_element(1, H, H, 0, 0, H, H) == pytest.approx(-1 / 3, abs=1e-15)


def test_dipole_forbidden_q():
    assert dipole_matrix_element(1, H, H, 1, 0, H, H) == 0.0
    assert dipole_matrix_element(0, H, H, 0, 0, H, H) == 0.0  # parity


def test_cartesian_hermitian_pair():
    a, b = (0, H, -H), (1, H, H)
    fwd = cartesian_elements(a, b)
    back = cartesian_elements(b, a)
    assert np.allclose(fwd, np.conj(back), atol=1e-15)
