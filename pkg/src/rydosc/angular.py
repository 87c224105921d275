"""Wigner 3j/6j symbols and electric-dipole matrix elements between |L_J, m_J> states.

Symbols are evaluated from the Racah sums in exact rational arithmetic; only
the final square root is taken in floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import factorial, sqrt

from .errors import DomainError

#: electron spin of the alkali valence states
ELECTRON_SPIN = Fraction(1, 2)


def _twice(j) -> int:
    """``2j`` as an int, rejecting anything that is not a half-integer."""
    t = 2 * j
    if isinstance(t, float):
        if not t.is_integer():
            raise DomainError(f"{j!r} is not a half-integer")
        return int(t)
    try:
        t = Fraction(t)
    except TypeError:
        raise DomainError(f"{j!r} is not a half-integer") from None
    if t.denominator != 1:
        raise DomainError(f"{j!r} is not a half-integer")
    return int(t)


def _triangle(a2: int, b2: int, c2: int) -> bool:
    return (a2 + b2 + c2) % 2 == 0 and abs(a2 - b2) <= c2 <= a2 + b2


def _delta(a2: int, b2: int, c2: int) -> Fraction:
    return Fraction(
        factorial((a2 + b2 - c2) // 2) * factorial((a2 - b2 + c2) // 2) * factorial((-a2 + b2 + c2) // 2),
        factorial((a2 + b2 + c2) // 2 + 1),
    )


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Wigner 3j symbol; zero whenever a selection rule is violated."""
    j1, j2, j3, m1, m2, m3 = (_twice(x) for x in (j1, j2, j3, m1, m2, m3))
    if m1 + m2 + m3 != 0 or not _triangle(j1, j2, j3):
        return 0.0
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        if abs(m) > j or (j + m) % 2:
            return 0.0
    pref = _delta(j1, j2, j3)
    for j, m in ((j1, m1), (j2, m2), (j3, m3)):
        pref *= factorial((j + m) // 2) * factorial((j - m) // 2)
    # all quantities below are integers once halved
    a = (j3 - j2 + m1) // 2
    b = (j3 - j1 - m2) // 2
    c = (j1 + j2 - j3) // 2
    d = (j1 - m1) // 2
    e = (j2 + m2) // 2
    total = Fraction(0)
    for k in range(max(0, -a, -b), min(c, d, e) + 1):
        den = factorial(k) * factorial(a + k) * factorial(b + k) * factorial(c - k) * factorial(d - k) * factorial(e - k)
        total += Fraction((-1) ** k, den)
    phase = -1 if ((j1 - j2 - m3) // 2) % 2 else 1
    return phase * float(total) * sqrt(pref)


def wigner_6j(j1, j2, j3, j4, j5, j6) -> float:
    """Wigner 6j symbol ``{j1 j2 j3; j4 j5 j6}``; zero when a triad fails the triangle rule."""
    j1, j2, j3, j4, j5, j6 = (_twice(x) for x in (j1, j2, j3, j4, j5, j6))
    triads = ((j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3))
    if not all(_triangle(*t) for t in triads):
        return 0.0
    pref = Fraction(1)
    for t in triads:
        pref *= _delta(*t)
    sums = [sum(t) // 2 for t in triads]
    pairs = [(j1 + j2 + j4 + j5) // 2, (j2 + j3 + j5 + j6) // 2, (j3 + j1 + j6 + j4) // 2]
    total = Fraction(0)
    for t in range(max(sums), min(pairs) + 1):
        den = 1
        for s in sums:
            den *= factorial(t - s)
        for p in pairs:
            den *= factorial(p - t)
        total += Fraction((-1) ** t * factorial(t + 1), den)
    return float(total) * sqrt(pref)


def dipole_matrix_element(Lp, Jp, mJp, q, L, J, mJ, spin=ELECTRON_SPIN) -> float:
    """Angular part of ``<L'_J', m_J'| chi_q |L_J, m_J>`` for a spherical component ``q``.

    The radial integral is absorbed into the dipole amplitude. ``spin`` is the
    electron spin (1/2 for alkali atoms).
    """
    if q not in (-1, 0, 1):
        raise DomainError(f"spherical component q must be -1, 0 or 1, got {q}")
    for x in (Lp, L):
        if _twice(x) % 2:
            raise DomainError("orbital angular momentum must be an integer")
    Jp2, J2, m2, s2 = _twice(Jp), _twice(J), _twice(mJp), _twice(spin)
    sign = -1 if ((Jp2 - m2) // 2 + (J2 + s2 + 2) // 2) % 2 else 1
    return (
        sign
        * wigner_3j(Jp, 1, J, -Fraction(mJp), q, mJ)
        * sqrt((Jp2 + 1) * (J2 + 1))
        * wigner_6j(Lp, 1, L, J, spin, Jp)
        * sqrt((2 * Lp + 1) * (2 * L + 1))
        * wigner_3j(Lp, 1, L, 0, 0, 0)
    )


def cartesian_elements(bra, ket) -> tuple[complex, complex, complex]:
    """``(<bra|chi_x|ket>, <bra|chi_y|ket>, <bra|chi_z|ket>)`` for states ``(L, J, m_J)``.

    Uses ``chi_{+-1} = -+(chi_x +- i chi_y)/sqrt(2)``.
    """
    minus = dipole_matrix_element(*bra, -1, *ket)
    plus = dipole_matrix_element(*bra, 1, *ket)
    zero = dipole_matrix_element(*bra, 0, *ket)
    r2 = sqrt(2.0)
    return complex((minus - plus) / r2), complex(1j * (minus + plus) / r2), complex(zero)
