"""Atom-oscillator coupling strengths from the electrostatic multipole expansion.

Positions are ``R = (X, Y, Z)`` in metres, measured from the rest position of
the oscillating charge; coupling rates are returned in rad/s and integrated
couplings are dimensionless. All functions accept numpy arrays for the
coordinates and broadcast.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from fractions import Fraction
from math import pi

import numpy as np
from scipy.integrate import quad

from .angular import cartesian_elements
from .errors import DomainError, QuadratureError

# CODATA 2018, 10 significant digits
HBAR = 1.054571817e-34  # J s
EPS0 = 8.854187813e-12  # F/m
E_CHARGE = 1.602176634e-19  # C
BOHR_RADIUS = 5.291772109e-11  # m
K_B = 1.380649e-23  # J/K

CONSTANTS = {
    "hbar_J_s": HBAR,
    "eps0_F_per_m": EPS0,
    "e_C": E_CHARGE,
    "a0_m": BOHR_RADIUS,
    "kB_J_per_K": K_B,
}

WHICH = ("single", "two_phonon", "quadrupole")


@dataclass(frozen=True)
class PhysicalParams:
    """SI parameters of the atom stream and the charged oscillator.

    ``Delta`` is the detuning of the P manifold from the one-phonon energy
    (rad/s, signed); ``rate`` is the number of atoms per second.
    """

    Q: float
    z_osc: float
    mu0: float
    mu0p: float
    Delta: float
    omega_osc: float
    v: float
    Z0: float
    rate: float

    def __post_init__(self):
        for name in ("Q", "z_osc", "mu0", "mu0p", "omega_osc", "v", "Z0", "rate"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")
        if self.Delta == 0:
            raise DomainError("Delta must be non-zero")

    @classmethod
    def cesium_reference(cls) -> "PhysicalParams":
        """Cs n=100/101 Rydberg atoms passing a 3 GHz oscillator carrying 200 e."""
        return cls(
            Q=200 * E_CHARGE,
            z_osc=1e-13,
            mu0=1e4 * E_CHARGE * BOHR_RADIUS,
            mu0p=1e4 * E_CHARGE * BOHR_RADIUS,
            Delta=2 * pi * 300e6,
            omega_osc=2 * pi * 3e9,
            v=10.0,
            Z0=5e-6,
            rate=1e5,
        )

    def with_(self, **changes) -> "PhysicalParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class Trajectory:
    """Straight flyby ``R(t) = (v t, 0, Z0)`` for ``t`` over the whole real line."""

    v: float
    Z0: float

    def __post_init__(self):
        if not self.Z0 > 0:
            raise DomainError("Z0 must be positive: the atom may not cross the oscillator plane")
        if not self.v > 0:
            raise DomainError("v must be positive")

    @classmethod
    def from_params(cls, params: PhysicalParams) -> "Trajectory":
        return cls(params.v, params.Z0)

    def position(self, t):
        t = np.asarray(t, dtype=float)
        return self.v * t, np.zeros_like(t), np.full_like(t, self.Z0)


# ---------------------------------------------------------------------------
# transition matrices

Level = tuple  # (L, J, m_J)

HALF = Fraction(1, 2)
S_DOWN, S_UP = (0, HALF, -HALF), (0, HALF, HALF)
P12_DOWN, P12_UP = (1, HALF, -HALF), (1, HALF, HALF)
P32 = {m: (1, Fraction(3, 2), m) for m in (-Fraction(3, 2), -HALF, HALF, Fraction(3, 2))}

FOUR_LEVEL_BASIS = (S_DOWN, P12_DOWN, S_UP, P12_UP)
#: intermediate P states coupled to |s> = |S_1/2, 1/2>, in matrix order
P_MANIFOLD = (P12_DOWN, P12_UP, P32[-HALF], P32[HALF], P32[Fraction(3, 2)])
SEVEN_LEVEL_LABELS = ("s", "s'", "P1/2,-1/2", "P1/2,1/2", "P3/2,-1/2", "P3/2,1/2", "P3/2,3/2")


@dataclass(frozen=True)
class TransitionMatrices:
    Mx: np.ndarray
    My: np.ndarray
    Mz: np.ndarray
    labels: tuple

    def __iter__(self):
        return iter((self.Mx, self.My, self.Mz))


def _matrices(bras, kets, n) -> list[np.ndarray]:
    out = [np.zeros((n, n), dtype=complex) for _ in range(3)]
    for i, bra in bras:
        for j, ket in kets:
            for comp, val in enumerate(cartesian_elements(bra, ket)):
                out[comp][i, j] = val
    return out


def four_level_matrices() -> TransitionMatrices:
    """``M_x, M_y, M_z`` on ``{|S1/2,-1/2>, |P1/2,-1/2>, |S1/2,1/2>, |P1/2,1/2>}``."""
    basis = list(enumerate(FOUR_LEVEL_BASIS))
    mx, my, mz = _matrices(basis, basis, 4)
    labels = ("S1/2,-1/2", "P1/2,-1/2", "S1/2,1/2", "P1/2,1/2")
    return TransitionMatrices(mx, my, mz, labels)


def seven_level_matrices() -> tuple[TransitionMatrices, TransitionMatrices]:
    """Unprimed (``s``-P) and primed (``s'``-P) matrices in the seven-level basis.

    Both ``|s>`` and ``|s'>`` are ``S_1/2, m=1/2`` states of different
    principal quantum number, so they share angular factors.
    """
    pstates = list(enumerate(P_MANIFOLD, start=2))
    res = []
    for row in (0, 1):
        m = _matrices([(row, S_UP)], pstates, 7)
        m = [x + x.conj().T for x in m]
        res.append(TransitionMatrices(*m, SEVEN_LEVEL_LABELS))
    return res[0], res[1]


# ---------------------------------------------------------------------------
# coupling strengths


def _coords(R):
    X, Y, Z = (np.asarray(c, dtype=float) for c in R)
    R2 = X * X + Y * Y + Z * Z
    if np.any(R2 <= 0):
        raise DomainError("|R| must be positive")
    return X, Y, Z, R2


def _scale(params: PhysicalParams, mu: float, R2):
    return params.Q * mu * params.z_osc / (4 * pi * EPS0 * HBAR * R2**2.5)


def _out(x):
    return x.item() if np.ndim(x) == 0 else x


def gamma_single(params: PhysicalParams, R):
    """Single-phonon rate ``(Q mu0 z_osc / 4 pi eps0 hbar R^5) (3Z^2 - R^2)/3``."""
    X, Y, Z, R2 = _coords(R)
    return _out(_scale(params, params.mu0, R2) * (3 * Z * Z - R2) / 3)


def gamma_cartesian(params: PhysicalParams, R):
    """``(gamma_x, gamma_y, gamma_z)`` multiplying ``M_x, M_y, M_z`` in the dipole interaction.

    The interaction is ``V = -hbar sum_j gamma_j M_j (a + a^dag)``, so
    ``gamma_x = 3 K Z X``, ``gamma_y = 3 K Z Y`` and ``gamma_z = K (3Z^2 - R^2)``
    with ``K = Q mu0 z_osc / (4 pi eps0 hbar R^5)``.
    """
    X, Y, Z, R2 = _coords(R)
    k = _scale(params, params.mu0, R2)
    return _out(3 * k * Z * X), _out(3 * k * Z * Y), _out(k * (3 * Z * Z - R2))


def gamma_components(params: PhysicalParams, R):
    """``(g+, g-, gz, g'+, g'-, g'z)`` with ``g+- = K Z (X +- iY)`` and ``gz = K (3Z^2-R^2)/3``.

    Primed rates use ``mu0p`` in place of ``mu0``.
    """
    X, Y, Z, R2 = _coords(R)
    out = []
    for mu in (params.mu0, params.mu0p):
        k = _scale(params, mu, R2)
        out += [_out(k * Z * (X + 1j * Y)), _out(k * Z * (X - 1j * Y)), _out(k * (3 * Z * Z - R2) / 3)]
    return tuple(out)


def gamma_two_phonon(params: PhysicalParams, R):
    """Effective two-phonon rate after eliminating the P manifold (rad/s)."""
    X, Y, Z, R2 = _coords(R)
    pref = (params.Q * params.z_osc / (4 * pi * HBAR * EPS0 * R2**2.5)) ** 2
    return _out(pref * params.mu0 * params.mu0p / params.Delta * R2 * (R2 + 3 * Z * Z) / 3)


def gamma_quadrupole(params: PhysicalParams, R):
    """Dipole-quadrupole two-phonon rate ``(Q mu0 z_osc^2 / 4 pi eps0 hbar R^7) Z (5Z^2 - 3R^2)/2``."""
    X, Y, Z, R2 = _coords(R)
    pref = params.Q * params.mu0 * params.z_osc**2 / (4 * pi * EPS0 * HBAR * R2**3.5)
    return _out(pref * Z * (5 * Z * Z - 3 * R2) / 2)


_RATE = {"single": gamma_single, "two_phonon": gamma_two_phonon, "quadrupole": gamma_quadrupole}


def integrated_coupling(
    params: PhysicalParams,
    trajectory: Trajectory | None = None,
    which: str = "two_phonon",
    rtol: float = 1e-8,
) -> float:
    """``G = int gamma(R(t)) dt`` over a straight flyby.

    The infinite time axis is mapped onto ``(-pi/2, pi/2)`` by
    ``t = (Z0/v) tan(u)`` and integrated with adaptive Gauss-Kronrod.
    """
    if which not in _RATE:
        raise DomainError(f"which must be one of {WHICH}")
    traj = trajectory or Trajectory.from_params(params)
    rate = _RATE[which]
    tau = traj.Z0 / traj.v

    def integrand(u):
        t = tau * np.tan(u)
        return rate(params, traj.position(t)) * tau / np.cos(u) ** 2

    # the integrand is even in u for a straight flyby
    val, err = quad(integrand, 0.0, pi / 2, epsabs=0.0, epsrel=min(rtol, 1e-10) / 10, limit=200)
    val, err = 2 * val, 2 * err
    if not np.isfinite(val) or err > rtol * abs(val):
        raise QuadratureError(f"{which} coupling integral: error {err:.2e} vs value {val:.3e}")
    return float(val)


def closed_form_coupling(params: PhysicalParams, which: str = "two_phonon") -> float:
    """Analytic value of :func:`integrated_coupling` for the straight flyby."""
    v, z0 = params.v, params.Z0
    if which == "single":
        return params.Q * params.mu0 * params.z_osc / (4 * pi * EPS0 * HBAR) * 2 / (3 * v * z0**2)
    if which == "two_phonon":
        pref = (params.Q * params.z_osc / (4 * pi * HBAR * EPS0)) ** 2
        return pref * params.mu0 * params.mu0p / params.Delta * 21 * pi / (48 * v * z0**5)
    if which == "quadrupole":
        return params.Q * params.mu0 * params.z_osc**2 / (4 * pi * EPS0 * HBAR) * 2 / (3 * v * z0**3)
    raise DomainError(f"which must be one of {WHICH}")


# ---------------------------------------------------------------------------
# adiabatic elimination of the P manifold


@dataclass(frozen=True)
class EffectiveCoupling:
    """Second-order Hamiltonian in ``{|s>, |s'>}`` (rad/s, hbar = 1).

    ``two_phonon`` multiplies ``|s><s'| (a^dag)^2``; ``shift_s`` and
    ``shift_sp`` multiply ``a^dag a`` on ``|s>`` and ``a a^dag`` on ``|s'>``.
    ``block`` is the full projected matrix on ``{s, s'} x Fock``.
    """

    two_phonon: complex
    shift_s: float
    shift_sp: float
    block: np.ndarray


def seven_level_hamiltonian(params: PhysicalParams, R, fock_dim: int = 4) -> np.ndarray:
    """Interaction-picture Hamiltonian on ``7 x fock_dim`` states (rad/s).

    Level order follows :data:`SEVEN_LEVEL_LABELS` and the composite index is
    ``level * fock_dim + n``. The P manifold sits at ``-Delta`` relative to the
    degenerate pair ``|s, n+2>``, ``|s', n>``: with ``Delta = w_a' - w_osc`` the
    intermediate state ``|P, n+1>`` lies ``Delta`` below ``|s', n>``.
    """
    X, Y, Z, R2 = _coords(R)
    if np.ndim(X):
        raise DomainError("seven-level Hamiltonian takes a single position")
    m, mp = seven_level_matrices()
    gx, gy, gz = gamma_cartesian(params, R)
    ratio = params.mu0p / params.mu0
    c_s = gx * m.Mx[0] + gy * m.My[0] + gz * m.Mz[0]
    c_sp = ratio * (gx * mp.Mx[1] + gy * mp.My[1] + gz * mp.Mz[1])

    n = fock_dim
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    ad = a.conj().T
    h = np.zeros((7 * n, 7 * n), dtype=complex)
    for p in range(2, 7):
        h[p * n : (p + 1) * n, p * n : (p + 1) * n] = -params.Delta * np.eye(n)
        h[0:n, p * n : (p + 1) * n] = -c_s[p] * ad
        h[n : 2 * n, p * n : (p + 1) * n] = -c_sp[p] * a
    upper = np.triu(h, 1)
    return np.diag(np.diag(h)) + upper + upper.conj().T


def eliminate_p_manifold(params: PhysicalParams, R, fock_dim: int = 4) -> EffectiveCoupling:
    """Block-diagonalize :func:`seven_level_hamiltonian` to second order.

    With ``P`` projecting on ``{|s>, |s'>}`` and ``Q = 1 - P`` the generator
    solves ``[G, H_D] = -V_x`` for the block-diagonal part ``H_D`` and the
    off-diagonal part ``V_x``; then ``H_eff = H_D + [G, V_x]/2``.
    """
    if params.Delta == 0:
        raise DomainError("Delta must be non-zero")
    if fock_dim < 3:
        raise DomainError("need at least 3 Fock levels to resolve a two-phonon transition")
    h = seven_level_hamiltonian(params, R, fock_dim)
    n = fock_dim
    in_p = np.zeros(7 * n, dtype=bool)
    in_p[: 2 * n] = True
    offdiag = in_p[:, None] != in_p[None, :]
    vx = np.where(offdiag, h, 0.0)
    hd = h - vx
    energies = np.real(np.diag(hd))
    if np.max(np.abs(hd - np.diag(energies))) > 0:
        raise DomainError("block-diagonal part must be diagonal for this elimination")

    scale = np.max(np.abs(vx)) if vx.any() else 0.0
    if scale * np.sqrt(n) > 0.1 * abs(params.Delta):
        warnings.warn(
            f"|Delta| = {abs(params.Delta):.3e} is not much larger than the couplings "
            f"({scale:.3e}); the second-order elimination may be inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )
    diff = energies[:, None] - energies[None, :]
    g = np.zeros_like(vx)
    g[offdiag] = vx[offdiag] / diff[offdiag]
    heff = hd + 0.5 * (g @ vx - vx @ g)
    block = heff[: 2 * n, : 2 * n]
    s, sp = 0, n
    return EffectiveCoupling(
        two_phonon=complex(block[s + 2, sp + 0] / np.sqrt(2.0)),
        shift_s=float(np.real(block[s + 1, s + 1] - block[s, s])),
        shift_sp=float(np.real(block[sp + 1, sp + 1] - block[sp, sp])),
        block=block,
    )


def nbar_from_temperature(omega_osc: float, T: float) -> float:
    """Bose occupation ``1/(exp(hbar w / kB T) - 1)``."""
    if not T > 0:
        raise DomainError("temperature must be positive")
    x = HBAR * omega_osc / (K_B * T)
    if x > 700:
        return 0.0
    return float(1.0 / np.expm1(x))
