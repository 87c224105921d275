"""Quadrature statistics and Wigner functions of oscillator states.

Phase space is dimensionless with ``x = (a + a^dag)/sqrt(2)`` and
``p = (a - a^dag)/(i sqrt(2))``, so the vacuum has variance 1/2 in every
quadrature and ``W_vac = exp(-x^2 - p^2)/pi``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, GridError
from .fock import DensityMatrix, FockSpace

#: vacuum quadrature variance; anything below it is squeezed
VACUUM_VARIANCE = 0.5

DEFAULT_EXTENT = 6.0
DEFAULT_POINTS = 201
BOUNDARY_TOL = 1e-6


def _data(rho) -> np.ndarray:
    return rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _moments(rho):
    m = _data(rho)
    n = m.shape[0]
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1)
    ea = np.sum(a * m.T)
    ea2 = np.sum((a @ a) * m.T)
    en = np.dot(np.arange(n), np.real(np.diag(m)))
    return ea, ea2, en


def quadrature_variance(rho, phi):
    """Variance of ``chi_phi = (a e^{-i phi} + a^dag e^{i phi})/sqrt(2)``; vectorized over ``phi``.

    ``<a a^dag>`` is taken as ``<n> + 1``, which is exact for states that
    leave the top Fock level empty.
    """
    ea, ea2, en = _moments(rho)
    phi = np.asarray(phi, dtype=float)
    second = np.real(ea2 * np.exp(-2j * phi)) + en + 0.5
    first = np.sqrt(2.0) * np.real(ea * np.exp(-1j * phi))
    out = np.maximum(second - first**2, 0.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class QuadratureReport:
    phi_min: float
    variance_min: float
    phis: np.ndarray
    variances: np.ndarray
    degenerate: bool = False

    @property
    def squeezed(self) -> bool:
        return self.variance_min < VACUUM_VARIANCE


def minimize_variance(rho, points: int = 180, tol: float = 1e-4) -> QuadratureReport:
    """Quadrature of least variance over ``[0, pi)``.

    A coarse scan brackets the minimum, which is then refined to ``tol``
    radians by bounded Brent minimization (golden section with parabolic
    steps). Rotationally symmetric states are flagged ``degenerate``.
    """
    if points < 3:
        raise DomainError("need at least 3 scan points")
    phis = np.arange(points) * np.pi / points
    var = quadrature_variance(rho, phis)
    i = int(np.argmin(var))
    spread = float(np.max(var) - np.min(var))
    if spread <= 1e-10 * max(1.0, float(np.max(var))):
        return QuadratureReport(0.0, float(var[0]), phis, var, degenerate=True)
    step = np.pi / points
    res = minimize_scalar(
        lambda t: quadrature_variance(rho, t),
        bounds=(phis[i] - step, phis[i] + step),
        method="bounded",
        options={"xatol": tol / 4},
    )
    phi = float(res.x) % np.pi
    return QuadratureReport(phi, float(min(res.fun, var[i])), phis, var)


def analytic_squeezing_variance(omega_t, theta, phi):
    """``(cosh(Omega t) - sinh(Omega t) cos(2 phi - theta - pi/2))/2`` for vacuum squeezed by
    :func:`squeezing_hamiltonian`."""
    omega_t = np.asarray(omega_t, dtype=float)
    return 0.5 * (np.cosh(omega_t) - np.sinh(omega_t) * np.cos(2 * np.asarray(phi) - theta - np.pi / 2))


def squeezing_hamiltonian(space: FockSpace, omega: float, theta: float = 0.0) -> np.ndarray:
    """``(Omega/4)(e^{-i theta} a^2 + e^{i theta} a^dag^2)``.

    The factor 1/4 makes vacuum evolution follow
    :func:`analytic_squeezing_variance` with ``Omega t`` as its first argument.
    """
    a2 = space.a @ space.a
    return 0.25 * omega * (np.exp(-1j * theta) * a2 + np.exp(1j * theta) * a2.conj().T)


# ---------------------------------------------------------------------------
# Wigner function


@dataclass(frozen=True)
class WignerGrid:
    """``values[i, j] = W(x[i], p[j])`` on a uniform grid."""

    x: np.ndarray
    p: np.ndarray
    values: np.ndarray

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    @property
    def shape(self):
        return self.values.shape

    def normalization(self) -> float:
        return float(np.sum(self.values) * self.dx * self.dp)

    def absolute_integral(self) -> float:
        return float(np.sum(np.abs(self.values)) * self.dx * self.dp)

    def moment(self, phi: float, order: int = 2) -> float:
        """``int (x cos phi + p sin phi)^order W`` by direct summation."""
        q = np.cos(phi) * self.x[:, None] + np.sin(phi) * self.p[None, :]
        return float(np.sum(q**order * self.values) * self.dx * self.dp)

    def boundary_ratio(self) -> float:
        w = np.abs(self.values)
        edge = max(w[0].max(), w[-1].max(), w[:, 0].max(), w[:, -1].max())
        return float(edge / w.max())


def _wigner_values(m: np.ndarray, x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Fock-basis Laguerre expansion evaluated by a column-wise recurrence.

    ``w[n]`` holds the normalized Laguerre term for the current row ``m``;
    each update mixes neighbours with ``sqrt`` weights, so nothing overflows
    for large ``n``.
    """
    z = np.sqrt(2.0) * (x[:, None] + 1j * p[None, :])
    dim = m.shape[0]
    w = [np.exp(-0.5 * np.abs(z) ** 2)]
    out = np.real(m[0, 0]) * w[0]
    for n in range(1, dim):
        w.append(z * w[n - 1] / np.sqrt(n))
        out = out + 2 * np.real(m[0, n] * w[n])
    for k in range(1, dim):
        prev = w[k]
        w[k] = (np.conj(z) * prev - np.sqrt(k) * w[k - 1]) / np.sqrt(k)
        out = out + np.real(m[k, k] * w[k])
        for n in range(k + 1, dim):
            nxt = (z * w[n - 1] - np.sqrt(k) * prev) / np.sqrt(n)
            prev = w[n]
            w[n] = nxt
            out = out + 2 * np.real(m[k, n] * w[n])
    return out / np.pi


def _spacing() -> float:
    return 2 * DEFAULT_EXTENT / (DEFAULT_POINTS - 1)


def auto_extent(rho) -> tuple[float, int]:
    """Half-width and point count covering a state.

    ``[-6, 6]`` with 201 points unless the Fock populations reach further:
    beyond the level ``n`` below which all but 1e-10 of the weight lies the
    Wigner function decays outside the radius ``sqrt(2n + 1)``. Wider grids
    keep the default spacing.
    """
    pops = np.clip(np.real(np.diag(_data(rho))), 0.0, None)
    tail = np.cumsum(pops[::-1])[::-1]
    n_eff = int(np.nonzero(tail > 1e-10)[0][-1]) if np.any(tail > 1e-10) else 0
    reach = np.sqrt(2 * n_eff + 1) + 2.0
    if reach <= DEFAULT_EXTENT:
        return DEFAULT_EXTENT, DEFAULT_POINTS
    half = float(np.ceil(reach / _spacing()) * _spacing())
    return half, 2 * int(round(half / _spacing())) + 1


def wigner(rho, xvec=None, pvec=None, *, extent: float | None = None, points: int | None = None, check: bool = True):
    """Wigner function of ``rho`` on a grid.

    Give explicit ``xvec``/``pvec``, or a symmetric ``extent`` and ``points``.
    Without either the grid is sized by :func:`auto_extent` and widened (same
    spacing) a few times if the boundary check fails. Raises
    :class:`GridError` if the function is not negligible on the boundary.
    """
    m = _data(rho)
    auto = xvec is None and extent is None and points is None
    if xvec is None:
        half, pts = auto_extent(m)
        half = extent if extent is not None else half
        pts = points if points is not None else pts
        xvec = np.linspace(-half, half, pts)
    xvec = np.asarray(xvec, dtype=float)
    pvec = xvec if pvec is None else np.asarray(pvec, dtype=float)
    if xvec.size < 2 or pvec.size < 2:
        raise DomainError("grid needs at least 2 points per axis")
    grid = WignerGrid(xvec, pvec, _wigner_values(m, xvec, pvec))
    tries = 4 if auto else 0
    while check and grid.boundary_ratio() > BOUNDARY_TOL and tries > 0:
        tries -= 1
        half = float(np.ceil(1.25 * xvec[-1] / _spacing()) * _spacing())
        xvec = np.linspace(-half, half, 2 * int(round(half / _spacing())) + 1)
        grid = WignerGrid(xvec, xvec, _wigner_values(m, xvec, xvec))
    if check:
        r = grid.boundary_ratio()
        if r > BOUNDARY_TOL:
            raise GridError(f"Wigner function on the grid boundary is {r:.2e} of its maximum; widen the grid")
    return grid


def negative_volume(grid: WignerGrid) -> float:
    """``(int |W| - 1)/2``, clipped at zero."""
    return max(0.5 * (grid.absolute_integral() - 1.0), 0.0)


def state_negative_volume(rho, **kw) -> float:
    return negative_volume(wigner(rho, **kw))
