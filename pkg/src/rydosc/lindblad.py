"""Markovian description of the atom stream plus a thermal bath.

Time is measured in units of the atom spacing, ``tau = r t``; the bath enters
through ``Gamma_m / r`` only. For ``q`` phonons per atomic transition
(``A = a`` or ``a^2``) the generator is

    -i G [alpha beta* A + beta alpha* A^dag, rho] + D[alpha G A] + D[beta G A^dag]
    + (Gamma_m/r) ((n_th + 1) D[a] + n_th D[a^dag])

with ``D[c] rho = c rho c^dag - {c^dag c, rho}/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .errors import DomainError, StiffnessError, TruncationError
from .fock import (
    GUARD_LEVELS,
    AtomState,
    DensityMatrix,
    FockSpace,
    displacement,
    fidelity,
    hermitize,
    top_population,
)
from .propagator import PassageChannel, iterate_passages, phonon_step


@dataclass(frozen=True)
class ThermalBath:
    """Mechanical damping ``gamma_m`` (rad/s) towards occupation ``nbar_th``."""

    gamma_m: float
    nbar_th: float

    def __post_init__(self):
        if self.gamma_m < 0 or self.nbar_th < 0:
            raise DomainError("bath damping and occupation must be non-negative")


@dataclass(frozen=True)
class MasterEquation:
    mode: str
    G: float
    atom: AtomState
    rate: float = 1.0
    bath: ThermalBath | None = None

    def __post_init__(self):
        phonon_step(self.mode)
        if not self.rate > 0:
            raise DomainError("atom rate must be positive")

    @property
    def gamma_over_rate(self) -> float:
        return 0.0 if self.bath is None else self.bath.gamma_m / self.rate

    @classmethod
    def from_channel(cls, channel: PassageChannel, rate: float = 1.0, bath: ThermalBath | None = None):
        return cls(channel.mode, channel.G, channel.atom, rate, bath)


def _generator(me: MasterEquation, a: np.ndarray):
    """``(K, jumps)`` with ``drho/dtau = K rho + rho K^dag + sum_j L_j rho L_j^dag``.

    ``a`` is the lowering operator, possibly displaced by a multiple of 1.
    """
    ad = a.conj().T
    big_a = np.linalg.matrix_power(a, phonon_step(me.mode))
    big_ad = big_a.conj().T
    alpha, beta = me.atom.alpha, me.atom.beta
    h = me.G * (alpha * np.conj(beta) * big_a + beta * np.conj(alpha) * big_ad)
    jumps = [alpha * me.G * big_a, beta * me.G * big_ad]
    g = me.gamma_over_rate
    if g > 0:
        nth = me.bath.nbar_th
        jumps.append(np.sqrt(g * (nth + 1)) * a)
        if nth > 0:
            jumps.append(np.sqrt(g * nth) * ad)
    jumps = [j for j in jumps if np.any(j)]
    k = -1j * h
    for j in jumps:
        k = k - 0.5 * j.conj().T @ j
    return k, jumps


def _apply_generator(gen, rho: np.ndarray) -> np.ndarray:
    k, jumps = gen
    out = k @ rho
    out = out + out.conj().T
    for j in jumps:
        out += j @ rho @ j.conj().T
    return out


def rhs(me: MasterEquation, rho: DensityMatrix | np.ndarray) -> np.ndarray:
    """``d rho / d tau`` (traceless and Hermitian)."""
    data = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
    a = np.diag(np.sqrt(np.arange(1, data.shape[0], dtype=float)), 1).astype(complex)
    return _apply_generator(_generator(me, a), data)


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)

_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B_LOW = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B - _B_LOW


def dopri5(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_end: float,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    h_floor: float = 1e-6,
    h0: float | None = None,
    sample_times=(),
    project: Callable[[np.ndarray], np.ndarray] | None = None,
    stop: Callable[[float, np.ndarray, np.ndarray], bool] | None = None,
):
    """Adaptive explicit Runge-Kutta 5(4) integration from ``t = 0``.

    Steps land exactly on ``sample_times``. ``project`` is applied to the
    state after every accepted step; ``stop(t, y, dydt)`` ends the run early.
    Returns ``(t, y, samples, stopped)`` with ``samples`` a list of
    ``(time, state)`` pairs.
    """
    t, y = 0.0, np.array(y0, dtype=complex)
    samples = []
    targets = sorted(float(s) for s in sample_times if 0 <= s <= t_end)
    while targets and targets[0] == 0.0:
        samples.append((0.0, y.copy()))
        targets.pop(0)
    k1 = f(t, y)
    if stop is not None and stop(t, y, k1):
        return t, y, samples, True
    if t_end == 0:
        return t, y, samples, False
    h = h0 or min(t_end, 0.01 / max(np.max(np.abs(k1)), 1e-12))
    ks = [None] * 7
    while t < t_end:
        nxt = min([t_end] + targets[:1])
        land = t + h >= nxt - 1e-12 * max(1.0, abs(nxt))
        step = nxt - t if land else h
        ks[0] = k1
        for i in range(1, 7):
            yi = y + step * sum(a * k for a, k in zip(_A[i], ks[:i]) if a)
            ks[i] = f(t + _C[i] * step, yi)
        y_new = yi  # stage 7 is evaluated at the 5th-order solution (FSAL)
        err_vec = step * sum(e * k for e, k in zip(_E, ks) if e)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean(np.abs(err_vec / scale) ** 2))
        if err <= 1.0:
            t = nxt if land else t + step
            if project is not None:
                y = project(y_new)
                k1 = f(t, y)
            else:
                y, k1 = y_new, ks[6]
            if land and targets and t == targets[0]:
                samples.append((t, y.copy()))
                targets.pop(0)
            if stop is not None and stop(t, y, k1):
                return t, y, samples, True
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err**-0.2)
            if not land or step >= h:
                h = step * factor
        else:
            h = step * max(0.2, 0.9 * err**-0.2)
            if h < h_floor:
                raise StiffnessError(f"step size {h:.2e} fell below the floor {h_floor:.1e} at tau={t:.4g}")
    return t, y, samples, False


# ---------------------------------------------------------------------------
# evolution


@dataclass(frozen=True)
class Evolution:
    """Result of :func:`evolve`.

    With ``frame=True`` the states live in a frame displaced by
    ``displacements``: the lab state is ``D(xi) rho D(xi)^dag``.
    """

    times: np.ndarray
    states: list
    displacements: np.ndarray
    steady: bool = False
    residual: float = float("nan")
    framed: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]

    @property
    def displacement(self) -> complex:
        return complex(self.displacements[-1])

    def lab_state(self, index: int = -1, dimension: int | None = None) -> DensityMatrix:
        """State ``index`` undisplaced back to the lab frame in a space of ``dimension``."""
        rho = self.states[index]
        if not self.framed:
            return rho if dimension is None else rho.resized(dimension)
        dim = dimension or rho.dimension
        space = FockSpace(dim, rho.space.tail_tolerance)
        emb = np.zeros((dim, dim), dtype=complex)
        k = min(dim, rho.dimension)
        emb[:k, :k] = rho.data[:k, :k]
        d = displacement(space, complex(self.displacements[index]))
        return DensityMatrix(space, d @ emb @ d.conj().T, check=False).require_truncation("lab-frame state")


def evolve(
    me: MasterEquation,
    rho0: DensityMatrix,
    duration: float,
    *,
    samples=None,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    h_floor: float = 1e-6,
    frame: bool = False,
    steady_tol: float | None = None,
) -> Evolution:
    """Integrate the master equation for ``duration`` (in units of ``1/r``).

    ``samples`` are extra output times; the final time is always included.
    With ``steady_tol`` the run stops once ``||d rho/d tau||_F`` (and, in a
    displaced frame, ``|d xi/d tau|``) drop below it, making ``duration`` an
    upper limit. ``frame=True`` integrates in a frame that follows the mean
    amplitude ``<a>``, so states far from the origin fit in a small Fock space.
    """
    if duration < 0:
        raise DomainError("duration must be non-negative")
    space = rho0.space
    n = space.dimension
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    ad = a.conj().T
    size = n * n

    if frame:

        def parts(y):
            rho = y[:size].reshape(n, n)
            xi = y[size]
            gen = _generator(me, a + xi * np.eye(n))
            lab = _apply_generator(gen, rho)
            dxi = np.sum(a * lab.T)  # Tr(a L(rho))
            k = dxi * ad - np.conj(dxi) * a
            drho = lab - (k @ rho - rho @ k)
            return drho, dxi

        def f(t, y):
            drho, dxi = parts(y)
            return np.concatenate([drho.ravel(), [dxi]])

        y0 = np.concatenate([rho0.data.ravel(), [0.0]])

        def project(y):
            y = y.copy()
            y[:size] = hermitize(y[:size].reshape(n, n)).ravel()
            return y

        def residual(y, dy):
            return max(np.linalg.norm(dy[:size]), abs(dy[size]))

    else:
        gen = _generator(me, a)

        def f(t, y):
            return _apply_generator(gen, y.reshape(n, n)).ravel()

        y0 = rho0.data.ravel()

        def project(y):
            return hermitize(y.reshape(n, n)).ravel()

        def residual(y, dy):
            return np.linalg.norm(dy)

    def check(t, y):
        rho = y[:size].reshape(n, n)
        p = top_population(rho)
        if p > space.tail_tolerance:
            raise TruncationError(
                f"tau={t:.4g}: population {p:.3e} in the top {GUARD_LEVELS} levels exceeds "
                f"{space.tail_tolerance:.1e} (N={n})"
            )

    def stop(t, y, dy):
        check(t, y)
        return steady_tol is not None and residual(y, dy) < steady_tol

    times = sorted(set(float(s) for s in (() if samples is None else samples) if 0 <= s <= duration) | {float(duration)})
    t, y, sampled, stopped = dopri5(
        f, y0, float(duration), rtol=rtol, atol=atol, h_floor=h_floor, sample_times=times, project=project, stop=stop
    )
    if stopped and (not sampled or sampled[-1][0] != t):
        sampled.append((t, y.copy()))
    dy_end = f(t, y)
    states = [DensityMatrix(space, s[:size].reshape(n, n), check=False) for _, s in sampled]
    xis = np.array([s[size] if frame else 0.0 for _, s in sampled], dtype=complex)
    return Evolution(
        times=np.array([s[0] for s in sampled]),
        states=states,
        displacements=xis,
        steady=bool(stopped and steady_tol is not None),
        residual=float(residual(y, dy_end)),
        framed=frame,
    )


def steady_state(
    me: MasterEquation,
    rho0: DensityMatrix,
    *,
    tol: float = 1e-9,
    max_duration: float = 1e3,
    frame: bool = False,
    **kw,
) -> Evolution:
    """Evolve until the generator residual falls below ``tol`` or ``max_duration`` passes."""
    return evolve(me, rho0, max_duration, steady_tol=tol, frame=frame, **kw)


def thermal_step(bath: ThermalBath, rate: float, space: FockSpace) -> Callable[[np.ndarray], np.ndarray]:
    """Exact bath evolution over one atom spacing ``1/r``, for interleaving with passages."""
    n = space.dimension
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), 1).astype(complex)
    eye = np.eye(n)
    g = bath.gamma_m / rate

    def sup(c):
        cdc = c.conj().T @ c
        # row-major vec: vec(A X B) = (A kron B^T) vec(X)
        return np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)

    prop = expm(g * (bath.nbar_th + 1) * sup(a) + g * bath.nbar_th * sup(a.conj().T))

    def step(rho):
        return (prop @ rho.ravel()).reshape(n, n)

    return step


def channel_vs_master_agreement(
    channel: PassageChannel,
    me: MasterEquation,
    k: int,
    rho0: DensityMatrix,
    **kw,
) -> np.ndarray:
    """Fidelity between ``k`` exact passages and ``k/r`` of master-equation evolution, per atom."""
    if (channel.mode, channel.G, channel.atom) != (me.mode, me.G, me.atom):
        raise DomainError("channel and master equation must share mode, G and atom")
    between = thermal_step(me.bath, me.rate, rho0.space) if me.bath and me.bath.gamma_m > 0 else None
    _, exact = iterate_passages(channel, rho0, k, between=between, record=True)
    ev = evolve(me, rho0, float(k), samples=np.arange(k + 1), **kw)
    return np.array([fidelity(x, y) for x, y in zip(exact, ev.states)])
