"""Exact single-atom passages as a quantum channel on the oscillator.

Each passage couples the oscillator to one atom through 2x2 rotations on the
pairs ``{|u, n>, |s, n+q>}``, where ``u`` is the upper atomic state (``|p>``
for ``q = 1``, ``|s'>`` for ``q = 2``). The composite basis is atom-major with
the upper state first: index ``0*N + n`` is ``|u, n>``, ``1*N + n`` is ``|s, n>``.
Rotations are ``[[cos T, -i sin T], [-i sin T, cos T]]`` with
``T = sqrt((n+1)...(n+q)) G``.

Blocks touching the top :data:`GUARD_LEVELS` levels are identity, so those
levels never fill; the truncation check after each passage therefore also
watches the two highest levels the rotations can reach.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError, TruncationError
from .fock import GUARD_LEVELS, AtomState, DensityMatrix, FockSpace, hermitize, top_population

MODES = ("single_phonon", "two_phonon")


def phonon_step(mode: str) -> int:
    try:
        return {"single_phonon": 1, "two_phonon": 2}[mode]
    except KeyError:
        raise DomainError(f"mode must be one of {MODES}, got {mode!r}") from None


@dataclass(frozen=True)
class PassageChannel:
    mode: str
    G: float
    atom: AtomState

    def __post_init__(self):
        phonon_step(self.mode)
        if np.iscomplexobj(self.G) or not np.isfinite(self.G):
            raise DomainError("G must be a finite real number")
        object.__setattr__(self, "G", float(self.G))

    @property
    def step(self) -> int:
        return phonon_step(self.mode)


@lru_cache(maxsize=256)
def _rotations(step: int, G: float, dim: int):
    """Rotation angles and active-block mask for every lower phonon number ``n``.

    Blocks that would touch the top :data:`GUARD_LEVELS` levels are left as
    identity; the truncation check on the output keeps those levels empty.
    """
    n = np.arange(dim)
    active = n + step <= dim - 1 - GUARD_LEVELS
    weight = np.ones(dim)
    for j in range(1, step + 1):
        weight *= n + j
    theta = np.where(active, np.sqrt(weight) * G, 0.0)
    cos, sin = np.cos(theta), np.sin(theta)
    for arr in (active, cos, sin):
        arr.setflags(write=False)
    return active, cos, sin


def _blocks(channel: PassageChannel, dim: int):
    """``(C_u, C_s, S)`` with ``U = [[C_u, -i S^dag], [-i S, C_s]]``."""
    step = channel.step
    active, cos, sin = _rotations(step, channel.G, dim)
    cu = np.where(active, cos, 1.0)
    cs = np.ones(dim)
    idx = np.nonzero(active)[0]
    cs[idx + step] = cos[idx]
    s = np.zeros((dim, dim))
    s[idx + step, idx] = sin[idx]
    return cu, cs, s


def propagator_matrix(channel: PassageChannel, space: FockSpace) -> np.ndarray:
    """Full unitary on (upper, s) x Fock, size ``2N x 2N``."""
    n = space.dimension
    cu, cs, s = _blocks(channel, n)
    u = np.zeros((2 * n, 2 * n), dtype=complex)
    u[:n, :n] = np.diag(cu)
    u[n:, n:] = np.diag(cs)
    u[n:, :n] = -1j * s
    u[:n, n:] = -1j * s.T
    return u


def kraus_operators(channel: PassageChannel, space: FockSpace) -> tuple[np.ndarray, np.ndarray]:
    """``(K_u, K_s) = (<u|U|psi_a>, <s|U|psi_a>)`` for the pure atomic input state."""
    cu, cs, s = _blocks(channel, space.dimension)
    alpha, beta = channel.atom.alpha, channel.atom.beta
    k_u = beta * np.diag(cu) - 1j * alpha * s.T
    k_s = alpha * np.diag(cs) - 1j * beta * s
    return k_u.astype(complex), k_s.astype(complex)


def edge_population(rho) -> float:
    """Largest population in the guard levels and the two levels just below them."""
    m = rho.data if isinstance(rho, DensityMatrix) else rho
    return top_population(m, 2 * GUARD_LEVELS)


def _apply(kraus, rho: np.ndarray) -> np.ndarray:
    out = sum(k @ rho @ k.conj().T for k in kraus)
    return hermitize(out)


def apply_passage(channel: PassageChannel, rho: DensityMatrix) -> DensityMatrix:
    """Oscillator state after one atom: ``Tr_a[U (rho_a x rho) U^dag]``."""
    out = _apply(kraus_operators(channel, rho.space), rho.data)
    p = edge_population(out)
    if p > rho.space.tail_tolerance:
        raise TruncationError(
            f"after passage: population {p:.3e} at the Fock edge exceeds "
            f"{rho.space.tail_tolerance:.1e}; increase the Fock dimension (N={rho.dimension})"
        )
    return DensityMatrix(rho.space, out, check=False)


def iterate_passages(
    channel: PassageChannel,
    rho0: DensityMatrix,
    k: int,
    between: Callable[[np.ndarray], np.ndarray] | None = None,
    record: bool = False,
):
    """Send ``k`` identical atoms past the oscillator.

    ``between`` maps the raw density matrix after each passage (e.g. thermal
    evolution for ``1/r``). Returns the final state, or ``(final, states)``
    with the states after 0..k atoms when ``record`` is true.
    """
    if int(k) != k or k < 0:
        raise DomainError("number of atoms must be a non-negative integer")
    space = rho0.space
    kraus = kraus_operators(channel, space)
    rho = rho0.data
    states = [rho0] if record else None
    for i in range(int(k)):
        rho = _apply(kraus, rho)
        if between is not None:
            rho = hermitize(between(rho))
        p = edge_population(rho)
        if p > space.tail_tolerance:
            raise TruncationError(
                f"after atom {i + 1}: population {p:.3e} at the Fock edge "
                f"exceeds {space.tail_tolerance:.1e} (N={space.dimension})"
            )
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-10:
            raise TruncationError(f"after atom {i + 1}: trace drifted to {tr!r}")
        if record:
            states.append(DensityMatrix(space, rho, check=False))
    final = DensityMatrix(space, rho, check=False)
    return (final, states) if record else final


def choi_matrix(channel: PassageChannel, space: FockSpace) -> np.ndarray:
    """Choi matrix ``sum_ij |i><j| (x) E(|i><j|)`` of one passage."""
    n = space.dimension
    kraus = kraus_operators(channel, space)
    choi = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=complex)
            e[i, j] = 1.0
            out = sum(k @ e @ k.conj().T for k in kraus)
            choi[i * n : (i + 1) * n, j * n : (j + 1) * n] = out
    return choi
