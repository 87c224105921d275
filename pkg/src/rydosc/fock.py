"""Truncated Fock space of the mechanical oscillator.

Operators are dense ``numpy`` arrays; states are wrapped in immutable
:class:`DensityMatrix` objects which check their invariants on construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, TruncationError

#: number of top Fock levels whose population is monitored
GUARD_LEVELS = 2

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class FockSpace:
    """Fock states ``|0>, ..., |N-1>`` and the tolerated population at the top."""

    dimension: int = 40
    tail_tolerance: float = 1e-6

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 2:
            raise DomainError(f"Fock dimension must be an integer >= 2, got {self.dimension}")
        if not self.tail_tolerance >= 0:
            raise DomainError("tail_tolerance must be non-negative")
        object.__setattr__(self, "dimension", int(self.dimension))

    @property
    def a(self) -> np.ndarray:
        return annihilation(self)

    @property
    def adag(self) -> np.ndarray:
        return creation(self)

    @property
    def number(self) -> np.ndarray:
        return number_operator(self)


@lru_cache(maxsize=64)
def _ladder(dim: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    a.setflags(write=False)
    return a


def annihilation(space: FockSpace) -> np.ndarray:
    """Lowering operator with ``<n-1|a|n> = sqrt(n)``."""
    return _ladder(space.dimension)


def creation(space: FockSpace) -> np.ndarray:
    return _ladder(space.dimension).conj().T


def number_operator(space: FockSpace) -> np.ndarray:
    return np.diag(np.arange(space.dimension, dtype=float)).astype(complex)


def hermitize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.conj().T)


def top_population(rho: np.ndarray, levels: int = GUARD_LEVELS) -> float:
    """Largest population among the top ``levels`` Fock states."""
    return float(np.max(np.real(np.diag(rho))[-levels:]))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix on a :class:`FockSpace`.

    The element array is copied, symmetrized and made read-only. Pass
    ``check=False`` to skip the invariant checks (used inside hot loops that
    validate separately).
    """

    space: FockSpace
    data: np.ndarray
    check: bool = True

    def __post_init__(self):
        m = np.array(self.data, dtype=complex)
        n = self.space.dimension
        if m.shape != (n, n):
            raise DomainError(f"expected a {n}x{n} matrix, got shape {m.shape}")
        if self.check and np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-8:
            raise DomainError("density matrix is not Hermitian")
        m = hermitize(m)
        m.setflags(write=False)
        object.__setattr__(self, "data", m)
        if self.check:
            self.validate()

    def validate(self) -> None:
        tr = np.trace(self.data).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise DomainError(f"trace {tr!r} differs from 1")
        lam = np.linalg.eigvalsh(self.data)[0]
        if lam < -POSITIVITY_TOL:
            raise DomainError(f"negative eigenvalue {lam:.3e}")

    @property
    def dimension(self) -> int:
        return self.space.dimension

    def trace(self) -> float:
        return float(np.trace(self.data).real)

    def purity(self) -> float:
        return float(np.real(np.sum(self.data * self.data.T)))

    def expect(self, op: np.ndarray) -> complex:
        return complex(np.sum(op * self.data.T))

    def mean_number(self) -> float:
        return float(np.dot(np.arange(self.dimension), np.real(np.diag(self.data))))

    def populations(self) -> np.ndarray:
        return np.real(np.diag(self.data)).copy()

    def top_population(self, levels: int = GUARD_LEVELS) -> float:
        return top_population(self.data, levels)

    def truncation_ok(self) -> bool:
        return self.top_population() <= self.space.tail_tolerance

    def require_truncation(self, what: str = "state") -> "DensityMatrix":
        p = self.top_population()
        if p > self.space.tail_tolerance:
            raise TruncationError(
                f"{what}: population {p:.3e} in the top {GUARD_LEVELS} levels exceeds "
                f"{self.space.tail_tolerance:.1e}; increase the Fock dimension (N={self.dimension})"
            )
        return self

    def resized(self, dimension: int) -> "DensityMatrix":
        """Embed into (or crop to) another dimension; cropping renormalizes."""
        space = FockSpace(dimension, self.space.tail_tolerance)
        out = np.zeros((dimension, dimension), dtype=complex)
        k = min(dimension, self.dimension)
        out[:k, :k] = self.data[:k, :k]
        out /= np.trace(out).real
        return DensityMatrix(space, out)


@dataclass(frozen=True)
class AtomState:
    """Atomic superposition ``alpha|lower> + beta|upper>``.

    ``beta = sqrt(1 - |alpha|^2) exp(i theta)``; the upper state is ``|p>``
    for the single-phonon scheme and ``|s'>`` for the two-phonon scheme.
    """

    alpha: complex
    beta_magnitude_sq: float
    theta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.beta_magnitude_sq <= 1.0:
            raise DomainError("|beta|^2 must lie in [0, 1]")
        if abs(abs(self.alpha) ** 2 + self.beta_magnitude_sq - 1.0) > 1e-12:
            raise DomainError("|alpha|^2 + |beta|^2 must equal 1")

    @classmethod
    def from_population(cls, beta_sq: float, theta: float = 0.0) -> "AtomState":
        """Real positive alpha, upper-state population ``beta_sq``, phase ``theta``."""
        if not 0.0 <= beta_sq <= 1.0:
            raise DomainError("|beta|^2 must lie in [0, 1]")
        return cls(complex(np.sqrt(1.0 - beta_sq)), float(beta_sq), float(theta))

    @property
    def beta(self) -> complex:
        return complex(np.sqrt(self.beta_magnitude_sq) * np.exp(1j * self.theta))


def _wrap(space: FockSpace, m: np.ndarray, what: str) -> DensityMatrix:
    return DensityMatrix(space, m).require_truncation(what)


def vacuum(space: FockSpace) -> DensityMatrix:
    m = np.zeros((space.dimension, space.dimension), dtype=complex)
    m[0, 0] = 1.0
    return DensityMatrix(space, m)


def fock_state(space: FockSpace, n: int) -> DensityMatrix:
    if not 0 <= n < space.dimension:
        raise DomainError(f"level {n} outside the Fock space")
    m = np.zeros((space.dimension, space.dimension), dtype=complex)
    m[n, n] = 1.0
    return _wrap(space, m, f"Fock state |{n}>")


def thermal_state(space: FockSpace, nbar: float) -> DensityMatrix:
    """Geometric distribution with mean ``nbar``, renormalized on the truncated space."""
    if nbar < 0:
        raise DomainError("nbar must be non-negative")
    n = np.arange(space.dimension)
    if nbar == 0:
        p = (n == 0).astype(float)
    else:
        # log form avoids underflow warnings at large n
        p = np.exp(n * np.log(nbar / (1.0 + nbar)))
    p /= p.sum()
    return _wrap(space, np.diag(p).astype(complex), f"thermal state nbar={nbar}")


def displacement(space: FockSpace, amplitude: complex, pad: int | None = None) -> np.ndarray:
    """``D(A) = exp(A a^dag - A* a)`` restricted to ``space``.

    The exponential is taken on an enlarged space (``pad`` extra levels,
    default ``N``) and cropped, so the retained block is not distorted by the
    truncation edge. The generator is anti-Hermitian, so the exponential comes
    from one Hermitian eigendecomposition.
    """
    big = space.dimension + (space.dimension if pad is None else pad)
    a = _ladder(big)
    h = 1j * (amplitude * a.conj().T - np.conj(amplitude) * a)
    lam, v = np.linalg.eigh(hermitize(h))
    d = (v[: space.dimension] * np.exp(-1j * lam)) @ v[: space.dimension].conj().T
    return d


def displaced_thermal(space: FockSpace, amplitude: complex, nbar: float) -> DensityMatrix:
    """``D(A) rho_th D(A)^dag``; a coherent state for ``nbar = 0``."""
    if nbar < 0:
        raise DomainError("nbar must be non-negative")
    n = space.dimension
    big = FockSpace(2 * n, np.inf)
    th = np.real(np.diag(thermal_state(big, nbar).data))
    # only columns carrying thermal weight contribute
    keep = np.nonzero(th > 1e-18)[0]
    h = 1j * (amplitude * _ladder(2 * n).conj().T - np.conj(amplitude) * _ladder(2 * n))
    lam, v = np.linalg.eigh(hermitize(h))
    cols = (v * np.exp(-1j * lam)) @ v[keep].conj().T
    cols = cols[:n]
    rho = (cols * th[keep]) @ cols.conj().T
    lost = 1.0 - np.trace(rho).real
    if lost > space.tail_tolerance:
        raise TruncationError(
            f"displaced thermal state (A={amplitude}, nbar={nbar}) loses {lost:.2e} "
            f"of its weight outside N={n}"
        )
    rho = rho / np.trace(rho).real
    return _wrap(space, rho, f"displaced thermal state A={amplitude}")


def coherent_state(space: FockSpace, amplitude: complex) -> DensityMatrix:
    return displaced_thermal(space, amplitude, 0.0)


def fidelity(rho: DensityMatrix | np.ndarray, sigma: DensityMatrix | np.ndarray) -> float:
    """Uhlmann fidelity ``(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2``."""
    r = rho.data if isinstance(rho, DensityMatrix) else np.asarray(rho)
    s = sigma.data if isinstance(sigma, DensityMatrix) else np.asarray(sigma)
    lam, v = np.linalg.eigh(hermitize(r))
    # round-off eigenvalues would contribute sqrt(1e-17) ~ 3e-9 each
    lam = np.where(lam > 1e-14 * lam.max(), lam, 0.0)
    sq = (v * np.sqrt(lam)) @ v.conj().T
    mu = np.linalg.eigvalsh(hermitize(sq @ s @ sq))
    mu = np.where(mu > 1e-14 * max(mu.max(), 0.0), mu, 0.0)
    return float(min(np.sum(np.sqrt(mu)) ** 2, 1.0))
