"""Discrete delay-Doppler signal model.

A known probing waveform with ``L = 2N + 1`` samples is delayed, modulated
and superposed at ``R`` receivers.  Everything here is pure numpy; random
draws go through an explicit ``numpy.random.Generator``.

Index convention: two-dimensional indices ``(k, l)`` with ``k, l`` in
``-N..N`` are flattened with ``k`` outer and ``l`` inner, so position
``(k + N) * L + (l + N)``.  The first index carries the Doppler shift and
the second the delay, for atoms, the 2D DFT, the Gabor matrix and the Gram
matrix of the dual SDP alike.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SEPARATION_CONSTANT = 2.38
NOISE_RESIDUAL_FACTOR = 8.0 / 3.0


class ModelError(ValueError):
    """Raised for inconsistent model inputs."""


class ProbingLaw(str, enum.Enum):
    GAUSSIAN = "gaussian_iid_variance_1_over_L"
    UNIT_MODULUS = "complex_unit_magnitude"


@dataclass(frozen=True)
class DelayDoppler:
    """Normalized delay/Doppler pair on the unit torus."""

    tau: float
    nu: float

    def __post_init__(self):
        object.__setattr__(self, "tau", float(self.tau) % 1.0)
        object.__setattr__(self, "nu", float(self.nu) % 1.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.tau, self.nu])


def torus_diff(a, b):
    """Signed wrap-around difference ``a - b`` reduced to ``[-1/2, 1/2)``."""
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return (d + 0.5) % 1.0 - 0.5


@dataclass(frozen=True)
class SupportSet:
    pairs: tuple[DelayDoppler, ...] = ()

    def __post_init__(self):
        pairs = tuple(p if isinstance(p, DelayDoppler) else DelayDoppler(*p) for p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        arr = self.as_array()
        for i in range(len(pairs)):
            for j in range(i):
                if np.all(np.abs(torus_diff(arr[i], arr[j])) < 1e-15):
                    raise ModelError(f"support entries {j} and {i} coincide")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "SupportSet":
        return cls(tuple(DelayDoppler(float(t), float(n)) for t, n in pairs))

    @property
    def s(self) -> int:
        return len(self.pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def as_array(self) -> np.ndarray:
        """``(s, 2)`` array of ``(tau, nu)`` rows."""
        if not self.pairs:
            return np.zeros((0, 2))
        return np.array([[p.tau, p.nu] for p in self.pairs])

    def min_separation(self, wrap: bool = True) -> float:
        """Smallest pairwise l-infinity distance; ``inf`` for ``s < 2``."""
        arr = self.as_array()
        if len(arr) < 2:
            return math.inf
        d = arr[:, None, :] - arr[None, :, :]
        if wrap:
            d = torus_diff(d, 0.0)
        dist = np.abs(d).max(axis=-1)
        dist[np.diag_indices(len(arr))] = np.inf
        return float(dist.min())

    def separation_report(self, N: int) -> dict:
        required = SEPARATION_CONSTANT / N
        torus = self.min_separation(wrap=True)
        plain = self.min_separation(wrap=False)
        return {
            "required": required,
            "torus": torus,
            "plain": plain,
            "satisfied": bool(torus >= required),
            "satisfied_plain": bool(plain >= required),
        }


@dataclass(frozen=True)
class ProblemConfig:
    N: int
    R: int = 1
    s: int = 0
    probing_law: ProbingLaw = ProbingLaw.UNIT_MODULUS
    seed: int = 0

    def __post_init__(self):
        if int(self.N) < 1:
            raise ModelError("N must be a positive integer")
        if int(self.R) < 1:
            raise ModelError("R must be at least 1")
        if int(self.s) < 0:
            raise ModelError("s must be nonnegative")
        object.__setattr__(self, "probing_law", ProbingLaw(self.probing_law))

    @property
    def L(self) -> int:
        return 2 * self.N + 1


@dataclass
class MeasurementEnsemble:
    x: np.ndarray
    B: np.ndarray
    c: np.ndarray
    Phi: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    support: SupportSet
    G: np.ndarray = field(repr=False, default=None)


@dataclass
class NoiseRecord:
    W: np.ndarray
    snr_db: float
    eta: float

    @property
    def noise_norm(self) -> float:
        return float(np.linalg.norm(self.W))


def _half_size(L: int) -> int:
    if L % 2 != 1:
        raise ModelError(f"sample count must be odd, got {L}")
    return (L - 1) // 2


def dirichlet(t, N: int, order: int = 0):
    """Dirichlet kernel ``(1/L) sum_k exp(i 2 pi t k)`` or a derivative of it.

    Vectorized over ``t``.  Every derivative of this symmetric sum is real,
    so the real part is returned.
    """
    if order not in (0, 1, 2, 3):
        raise ModelError(f"unsupported derivative order {order}")
    if N < 1:
        raise ModelError("N must be >= 1")
    L = 2 * N + 1
    k = np.arange(-N, N + 1)
    t = np.asarray(t, dtype=float)
    phase = np.exp(2j * np.pi * np.multiply.outer(t, k))
    terms = phase * (2j * np.pi * k) ** order
    val = terms.sum(axis=-1) / L
    if np.size(val) and np.max(np.abs(val.imag)) > 1e-12 * max(1.0, np.max(np.abs(val.real))):
        raise ArithmeticError("Dirichlet sum lost its real symmetry")
    out = val.real
    return float(out) if out.ndim == 0 else out


def grid_index(N: int) -> tuple[np.ndarray, np.ndarray]:
    """Flattened ``(k, l)`` index arrays in the canonical order."""
    idx = np.arange(-N, N + 1)
    L = 2 * N + 1
    return np.repeat(idx, L), np.tile(idx, L)


def atom(r, N: int) -> np.ndarray:
    """Atom ``a(r)`` with entries ``D_N(l/L - tau) D_N(k/L - nu)``."""
    tau, nu = _pair(r)
    L = 2 * N + 1
    g = np.arange(-N, N + 1) / L
    return np.outer(dirichlet(g - nu, N), dirichlet(g - tau, N)).ravel().astype(complex)


def steering(r, N: int) -> np.ndarray:
    """Exponential vector ``f(r)`` with ``a(r) = F^H f(r)``."""
    tau, nu = _pair(r)
    m, n = grid_index(N)
    return np.exp(-2j * np.pi * (m * nu + n * tau))


def dft2_matrix(N: int) -> np.ndarray:
    """The 2D DFT ``F`` (``L^2 x L^2``) under the canonical ordering.

    ``F^H`` has entries ``exp(i 2 pi (m k + n l) / L) / L^2``.
    """
    L = 2 * N + 1
    k, l = grid_index(N)
    FH = np.exp(2j * np.pi * (np.outer(k, k) + np.outer(l, l)) / L) / L**2
    return FH.conj().T


def gabor_matrix(x) -> np.ndarray:
    """Gabor matrix ``G[p, (k, l)] = x_{p-l} exp(i 2 pi k p / L)``.

    ``x`` is indexed ``-N..N`` and treated as L-periodic.
    """
    x = np.asarray(x, dtype=complex).ravel()
    L = x.size
    N = _half_size(L)
    p = np.arange(-N, N + 1)
    k, l = grid_index(N)
    shift = x[(p[:, None] - l[None, :] + N) % L]
    mod = np.exp(2j * np.pi * np.outer(p, k) / L)
    return shift * mod


def synthesize(config: ProblemConfig, support: SupportSet, B, x) -> MeasurementEnsemble:
    """Build ``X = sum_j a(r_j) b_j^H`` and ``Y = G X``.

    Row ``j`` of ``B`` holds ``[b_j1, ..., b_jR]``.  ``Phi`` stores the unit
    vectors ``phi_j = conj(B[j]) / ||B[j]||``, the values the dual polynomial
    must take on the support.
    """
    N, L, R = config.N, config.L, config.R
    x = np.asarray(x, dtype=complex).ravel()
    if x.size != L:
        raise ModelError(f"probing vector has length {x.size}, expected {L}")
    s = len(support)
    B = np.asarray(B, dtype=complex).reshape(s, R) if s else np.zeros((0, R), complex)
    c = np.linalg.norm(B, axis=1)
    if s and np.any(c == 0):
        raise ModelError("degenerate source: zero attenuation row")
    Phi = np.conj(B) / c[:, None] if s else np.zeros((0, R), complex)
    X = np.zeros((L * L, R), dtype=complex)
    for j, r in enumerate(support):
        X += np.outer(atom(r, N), B[j])
    G = gabor_matrix(x)
    return MeasurementEnsemble(x=x, B=B, c=c, Phi=Phi, X=X, Y=G @ X, support=support, G=G)


def continuous_oracle(support: SupportSet, B, x, p: int, m: int, bandwidth: float = 1.0) -> complex:
    """Sample ``y_m(t) = sum_j b_jm x(t - tau_j T) e^{i 2 pi nu_j B t}`` at ``t = p/B``.

    ``x(t)`` is the band-limited L-periodic interpolant of the samples and
    ``m`` is 1-based.  Independent of the Gabor/atom route.
    """
    x = np.asarray(x, dtype=complex).ravel()
    L = x.size
    N = _half_size(L)
    if not -N <= p <= N:
        raise ModelError(f"sample index {p} outside -{N}..{N}")
    s = len(support)
    if s == 0:
        return 0j
    B = np.asarray(B, dtype=complex).reshape(s, -1)
    if not 1 <= m <= B.shape[1]:
        raise ModelError(f"receiver index {m} outside 1..{B.shape[1]}")
    T = L / bandwidth
    t = p / bandwidth
    lidx = np.arange(-N, N + 1)

    def waveform(time):
        return np.sum(x * dirichlet((time * bandwidth - lidx) / L, N))

    total = 0j
    for j, r in enumerate(support):
        delay = r.tau * T
        doppler = r.nu * bandwidth
        total += B[j, m - 1] * waveform(t - delay) * np.exp(2j * np.pi * doppler * t)
    return complex(total)


def unit_sphere_rows(rng: np.random.Generator, rows: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((rows, dim)) + 1j * rng.standard_normal((rows, dim))
    if rows == 0:
        return z
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def draw_inputs(config: ProblemConfig, rng: np.random.Generator):
    """Draw the probing samples ``x`` and the unit-norm rows of ``Phi``."""
    L = config.L
    if config.probing_law is ProbingLaw.GAUSSIAN:
        x = rng.standard_normal(L) / math.sqrt(L) + 0j
    else:
        x = np.exp(2j * np.pi * rng.random(L))
    Phi = unit_sphere_rows(rng, config.s, config.R)
    return x, Phi


def add_noise(Y, snr_db: float, rng: np.random.Generator, eta: float | None = None) -> NoiseRecord:
    """Complex Gaussian noise rescaled so that ``10 log10(|Y|^2/|W|^2) = snr_db``.

    ``eta`` defaults to ``8/3 * ||W||_F``.
    """
    Y = np.asarray(Y, dtype=complex)
    ynorm = np.linalg.norm(Y)
    if ynorm == 0:
        raise ModelError("SNR undefined for an all-zero observation")
    if math.isinf(snr_db) and snr_db > 0:
        return NoiseRecord(W=np.zeros_like(Y), snr_db=snr_db, eta=0.0 if eta is None else float(eta))
    W = rng.standard_normal(Y.shape) + 1j * rng.standard_normal(Y.shape)
    W *= ynorm / np.linalg.norm(W) / 10 ** (snr_db / 20)
    if eta is None:
        eta = NOISE_RESIDUAL_FACTOR * np.linalg.norm(W)
    return NoiseRecord(W=W, snr_db=float(snr_db), eta=float(eta))


def _pair(r) -> tuple[float, float]:
    if isinstance(r, DelayDoppler):
        return r.tau, r.nu
    tau, nu = r
    return float(tau), float(nu)
