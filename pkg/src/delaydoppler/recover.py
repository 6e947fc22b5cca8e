"""Support recovery from the vector-valued dual polynomial.

``q(r) = Lambda^H G a(r) = C^H f(r)`` with ``C = F G^H Lambda``, so each of
its ``R`` components is a 2D trigonometric polynomial whose samples on a
uniform grid come from one zero-padded FFT.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import model
from .model import DelayDoppler, ProblemConfig, SupportSet, torus_diff

NOISELESS_THRESHOLD = 0.99
NOISY_THRESHOLD = 0.97
DEFAULT_GRID_FACTOR = 16


@dataclass
class DualField:
    """``values[i, j] = ||q(i/M, j/M)||_2`` with ``M = grid_factor * L``."""

    grid_factor: int
    values: np.ndarray
    coefficients: np.ndarray
    N: int

    @property
    def size(self) -> int:
        return self.values.shape[0]

    def grid(self) -> np.ndarray:
        return np.arange(self.size) / self.size

    def to_csv(self, path, column: str = "qnorm") -> None:
        write_grid_csv(path, self.values, column)


@dataclass
class EstimateSet:
    pairs: list[DelayDoppler] = field(default_factory=list)
    peak_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return len(self.pairs)

    def as_array(self) -> np.ndarray:
        if not self.pairs:
            return np.zeros((0, 2))
        return np.array([[p.tau, p.nu] for p in self.pairs])

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tau", "nu", "peak"])
            for p, v in zip(self.pairs, self.peak_values):
                w.writerow([repr(p.tau), repr(p.nu), repr(float(v))])


def write_grid_csv(path, values: np.ndarray, column: str) -> None:
    M = values.shape[0]
    g = np.arange(M) / M
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau", "nu", column])
        for i in range(M):
            for j in range(M):
                w.writerow([repr(float(g[i])), repr(float(g[j])), repr(float(values[i, j]))])


def dual_coefficients(Lambda_hat, G, config: ProblemConfig) -> np.ndarray:
    """``C = F G^H Lambda`` (``L^2 x R``)."""
    Lam = np.asarray(Lambda_hat, dtype=complex).reshape(config.L, -1)
    F = model.dft2_matrix(config.N)
    return F @ (np.asarray(G).conj().T @ Lam)


def evaluate_dual_field(Lambda_hat, G, config: ProblemConfig,
                        grid_factor: int = DEFAULT_GRID_FACTOR) -> DualField:
    if grid_factor < 4:
        raise ValueError("grid_factor must be at least 4")
    C = dual_coefficients(Lambda_hat, G, config)
    return field_from_coefficients(C, config.N, grid_factor)


def field_from_coefficients(C, N: int, grid_factor: int) -> DualField:
    L = 2 * N + 1
    M = grid_factor * L
    R = C.shape[1]
    k, l = model.grid_index(N)
    # q_m(tau, nu) = sum conj(C[(k, l), m]) exp(-i 2 pi (k nu + l tau))
    A = np.zeros((M, M, R), dtype=complex)
    A[l % M, k % M, :] = np.conj(C)
    spec = np.fft.fft2(A, axes=(0, 1))
    values = np.sqrt(np.sum(np.abs(spec) ** 2, axis=2))
    return DualField(grid_factor=grid_factor, values=values, coefficients=C, N=N)


def dual_polynomial(Lambda_hat, G, r, N: int) -> np.ndarray:
    """Direct evaluation of ``q(r) = Lambda^H G a(r)``."""
    return np.asarray(Lambda_hat).conj().T @ (np.asarray(G) @ model.atom(r, N))


_OFFSETS = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
_PATCH = np.array([(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1)], dtype=float)
_DESIGN = np.column_stack([np.ones(9), _PATCH[:, 0], _PATCH[:, 1], _PATCH[:, 0] ** 2,
                           _PATCH[:, 0] * _PATCH[:, 1], _PATCH[:, 1] ** 2])
_FIT = np.linalg.pinv(_DESIGN)


def local_maxima(values: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    """Torus 8-neighbourhood maxima at or above ``threshold``.

    A cell qualifies when no neighbour exceeds it and every neighbour of
    equal value comes later in lexicographic order.
    """
    M1, M2 = values.shape
    cand = values >= threshold
    ii, jj = np.meshgrid(np.arange(M1), np.arange(M2), indexing="ij")
    lin = ii * M2 + jj
    for dx, dy in _OFFSETS:
        nb = np.roll(values, (-dx, -dy), axis=(0, 1))
        nlin = np.roll(lin, (-dx, -dy), axis=(0, 1))
        cand &= (values > nb) | ((values == nb) & (lin < nlin))
    return [tuple(p) for p in np.argwhere(cand)]


def refine_peak(values: np.ndarray, i: int, j: int) -> tuple[float, float]:
    """Sub-grid offset of a peak from a quadratic fit to its 3x3 patch."""
    M1, M2 = values.shape
    z = np.array([values[(i + dx) % M1, (j + dy) % M2] for dx in (-1, 0, 1) for dy in (-1, 0, 1)])
    _, b, c, d, e, f = _FIT @ z
    H = np.array([[2 * d, e], [e, 2 * f]])
    if not (H[0, 0] < 0 and np.linalg.det(H) > 0):
        return 0.0, 0.0
    off = np.linalg.solve(H, -np.array([b, c]))
    if np.any(np.abs(off) > 1.0):
        return 0.0, 0.0
    return float(off[0]), float(off[1])


def detect_support(dual_field: DualField, threshold: float = NOISELESS_THRESHOLD,
                   max_peaks: int | None = None, refine: bool = False) -> EstimateSet:
    if not 0 < threshold <= 1:
        raise ValueError("threshold must lie in (0, 1]")
    return _peaks(dual_field.values, threshold, max_peaks, refine)


def _peaks(values: np.ndarray, threshold: float, max_peaks, refine: bool) -> EstimateSet:
    M = values.shape[0]
    cells = local_maxima(values, threshold)
    cells.sort(key=lambda ij: (-values[ij], ij))
    if max_peaks is not None:
        cells = cells[:max_peaks]
    found = []
    for i, j in cells:
        di, dj = refine_peak(values, i, j) if refine else (0.0, 0.0)
        found.append((DelayDoppler((i + di) / M, (j + dj) / M), float(values[i, j])))
    found.sort(key=lambda pv: (pv[0].tau, pv[0].nu))
    return EstimateSet(pairs=[p for p, _ in found], peak_values=np.array([v for _, v in found]))


def top_peaks(values: np.ndarray, count: int, refine: bool = False) -> EstimateSet:
    """The ``count`` largest local maxima, regardless of level."""
    return _peaks(values, -np.inf, count, refine)


def select_by_amplitude(candidates: EstimateSet, Y, G, N: int, count: int) -> EstimateSet:
    """Greedily keep the ``count`` candidates whose atoms best explain ``Y``.

    A noisy dual field touches one at every atom of the estimate, spurious
    ones included, so the peak level cannot rank them; the least-squares
    energy each atom carries can.
    """
    pairs = list(candidates.pairs)
    if len(pairs) <= count:
        return candidates
    A = np.column_stack([G @ model.atom((p.tau, p.nu), N) for p in pairs])
    A = A / np.linalg.norm(A, axis=0)
    Y = np.asarray(Y, dtype=complex).reshape(A.shape[0], -1)
    chosen: list[int] = []
    resid = Y
    for _ in range(count):
        score = np.linalg.norm(A.conj().T @ resid, axis=1)
        score[chosen] = -np.inf
        chosen.append(int(np.argmax(score)))
        sub = A[:, chosen]
        coef = np.linalg.lstsq(sub, Y, rcond=None)[0]
        resid = Y - sub @ coef
    return EstimateSet(pairs=[pairs[k] for k in chosen], peak_values=np.asarray(candidates.peak_values)[chosen])


@dataclass
class Matching:
    error: float
    pairs: list[tuple[int, int]]
    distances: np.ndarray
    unmatched_truth: int
    unequal_cardinality: bool


def match_estimates(truth: SupportSet, estimate: EstimateSet, L: int) -> Matching:
    """Minimum-cost assignment of estimates to truth on the torus.

    ``error = (1/s) sum_j L * dist_j``; a truth entry without a partner
    contributes the worst torus distance ``sqrt(2)/2``.
    """
    s = len(truth)
    est = estimate.as_array() if isinstance(estimate, EstimateSet) else np.asarray(estimate).reshape(-1, 2)
    if s == 0:
        return Matching(0.0, [], np.zeros(0), 0, len(est) != 0)
    tru = truth.as_array()
    worst = np.sqrt(2.0) / 2
    if len(est) == 0:
        return Matching(L * worst, [], np.full(s, worst), s, True)
    diff = torus_diff(tru[:, None, :], est[None, :, :])
    cost = np.sqrt(np.sum(diff**2, axis=-1))
    rows, cols = linear_sum_assignment(cost)
    dist = np.full(s, worst)
    dist[rows] = cost[rows, cols]
    return Matching(
        error=float(L * dist.mean()),
        pairs=list(zip(rows.tolist(), cols.tolist())),
        distances=dist,
        unmatched_truth=s - len(rows),
        unequal_cardinality=len(est) != s,
    )


def localization_error(truth: SupportSet, estimate: EstimateSet, L: int) -> float:
    return match_estimates(truth, estimate, L).error
