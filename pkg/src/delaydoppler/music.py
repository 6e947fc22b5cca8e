"""MUSIC pseudospectrum over the delay-Doppler plane.

Snapshots are the columns of ``Y``; the steering vector of a pair ``r`` is
the measurement-domain image ``G a(r)``, normalized to unit length.  The
number of sources ``s`` is an input.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import model
from .model import ProblemConfig
from .recover import EstimateSet, top_peaks, write_grid_csv

EIGENGAP_TOL = 1e-10


class SubspaceError(ValueError):
    pass


@dataclass
class MusicResult:
    spectrum: np.ndarray  # spectrum[i, j] at tau = i/M, nu = j/M
    estimates: EstimateSet
    eigenvalues: np.ndarray  # descending
    grid_factor: int
    degenerate_eigengap: bool = False
    metadata: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        write_grid_csv(path, self.spectrum, "pmusic")


def steering_field(G, N: int, grid_factor: int) -> np.ndarray:
    """``G a(r)`` on the ``M x M`` grid, shape ``(M, M, L)``."""
    L = 2 * N + 1
    M = grid_factor * L
    H = np.asarray(G) @ model.dft2_matrix(N).conj().T  # G F^H
    k, l = model.grid_index(N)
    A = np.zeros((M, M, L), dtype=complex)
    A[l % M, k % M, :] = H.T
    return np.fft.fft2(A, axes=(0, 1))


def music_estimate(Y, G, config: ProblemConfig, s: int, grid_factor: int = 16,
                   refine: bool = False) -> MusicResult:
    Y = np.asarray(Y, dtype=complex)
    L, R = Y.shape
    if L != config.L:
        raise SubspaceError(f"Y has {L} rows, expected {config.L}")
    if s < 1 or s >= L:
        raise SubspaceError(f"need 1 <= s < L, got s={s}")
    if R < s:
        raise SubspaceError(f"{R} snapshots cannot span a {s}-dimensional signal subspace")
    if not np.any(Y):
        raise SubspaceError("zero measurements give a rank-0 covariance")
    cov = Y @ Y.conj().T / R
    w, V = np.linalg.eigh(cov)
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    En = V[:, s:]
    degenerate = bool(abs(w[s - 1] - w[s]) <= EIGENGAP_TOL * max(1.0, abs(w[0])))

    steer = steering_field(G, config.N, grid_factor)
    norms = np.linalg.norm(steer, axis=2)
    proj = np.einsum("ijp,pq->ijq", steer, En.conj())
    resid = np.sum(np.abs(proj) ** 2, axis=2) / np.maximum(norms, 1e-300) ** 2
    spectrum = 1.0 / np.maximum(resid, 1e-300)
    est = top_peaks(spectrum, s, refine=refine)
    meta = {
        "snapshots": "columns of Y",
        "steering": "G a(r), unit normalized",
        "covariance": "Y Y^H / R",
        "noise_subspace_dim": L - s,
        "s_known": True,
    }
    return MusicResult(spectrum=spectrum, estimates=est, eigenvalues=w, grid_factor=grid_factor,
                       degenerate_eigengap=degenerate, metadata=meta)
