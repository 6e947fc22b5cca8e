"""Dual atomic-norm SDPs for delay-Doppler recovery.

The dual of ``min ||Z||_A s.t. ||Y - G Z||_F <= eta`` is relaxed to

    maximize    Re<Lambda, Y>_F - eta ||Lambda||_F
    subject to  [[Q, F G^H Lambda], [Lambda^H G F^H, I_R]] >= 0,
                tr((Theta_k kron Theta_l) Q) = delta_(k,l),

with ``Theta_k`` the L x L matrix of ones on the k-th diagonal.  By default
every shift ``|k|, |l| <= 2N`` of the Gram matrix is constrained, which is
what makes ``||q(r)||_2 <= 1`` hold; ``full_trace=False`` keeps only
``|k|, |l| <= N``.  The complex PSD constraint enters the real conic
solver through the Hermitian embedding.

Conic variable layout: ``[Re Lambda, Im Lambda, Q params, (t)]`` with
Lambda flattened row-major and the Gram matrix ``Q`` parameterized by the
real parts of its lower triangle followed by the imaginary parts of its
strictly lower triangle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import model
from .model import ProblemConfig, SupportSet
from .sdp import (ConicProblem, ConicSolution, SolverSettings, Status, psd_cone,
                  soc_cone, solve, svec_position, zero_cone)


class DualProblemError(ValueError):
    pass


@dataclass
class VariableMap:
    L: int
    R: int
    lam_re: slice
    lam_im: slice
    q_re: slice
    q_im: slice
    t: int | None
    tri_i: np.ndarray
    tri_j: np.ndarray
    stri_i: np.ndarray
    stri_j: np.ndarray

    def lam(self, x: np.ndarray) -> np.ndarray:
        shape = (self.L, self.R)
        return x[self.lam_re].reshape(shape) + 1j * x[self.lam_im].reshape(shape)

    def gram(self, x: np.ndarray) -> np.ndarray:
        n2 = self.L * self.L
        Q = np.zeros((n2, n2), dtype=complex)
        Q[self.tri_i, self.tri_j] = x[self.q_re]
        Q[self.stri_i, self.stri_j] += 1j * x[self.q_im]
        lower = np.tril(Q, -1)
        return np.tril(Q) + lower.conj().T

    def pack(self, Lambda, Q, t: float | None = None) -> np.ndarray:
        """Inverse of ``lam``/``gram``: the conic variable vector for ``(Lambda, Q, t)``."""
        n = self.q_im.stop + (0 if self.t is None else 1)
        x = np.zeros(n)
        Lambda = np.asarray(Lambda, dtype=complex).reshape(self.L, self.R)
        Q = np.asarray(Q, dtype=complex)
        x[self.lam_re] = Lambda.real.ravel()
        x[self.lam_im] = Lambda.imag.ravel()
        x[self.q_re] = Q[self.tri_i, self.tri_j].real
        x[self.q_im] = Q[self.stri_i, self.stri_j].imag
        if self.t is not None:
            x[self.t] = np.linalg.norm(Lambda) if t is None else t
        return x


@dataclass
class DualProblem:
    config: ProblemConfig
    Y: np.ndarray
    G: np.ndarray
    F: np.ndarray
    eta: float
    conic: ConicProblem
    variables: VariableMap
    full_trace: bool = True

    @property
    def psd_side(self) -> int:
        return self.conic.cones[-1].size

    @property
    def n_trace_constraints(self) -> int:
        """Complex trace constraints imposed (conjugate pairs counted once)."""
        return len(trace_pairs(self.config.N, self.full_trace))

    @property
    def n_trace_equalities(self) -> int:
        return self.conic.cones[0].size


@dataclass
class DualSolution:
    Lambda_hat: np.ndarray
    Q_hat: np.ndarray
    objective: float
    solver_report: ConicSolution

    @property
    def status(self) -> Status:
        return self.solver_report.status


def trace_range(N: int, full: bool = True) -> int:
    """Largest ``|k|`` carrying a trace constraint.

    The Gram matrix of an L-term trigonometric polynomial has diagonals
    ``-2N..2N``; all of them must be pinned for ``psi^H Q psi = 1`` to hold.
    ``full=False`` keeps only ``|k|, |l| <= N``, which does not bound the
    dual polynomial and is kept for comparison only.
    """
    return 2 * N if full else N


def toeplitz_trace_indices(k: int, l: int, N: int, full: bool = False) -> list[tuple[int, int]]:
    """Entries of ``Q`` summed by ``tr((Theta_k kron Theta_l) Q)``.

    ``Theta_k[i, j] = 1`` iff ``j - i = k``; the trace then picks ``Q[a, b]``
    with ``a - b = (k, l)`` componentwise in the 2D index.  Indices are
    limited to ``|k|, |l| <= N`` unless ``full`` allows the whole ``2N`` range.
    """
    K = trace_range(N, full)
    if abs(k) > K or abs(l) > K:
        raise DualProblemError(f"trace index ({k}, {l}) outside -{K}..{K}")
    L = 2 * N + 1
    out = []
    for a1 in range(L):
        b1 = a1 - k
        if not 0 <= b1 < L:
            continue
        for a2 in range(L):
            b2 = a2 - l
            if 0 <= b2 < L:
                out.append((a1 * L + a2, b1 * L + b2))
    return out


def theta_kron(k: int, l: int, N: int) -> np.ndarray:
    """Dense ``Theta_k kron Theta_l``; used by tests as an independent check."""
    L = 2 * N + 1
    return np.kron(np.eye(L, k=k), np.eye(L, k=l))


def _check_dims(Y, G, config: ProblemConfig):
    Y = np.asarray(Y, dtype=complex)
    G = np.asarray(G, dtype=complex)
    L = config.L
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.shape != (L, config.R):
        raise DualProblemError(f"Y has shape {Y.shape}, expected {(L, config.R)}")
    if G.shape != (L, L * L):
        raise DualProblemError(f"G has shape {G.shape}, expected {(L, L * L)}")
    return Y, G


def trace_pairs(N: int, full: bool = True) -> list[tuple[int, int]]:
    """Distinct trace constraints; ``(k, l)`` and ``(-k, -l)`` are conjugate."""
    K = trace_range(N, full)
    pairs = [(k, l) for k in range(-K, K + 1) for l in range(-K, K + 1)]
    if full:
        pairs = [p for p in pairs if p >= (0, 0)]
    return pairs


def _build(Y, G, config: ProblemConfig, eta: float, full_trace: bool = True,
           hermitian: bool = True) -> DualProblem:
    Y, G = _check_dims(Y, G, config)
    N, L, R = config.N, config.L, config.R
    n2 = L * L
    nc = n2 + R
    side = 2 * nc
    F = model.dft2_matrix(N)
    H = F @ G.conj().T  # P = H @ Lambda

    nlam = L * R
    tri_i, tri_j = np.tril_indices(n2)
    stri_i, stri_j = np.tril_indices(n2, -1)
    nqr, nqi = tri_i.size, stri_i.size
    lam_re = slice(0, nlam)
    lam_im = slice(nlam, 2 * nlam)
    q_re = slice(2 * nlam, 2 * nlam + nqr)
    q_im = slice(q_re.stop, q_re.stop + nqi)
    noisy = eta > 0
    t_idx = q_im.stop if noisy else None
    nvar = q_im.stop + (1 if noisy else 0)
    vmap = VariableMap(L, R, lam_re, lam_im, q_re, q_im, t_idx, tri_i, tri_j, stri_i, stri_j)

    rows, cols, vals, rhs = [], [], [], []
    row = 0

    # trace equalities; Q[a, b] for a > b is q_re + i q_im, Q[b, a] its conjugate
    re_pos = {(int(i), int(j)): q_re.start + p for p, (i, j) in enumerate(zip(tri_i, tri_j))}
    im_pos = {(int(i), int(j)): q_im.start + p for p, (i, j) in enumerate(zip(stri_i, stri_j))}
    for k, l in trace_pairs(N, full_trace):
        entries = toeplitz_trace_indices(k, l, N, full=True)
        target = 1.0 if (k, l) == (0, 0) else 0.0
        for part in ("re", "im"):
            if part == "im" and (k, l) == (0, 0):
                continue
            for a, b in entries:
                lo, hi = (a, b) if a >= b else (b, a)
                sign = 1.0 if a >= b else -1.0
                if part == "re":
                    rows.append(row); cols.append(re_pos[lo, hi]); vals.append(1.0)
                elif lo != hi:
                    rows.append(row); cols.append(im_pos[lo, hi]); vals.append(sign)
            rhs.append(target if part == "re" else 0.0)
            row += 1
    n_zero = row

    cones = [zero_cone(n_zero)]
    if noisy:
        # s = (t, vec Lambda) in the second-order cone
        rows.append(row); cols.append(t_idx); vals.append(-1.0); rhs.append(0.0); row += 1
        for v in range(2 * nlam):
            rows.append(row); cols.append(v); vals.append(-1.0); rhs.append(0.0); row += 1
        cones.append(soc_cone(2 * nlam + 1))

    # PSD block: s = svec(E0) - A x, E the embedded [[Q, P], [P^H, I]]
    base = row
    psd_rhs = np.zeros(side * (side + 1) // 2)

    def put(i, j, var, coef):
        p = svec_position(i, j, side)
        rows.append(base + p); cols.append(var)
        vals.append(-coef * (1.0 if i == j else math.sqrt(2.0)))

    for p, (i, j) in enumerate(zip(tri_i, tri_j)):
        var = q_re.start + p
        put(i, j, var, 1.0)
        put(i + nc, j + nc, var, 1.0)
    for p, (i, j) in enumerate(zip(stri_i, stri_j)):
        var = q_im.start + p
        put(i + nc, j, var, 1.0)   # Im Q[i, j]
        put(j + nc, i, var, -1.0)  # Im Q[j, i]
    Hr, Hi = H.real, H.imag
    for a in range(n2):
        for m in range(R):
            for pidx in range(L):
                vre = lam_re.start + pidx * R + m
                vim = lam_im.start + pidx * R + m
                hr, hi = Hr[a, pidx], Hi[a, pidx]
                # Re P = hr re - hi im ; Im P = hi re + hr im
                # lower positions: Re M[n2+m, a] = Re P, Im M[n2+m, a] = -Im P
                for (i, j), (cre, cim) in (
                    ((n2 + m, a), (hr, -hi)),
                    ((nc + n2 + m, nc + a), (hr, -hi)),
                    ((nc + n2 + m, a), (-hi, -hr)),
                    ((nc + a, n2 + m), (hi, hr)),
                ):
                    if cre:
                        put(i, j, vre, cre)
                    if cim:
                        put(i, j, vim, cim)
    for m in range(R):
        psd_rhs[svec_position(n2 + m, n2 + m, side)] = 1.0
        psd_rhs[svec_position(nc + n2 + m, nc + n2 + m, side)] = 1.0
    rhs.extend(psd_rhs.tolist())
    cones.append(psd_cone(side, hermitian=hermitian))
    mrows = base + psd_rhs.size

    A = sp.csc_matrix((vals, (rows, cols)), shape=(mrows, nvar))
    c = np.zeros(nvar)
    c[lam_re] = -Y.real.ravel()
    c[lam_im] = -Y.imag.ravel()
    if noisy:
        c[t_idx] = eta
    conic = ConicProblem(c=c, A=A, b=np.array(rhs), cones=cones)
    return DualProblem(config=config, Y=Y, G=G, F=F, eta=float(eta), conic=conic,
                       variables=vmap, full_trace=full_trace)


def build_noiseless_dual(Y, G, config: ProblemConfig, full_trace: bool = True,
                         hermitian: bool = True) -> DualProblem:
    """Dual SDP with exact data fit.

    ``hermitian`` marks the PSD block as an embedded Hermitian matrix so the
    solver projects with a complex eigendecomposition of half the size.
    """
    return _build(Y, G, config, 0.0, full_trace, hermitian)


def build_noisy_dual(Y, G, config: ProblemConfig, eta: float,
                     full_trace: bool = True, hermitian: bool = True) -> DualProblem:
    """Dual SDP for ``||Y - G Z||_F <= eta``; ``eta = 0`` gives the noiseless problem."""
    if eta < 0:
        raise DualProblemError("eta must be nonnegative")
    return _build(Y, G, config, float(eta), full_trace, hermitian)


def solve_dual(problem: DualProblem, settings: SolverSettings | None = None) -> DualSolution:
    report = solve(problem.conic, settings)
    x = report.x
    return DualSolution(
        Lambda_hat=problem.variables.lam(x),
        Q_hat=problem.variables.gram(x),
        objective=-report.primal_objective,
        solver_report=report,
    )


def dual_objective(Lambda, Y, eta: float = 0.0) -> float:
    """``Re<Lambda, Y>_F - eta ||Lambda||_F``."""
    return float(np.real(np.vdot(Lambda, Y)) - eta * np.linalg.norm(Lambda))


def trace_residuals(Q, N: int, full: bool = True) -> np.ndarray:
    """``|tr((Theta_k kron Theta_l) Q) - delta|`` indexed by ``(k + K, l + K)``."""
    K = trace_range(N, full)
    out = np.zeros((2 * K + 1, 2 * K + 1))
    for k in range(-K, K + 1):
        for l in range(-K, K + 1):
            pos = toeplitz_trace_indices(k, l, N, full=True)
            total = sum(Q[a, b] for a, b in pos)
            out[k + K, l + K] = abs(total - (1.0 if (k, l) == (0, 0) else 0.0))
    return out


def check_dual_feasibility(sol, G, config: ProblemConfig, grid_factor: int = 16) -> float:
    """Supremum of ``||q(r)||_2`` over a ``(grid_factor L)^2`` grid."""
    from .recover import evaluate_dual_field

    Lam = sol.Lambda_hat if isinstance(sol, DualSolution) else np.asarray(sol)
    return float(evaluate_dual_field(Lam, G, config, grid_factor).values.max())


def check_theorem_conditions(config: ProblemConfig, support: SupportSet, c: float = 1.0,
                             delta: float = 0.1) -> dict:
    """Report on the recovery theorem's hypotheses.

    The sample bound uses a caller-supplied constant ``c``; it is reported
    for information only.
    """
    L, R, s = config.L, config.R, max(len(support), 1)
    sep = support.separation_report(config.N)
    term1 = math.log(12 * s * L / delta) ** 2 * (1 + math.log(2 * L / delta) / R)
    term2 = math.log(18 * s * s / delta) ** 2 * (1 + math.log(L / delta) / R)
    bound = c * s * max(term1, term2)
    return {
        "separation": sep,
        "separation_satisfied": sep["satisfied"],
        "sample_bound": bound,
        "sample_bound_constant": c,
        "sample_bound_delta": delta,
        "sample_bound_satisfied": bool(L >= bound),
        "L": L,
        "large_L_condition": bool(L > 1024),
        "note": "the large-L and separation conditions are sufficient, not necessary",
    }
