"""Deterministic dual certificate built from the squared Fejer kernel.

``K(t) = (sin(M pi t) / (M sin(pi t)))^4`` with ``M = N/2 + 1`` is a
trigonometric polynomial of degree ``N``.  The certificate

    qbar(r) = sum_j alpha_j Gbar(r - r_j) + beta_j Gbar10(r - r_j) + gamma_j Gbar01(r - r_j),

with ``Gbar(r) = K(tau) K(nu)``, interpolates ``phi_j`` at the support
with vanishing gradient.  This module builds it and checks the numerical
bounds that make it a valid certificate.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .model import SupportSet, torus_diff

FAR_RADIUS = 0.2447  # times 1/N
FAR_BOUND = 0.9978
ALPHA_DEVIATION = 5.577e-2
BETA_BOUND = 2.93e-2  # times 1/N
DBAR_DEVIATION = 0.19808
DBAR_NORM = 1.19808
DBAR_INV_NORM = 1.24700


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class FejerSystem:
    N: int
    M: int
    g: np.ndarray  # indexed -N..N
    kappa: float

    @property
    def k(self) -> np.ndarray:
        return np.arange(-self.N, self.N + 1)

    @property
    def printed_kappa_sq(self) -> float:
        """The closed form sqrt(pi^2/3 (N^2 + 4N)) as printed for |K''(0)|."""
        return math.sqrt(math.pi**2 / 3 * (self.N**2 + 4 * self.N))


def fejer_coeffs(N: int) -> FejerSystem:
    if N < 2 or N % 2:
        raise CertificateError(f"the squared Fejer construction needs even N >= 2, got {N}")
    M = N // 2 + 1
    tri = M - np.abs(np.arange(-(M - 1), M))
    g = np.convolve(tri, tri).astype(float) / M**3
    k = np.arange(-N, N + 1)
    kappa_sq = float(np.sum(g * (2 * np.pi * k) ** 2) / M)
    return FejerSystem(N=N, M=M, g=g, kappa=math.sqrt(kappa_sq))


def fejer_closed_form(t, M: int):
    t = np.asarray(t, dtype=float)
    num = np.sin(M * np.pi * t)
    den = M * np.sin(np.pi * t)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(np.abs(den) < 1e-300, 1.0, num / np.where(den == 0, 1.0, den))
    return ratio**4


def fejer_eval(sys: FejerSystem, t, order: int = 0):
    """``K^(order)(t)`` from the coefficient expansion, vectorized over ``t``."""
    if order not in (0, 1, 2, 3):
        raise CertificateError(f"unsupported derivative order {order}")
    t = np.asarray(t, dtype=float)
    k = sys.k
    w = sys.g * (2j * np.pi * k) ** order / sys.M
    flat = t.reshape(-1)
    out = np.empty(flat.size)
    chunk = max(1, 2**22 // k.size)
    for s in range(0, flat.size, chunk):
        ph = np.exp(2j * np.pi * np.multiply.outer(flat[s:s + chunk], k))
        val = ph @ w
        out[s:s + chunk] = val.real
    out = out.reshape(t.shape)
    return float(out) if out.ndim == 0 else out


def gbar(sys: FejerSystem, r, m: int = 0, n: int = 0):
    """``d^m/dtau^m d^n/dnu^n [K(tau) K(nu)]`` at ``r`` (last axis (tau, nu))."""
    r = np.asarray(r, dtype=float)
    return fejer_eval(sys, r[..., 0], m) * fejer_eval(sys, r[..., 1], n)


@dataclass
class InterpolationSystem:
    support: SupportSet
    Phi: np.ndarray
    fejer: FejerSystem
    Dbar: np.ndarray
    blocks: dict
    alpha_bar: np.ndarray
    beta_bar: np.ndarray
    gamma_bar: np.ndarray
    residual: float
    condition_number: float

    @property
    def N(self) -> int:
        return self.fejer.N

    @property
    def kappa(self) -> float:
        return self.fejer.kappa


def build_interp_system(support: SupportSet, Phi, N: int, max_condition: float = 1e8) -> InterpolationSystem:
    """Assemble the kappa-scaled 3s x 3s system and solve for the coefficients."""
    fs = fejer_coeffs(N)
    s = len(support)
    Phi = np.asarray(Phi, dtype=complex).reshape(s, -1)
    R = Phi.shape[1]
    pts = support.as_array()
    diff = torus_diff(pts[:, None, :], pts[None, :, :])  # r_k - r_j
    Kt = {o: fejer_eval(fs, diff[..., 0], o) for o in range(3)}
    Kn = {o: fejer_eval(fs, diff[..., 1], o) for o in range(3)}
    blocks = {(a, b): Kt[a] * Kn[b] for a, b in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]}
    kap = fs.kappa
    D = np.block([
        [blocks[0, 0], blocks[1, 0] / kap, blocks[0, 1] / kap],
        [-blocks[1, 0] / kap, -blocks[2, 0] / kap**2, -blocks[1, 1] / kap**2],
        [-blocks[0, 1] / kap, -blocks[1, 1] / kap**2, -blocks[0, 2] / kap**2],
    ])
    cond = float(np.linalg.cond(D)) if s else 1.0
    if not np.isfinite(cond) or cond > max_condition:
        raise CertificateError(f"interpolation system is ill-conditioned (condition number {cond:.3e})")
    rhs = np.zeros((3 * s, R), dtype=complex)
    rhs[:s] = Phi
    sol = np.linalg.solve(D, rhs) if s else rhs
    residual = float(np.abs(D @ sol - rhs).max(initial=0.0))
    return InterpolationSystem(
        support=support, Phi=Phi, fejer=fs, Dbar=D, blocks=blocks,
        alpha_bar=sol[:s], beta_bar=sol[s:2 * s] / kap, gamma_bar=sol[2 * s:] / kap,
        residual=residual, condition_number=cond,
    )


def evaluate_qbar(sys: InterpolationSystem, r, m: int = 0, n: int = 0) -> np.ndarray:
    """``qbar^(m,n)(r) / kappa^(m+n)``; ``r`` may be ``(2,)`` or ``(P, 2)``."""
    if m < 0 or n < 0 or m + n > 2:
        raise CertificateError("only derivatives with m + n <= 2 are available")
    r = np.asarray(r, dtype=float)
    single = r.ndim == 1
    pts = r.reshape(-1, 2)
    sup = sys.support.as_array()
    d = pts[:, None, :] - sup[None, :, :]
    fs = sys.fejer
    Ga = gbar(fs, d, m, n)
    Gb = gbar(fs, d, m + 1, n)
    Gc = gbar(fs, d, m, n + 1)
    val = Ga @ sys.alpha_bar + Gb @ sys.beta_bar + Gc @ sys.gamma_bar
    val = val / sys.kappa ** (m + n)
    return val[0] if single else val


def _tensor_qbar(sys: InterpolationSystem, taus: np.ndarray, nus: np.ndarray) -> dict:
    """All kappa-normalized derivatives with m + n <= 2 on a tensor grid."""
    fs = sys.fejer
    sup = sys.support.as_array()
    kap = sys.kappa
    Kt = [fejer_eval(fs, taus[None, :] - sup[:, :1], o) for o in range(4)]  # (s, P1)
    Kn = [fejer_eval(fs, nus[None, :] - sup[:, 1:], o) for o in range(4)]
    coeff = [(sys.alpha_bar, 0, 0), (sys.beta_bar, 1, 0), (sys.gamma_bar, 0, 1)]
    out = {}
    for m, n in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        total = np.zeros((taus.size, nus.size, sys.Phi.shape[1]), dtype=complex)
        for c, a, b in coeff:
            # sum_j Kt[m+a][j, i] Kn[n+b][j, k] c[j, :]
            total += np.einsum("ji,jk,jr->ikr", Kt[m + a], Kn[n + b], c)
        out[m, n] = total / kap ** (m + n)
    return out


def _windows(centers: np.ndarray, radius: float, step: float) -> list[np.ndarray]:
    offs = np.arange(-radius, radius + step / 2, step)
    return [(c + offs) % 1.0 for c in centers]


def verify_certificate(sys: InterpolationSystem, grid_factor: int = 4, fine_step: float | None = None,
                       window: float | None = None) -> dict:
    """Numerical check of the certificate conditions.

    A global grid with ``grid_factor * L`` points per axis covers the torus;
    each support point additionally gets a window of half-width ``window``
    (default ``3/N``) scanned at ``fine_step`` (default ``1/(32 N)``).
    Failures are reported, not raised.
    """
    N = sys.N
    L = 2 * N + 1
    s = len(sys.support)
    fine_step = fine_step or 1.0 / (32 * N)
    window = window or 3.0 / N
    sup = sys.support.as_array()
    far_r = FAR_RADIUS / N

    # (a) interpolation residuals
    if s:
        q0 = evaluate_qbar(sys, sup, 0, 0)
        interp = float(np.abs(q0 - sys.Phi).max())
        d10 = float(np.abs(evaluate_qbar(sys, sup, 1, 0)).max())
        d01 = float(np.abs(evaluate_qbar(sys, sup, 0, 1)).max())
    else:
        interp = d10 = d01 = 0.0

    far_max = 0.0
    close_max = 0.0
    trace_max = -np.inf
    det_min = np.inf
    n_close = 0

    def scan(taus, nus, hessian: bool):
        nonlocal far_max, close_max, trace_max, det_min, n_close
        vals = _tensor_qbar(sys, taus, nus) if hessian else {(0, 0): _tensor_q0(sys, taus, nus)}
        q = vals[0, 0]
        norm = np.sqrt(np.sum(np.abs(q) ** 2, axis=-1))
        if s:
            dt = np.abs(torus_diff(taus[:, None], sup[None, :, 0]))  # (P1, s)
            dn = np.abs(torus_diff(nus[:, None], sup[None, :, 1]))
            dist = np.maximum(dt[:, None, :], dn[None, :, :]).min(axis=-1)
        else:
            dist = np.full(norm.shape, np.inf)
        far = dist >= far_r
        if far.any():
            far_max = max(far_max, float(norm[far].max()))
        close = (~far) & (dist > 1e-12)
        if hessian and close.any():
            n_close += int(close.sum())
            close_max = max(close_max, float(norm[close].max()))
            q10, q01 = vals[1, 0], vals[0, 1]
            q20, q11, q02 = vals[2, 0], vals[1, 1], vals[0, 2]

            def re_inner(a, b):
                return np.sum((np.conj(a) * b).real, axis=-1)

            htt = 2 * re_inner(q10, q10) + 2 * re_inner(q20, q)
            hnn = 2 * re_inner(q01, q01) + 2 * re_inner(q02, q)
            htn = 2 * re_inner(q10, q01) + 2 * re_inner(q11, q)
            tr = (htt + hnn)[close]
            det = (htt * hnn - htn**2)[close]
            trace_max = max(trace_max, float(tr.max()))
            det_min = min(det_min, float(det.min()))

    grid = np.arange(grid_factor * L) / (grid_factor * L)
    chunk = max(1, 2**21 // (grid.size * max(s, 1) * max(sys.Phi.shape[1], 1)))
    for start in range(0, grid.size, chunk):
        scan(grid[start:start + chunk], grid, hessian=False)
    for (tw, nw) in zip(_windows(sup[:, 0], window, fine_step), _windows(sup[:, 1], window, fine_step)):
        scan(tw, nw, hessian=True)
        # include the support point itself in the Hessian region check
    alpha_norm = np.linalg.norm(sys.alpha_bar, axis=1) if s else np.zeros(0)
    beta_norm = np.linalg.norm(sys.beta_bar, axis=1) if s else np.zeros(0)
    gamma_norm = np.linalg.norm(sys.gamma_bar, axis=1) if s else np.zeros(0)
    I = np.eye(3 * s)
    dev = float(np.linalg.norm(I - sys.Dbar, 2)) if s else 0.0
    dnorm = float(np.linalg.norm(sys.Dbar, 2)) if s else 0.0
    dinv = float(np.linalg.norm(np.linalg.inv(sys.Dbar), 2)) if s else 0.0

    def check(value, bound, upper=True):
        slack = bound - value if upper else value - bound
        return {"value": value, "bound": bound, "slack": slack, "pass": bool(slack >= 0)}

    b10 = sys.blocks[1, 0] if s else np.zeros((0, 0))
    b01 = sys.blocks[0, 1] if s else np.zeros((0, 0))
    symmetric = bool(np.allclose(sys.Dbar, sys.Dbar.T, atol=1e-12)) and bool(
        np.allclose(b10, -b10.T, atol=1e-12) and np.allclose(b01, -b01.T, atol=1e-12))
    report = {
        "N": N,
        "s": s,
        "kappa": sys.kappa,
        "kappa_sq_over_printed": sys.kappa**2 / sys.fejer.printed_kappa_sq,
        "kappa_sq_over_pi2_3_N2_4N": sys.kappa**2 / (math.pi**2 / 3 * (N**2 + 4 * N)),
        "condition_number": sys.condition_number,
        "solve_residual": sys.residual,
        "interpolation_residual": interp,
        "derivative_residual_tau": d10,
        "derivative_residual_nu": d01,
        "dbar_symmetry": symmetric,
        "dbar_deviation": check(dev, DBAR_DEVIATION),
        "dbar_norm": check(dnorm, DBAR_NORM),
        "dbar_inverse_norm": check(dinv, DBAR_INV_NORM),
        "far_region_max": check(far_max, FAR_BOUND),
        "close_region_max": close_max,
        "close_region_points": n_close,
        "hessian_trace_max": trace_max if n_close else None,
        "hessian_det_min": det_min if n_close else None,
        "hessian_negative_definite": bool(n_close == 0 or (trace_max < 0 and det_min > 0)),
        "alpha_min": check(float(alpha_norm.min(initial=1.0)), 1 - ALPHA_DEVIATION, upper=False),
        "alpha_max": check(float(alpha_norm.max(initial=1.0)), 1 + ALPHA_DEVIATION),
        "beta_max": check(float(beta_norm.max(initial=0.0)), BETA_BOUND / N),
        "gamma_max": check(float(gamma_norm.max(initial=0.0)), BETA_BOUND / N),
        "grid_factor": grid_factor,
        "fine_step": fine_step,
        "window": window,
    }
    report["off_support_max"] = max(far_max, close_max)
    return report


def _tensor_q0(sys: InterpolationSystem, taus, nus) -> np.ndarray:
    fs = sys.fejer
    sup = sys.support.as_array()
    kt = [fejer_eval(fs, taus[None, :] - sup[:, :1], o) for o in range(2)]
    kn = [fejer_eval(fs, nus[None, :] - sup[:, 1:], o) for o in range(2)]
    return (np.einsum("ji,jk,jr->ikr", kt[0], kn[0], sys.alpha_bar)
            + np.einsum("ji,jk,jr->ikr", kt[1], kn[0], sys.beta_bar)
            + np.einsum("ji,jk,jr->ikr", kt[0], kn[1], sys.gamma_bar))


def report_json(report: dict) -> str:
    def default(o):
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.bool_):
            return bool(o)
        raise TypeError(type(o))

    return json.dumps(report, indent=2, default=default)
