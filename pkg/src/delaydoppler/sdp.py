"""Standard-form conic solver.

Problems have the form::

    minimize    c^T x
    subject to  A x + s = b,   s in K

where ``K`` is an ordered product of zero cones, second-order cones
``{(t, u): ||u|| <= t}`` and PSD cones.  PSD blocks are stored as the
column-major lower triangle with off-diagonal entries scaled by sqrt(2),
so the Euclidean inner product of two vectorized blocks equals the trace
inner product of the matrices.

The solver is a homogeneous self-dual embedding iterated by ADMM with a
single cached sparse factorization, in the style of SCS.
"""
from __future__ import annotations

import enum
import functools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

SQRT2 = math.sqrt(2.0)


class ConeError(ValueError):
    pass


@dataclass(frozen=True)
class Cone:
    kind: str  # "zero", "soc" or "psd"
    size: int  # rows for zero/soc, matrix side for psd
    # psd only: the block is the real embedding of a Hermitian matrix of side size/2
    hermitian: bool = False

    def __post_init__(self):
        if self.kind not in ("zero", "soc", "psd"):
            raise ConeError(f"unknown cone kind {self.kind!r}")
        if self.size < 1:
            raise ConeError("cone size must be positive")
        if self.hermitian and (self.kind != "psd" or self.size % 2):
            raise ConeError("a hermitian block needs kind psd and an even side")

    @property
    def dim(self) -> int:
        if self.kind == "psd":
            return self.size * (self.size + 1) // 2
        return self.size


def zero_cone(n: int) -> Cone:
    return Cone("zero", n)


def soc_cone(n: int) -> Cone:
    return Cone("soc", n)


def psd_cone(side: int, hermitian: bool = False) -> Cone:
    """PSD block of the given side.

    With ``hermitian`` the block is ``[[Re H, -Im H], [Im H, Re H]]`` and the
    cone is intersected with that subspace; projections then use a complex
    eigendecomposition of half the side.  Use it only when ``A`` and ``b``
    map into embedded matrices, so the feasible set is unchanged.
    """
    return Cone("psd", side, hermitian)


@dataclass
class ConicProblem:
    c: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    cones: list[Cone]

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.A = sp.csc_matrix(self.A, dtype=float)
        m, n = self.A.shape
        if n != self.c.size:
            raise ConeError(f"A has {n} columns but c has {self.c.size} entries")
        if m != self.b.size:
            raise ConeError(f"A has {m} rows but b has {self.b.size} entries")
        total = sum(k.dim for k in self.cones)
        if total != m:
            raise ConeError(f"cone dimensions sum to {total}, A has {m} rows")

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m(self) -> int:
        return self.b.size

    def blocks(self):
        """Yield ``(cone, slice)`` pairs over the rows of ``A``."""
        start = 0
        for cone in self.cones:
            yield cone, slice(start, start + cone.dim)
            start += cone.dim


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max_iter"
    INFEASIBLE = "infeasible_detected"


class Scaling(str, enum.Enum):
    RUIZ = "ruiz_equilibration"
    NONE = "none"


@dataclass
class SolverSettings:
    tol: float = 1e-6
    max_iter: int = 50000
    over_relaxation: float = 1.8
    scaling: Scaling = Scaling.RUIZ
    rho_x: float = 1e-3
    check_every: int = 10
    anderson_memory: int = 10
    anderson_safeguard: float = 1.0
    ruiz_passes: int = 25
    # dual metric weight; rebalanced when residuals drift apart
    scale: float = 1.0
    adaptive_scale: bool = True
    scale_interval: int = 200
    scale_ratio: float = 3.0
    max_scale_updates: int = 12
    verbose: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 1.0 <= self.over_relaxation < 2.0:
            raise ValueError("over_relaxation must lie in [1, 2)")
        self.scaling = Scaling(self.scaling)


@dataclass
class ConicSolution:
    x: np.ndarray
    y: np.ndarray
    s: np.ndarray
    status: Status
    primal_residual: float
    dual_residual: float
    gap: float
    iterations: int
    primal_objective: float
    dual_objective: float
    info: dict = field(default_factory=dict)

    @property
    def primal(self) -> np.ndarray:
        return self.x

    @property
    def dual(self) -> np.ndarray:
        return self.y


# ----------------------------------------------------------------- vectorization


@functools.lru_cache(maxsize=32)
def _tri_index(n: int):
    r, c = np.triu_indices(n)
    # transpose of the row-major upper triangle = column-major lower triangle
    offdiag = r != c
    for arr in (r, c, offdiag):
        arr.setflags(write=False)
    return c, r, offdiag


def svec(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    i, j, off = _tri_index(n)
    v = M[i, j]
    v[off] *= SQRT2
    return v


def smat(v, n: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if n is None:
        n = int(round((math.sqrt(8 * v.size + 1) - 1) / 2))
    i, j, off = _tri_index(n)
    vals = v.copy()
    vals[off] /= SQRT2
    M = np.empty((n, n))
    M[i, j] = vals
    M[j, i] = vals
    return M


def svec_position(i: int, j: int, n: int) -> int:
    """Position of entry ``(i, j)`` (``i >= j``) inside ``svec`` of side ``n``."""
    if i < j:
        i, j = j, i
    return j * n - j * (j - 1) // 2 + (i - j)


def embed_hermitian(H, atol: float = 1e-10) -> np.ndarray:
    """Real symmetric embedding ``[[Re H, -Im H], [Im H, Re H]]``."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ConeError("embedding needs a square matrix")
    if np.max(np.abs(H - H.conj().T), initial=0.0) > atol:
        raise ConeError("matrix is not Hermitian")
    re, im = H.real, H.imag
    return np.block([[re, -im], [im, re]])


def unembed_hermitian(E) -> np.ndarray:
    """Inverse of :func:`embed_hermitian`, averaging the duplicated blocks."""
    E = np.asarray(E, dtype=float)
    n = E.shape[0] // 2
    re = 0.5 * (E[:n, :n] + E[n:, n:])
    im = 0.5 * (E[n:, :n] - E[:n, n:])
    return re + 1j * im


def project_psd(M, atol: float = 1e-10) -> np.ndarray:
    """Frobenius-nearest PSD matrix (negative eigenvalues clamped)."""
    M = np.asarray(M, dtype=float)
    if np.max(np.abs(M - M.T), initial=0.0) > atol * max(1.0, np.abs(M).max(initial=0.0)):
        raise ConeError("matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    pos = w > 0
    if pos.all():
        return 0.5 * (M + M.T)
    Vp = V[:, pos]
    return (Vp * w[pos]) @ Vp.T


def _project_psd_vec(v: np.ndarray, n: int) -> np.ndarray:
    M = smat(v, n)
    w, V = scipy.linalg.eigh(M, overwrite_a=True, check_finite=False, driver="evd")
    pos = w > 0
    if not pos.any():
        return np.zeros_like(v)
    if pos.all():
        return v.copy()
    Vp = V[:, pos]
    return svec((Vp * w[pos]) @ Vp.T)


def _project_hermitian_vec(v: np.ndarray, n: int) -> np.ndarray:
    M = smat(v, n)
    h = n // 2
    H = 0.5 * ((M[:h, :h] + M[h:, h:]) + 1j * (M[h:, :h] - M[:h, h:]))
    w, V = scipy.linalg.eigh(H, overwrite_a=True, check_finite=False, driver="evd")
    pos = w > 0
    if not pos.any():
        return np.zeros_like(v)
    Vp = V[:, pos]
    P = (Vp * w[pos]) @ Vp.conj().T
    re, im = P.real, P.imag
    return svec(np.block([[re, -im], [im, re]]))


def _project_cone_block(cone: Cone, v: np.ndarray, dual: bool) -> np.ndarray:
    if cone.kind == "zero":
        return v.copy() if dual else np.zeros_like(v)
    if cone.kind == "soc":
        return project_soc(v)
    if cone.hermitian:
        # the dual of (PSD intersect subspace) is PSD + complement; Moreau gives
        # its projection from the primal one
        return v + _project_hermitian_vec(-v, cone.size) if dual else _project_hermitian_vec(v, cone.size)
    return _project_psd_vec(v, cone.size)


def project_soc(v: np.ndarray) -> np.ndarray:
    t, u = v[0], v[1:]
    nu = np.linalg.norm(u)
    if nu <= t:
        return v.copy()
    if nu <= -t:
        return np.zeros_like(v)
    a = 0.5 * (t + nu)
    out = np.empty_like(v)
    out[0] = a
    out[1:] = (a / nu) * u
    return out


def project_dual_cone(problem: ConicProblem, y: np.ndarray) -> np.ndarray:
    """Project onto ``K*`` (zero cones become free, the others are self-dual)."""
    out = np.empty_like(y)
    for cone, sl in problem.blocks():
        out[sl] = _project_cone_block(cone, y[sl], dual=True)
    return out


def project_primal_cone(problem: ConicProblem, s: np.ndarray) -> np.ndarray:
    out = np.empty_like(s)
    for cone, sl in problem.blocks():
        out[sl] = _project_cone_block(cone, s[sl], dual=False)
    return out


# --------------------------------------------------------------------- scaling


def _ruiz(problem: ConicProblem, passes: int):
    A = problem.A.tocsr(copy=True)
    m, n = A.shape
    D = np.ones(m)
    E = np.ones(n)
    blocks = list(problem.blocks())
    for _ in range(passes):
        absA = abs(A)
        rn = np.sqrt(np.asarray(absA.max(axis=1).todense()).ravel())
        cn = np.sqrt(np.asarray(absA.max(axis=0).todense()).ravel())
        for cone, sl in blocks:
            if cone.kind != "zero":
                rn[sl] = rn[sl].mean() if rn[sl].any() else 1.0
        rn[rn < 1e-8] = 1.0
        cn[cn < 1e-8] = 1.0
        A = sp.diags(1.0 / rn) @ A @ sp.diags(1.0 / cn)
        D /= rn
        E /= cn
        if max(abs(rn - 1).max(initial=0), abs(cn - 1).max(initial=0)) < 1e-3:
            break
    D = np.clip(D, 1e-4, 1e4)
    E = np.clip(E, 1e-4, 1e4)
    return D, E


# ---------------------------------------------------------------------- solver


def solve(problem: ConicProblem, settings: SolverSettings | None = None) -> ConicSolution:
    """Solve a conic problem; see the module docstring for the form."""
    settings = settings or SolverSettings()
    m, n = problem.m, problem.n
    if settings.scaling is Scaling.RUIZ:
        D, E = _ruiz(problem, settings.ruiz_passes)
    else:
        D, E = np.ones(m), np.ones(n)
    A = (sp.diags(D) @ problem.A @ sp.diags(E)).tocsc()
    bs = D * problem.b
    cs = E * problem.c
    sig_b = 1.0 / np.linalg.norm(bs) if np.linalg.norm(bs) > 0 else 1.0
    sig_c = 1.0 / np.linalg.norm(cs) if np.linalg.norm(cs) > 0 else 1.0
    bs *= sig_b
    cs *= sig_c

    rho = settings.rho_x
    hx, hy = cs, bs
    state: dict = {}

    def factor(sigma):
        # metric diag(rho I, sigma I, 1) on (x, y, tau)
        K = sp.bmat([[rho * sp.eye(n), A.T], [A, -sigma * sp.eye(m)]], format="csc")
        state["lu"] = spla.splu(K, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                                options={"SymmetricMode": True})
        state["sigma"] = sigma
        gx, gy = msolve(hx, hy)
        state["g"] = (gx, gy, 1.0 + hx @ gx + hy @ gy)

    def msolve(ax, ay):
        z = state["lu"].solve(np.concatenate([ax, -ay]))
        return z[:n], z[n:]

    factor(settings.scale)

    alpha = settings.over_relaxation
    dim = n + m + 1

    def project(z):
        u = np.empty_like(z)
        u[:n] = z[:n]
        u[n:n + m] = project_dual_cone(problem, z[n:n + m])
        u[-1] = max(z[-1], 0.0)
        return u

    def fixed_point(z):
        u = project(z)
        w = 2.0 * u - z
        gx, gy, denom = state["g"]
        zx, zy = msolve(rho * w[:n], state["sigma"] * w[n:n + m])
        tt = (w[-1] + hx @ zx + hy @ zy) / denom
        ut_ = np.concatenate([zx - tt * gx, zy - tt * gy, [tt]])
        return z + alpha * (ut_ - u)

    bnorm = np.linalg.norm(problem.b)
    cnorm = np.linalg.norm(problem.c)
    best = None
    status = Status.MAX_ITER
    info: dict = {}

    def unscale(u, v):
        ut = u[-1]
        x = E * u[:n] / (ut * sig_b)
        y = D * u[n:n + m] / (ut * sig_c)
        s = state["sigma"] * v[n:n + m] / (D * ut * sig_b)
        return x, y, s

    def residuals(x, y, s):
        pr = np.linalg.norm(problem.A @ x + s - problem.b) / (1.0 + bnorm)
        dr = np.linalg.norm(problem.A.T @ y + problem.c) / (1.0 + cnorm)
        pobj = problem.c @ x
        dobj = -problem.b @ y
        gap = abs(pobj - dobj) / (1.0 + abs(pobj))
        return pr, dr, gap, pobj, dobj

    # state z = u - v with u = proj(z); start at u = (0, 0, 1), v = 0
    z = np.zeros(dim)
    z[-1] = 1.0
    mem = settings.anderson_memory
    acc = _Anderson(dim, mem) if mem > 0 else None
    Tz = fixed_point(z)
    evals = 1
    it = 0
    rejected = 0
    last_update, updates = 0, 0
    log_ratios: list[float] = []
    while it < settings.max_iter:
        it += 1
        g = Tz - z
        gnorm = np.linalg.norm(g)
        if acc is not None:
            acc.push(z, g)
            z_new = acc.extrapolate(Tz)
            if z_new is not None:
                Tz_new = fixed_point(z_new)
                evals += 1
                if np.linalg.norm(Tz_new - z_new) <= settings.anderson_safeguard * gnorm:
                    z, Tz = z_new, Tz_new
                else:
                    rejected += 1
                    acc.reset()
                    z = Tz
                    Tz = fixed_point(z)
                    evals += 1
            else:
                z = Tz
                Tz = fixed_point(z)
                evals += 1
        else:
            z = Tz
            Tz = fixed_point(z)
            evals += 1

        if it % settings.check_every and it != settings.max_iter:
            continue
        u = project(z)
        v = u - z
        ut, vt = u[-1], v[-1]
        if ut > 1e-12:
            x, y, s_ = unscale(u, v)
            pr, dr, gap, pobj, dobj = residuals(x, y, s_)
            score = max(pr, dr, gap)
            if best is None or score < best[0]:
                best = (score, x, y, s_, pr, dr, gap, pobj, dobj)
            if settings.verbose and it % (20 * settings.check_every) == 0:
                print(f"{it:6d} pr={pr:.2e} dr={dr:.2e} gap={gap:.2e} obj={pobj:.8g}")
            if score <= settings.tol:
                status = Status.OPTIMAL
                break
            if settings.adaptive_scale and pr > 0 and dr > 0:
                log_ratios.append(math.log(pr / dr))
            if (settings.adaptive_scale and updates < settings.max_scale_updates
                    and it - last_update >= settings.scale_interval and log_ratios):
                # residuals oscillate, so act on the mean log ratio since the last update
                ratio = math.exp(float(np.mean(log_ratios)))
                if not 1.0 / settings.scale_ratio <= ratio <= settings.scale_ratio:
                    # keep (u, M u) fixed and re-express z in the new metric
                    old = state["sigma"]
                    new = float(np.clip(old / math.sqrt(ratio), 1e-6, 1e6))
                    z = u.copy()
                    z[n:n + m] -= (old / new) * v[n:n + m]
                    factor(new)
                    if acc is not None:
                        acc.reset()
                    Tz = fixed_point(z)
                    evals += 1
                    last_update, updates = it, updates + 1
                    log_ratios.clear()
                    if settings.verbose:
                        print(f"{it:6d} scale {old:.3g} -> {new:.3g}")
                    continue
        if ut < 1e-8 * max(1.0, vt) or vt > ut:
            cert = _infeasibility(problem, u[:n], u[n:n + m], state["sigma"] * v[n:n + m], D, E,
                                  settings.tol)
            if cert is not None:
                status = Status.INFEASIBLE
                info["certificate"] = cert
                break
    info["fixed_point_evaluations"] = evals
    info["anderson_rejections"] = rejected
    info["scale"] = state["sigma"]
    info["scale_updates"] = updates
    if best is None:
        nanv = float("nan")
        return ConicSolution(np.full(n, nanv), np.full(m, nanv), np.full(m, nanv), status,
                             nanv, nanv, nanv, it, nanv, nanv, info)
    _, x, y, s, pr, dr, gap, pobj, dobj = best
    return ConicSolution(x=x, y=y, s=s, status=status, primal_residual=pr, dual_residual=dr,
                         gap=gap, iterations=it, primal_objective=pobj, dual_objective=dobj,
                         info=info)


class _Anderson:
    """Type-II Anderson acceleration on a fixed-point iteration."""

    def __init__(self, dim: int, memory: int, reg: float = 1e-10):
        self.memory = memory
        self.reg = reg
        self.dZ = np.zeros((memory, dim))
        self.dG = np.zeros((memory, dim))
        self.prev_z = np.zeros(dim)
        self.prev_g = np.zeros(dim)
        self.reset()

    def reset(self):
        self.count = 0
        self.head = 0
        self.primed = False

    def push(self, z, g):
        if self.primed:
            np.subtract(z, self.prev_z, out=self.dZ[self.head])
            np.subtract(g, self.prev_g, out=self.dG[self.head])
            self.head = (self.head + 1) % self.memory
            self.count = min(self.count + 1, self.memory)
        self.prev_z[:] = z
        self.prev_g[:] = g
        self.primed = True

    def extrapolate(self, Tz):
        k = self.count
        if k == 0:
            return None
        Fm = self.dG[:k]
        gram = Fm @ Fm.T
        gram += self.reg * (np.trace(gram) + 1e-300) * np.eye(k)
        try:
            gamma = np.linalg.solve(gram, Fm @ self.prev_g)
        except np.linalg.LinAlgError:
            return None
        if not np.all(np.isfinite(gamma)):
            return None
        return Tz - gamma @ (self.dZ[:k] + Fm)


def _infeasibility(problem, ux, uy, vy, D, E, tol):
    y = D * uy
    by = problem.b @ y
    if by < 0:
        y = y / -by
        if np.linalg.norm(problem.A.T @ y) <= tol:
            return "primal_infeasible"
    x = E * ux
    cx = problem.c @ x
    if cx < 0:
        s = vy / D
        x, s = x / -cx, s / -cx
        if np.linalg.norm(problem.A @ x + s) <= tol:
            return "dual_infeasible"
    return None


# --------------------------------------------------------------- debug dumps

_MAGIC = "conic-problem-v1"


def dump_problem(problem: ConicProblem, path) -> None:
    """Write a self-describing binary dump.

    Layout: one JSON header line, then dense ``A`` (row-major), ``b`` and
    ``c`` as little-endian float64.
    """
    header = {
        "format": _MAGIC,
        "m": problem.m,
        "n": problem.n,
        "cones": [[k.kind, k.size, k.hermitian] for k in problem.cones],
        "dtype": "<f8",
        "order": ["A", "b", "c"],
    }
    with open(Path(path), "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode())
        fh.write(np.ascontiguousarray(problem.A.toarray(), dtype="<f8").tobytes())
        fh.write(problem.b.astype("<f8").tobytes())
        fh.write(problem.c.astype("<f8").tobytes())


def load_problem(path) -> ConicProblem:
    with open(Path(path), "rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("format") != _MAGIC:
            raise ConeError("not a conic problem dump")
        m, n = header["m"], header["n"]
        raw = np.frombuffer(fh.read(), dtype="<f8")
    if raw.size != m * n + m + n:
        raise ConeError("truncated conic problem dump")
    A = raw[: m * n].reshape(m, n)
    b = raw[m * n: m * n + m]
    c = raw[m * n + m:]
    cones = [Cone(*spec) for spec in header["cones"]]
    return ConicProblem(c=c.copy(), A=sp.csc_matrix(A), b=b.copy(), cones=cones)
