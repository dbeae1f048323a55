"""Self-contained dense numerical kernel.

Provides the primitives everything else is built on: a two-phase simplex
LP solver with dual certificates, Euclidean projection onto the unit
simplex, the minimum-norm point of a polytope-plus-ray set, and a
block-structured cone feasibility solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

_INF = float("inf")


class NumericalBreakdown(Exception):
    """Simplex pivot budget exhausted (degenerate cycling in floats)."""


class SingularMatrixError(Exception):
    """Matrix numerically singular (scaled determinant below threshold)."""


# ---------------------------------------------------------------------------
# Linear programming
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearProgram:
    """min c.x  subject to  rows (g.x >= h or g.x == h)  and  x >= lower.

    Lower bounds may be -inf for free variables.
    """

    objective: np.ndarray
    rows: tuple  # of (g: array, h: float, sense: ">=" | "==")
    lower_bounds: np.ndarray

    @staticmethod
    def build(objective, rows, lower_bounds=None):
        c = np.asarray(objective, float)
        if lower_bounds is None:
            lower_bounds = np.zeros(c.size)
        lb = np.asarray(lower_bounds, float)
        if lb.size != c.size:
            raise ValueError("lower_bounds length mismatch")
        norm_rows = []
        for g, h, sense in rows:
            g = np.asarray(g, float)
            if g.size != c.size:
                raise ValueError("row dimension mismatch")
            if sense not in (">=", "=="):
                raise ValueError(f"unknown sense {sense!r}")
            norm_rows.append((g, float(h), sense))
        return LinearProgram(c, tuple(norm_rows), lb)


@dataclass(frozen=True)
class LpSolution:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: np.ndarray | None = None
    value: float | None = None
    dual: np.ndarray | None = None        # one multiplier per input row
    dual_value: float | None = None

    @property
    def optimal(self):
        return self.status == "optimal"


_PIV_EPS = 1e-10
_RC_EPS = 1e-9


def solve_lp(lp: LinearProgram, max_pivots: int = 100_000) -> LpSolution:
    """Two-phase dense simplex with Bland's anti-cycling rule.

    Infeasible/unbounded verdicts are exact (up to the scaled phase-1
    threshold); optimal solutions come with a dual vector per input row,
    recovered from the final basis.
    """
    c = np.asarray(lp.objective, float)
    lb = np.asarray(lp.lower_bounds, float)
    d = c.size

    # Shift finitely-bounded variables to >= 0, split free ones.
    cols = []      # (orig index, sign)
    offsets = np.where(np.isfinite(lb), lb, 0.0)
    for j in range(d):
        cols.append((j, 1.0))
        if not np.isfinite(lb[j]):
            cols.append((j, -1.0))
    n_var = len(cols)
    c_std = np.array([c[j] * s for j, s in cols])

    m = len(lp.rows)
    scales = np.ones(m)
    flips = np.ones(m)
    A = np.zeros((m, n_var))
    b = np.zeros(m)
    senses = []
    for i, (g, h, sense) in enumerate(lp.rows):
        row = np.array([g[j] * s for j, s in cols])
        rhs = h - float(g @ offsets)
        mx = np.abs(row).max() if row.size else 0.0
        if mx > 0:
            scales[i] = 1.0 / mx
        row = row * scales[i]
        rhs = rhs * scales[i]
        A[i] = row
        b[i] = rhs
        senses.append(sense)

    n_slack = sum(1 for s in senses if s == ">=")
    N = n_var + n_slack
    T = np.zeros((m, N + 1))
    T[:, :n_var] = A
    si = n_var
    slack_col = {}
    for i, sense in enumerate(senses):
        if sense == ">=":
            T[i, si] = -1.0
            slack_col[i] = si
            si += 1
    T[:, -1] = b
    for i in range(m):
        if T[i, -1] < 0:
            T[i, :] *= -1.0
            flips[i] = -1.0

    A_std = T[:, :N].copy()     # standard-form matrix, for dual recovery
    b_std = T[:, -1].copy()

    cost_std = np.concatenate([c_std, np.zeros(n_slack)])

    if m == 0:
        if np.any(cost_std < -1e-12):
            return LpSolution("unbounded")
        x = offsets.copy()
        return LpSolution("optimal", x, float(c @ x),
                          np.zeros(0), float(c @ x))

    # Phase 1: artificial basis.
    art = np.eye(m)
    T = np.hstack([T[:, :N], art, T[:, -1:]])
    basis = [N + i for i in range(m)]
    total = N + m

    def pivot(r, col, z):
        piv = T[r, col]
        T[r, :] /= piv
        for i in range(m_live[0]):
            if i != r and abs(T[i, col]) > 0:
                T[i, :] -= T[i, col] * T[r, :]
        z -= z[col] * T[r, :]
        basis[r] = col
        return z

    m_live = [m]
    pivots = 0

    def run_simplex(z, allowed):
        nonlocal pivots
        while True:
            enter = -1
            for j in range(allowed):
                if j not in basis and z[j] < -_RC_EPS:
                    enter = j
                    break
            if enter < 0:
                return z, "optimal"
            best_ratio, leave = None, -1
            for i in range(m_live[0]):
                a = T[i, enter]
                if a > _PIV_EPS:
                    ratio = T[i, -1] / a
                    if (best_ratio is None or ratio < best_ratio - 1e-12 or
                            (abs(ratio - best_ratio) <= 1e-12 and basis[i] < basis[leave])):
                        best_ratio, leave = ratio, i
            if leave < 0:
                return z, "unbounded"
            z = pivot(leave, enter, z)
            pivots += 1
            if pivots > max_pivots:
                raise NumericalBreakdown(f"pivot budget {max_pivots} exhausted")

    # Phase-1 objective: sum of artificials, reduced against the basis.
    z1 = np.concatenate([np.zeros(N), np.ones(m), [0.0]])
    for i in range(m):
        z1 -= T[i, :]
    z1, status = run_simplex(z1, total)
    if status == "unbounded":  # cannot happen: phase-1 objective bounded below
        raise NumericalBreakdown("phase-1 unbounded")
    if -z1[-1] > 1e-9:
        return LpSolution("infeasible")

    # Drive remaining artificials out of the basis; drop redundant rows.
    keep = list(range(m))
    r = 0
    while r < m_live[0]:
        if basis[r] >= N:
            done = False
            for j in range(N):
                if abs(T[r, j]) > 1e-9 and j not in basis:
                    z1 = pivot(r, j, z1)
                    done = True
                    break
            if not done:
                last = m_live[0] - 1
                T[[r, last]] = T[[last, r]]
                basis[r], basis[last] = basis[last], basis[r]
                keep[r], keep[last] = keep[last], keep[r]
                m_live[0] -= 1
                continue
        r += 1
    mk = m_live[0]
    kept_rows = keep[:mk]

    # Phase 2.
    z2 = np.concatenate([cost_std, np.zeros(m), [0.0]])
    for i in range(mk):
        cb = cost_std[basis[i]] if basis[i] < N else 0.0
        if cb != 0.0:
            z2 -= cb * T[i, :]
    z2, status = run_simplex(z2, N)
    if status == "unbounded":
        return LpSolution("unbounded")

    x_std = np.zeros(N)
    for i in range(mk):
        if basis[i] < N:
            x_std[basis[i]] = T[i, -1]
    x = offsets.copy()
    for col, (j, s) in enumerate(cols):
        x[j] += s * x_std[col]
    value = float(c @ x)

    # Dual recovery: solve B^T y = c_B on the kept standard-form rows.
    dual = np.zeros(m)
    if mk:
        B = A_std[np.ix_(kept_rows, basis[:mk])]
        try:
            y_hat = np.linalg.solve(B.T, cost_std[basis[:mk]])
        except np.linalg.LinAlgError:
            y_hat = np.linalg.lstsq(B.T, cost_std[basis[:mk]], rcond=None)[0]
        for pos, i in enumerate(kept_rows):
            dual[i] = flips[i] * scales[i] * y_hat[pos]

    heights = np.array([h for _, h, _ in lp.rows])
    G = np.array([g for g, _, _ in lp.rows]) if m else np.zeros((0, d))
    w = c - G.T @ dual
    finite = np.isfinite(lb)
    dual_value = float(dual @ heights + w[finite] @ lb[finite])
    return LpSolution("optimal", x, value, dual, dual_value)


# ---------------------------------------------------------------------------
# Simplex projection and norms
# ---------------------------------------------------------------------------

def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum(x) = 1} (sort-based, exact)."""
    y = np.asarray(y, float)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("expected a nonempty vector")
    u = np.sort(y)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, y.size + 1)
    cond = u - (css - 1.0) / idx > 0
    rho = np.nonzero(cond)[0][-1]
    theta = (css[rho] - 1.0) / (rho + 1.0)
    return np.maximum(y - theta, 0.0)


def dual_norm_value(x: np.ndarray, s) -> float:
    """Value of the norm conjugate to the s-norm (1 <-> inf, 2 <-> 2)."""
    x = np.asarray(x, float)
    if x.size == 0:
        return 0.0
    if s == 1:
        return float(np.abs(x).max())
    if s == 2:
        return float(np.linalg.norm(x))
    if s == _INF or s == math.inf:
        return float(np.abs(x).sum())
    raise ValueError(f"norm index {s!r} not in {{1, 2, inf}}")


def norm_value(x: np.ndarray, s) -> float:
    x = np.asarray(x, float)
    if x.size == 0:
        return 0.0
    if s == 1:
        return float(np.abs(x).sum())
    if s == 2:
        return float(np.linalg.norm(x))
    if s == _INF or s == math.inf:
        return float(np.abs(x).max())
    raise ValueError(f"norm index {s!r} not in {{1, 2, inf}}")


def invert_symmetric(Z: np.ndarray, det_tol: float = 1e-12) -> np.ndarray:
    """Inverse of a symmetric matrix; raises SingularMatrixError when the
    determinant of the max-abs-scaled matrix falls below det_tol."""
    Z = np.asarray(Z, float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise ValueError("expected a square matrix")
    scale = np.abs(Z).max()
    if scale == 0 or abs(np.linalg.det(Z / scale)) <= det_tol:
        raise SingularMatrixError("matrix is numerically singular")
    return np.linalg.inv(Z)


_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def sphere_directions(k: int, count: int) -> np.ndarray:
    """Deterministic low-discrepancy unit directions in R^k.

    Alternating signs in 1-D, golden-angle points on the circle and the
    Fibonacci spiral on the 2-sphere; higher dimensions use a Kronecker
    sequence pushed through Box-Muller and normalized.
    """
    if k < 1 or count < 1:
        raise ValueError("k and count must be positive")
    if k == 1:
        return np.array([[1.0 if i % 2 == 0 else -1.0] for i in range(count)])
    if k == 2:
        th = _GOLDEN_ANGLE * np.arange(count)
        return np.column_stack([np.cos(th), np.sin(th)])
    if k == 3:
        i = np.arange(count)
        z = 1.0 - 2.0 * (i + 0.5) / count
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        th = _GOLDEN_ANGLE * i
        return np.column_stack([r * np.cos(th), r * np.sin(th), z])
    # generalized golden ratio of dimension d: root of x**(d+1) = x + 1
    pairs = (k + 1) // 2
    dim = 2 * pairs
    phi = 2.0
    for _ in range(64):
        phi = (1.0 + phi) ** (1.0 / (dim + 1))
    alpha = np.array([phi ** -(j + 1) for j in range(dim)])
    out = np.zeros((count, k))
    for i in range(count):
        u = (0.5 + (i + 1) * alpha) % 1.0
        u = np.clip(u, 1e-12, 1.0 - 1e-12)
        g = np.empty(dim)
        for p in range(pairs):
            r = math.sqrt(-2.0 * math.log(u[2 * p]))
            g[2 * p] = r * math.cos(2.0 * math.pi * u[2 * p + 1])
            g[2 * p + 1] = r * math.sin(2.0 * math.pi * u[2 * p + 1])
        v = g[:k]
        nv = np.linalg.norm(v)
        out[i] = v / nv if nv > 1e-12 else np.eye(k)[0]
    return out


# ---------------------------------------------------------------------------
# Minimum-norm point over conv(points) + R+ * ray
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinNormResult:
    p_star: np.ndarray
    weights: np.ndarray   # simplex weights over the input points
    mu: float             # nonnegative ray coefficient
    certified: bool       # variational inequality verified


def _vi_margin(M, q, p):
    """Worst violation of <h - q, q> >= 0 over generators and the ray."""
    nn = float(q @ q)
    worst = min(float(M[:, j] @ q) - nn for j in range(p))
    return min(worst, float(M[:, p] @ q))


def _polish_min_norm(M, w, p, include_mu):
    lam = w[:p]
    sup = np.nonzero(lam > 1e-9)[0]
    if sup.size == 0:
        sup = np.array([int(np.argmax(lam))])
    cols = list(sup)
    if include_mu:
        cols.append(p)
    Ms = M[:, cols]
    nv = len(cols)
    e = np.array([1.0 if c != p else 0.0 for c in cols])
    KKT = np.zeros((nv + 1, nv + 1))
    KKT[:nv, :nv] = 2.0 * (Ms.T @ Ms)
    KKT[:nv, nv] = e
    KKT[nv, :nv] = e
    rhs = np.zeros(nv + 1)
    rhs[nv] = 1.0
    sol = np.linalg.lstsq(KKT, rhs, rcond=None)[0][:nv]
    if np.any(sol < -1e-10):
        return None
    sol = np.maximum(sol, 0.0)
    w_new = np.zeros(p + 1)
    for c, v in zip(cols, sol):
        w_new[c] = v
    tot = w_new[:p].sum()
    if tot <= 0:
        return None
    w_new[:p] /= tot
    return w_new


def min_norm_point(points, ray, vi_tol: float = 1e-8,
                   max_iter: int = 1_000_000) -> MinNormResult:
    """Minimize ||q||^2 over q in conv(points) + R+ * ray.

    Projected gradient over (simplex weights, ray coefficient) with a fixed
    1/L step, polished by an active-support KKT solve.  Optimality is
    certified through the variational inequality on the generators.
    """
    pts = [np.asarray(q, float) for q in points]
    if not pts:
        raise ValueError("points must be nonempty")
    r = np.asarray(ray, float)
    p = len(pts)
    M = np.column_stack(pts + [r])
    sigma = np.linalg.norm(M, 2)
    L = 2.0 * max(sigma * sigma, 1e-12)
    step = 1.0 / L

    w = np.zeros(p + 1)
    w[:p] = 1.0 / p

    def finish(w_fin):
        q = M @ w_fin
        cert = _vi_margin(M, q, p) >= -vi_tol
        return MinNormResult(q, w_fin[:p], float(w_fin[p]), cert)

    check_every = 128
    for it in range(max_iter):
        q = M @ w
        grad = 2.0 * (M.T @ q)
        w_next = np.empty_like(w)
        w_next[:p] = project_simplex(w[:p] - step * grad[:p])
        w_next[p] = max(0.0, w[p] - step * grad[p])
        moved = np.linalg.norm(w_next - w) / step
        w = w_next
        if it % check_every == 0 or moved <= 1e-10:
            for include_mu in (w[p] > 1e-9, True, False):
                cand = _polish_min_norm(M, w, p, include_mu)
                if cand is not None and _vi_margin(M, M @ cand, p) >= -1e-10:
                    return finish(cand)
            if moved <= 1e-10:
                return finish(w)
    return finish(w)


# ---------------------------------------------------------------------------
# Cone-constrained linear feasibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VarBlock:
    """A block of decision variables with its own feasible set.

    kinds: "free", "nonneg", "simplex", and "soc" where the block is
    (y, t) with ||y||_s <= t and dim = len(y) + 1.
    """

    kind: str
    dim: int
    norm_index: float = 2.0

    def __post_init__(self):
        if self.kind not in ("free", "nonneg", "simplex", "soc"):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.dim < 1:
            raise ValueError("block dimension must be >= 1")


@dataclass(frozen=True)
class ConeFeasibilitySystem:
    """Affine equalities over block-constrained variables.

    Each equality is (coeffs, rhs) with coeffs a dict mapping block index
    to a (k x block_dim) matrix.
    """

    blocks: tuple
    equalities: tuple

    @staticmethod
    def build(blocks, equalities):
        blocks = tuple(blocks)
        eqs = []
        for coeffs, rhs in equalities:
            rhs = np.atleast_1d(np.asarray(rhs, float))
            k = rhs.size
            cmap = {}
            for bi, Mb in coeffs.items():
                Mb = np.asarray(Mb, float)
                if Mb.ndim == 1:
                    Mb = Mb.reshape(k, -1)
                if Mb.shape != (k, blocks[bi].dim):
                    raise ValueError("equality block shape mismatch")
                cmap[int(bi)] = Mb
            eqs.append((cmap, rhs))
        return ConeFeasibilitySystem(blocks, tuple(eqs))

    @property
    def offsets(self):
        off, cur = [], 0
        for blk in self.blocks:
            off.append(cur)
            cur += blk.dim
        return off, cur

    def stacked(self):
        off, D = self.offsets
        K = sum(rhs.size for _, rhs in self.equalities)
        A = np.zeros((K, D))
        b = np.zeros(K)
        r = 0
        for cmap, rhs in self.equalities:
            k = rhs.size
            for bi, Mb in cmap.items():
                A[r:r + k, off[bi]:off[bi] + self.blocks[bi].dim] = Mb
            b[r:r + k] = rhs
            r += k
        return A, b

    def split(self, x):
        off, _ = self.offsets
        return [np.asarray(x[o:o + blk.dim])
                for o, blk in zip(off, self.blocks)]


@dataclass(frozen=True)
class ConeResult:
    feasible: bool
    exact: bool               # verdict from the LP path (polyhedral blocks)
    residual: float           # row-scaled equality residual (2-norm)
    x: np.ndarray


def _project_soc(y, t):
    ny = float(np.linalg.norm(y))
    if ny <= t:
        return y, t
    if ny <= -t:
        return np.zeros_like(y), 0.0
    beta = 0.5 * (ny + t)
    return y * (beta / ny), beta


def _project_blocks(x, blocks, offsets):
    out = x.copy()
    for o, blk in zip(offsets, blocks):
        seg = out[o:o + blk.dim]
        if blk.kind == "nonneg":
            out[o:o + blk.dim] = np.maximum(seg, 0.0)
        elif blk.kind == "simplex":
            out[o:o + blk.dim] = project_simplex(seg)
        elif blk.kind == "soc":
            y, t = _project_soc(seg[:-1], float(seg[-1]))
            out[o:o + blk.dim - 1] = y
            out[o + blk.dim - 1] = t
    return out


def _initial_point(blocks, offsets, D):
    x = np.zeros(D)
    for o, blk in zip(offsets, blocks):
        if blk.kind == "simplex":
            x[o:o + blk.dim] = 1.0 / blk.dim
        elif blk.kind == "soc":
            x[o + blk.dim - 1] = 1.0
    return x


def _polish_cone(A, b, x, blocks, offsets):
    """Fix the active pattern at x and solve the reduced least squares."""
    D = A.shape[1]
    cols = []           # (vector in R^D, lower bound 0 or -inf)
    sum_rows = []       # simplex sum-to-one constraints over reduced vars
    for o, blk in zip(offsets, blocks):
        seg = x[o:o + blk.dim]
        if blk.kind == "free":
            for i in range(blk.dim):
                e = np.zeros(D)
                e[o + i] = 1.0
                cols.append((e, False))
        elif blk.kind in ("nonneg", "simplex"):
            idxs = [i for i in range(blk.dim) if seg[i] > 1e-9]
            if blk.kind == "simplex" and not idxs:
                idxs = [int(np.argmax(seg))]
            start = len(cols)
            for i in idxs:
                e = np.zeros(D)
                e[o + i] = 1.0
                cols.append((e, True))
            if blk.kind == "simplex":
                sum_rows.append(list(range(start, len(cols))))
        else:  # soc
            y, t = seg[:-1], float(seg[-1])
            ny = float(np.linalg.norm(y))
            if ny < t - max(1e-9, 1e-7 * abs(t)):
                for i in range(blk.dim):
                    e = np.zeros(D)
                    e[o + i] = 1.0
                    cols.append((e, False))
            else:
                e = np.zeros(D)
                if ny > 1e-12:
                    e[o:o + blk.dim - 1] = y / ny
                e[o + blk.dim - 1] = 1.0
                cols.append((e, True))
    if not cols:
        return None
    Vt = np.array([v for v, _ in cols])     # n_red x D
    signed = np.array([s for _, s in cols])
    Ar = A @ Vt.T
    n_red = len(cols)
    n_eq = len(sum_rows)
    KKT = np.zeros((n_red + n_eq, n_red + n_eq))
    KKT[:n_red, :n_red] = Ar.T @ Ar
    rhs = np.zeros(n_red + n_eq)
    rhs[:n_red] = Ar.T @ b
    for k, members in enumerate(sum_rows):
        for j in members:
            KKT[n_red + k, j] = 1.0
            KKT[j, n_red + k] = 1.0
        rhs[n_red + k] = 1.0
    sol = np.linalg.lstsq(KKT, rhs, rcond=None)[0][:n_red]
    if np.any(sol[signed] < -1e-10):
        return None
    sol = np.where(signed, np.maximum(sol, 0.0), sol)
    return Vt.T @ sol


def _pgd_min_residual(A, b, blocks, offsets, D, tol, max_iter):
    """FISTA on 0.5*||Ax - b||^2 with per-block projections."""
    sigma = np.linalg.norm(A, 2) if A.size else 0.0
    step = 1.0 / max(sigma * sigma, 1e-12)
    x = _project_blocks(_initial_point(blocks, offsets, D), blocks, offsets)
    best_x, best_r = x, float(np.linalg.norm(A @ x - b))
    yv, t_acc = x.copy(), 1.0
    stall_mark, stalls = best_r, 0
    for it in range(max_iter):
        grad = A.T @ (A @ yv - b)
        x_new = _project_blocks(yv - step * grad, blocks, offsets)
        r_new = float(np.linalg.norm(A @ x_new - b))
        if r_new < best_r:
            best_x, best_r = x_new, r_new
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t_acc * t_acc))
        yv = x_new + ((t_acc - 1.0) / t_new) * (x_new - x)
        if r_new > float(np.linalg.norm(A @ x - b)):
            yv, t_new = x_new.copy(), 1.0      # restart on non-monotone step
        x, t_acc = x_new, t_new
        if it % 512 == 0 or best_r <= 1e-12:
            cand = _polish_cone(A, b, best_x, blocks, offsets)
            if cand is not None:
                cand = _project_blocks(cand, blocks, offsets)
                r_cand = float(np.linalg.norm(A @ cand - b))
                if r_cand < best_r:
                    best_x, best_r = cand, r_cand
            if best_r <= min(tol * 1e-2, 1e-10):
                break
            # infeasible systems converge to a positive floor; stop once
            # the checkpoint-to-checkpoint improvement dies out
            if stall_mark - best_r <= 1e-13 * max(1.0, best_r):
                stalls += 1
                if stalls >= 4:
                    break
            else:
                stalls = 0
            stall_mark = best_r
    return best_x, best_r


def solve_cone_system(sys: ConeFeasibilitySystem, tol: float = 1e-7,
                      max_iter: int = 30_000) -> ConeResult:
    """Find a block-feasible point satisfying the equalities.

    All-polyhedral systems (no Euclidean cone blocks) are decided exactly
    through an LP reformulation; otherwise the scaled residual norm is
    driven down by accelerated projected gradient and the verdict is
    Feasible only when it lands below tol.
    """
    offsets, D = sys.offsets
    A, b = sys.stacked()
    scale = np.ones(A.shape[0])
    for i in range(A.shape[0]):
        mx = np.abs(A[i]).max()
        if mx > 0:
            scale[i] = 1.0 / mx
    As = A * scale[:, None]
    bs = b * scale

    soc2 = any(blk.kind == "soc" and blk.norm_index == 2 and blk.dim > 1
               for blk in sys.blocks)
    if not soc2:
        x_lp = _cone_lp_path(sys, As, bs, offsets, D)
        if x_lp is not None:
            res = float(np.linalg.norm(As @ x_lp - bs))
            return ConeResult(True, True, res, x_lp)
        x_best, r_best = _pgd_min_residual(As, bs, sys.blocks, offsets, D,
                                           tol, min(max_iter, 10_000))
        return ConeResult(False, True, r_best, x_best)

    x_best, r_best = _pgd_min_residual(As, bs, sys.blocks, offsets, D,
                                       tol, max_iter)
    return ConeResult(r_best <= tol, False, r_best, x_best)


def _cone_lp_path(sys, As, bs, offsets, D):
    """Exact feasibility via LP for systems whose blocks are polyhedral
    (free/nonneg/simplex and 1- or inf-norm cones)."""
    lb = np.full(D, -_INF)
    rows = []
    aux_cols = 0
    aux_specs = []       # rows referencing aux columns, appended after sizing
    for o, blk in zip(offsets, sys.blocks):
        if blk.kind in ("nonneg", "simplex"):
            lb[o:o + blk.dim] = 0.0
        if blk.kind == "simplex":
            g = np.zeros(D)
            g[o:o + blk.dim] = 1.0
            rows.append((g, 1.0, "=="))
        if blk.kind == "soc":
            dy = blk.dim - 1
            ti = o + dy
            if dy == 0:
                g = np.zeros(D)
                g[ti] = 1.0
                rows.append((g, 0.0, ">="))
            elif blk.norm_index == _INF or blk.norm_index == math.inf:
                for i in range(dy):
                    for sgn in (1.0, -1.0):
                        g = np.zeros(D)
                        g[ti] = 1.0
                        g[o + i] = sgn
                        rows.append((g, 0.0, ">="))
            elif blk.norm_index == 1:
                aux_specs.append((o, dy, ti, aux_cols))
                aux_cols += dy
            else:
                return None
    total = D + aux_cols

    def widen(g):
        gg = np.zeros(total)
        gg[:D] = g
        return gg

    wrows = [(widen(g), h, s) for g, h, s in rows]
    for o, dy, ti, astart in aux_specs:
        for i in range(dy):
            for sgn in (1.0, -1.0):
                g = np.zeros(total)
                g[D + astart + i] = 1.0
                g[o + i] = sgn
                wrows.append((g, 0.0, ">="))
        g = np.zeros(total)
        g[ti] = 1.0
        g[D + astart:D + astart + dy] = -1.0
        wrows.append((g, 0.0, ">="))
    for i in range(As.shape[0]):
        wrows.append((widen(As[i]), float(bs[i]), "=="))
    lbw = np.concatenate([lb, np.full(aux_cols, -_INF)])
    lp = LinearProgram.build(np.zeros(total), wrows, lbw)
    sol = solve_lp(lp)
    if not sol.optimal:
        return None
    return sol.x[:D]
