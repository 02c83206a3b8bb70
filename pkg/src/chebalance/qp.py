"""Dense primal active-set solver for small convex QPs.

    minimize    1/2 x^T P x + q^T x
    subject to  A x = b,  G x <= h

``P`` only needs to be positive semidefinite, so pure LPs (``P = 0``) are
handled too: on a working set whose reduced Hessian is singular the solver
follows zero-curvature descent directions until a constraint blocks. A
phase-1 LP on the same constraints finds a feasible start and certifies
infeasibility.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla


class QPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITER = "max_iter"
    UNBOUNDED = "unbounded"


@dataclass
class QPResult:
    x: np.ndarray
    status: QPStatus
    iterations: int = 0
    phase1_iterations: int = 0
    active: list = field(default_factory=list)
    lam: Optional[np.ndarray] = None  # inequality multipliers, zero off the working set
    nu: Optional[np.ndarray] = None  # equality multipliers (reduced row set)
    max_violation: float = 0.0
    warm: bool = False


# consecutive zero-length steps before switching to smallest-index pivoting
_BLAND_AFTER = 3


def _independent_rows(A: np.ndarray, tol: float):
    """Indices of a maximal linearly independent subset of the rows of ``A``."""
    if A.shape[0] == 0:
        return np.zeros(0, dtype=int)
    _, R, piv = sla.qr(A.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        return np.zeros(0, dtype=int)
    rank = int(np.sum(d > tol * d[0]))
    return np.sort(piv[:rank])


class _Basis:
    """Orthonormal basis of a growing row span (modified Gram-Schmidt)."""

    def __init__(self, rows: np.ndarray, tol: float = 1e-10):
        self.tol = tol
        self.Q = np.linalg.qr(rows.T)[0].T if rows.shape[0] else np.zeros((0, rows.shape[1]))

    def add(self, row: np.ndarray) -> bool:
        nrm = np.linalg.norm(row)
        if nrm == 0.0:
            return False
        r = row - self.Q.T @ (self.Q @ row)
        r = r - self.Q.T @ (self.Q @ r)
        rn = np.linalg.norm(r)
        if rn <= self.tol * nrm:
            return False
        self.Q = np.vstack([self.Q, r / rn])
        return True


class ActiveSetQP:
    """Reusable solver; holds no state between calls besides its options."""

    def __init__(self, max_iter: int = 200, feas_tol: float = 1e-8, dual_tol: float = 1e-10,
                 phase1_max_iter: Optional[int] = None):
        self.max_iter = max_iter
        self.phase1_max_iter = phase1_max_iter if phase1_max_iter is not None else 4 * max_iter
        self.feas_tol = feas_tol
        self.dual_tol = dual_tol

    # -- public -----------------------------------------------------------------

    def solve(self, P, q, A, b, G, h, x0=None, working: Optional[Sequence[int]] = None) -> QPResult:
        P = np.asarray(P, dtype=float)
        q = np.asarray(q, dtype=float)
        n = q.size
        A = np.asarray(A, dtype=float).reshape(-1, n)
        b = np.asarray(b, dtype=float).reshape(-1)
        G = np.asarray(G, dtype=float).reshape(-1, n)
        h = np.asarray(h, dtype=float).reshape(-1)

        keep = _independent_rows(A, 1e-12)
        Ak, bk = A[keep], b[keep]
        if Ak.shape[0]:
            x_ls = np.linalg.lstsq(Ak, bk, rcond=None)[0]
        else:
            x_ls = np.zeros(n)
        if A.shape[0] and np.max(np.abs(A @ x_ls - b)) > self.feas_tol * (1.0 + np.max(np.abs(b))):
            return QPResult(x_ls, QPStatus.INFEASIBLE, max_violation=float(np.max(np.abs(A @ x_ls - b))))

        warm = False
        x = None
        if x0 is not None:
            x = np.asarray(x0, dtype=float).copy()
            if Ak.shape[0]:
                r_eq = Ak @ x - bk
                # leave round-off alone so an unchanged problem returns x0 bit for bit
                if np.max(np.abs(r_eq)) > 1e-12 * (1.0 + np.max(np.abs(bk))):
                    x -= np.linalg.lstsq(Ak, r_eq, rcond=None)[0]
            if G.shape[0] == 0 or np.max(G @ x - h) <= self.feas_tol:
                warm = True
            elif working:
                # right-hand sides moved: project onto the previous active face
                W = self._independent_seed(Ak, G, working)
                M = np.vstack([Ak, G[W]])
                rhs = np.concatenate([bk, h[W]])
                xf = x - np.linalg.lstsq(M, M @ x - rhs, rcond=None)[0]
                if np.max(G @ xf - h) <= self.feas_tol:
                    x, warm, working = xf, True, W
                else:
                    x_ls, x = x, None
            else:
                x_ls = x
                x = None

        p1_iters = 0
        if x is None:
            res1 = self._phase1(Ak, bk, G, h, x_ls)
            p1_iters = res1.iterations
            if res1.status is not QPStatus.OPTIMAL:
                res1.phase1_iterations = p1_iters
                res1.iterations = 0
                return res1
            x = res1.x
            working = res1.active

        W = self._initial_working(Ak, G, h, x, working or [])
        res = self._iterate(P, q, Ak, bk, G, h, x, W, self.max_iter)
        res.phase1_iterations = p1_iters
        res.warm = warm
        if G.shape[0]:
            res.max_violation = max(res.max_violation, float(np.max(G @ res.x - h, initial=0.0)))
        return res

    # -- internals ----------------------------------------------------------------

    def _initial_working(self, Ak, G, h, x, seed):
        """Tight rows from ``seed`` that keep the working set linearly independent."""
        W = []
        if not len(seed):
            return W
        slack = h - G @ x
        basis = _Basis(Ak)
        for j in seed:
            j = int(j)
            if j < 0 or j >= G.shape[0] or j in W:
                continue
            if abs(slack[j]) > 1e-9 * (1.0 + abs(h[j])):
                continue
            if basis.add(G[j]):
                W.append(j)
        return W

    @staticmethod
    def _independent_seed(Ak, G, seed):
        W = []
        basis = _Basis(Ak)
        for j in seed:
            j = int(j)
            if 0 <= j < G.shape[0] and j not in W and basis.add(G[j]):
                W.append(j)
        return W

    def _phase1(self, Ak, bk, G, h, x_start) -> QPResult:
        """Minimize the max violation ``t`` subject to ``A x = b, G x - t <= h, t >= 0``."""
        n = x_start.size
        m = G.shape[0]
        if m == 0:
            return QPResult(x_start, QPStatus.OPTIMAL)
        viol = G @ x_start - h
        t0 = max(0.0, float(np.max(viol)))
        if t0 <= self.feas_tol:
            return QPResult(x_start, QPStatus.OPTIMAL, active=[])
        G1 = np.zeros((m + 1, n + 1))
        G1[:m, :n] = G
        G1[:m, n] = -1.0
        G1[m, n] = -1.0
        h1 = np.concatenate([h, [0.0]])
        A1 = np.hstack([Ak, np.zeros((Ak.shape[0], 1))])
        q1 = np.zeros(n + 1)
        q1[n] = 1.0
        z = np.concatenate([x_start, [t0]])
        W = [int(np.argmax(viol))]
        res = self._iterate(np.zeros((n + 1, n + 1)), q1, A1, bk, G1, h1, z, W, self.phase1_max_iter)
        t = float(res.x[n])
        x = res.x[:n]
        if res.status is QPStatus.MAX_ITER:
            return QPResult(x, QPStatus.MAX_ITER, iterations=res.iterations, max_violation=t)
        if t > self.feas_tol:
            return QPResult(x, QPStatus.INFEASIBLE, iterations=res.iterations, max_violation=t)
        return QPResult(x, QPStatus.OPTIMAL, iterations=res.iterations,
                        active=[j for j in res.active if j < m])

    def _iterate(self, P, q, Ak, bk, G, h, x, W, max_iter) -> QPResult:
        n = x.size
        m_eq = Ak.shape[0]
        m = G.shape[0]
        row_norm = np.linalg.norm(G, axis=1) if m else np.zeros(0)
        W = list(W)
        x = x.copy()
        changes = 0
        degenerate = 0
        while True:
            g = P @ x + q
            AW = np.vstack([Ak, G[W]]) if W else Ak
            mw = AW.shape[0]
            if mw:
                Q, R = np.linalg.qr(AW.T, mode="complete")
                Z = Q[:, mw:]
            else:
                Q = R = None
                Z = np.eye(n)

            p, newton = self._step(P, g, Z)
            if np.max(np.abs(p), initial=0.0) <= 1e-13 * (1.0 + np.max(np.abs(x))):
                if mw:
                    lam_all = sla.solve_triangular(R[:mw, :mw], -(Q[:, :mw].T @ g))
                else:
                    lam_all = np.zeros(0)
                lam_w = lam_all[m_eq:]
                neg = np.nonzero(lam_w < -self.dual_tol * (1.0 + np.max(np.abs(g))))[0]
                if neg.size == 0:
                    lam = np.zeros(m)
                    lam[W] = np.maximum(lam_w, 0.0)
                    return QPResult(x, QPStatus.OPTIMAL, iterations=changes, active=list(W),
                                    lam=lam, nu=lam_all[:m_eq])
                if changes >= max_iter:
                    return QPResult(x, QPStatus.MAX_ITER, iterations=changes, active=list(W))
                if degenerate >= _BLAND_AFTER:
                    k = min(neg, key=lambda i: W[i])
                else:
                    k = int(neg[np.argmin(lam_w[neg])])
                del W[k]
                changes += 1
                continue

            # ratio test over inactive rows
            alpha = 1.0 if newton else np.inf
            block = -1
            if m:
                Gp = G @ p
                inW = np.zeros(m, dtype=bool)
                inW[W] = True
                cand = (~inW) & (Gp > 1e-12 * row_norm * np.linalg.norm(p))
                if np.any(cand):
                    idx = np.nonzero(cand)[0]
                    slack = np.maximum(h[idx] - G[idx] @ x, 0.0)
                    ratios = slack / Gp[idx]
                    r_min = ratios.min()
                    if r_min < alpha:
                        alpha = float(r_min)
                        # lowest index among ties keeps pivoting deterministic
                        block = int(idx[np.nonzero(ratios <= r_min)[0][0]])
            if not np.isfinite(alpha):
                return QPResult(x, QPStatus.UNBOUNDED, iterations=changes, active=list(W))
            x = x + alpha * p
            degenerate = degenerate + 1 if alpha == 0.0 else 0
            if block >= 0:
                if changes >= max_iter:
                    return QPResult(x, QPStatus.MAX_ITER, iterations=changes, active=list(W))
                W.append(block)
                changes += 1

    @staticmethod
    def _step(P, g, Z):
        """Search direction in the null space ``Z`` of the working set.

        Returns ``(p, newton)``: ``newton`` is True for a minimizing step on the
        current face (full step is 1), False for a zero-curvature descent ray.
        """
        k = Z.shape[1]
        if k == 0:
            return np.zeros_like(g), True
        gz = Z.T @ g
        Hz = Z.T @ P @ Z
        if np.any(Hz):
            try:
                L = np.linalg.cholesky(Hz)
                pz = -sla.cho_solve((L, True), gz)
                return Z @ pz, True
            except np.linalg.LinAlgError:
                pass
        w, V = np.linalg.eigh(Hz)
        wmax = max(1.0, float(np.max(np.abs(w))))
        flat = w <= 1e-11 * wmax
        gscale = 1.0 + float(np.max(np.abs(g)))
        if np.any(flat):
            gn = V[:, flat].T @ gz
            if np.max(np.abs(gn)) > 1e-13 * gscale:
                return Z @ (-(V[:, flat] @ gn)), False
        curved = ~flat
        pz = -(V[:, curved] @ ((V[:, curved].T @ gz) / w[curved]))
        return Z @ pz, True
