"""Dense strictly convex QP: minimize 1/2 z'Hz + F'z subject to Az <= b.

The solver is a dual active-set method. It starts at the unconstrained
minimizer -H^{-1}F, which is dual feasible, and then adds the most violated
constraint one at a time. When adding a row would push some active
multiplier negative, that row is dropped first. If a violated row is a
nonnegative combination of the active rows, no step can fix it, and the rows
themselves are a Farkas certificate that the polytope is empty.

``enumerate_oracle`` brute-forces every candidate active set and is meant for
tests only.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np


FEAS_TOL = 1e-10
# relative size of the projected step below which a row counts as dependent
DEPENDENCE_TOL = 1e-12


class QpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"


class QpError(RuntimeError):
    pass


class MaxIterationError(QpError):
    pass


@dataclass(frozen=True)
class QpProblem:
    H: np.ndarray = field(repr=False)
    F: np.ndarray = field(repr=False)
    A: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        F = np.asarray(self.F, dtype=float).reshape(-1)
        d = F.shape[0]
        if H.shape != (d, d):
            raise ValueError(f"H has shape {H.shape}, expected ({d}, {d})")
        A = np.asarray(self.A, dtype=float).reshape(-1, d) if np.size(self.A) else np.zeros((0, d))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        if not np.allclose(H, H.T, rtol=0.0, atol=1e-12):
            raise ValueError("H must be symmetric")
        try:
            L = np.linalg.cholesky(H)
        except np.linalg.LinAlgError:
            raise ValueError("H must be positive definite") from None
        for name, arr in (("H", H), ("F", F), ("A", A), ("b", b)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        L.setflags(write=False)
        object.__setattr__(self, "_chol", L)

    @property
    def dim(self) -> int:
        return self.F.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.b.shape[0]

    def objective(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ self.H @ z + self.F @ z)

    def hinv(self, v: np.ndarray) -> np.ndarray:
        """H^{-1} v through the cached Cholesky factor."""
        L = self._chol
        return np.linalg.solve(L.T, np.linalg.solve(L, v))

    def unconstrained_minimizer(self) -> np.ndarray:
        return -self.hinv(self.F)


@dataclass(frozen=True)
class QpSolution:
    z: np.ndarray
    duals: np.ndarray
    active_set: tuple[int, ...]
    status: QpStatus
    iterations: int = 0
    note: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is QpStatus.OPTIMAL


class KktResiduals(NamedTuple):
    stationarity: float
    primal: float
    comp_slack: float
    dual_neg: float


def kkt_residuals(problem: QpProblem, solution: QpSolution) -> KktResiduals:
    """Max-norm KKT residuals of a candidate primal/dual pair."""
    z, lam = solution.z, solution.duals
    grad = problem.H @ z + problem.F + problem.A.T @ lam
    slack = problem.A @ z - problem.b
    stationarity = float(np.max(np.abs(grad))) if grad.size else 0.0
    if slack.size == 0:
        return KktResiduals(stationarity, 0.0, 0.0, 0.0)
    return KktResiduals(
        stationarity,
        float(max(np.max(slack), 0.0)),
        float(np.max(np.abs(lam * slack))),
        float(max(-np.min(lam), 0.0)),
    )


def _full_duals(n_c: int, active: Sequence[int], u: np.ndarray) -> np.ndarray:
    lam = np.zeros(n_c)
    if len(active):
        lam[list(active)] = u
    return lam


class ActiveSetSolver:
    """Reusable solver; keeps the last optimal active set for warm starts.

    Not thread safe: use one instance per worker.
    """

    def __init__(self, max_iter: int | None = None):
        self.max_iter = max_iter
        self.last_active: tuple[int, ...] = ()

    def solve(self, problem: QpProblem, warm_start: Sequence[int] | None = None) -> QpSolution:
        n_c, d = problem.n_constraints, problem.dim
        max_iter = self.max_iter if self.max_iter is not None else 2 ** min(n_c, 20) + d + 10
        A, b = problem.A, problem.b

        z, active, u = self._initial_point(problem, warm_start)
        iterations = 0
        while True:
            if n_c == 0:
                break
            viol = A @ z - b
            scale = 1.0 + np.abs(b)
            viol_rel = viol / scale
            if active:
                viol_rel[list(active)] = -np.inf
            p = int(np.argmax(viol_rel))  # lowest index wins ties
            if viol_rel[p] <= FEAS_TOL:
                break

            # raise the multiplier t of row p while the active rows stay tight
            t_p = 0.0
            while True:
                iterations += 1
                if iterations > max_iter:
                    raise MaxIterationError(f"no convergence in {max_iter} iterations")
                n_p = A[p]
                dz, du = self._step_direction(problem, active, n_p)
                hn = problem.hinv(n_p)
                proj = -float(n_p @ dz)
                dependent = proj <= DEPENDENCE_TOL * float(n_p @ hn)

                # partial step: an active multiplier reaches zero
                t_drop, k_drop = np.inf, -1
                for j, duj in enumerate(du):
                    if duj < 0.0:
                        t = u[j] / -duj
                        if t < t_drop:
                            t_drop, k_drop = t, j
                s_p = float(n_p @ z - b[p])
                t_full = np.inf if dependent else max(s_p, 0.0) / proj

                if dependent and k_drop < 0:
                    # a_p + sum_i y_i a_i = 0 with y = du >= 0 and b_p + y'b_A < 0
                    y = {int(active[j]): float(du[j]) for j in range(len(active))}
                    note = (
                        f"row {p} plus active rows weighted {y} sum to zero while "
                        f"row {p} is violated by {s_p:.3g}; the constraint set is empty"
                    )
                    lam = _full_duals(n_c, active, u)
                    return QpSolution(z, lam, tuple(active), QpStatus.INFEASIBLE, iterations, note)

                if t_full <= t_drop:
                    if not dependent:
                        z = z + t_full * dz
                    u = u + t_full * du
                    t_p += t_full
                    active = active + [p]
                    u = np.append(u, t_p)
                    break
                t = t_drop
                if not dependent:
                    z = z + t * dz
                u = u + t * du
                t_p += t
                del active[k_drop]
                u = np.delete(u, k_drop)

        u = np.maximum(u, 0.0)
        order = np.argsort(active, kind="stable")
        active = [active[i] for i in order]
        u = u[order] if len(u) else u
        self.last_active = tuple(active)
        return QpSolution(z, _full_duals(n_c, active, u), tuple(active), QpStatus.OPTIMAL, iterations)

    @staticmethod
    def _step_direction(problem: QpProblem, active: list[int], n_p: np.ndarray):
        """Solve H dz + N' du = -n_p, N dz = 0 for the active rows N."""
        hn = problem.hinv(n_p)
        if not active:
            return -hn, np.zeros(0)
        N = problem.A[active]
        HiNt = problem.hinv(N.T)
        S = N @ HiNt
        du = np.linalg.solve(S, -(N @ hn))
        dz = -(hn + HiNt @ du)
        return dz, du

    def _initial_point(self, problem: QpProblem, warm_start):
        z0 = problem.unconstrained_minimizer()
        if not warm_start:
            return z0, [], np.zeros(0)
        active = sorted({int(i) for i in warm_start if 0 <= int(i) < problem.n_constraints})
        if not active or len(active) > problem.dim:
            return z0, [], np.zeros(0)
        N = problem.A[active]
        HiNt = problem.hinv(N.T)
        S = N @ HiNt
        try:
            c = np.linalg.cholesky(S)
        except np.linalg.LinAlgError:
            return z0, [], np.zeros(0)
        if np.min(np.diag(c)) <= 1e-10 * np.sqrt(np.max(np.diag(S))):
            return z0, [], np.zeros(0)
        # multipliers of the equality-constrained problem on the warm set
        u = np.linalg.solve(S, N @ z0 - problem.b[active])
        if np.any(u < 0.0):
            return z0, [], np.zeros(0)
        z = z0 - HiNt @ u
        return z, active, u


def solve(problem: QpProblem, warm_start: Sequence[int] | None = None) -> QpSolution:
    return ActiveSetSolver().solve(problem, warm_start)


def _subset_kkt(problem: QpProblem, subset: tuple[int, ...], z0: np.ndarray):
    """Equality-constrained minimizer on ``subset``; None if rows are dependent."""
    if not subset:
        return z0, np.zeros(0)
    N = problem.A[list(subset)]
    HiNt = problem.hinv(N.T)
    S = N @ HiNt
    if np.linalg.matrix_rank(N) < len(subset):
        return None
    # H z + F + N' lam = 0 and N z = b_S
    lam = np.linalg.solve(S, N @ z0 - problem.b[list(subset)])
    return z0 - HiNt @ lam, lam


def enumerate_oracle(problem: QpProblem, tol: float = 1e-9) -> QpSolution:
    """Brute-force solve by trying every linearly independent active set.

    Emptiness is confirmed independently through the alternative system
    y >= 0, A'y = 0, b'y < 0 (the dual of the slack program
    min t s.t. Az - t <= b), also found by enumerating supports.
    """
    n_c, d = problem.n_constraints, problem.dim
    if n_c > 12:
        raise ValueError(f"enumerate_oracle supports at most 12 constraints, got {n_c}")
    z0 = problem.unconstrained_minimizer()
    scale = 1.0 + np.abs(problem.b)
    best = None
    for size in range(0, min(n_c, d) + 1):
        for subset in itertools.combinations(range(n_c), size):
            kkt = _subset_kkt(problem, subset, z0)
            if kkt is None:
                continue
            z, lam = kkt
            if np.any((problem.A @ z - problem.b) / scale > tol):
                continue
            if lam.size and np.min(lam) < -tol:
                continue
            obj = problem.objective(z)
            if best is None or obj < best[0] - 1e-14 * (1.0 + abs(obj)):
                best = (obj, z, subset, lam)
    if best is not None:
        _, z, subset, lam = best
        lam = np.maximum(lam, 0.0)
        return QpSolution(z, _full_duals(n_c, subset, lam), tuple(subset), QpStatus.OPTIMAL)

    y = farkas_certificate(problem)
    if y is None:
        raise QpError("no KKT point found, but no emptiness certificate either")
    return QpSolution(
        z0, np.zeros(n_c), (), QpStatus.INFEASIBLE,
        note=f"Farkas multipliers y={np.round(y, 12).tolist()} with A'y=0, b'y={problem.b @ y:.3g} < 0",
    )


def farkas_certificate(problem: QpProblem, tol: float = 1e-9) -> np.ndarray | None:
    """Find y >= 0, sum(y) = 1, A'y = 0 minimizing b'y; return it if b'y < 0."""
    n_c, d = problem.n_constraints, problem.dim
    A, b = problem.A, problem.b
    best = None
    for size in range(1, min(n_c, d + 1) + 1):
        for subset in itertools.combinations(range(n_c), size):
            idx = list(subset)
            M = np.vstack([A[idx].T, np.ones((1, size))])
            rhs = np.zeros(d + 1)
            rhs[-1] = 1.0
            y_s, *_ = np.linalg.lstsq(M, rhs, rcond=None)
            if np.max(np.abs(M @ y_s - rhs)) > tol or np.min(y_s) < -tol:
                continue
            val = float(b[idx] @ y_s)
            if best is None or val < best[0]:
                y = np.zeros(n_c)
                y[idx] = np.maximum(y_s, 0.0)
                best = (val, y)
    if best is not None and best[0] < -tol * (1.0 + np.max(np.abs(b))):
        return best[1]
    return None
