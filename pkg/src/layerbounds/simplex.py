"""Dense two-phase primal simplex with Bland's anti-cycling rule.

Solves ``min c @ x`` subject to ``A_eq @ x == b_eq``, ``A_ub @ x <= b_ub``
and ``x >= 0``.  The problems in this package have at most a few hundred
columns, and determinism matters more than speed: Bland's rule picks the
lowest-index improving column and breaks ratio ties by the lowest-index
basic variable, so identical inputs always follow the same pivot path.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import LPError

FEAS_TOL = 1e-9
_RC_TOL = 1e-11
_PIVOT_TOL = 1e-9

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass
class LPResult:
    status: str
    x: np.ndarray
    fun: float
    infeasibility: float
    nit: int

    @property
    def success(self):
        return self.status == OPTIMAL

    def raise_for_status(self):
        if not self.success:
            raise LPError(f"linear program is {self.status}", self.status, self.infeasibility)
        return self


def _pivot(T, basis, r, j):
    T[r] /= T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])
    basis[r] = j


def _run(T, basis, ncols, max_iter):
    """Minimize the objective held in the last tableau row over columns < ncols."""
    nit = 0
    m = T.shape[0] - 1
    while nit < max_iter:
        rc = T[-1, :ncols]
        cand = np.flatnonzero(rc < -_RC_TOL)
        if cand.size == 0:
            return OPTIMAL, nit
        j = int(cand[0])
        colj = T[:m, j]
        rows = np.flatnonzero(colj > _PIVOT_TOL)
        if rows.size == 0:
            return UNBOUNDED, nit
        ratios = T[rows, -1] / colj[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-14 * max(1.0, abs(best))]
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, basis, r, j)
        nit += 1
    raise LPError("simplex iteration limit reached", "iteration_limit")


def linprog(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, maximize=False, max_iter=None):
    """Solve a small dense LP over the nonnegative orthant.

    Returns an :class:`LPResult`; ``fun`` is reported in the caller's sense
    (maximum when ``maximize`` is set).  Infeasibility is declared when the
    phase-one optimum exceeds ``FEAS_TOL``; that optimum is kept as
    ``infeasibility`` so callers can report it.
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    A_eq = np.zeros((0, n)) if A_eq is None else np.atleast_2d(np.asarray(A_eq, dtype=float))
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=float).ravel()
    A_ub = np.zeros((0, n)) if A_ub is None else np.atleast_2d(np.asarray(A_ub, dtype=float))
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=float).ravel()
    if A_eq.size == 0:
        A_eq = A_eq.reshape(0, n)
    if A_ub.size == 0:
        A_ub = A_ub.reshape(0, n)
    me, mu = A_eq.shape[0], A_ub.shape[0]
    m = me + mu
    # columns: x (n) | slacks (mu) | artificials (m) | rhs
    A = np.zeros((m, n + mu))
    A[:me, :n] = A_eq
    A[me:, :n] = A_ub
    A[me:, n:] = np.eye(mu)
    b = np.concatenate([b_eq, b_ub])
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    nstruct = n + mu
    T = np.zeros((m + 1, nstruct + m + 1))
    T[:m, :nstruct] = A
    T[:m, -1] = b
    basis = np.empty(m, dtype=int)
    artificial_rows = []
    for i in range(m):
        if i >= me and not neg[i]:
            basis[i] = n + (i - me)
        else:
            T[i, nstruct + i] = 1.0
            basis[i] = nstruct + i
            artificial_rows.append(i)
    if max_iter is None:
        max_iter = 50 * (m + nstruct + 10)

    # phase one: minimize the sum of artificials
    for i in artificial_rows:
        T[-1] -= T[i]
    for i in artificial_rows:
        T[-1, nstruct + i] = 0.0
    _, nit1 = _run(T, basis, nstruct + m, max_iter)
    infeas = max(-T[-1, -1], 0.0)
    if infeas > FEAS_TOL:
        return LPResult(INFEASIBLE, None, np.nan, infeas, nit1)

    # drive remaining artificials out of the basis, dropping redundant rows
    keep = np.ones(m + 1, dtype=bool)
    for r in range(m):
        if basis[r] >= nstruct:
            mags = np.abs(T[r, :nstruct])
            j = int(np.argmax(mags))
            if mags[j] > FEAS_TOL:
                _pivot(T, basis, r, j)
            else:
                keep[r] = False
    basis = basis[keep[:m]]
    T = T[keep]
    T = np.delete(T, np.s_[nstruct:nstruct + m], axis=1)

    cost = np.zeros(nstruct)
    cost[:n] = -c if maximize else c
    T[-1, :] = 0.0
    T[-1, :nstruct] = cost
    for r, j in enumerate(basis):
        if cost[j] != 0.0:
            T[-1] -= cost[j] * T[r]
    status, nit2 = _run(T, basis, nstruct, max_iter)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, np.inf if maximize else -np.inf, infeas, nit1 + nit2)
    x = np.zeros(nstruct)
    x[basis] = T[:-1, -1]
    x = np.clip(x[:n], 0.0, None)
    value = float(c @ x)
    return LPResult(OPTIMAL, x, value, infeas, nit1 + nit2)
