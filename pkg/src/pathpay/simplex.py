"""Dense two-phase primal simplex for small equality-form linear programs.

Solves ``min c.x  s.t.  A x = b, x >= 0``. Pivoting follows Bland's rule
(smallest eligible index enters, smallest-index basic variable leaves on
ratio ties), which cannot cycle and makes the returned basic solution a
deterministic function of the input. Redundant equality rows are detected
and dropped at the end of phase 1.

The tableau is kept dense; problems here have at most a few hundred rows
and columns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-10
ENTER_TOL = 1e-9
_MAX_PIVOTS = 200_000


class SimplexError(RuntimeError):
    """Numerical failure inside the simplex method."""


@dataclass(frozen=True, eq=False)
class StandardLp:
    """Equality-form LP data: minimize ``c.x`` over ``A x = b``, ``x >= 0``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.shape != (b.size, c.size):
            raise ValueError(f"shape mismatch: A {A.shape}, b {b.shape}, c {c.shape}")
        if not (
            np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))
        ):
            raise ValueError("LP data must be finite")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True, eq=False)
class LpSolution:
    x: np.ndarray
    objective: float
    status: str                      # "optimal" | "infeasible" | "unbounded"
    iterations: int = 0
    residual: float = 0.0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def solve_lp(lp: StandardLp) -> LpSolution:
    """Solve the LP, returning an optimal basic solution when one exists."""
    m, n = lp.A.shape
    b_scale = 1.0 + float(np.abs(lp.b).max(initial=0.0))
    feas_tol = 1e-7 * b_scale

    # rows with negative rhs are flipped so the artificial basis is feasible
    A = lp.A.copy()
    b = lp.b.copy()
    neg = b < 0
    A[neg] *= -1.0
    b[neg] *= -1.0

    # phase 1 tableau: [A | I | b], artificial variables n..n+m-1 basic
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = list(range(n, n + m))
    obj = np.zeros(n + m + 1)
    obj[:n] = -A.sum(axis=0)
    obj[-1] = -b.sum()

    pivots, _ = _pivot_until_optimal(T, obj, basis, allow_cols=n + m)
    phase1_value = -obj[-1]
    if phase1_value > feas_tol:
        return LpSolution(
            x=np.zeros(n), objective=np.nan, status="infeasible", iterations=pivots
        )

    keep_rows = _drive_out_artificials(T, basis, n)
    T = T[keep_rows, :]
    basis = [basis[i] for i in keep_rows]

    # phase 2: drop artificial columns, rebuild the reduced-cost row
    T = np.hstack([T[:, :n], T[:, -1:]])
    obj = np.zeros(n + 1)
    obj[:n] = lp.c
    for i, var in enumerate(basis):
        obj -= lp.c[var] * T[i]

    more, unbounded = _pivot_until_optimal(T, obj, basis, allow_cols=n)
    pivots += more
    if unbounded:
        return LpSolution(
            x=np.zeros(n), objective=-np.inf, status="unbounded", iterations=pivots
        )

    x = np.zeros(n)
    for i, var in enumerate(basis):
        x[var] = T[i, -1]
    residual = float(np.abs(lp.A @ x - lp.b).max(initial=0.0))
    if residual > feas_tol:
        raise SimplexError(
            f"solution residual {residual:.3e} exceeds tolerance {feas_tol:.3e}"
        )
    return LpSolution(
        x=x,
        objective=float(lp.c @ x),
        status="optimal",
        iterations=pivots,
        residual=residual,
    )


def _pivot_until_optimal(T, obj, basis, allow_cols: int) -> tuple[int, bool]:
    """Bland-rule pivoting until no reduced cost is below -ENTER_TOL.

    Returns (pivot count, unbounded flag).
    """
    pivots = 0
    while True:
        candidates = np.flatnonzero(obj[:allow_cols] < -ENTER_TOL)
        if candidates.size == 0:
            return pivots, False
        entering = int(candidates[0])

        col = T[:, entering]
        rows = np.flatnonzero(col > PIVOT_TOL)
        if rows.size == 0:
            return pivots, True
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        tied = rows[np.isclose(ratios, best, rtol=0.0, atol=PIVOT_TOL * (1 + best))]
        leave_row = min(tied, key=lambda i: basis[i])

        _pivot(T, obj, basis, leave_row, entering)
        pivots += 1
        if pivots > _MAX_PIVOTS:
            raise SimplexError("pivot limit exceeded; LP appears numerically unstable")


def _pivot(T, obj, basis, row: int, col: int) -> None:
    piv = T[row, col]
    if abs(piv) < PIVOT_TOL:
        raise SimplexError("numerically singular basis (pivot below tolerance)")
    T[row] /= piv
    for i in range(T.shape[0]):
        if i != row and T[i, col] != 0.0:
            T[i] -= T[i, col] * T[row]
    if obj[col] != 0.0:
        obj -= obj[col] * T[row]
    basis[row] = col


def _drive_out_artificials(T, basis, n: int) -> list[int]:
    """Pivot zero-valued artificial variables out of the basis.

    Rows whose artificial cannot be replaced by any structural column are
    linearly dependent on the others and are dropped; the returned list holds
    the surviving row indices.
    """
    keep = []
    dummy_obj = np.zeros(T.shape[1])
    for i in range(T.shape[0]):
        if basis[i] < n:
            keep.append(i)
            continue
        swap = -1
        for j in range(n):
            if j not in basis and abs(T[i, j]) > PIVOT_TOL:
                swap = j
                break
        if swap >= 0:
            _pivot(T, dummy_obj, basis, i, swap)
            keep.append(i)
        # else: redundant row, dropped
    return keep
