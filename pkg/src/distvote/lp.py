"""Deterministic linear-program and matrix-game solving substrate.

All linear programs in this package go through :func:`solve` (or the
lower-level :func:`solve_linear` for callers that build sparse matrices
directly).  The backend is HiGHS via :mod:`scipy.optimize.linprog`, which is
deterministic for identical inputs on a single build and reports
unboundedness and infeasibility as first-class outcomes.

Symmetric zero-sum games (skew-symmetric payoff matrices) are solved by
:func:`solve_matrix_game`, which returns the minimum-Euclidean-norm maximin
strategy.  The maximin set of a symmetric game is the polytope
``{p in simplex : p @ A >= 0}``; the minimum-norm element is the unique
solution of a small strictly convex QP, computed with cvxopt and then
polished to machine precision on its active set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from cvxopt import matrix as _cvx_matrix
from cvxopt import solvers as _cvx_solvers
from scipy.optimize import linprog

FEASIBILITY_TOL = 1e-9
VALUE_TOL = 1e-7

# Probabilities below this are solver dust; zeroing them keeps lottery
# supports exact for downstream majority-distance arguments.
SUPPORT_TOL = 1e-9

_HIGHS_OPTIONS = {
    "presolve": True,
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}

_QP_OPTIONS = {
    "show_progress": False,
    "abstol": 1e-10,
    "reltol": 1e-10,
    "feastol": 1e-10,
    "maxiters": 200,
}


class NumericalFailure(RuntimeError):
    """Solver broke down (iteration cap, ill-conditioning); not infeasibility."""


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LpOutcome:
    """Outcome of a solve; ``value`` and ``x`` are populated only when optimal."""

    status: LpStatus
    value: float | None = None
    x: np.ndarray | None = None

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass(frozen=True)
class LinearProgram:
    """A maximization program over real variables.

    ``constraints`` holds ``(coefficients, relation, bound)`` triples with
    relation one of ``"<="``, ``"="``, ``">="``.  ``lower_bounds`` gives a
    per-variable lower bound, ``None`` meaning unbounded below; variables
    default to being nonnegative.
    """

    objective: tuple[float, ...]
    constraints: tuple[tuple[tuple[float, ...], str, float], ...]
    lower_bounds: tuple[float | None, ...] | None = None

    def __post_init__(self) -> None:
        nvar = len(self.objective)
        if nvar < 1:
            raise ValueError("program needs at least one variable")
        for coeffs, relation, _ in self.constraints:
            if len(coeffs) != nvar:
                raise ValueError("constraint arity does not match variable count")
            if relation not in ("<=", "=", ">="):
                raise ValueError(f"unknown relation {relation!r}")
        if self.lower_bounds is not None and len(self.lower_bounds) != nvar:
            raise ValueError("lower_bounds arity does not match variable count")


def solve(lp: LinearProgram) -> LpOutcome:
    """Solve a maximization program; deterministic for identical inputs."""
    nvar = len(lp.objective)
    ub_rows, ub_bounds, eq_rows, eq_bounds = [], [], [], []
    for coeffs, relation, bound in lp.constraints:
        row = np.asarray(coeffs, dtype=float)
        if relation == "<=":
            ub_rows.append(row)
            ub_bounds.append(float(bound))
        elif relation == ">=":
            ub_rows.append(-row)
            ub_bounds.append(-float(bound))
        else:
            eq_rows.append(row)
            eq_bounds.append(float(bound))
    lower = lp.lower_bounds if lp.lower_bounds is not None else (0.0,) * nvar
    bounds = [(lb, None) for lb in lower]
    return solve_linear(
        np.asarray(lp.objective, dtype=float),
        np.array(ub_rows) if ub_rows else None,
        np.array(ub_bounds) if ub_bounds else None,
        np.array(eq_rows) if eq_rows else None,
        np.array(eq_bounds) if eq_bounds else None,
        bounds,
    )


def solve_linear(
    objective,
    a_ub=None,
    b_ub=None,
    a_eq=None,
    b_eq=None,
    bounds: Sequence[tuple[float | None, float | None]] | None = None,
) -> LpOutcome:
    """Maximize ``objective @ x`` subject to sparse/dense constraint matrices.

    Thin deterministic wrapper over HiGHS; raises :class:`NumericalFailure`
    when the solver hits its iteration cap or reports numerical trouble.
    """
    result = linprog(
        -np.asarray(objective, dtype=float),
        A_ub=a_ub,
        b_ub=b_ub,
        A_eq=a_eq,
        b_eq=b_eq,
        bounds=bounds if bounds is not None else (0, None),
        method="highs",
        options=_HIGHS_OPTIONS,
    )
    if result.status == 0:
        return LpOutcome(status=LpStatus.OPTIMAL, value=-float(result.fun), x=result.x)
    if result.status == 2:
        return LpOutcome(status=LpStatus.INFEASIBLE)
    if result.status == 3:
        return LpOutcome(status=LpStatus.UNBOUNDED)
    raise NumericalFailure(f"LP solver failed: {result.message}")


def _qp_min_norm(payoff: np.ndarray) -> np.ndarray:
    """Interior-point solve of min ||p||^2 over the maximin polytope."""
    m = payoff.shape[0]
    qp = _cvx_solvers.qp(
        _cvx_matrix(2.0 * np.eye(m)),
        _cvx_matrix(np.zeros(m)),
        _cvx_matrix(np.vstack([-payoff.T, -np.eye(m)])),
        _cvx_matrix(np.zeros(2 * m)),
        _cvx_matrix(np.ones((1, m))),
        _cvx_matrix(np.ones(1)),
        options=_QP_OPTIONS,
    )
    if qp["x"] is None:
        raise NumericalFailure(f"matrix-game QP failed: status {qp['status']}")
    p = np.array(qp["x"]).ravel()
    worst = min(float(p.min()), float((p @ payoff).min()), -abs(float(p.sum()) - 1.0))
    if qp["status"] != "optimal" and worst < -1e-7:
        raise NumericalFailure(f"matrix-game QP inaccurate: status {qp['status']}")
    return p


def _polish_min_norm(payoff: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Re-solve the QP's active set as an exact least-norm system.

    If the polished point is feasible and no worse in norm, strong convexity
    of the objective guarantees it is the same (unique) minimizer, now at
    machine precision; otherwise the interior-point solution is kept.
    """
    m = payoff.shape[0]
    active_zero = np.flatnonzero(p <= 1e-6)
    active_game = np.flatnonzero(p @ payoff <= 1e-6)
    rows = [np.ones((1, m))]
    rhs = [1.0]
    for i in active_zero:
        e = np.zeros((1, m))
        e[0, i] = 1.0
        rows.append(e)
        rhs.append(0.0)
    if active_game.size:
        rows.append(payoff.T[active_game])
        rhs.extend([0.0] * active_game.size)
    system = np.vstack(rows)
    polished, *_ = np.linalg.lstsq(system, np.asarray(rhs), rcond=None)
    feasible = (
        polished.min() >= -1e-10
        and (polished @ payoff).min() >= -1e-10
        and abs(polished.sum() - 1.0) <= 1e-10
        and polished @ polished <= p @ p + 1e-9
    )
    return polished if feasible else p


def solve_matrix_game(payoff) -> np.ndarray:
    """Minimum-norm maximin strategy of a symmetric zero-sum game.

    ``payoff`` must be skew-symmetric within :data:`FEASIBILITY_TOL` (the
    game value is then 0).  The returned vector ``p`` satisfies
    ``(p @ payoff) >= -1e-8`` against every pure strategy and sums to 1
    exactly; probabilities below :data:`SUPPORT_TOL` are zeroed.
    """
    a = np.asarray(payoff, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("payoff matrix must be square")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a + a.T).max() > FEASIBILITY_TOL * scale:
        raise ValueError("payoff matrix is not skew-symmetric")
    m = a.shape[0]
    if m == 1:
        return np.ones(1)
    # Normalize so QP tolerances are scale-free; maximin set is invariant.
    p = _qp_min_norm(a / scale)
    p = _polish_min_norm(a / scale, p)
    p = np.where(p < SUPPORT_TOL, 0.0, p)
    p /= p.sum()
    return p
