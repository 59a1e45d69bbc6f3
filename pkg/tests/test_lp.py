import numpy as np
import pytest

from distvote.lp import (
    FEASIBILITY_TOL,
    LinearProgram,
    LpStatus,
    solve,
    solve_matrix_game,
)


def lp(objective, constraints, lower_bounds=None):
    return LinearProgram(
        objective=tuple(objective),
        constraints=tuple((tuple(c), rel, b) for c, rel, b in constraints),
        lower_bounds=tuple(lower_bounds) if lower_bounds is not None else None,
    )


class TestSolve:
    def test_bounded_optimum(self):
        outcome = solve(lp([1.0], [([1.0], "<=", 3.0)]))
        assert outcome.status is LpStatus.OPTIMAL
        assert outcome.value == pytest.approx(3.0, abs=1e-9)
        assert outcome.x[0] == pytest.approx(3.0, abs=1e-9)

    def test_unbounded(self):
        outcome = solve(lp([1.0], []))
        assert outcome.status is LpStatus.UNBOUNDED
        assert outcome.value is None

    def test_infeasible(self):
        outcome = solve(lp([1.0], [([1.0], "<=", -1.0)]))
        assert outcome.status is LpStatus.INFEASIBLE

    def test_equality_and_free_variables(self):
        outcome = solve(
            lp([0.0, 1.0], [([1.0, 1.0], "=", 2.0), ([0.0, 1.0], "<=", 5.0)],
               lower_bounds=[None, None])
        )
        assert outcome.status is LpStatus.OPTIMAL
        assert outcome.value == pytest.approx(5.0, abs=1e-9)

    def test_rejects_malformed(self):
        with pytest.raises(ValueError):
            lp([1.0], [([1.0, 2.0], "<=", 1.0)])
        with pytest.raises(ValueError):
            lp([1.0], [([1.0], "<", 1.0)])

    def test_resubstitution_on_random_bounded_programs(self):
        rng = np.random.default_rng(5)
        for _ in range(120):
            nvar = int(rng.integers(1, 21))
            nrow = int(rng.integers(1, 25))
            a = rng.normal(size=(nrow, nvar))
            x0 = rng.random(nvar)
            slack = rng.random(nrow)
            constraints = [(row, "<=", float(row @ x0 + s)) for row, s in zip(a, slack)]
            # box rows keep the program bounded
            for j in range(nvar):
                e = np.zeros(nvar)
                e[j] = 1.0
                constraints.append((e, "<=", 10.0))
            objective = rng.normal(size=nvar)
            outcome = solve(lp(objective, constraints))
            assert outcome.status is LpStatus.OPTIMAL
            assert outcome.value == pytest.approx(float(objective @ outcome.x), abs=1e-7)
            for row, rel, bound in constraints:
                assert float(np.asarray(row) @ outcome.x) <= bound + 1e-8

    def test_determinism(self):
        program = lp([1.0, 2.0], [([1.0, 1.0], "<=", 4.0), ([1.0, 3.0], "<=", 6.0)])
        first = solve(program)
        second = solve(program)
        assert first.value == second.value
        assert first.x.tobytes() == second.x.tobytes()


class TestMatrixGame:
    def test_three_cycle_is_uniform(self):
        payoff = np.array([[0.0, 1, -1], [-1, 0, 1], [1, -1, 0]])
        p = solve_matrix_game(payoff)
        assert p == pytest.approx(np.full(3, 1 / 3), abs=1e-9)

    def test_dominant_row_is_degenerate(self):
        payoff = np.array([[0.0, 1, 3], [-1, 0, 1], [-3, -1, 0]])
        p = solve_matrix_game(payoff)
        assert p == pytest.approx([1.0, 0.0, 0.0], abs=1e-9)
        assert (p @ payoff).min() >= -1e-9

    def test_zero_game_min_norm_is_uniform(self):
        p = solve_matrix_game(np.zeros((3, 3)))
        assert p == pytest.approx(np.full(3, 1 / 3), abs=1e-12)

    def test_single_alternative(self):
        assert solve_matrix_game(np.zeros((1, 1))) == pytest.approx([1.0])

    def test_rejects_non_skew(self):
        with pytest.raises(ValueError):
            solve_matrix_game(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_random_games_maximin_and_validity(self):
        rng = np.random.default_rng(12)
        for _ in range(500):
            m = int(rng.integers(2, 9))
            b = rng.normal(size=(m, m)) * rng.choice([0.01, 1.0, 50.0])
            payoff = b - b.T
            p = solve_matrix_game(payoff)
            assert (p @ payoff).min() >= -1e-8
            assert p.min() >= 0.0
            assert p.sum() == pytest.approx(1.0, abs=1e-12)

    def test_skew_tolerance_respects_feasibility_tol(self):
        payoff = np.array([[0.0, 1.0], [-1.0 - FEASIBILITY_TOL * 10, 0.0]])
        with pytest.raises(ValueError):
            solve_matrix_game(payoff)

    def test_determinism(self):
        rng = np.random.default_rng(9)
        b = rng.normal(size=(6, 6))
        payoff = b - b.T
        first = solve_matrix_game(payoff)
        second = solve_matrix_game(payoff)
        assert first.tobytes() == second.tobytes()
