"""Exact metric distortion of lotteries, witnesses, and majority-distance bounds.

The central computation is the compact distortion program: for a profile, a
lottery ``p``, and an anchor alternative ``x*``, a linear program over the
voter-alternative distances ``d(x, v)`` and a per-alternative valuation
``t(x)`` whose optimal value equals ``dist(p, R, x*)`` when bounded and
certifies ``dist = +inf`` when unbounded.  Its feasible region depends only
on the profile and the anchor, so :class:`DistortionLp` caches the
constraint matrices per anchor and re-solves with fresh objectives.

A brute-force oracle over full metrics on ``V union X`` (all triangle
inequalities materialized) provides an independent check at small scale,
and feasible solutions of the compact program can be repaired into explicit
consistent metrics that certify the computed value from below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .lp import LpStatus, NumericalFailure, solve_linear
from .profiles import (
    MajorityRelation,
    PreferenceProfile,
    majority_distance_matrix,
    majority_relation,
)
from .rules import Lottery


class InfeasibleLpError(RuntimeError):
    """The distortion LP reported infeasible; it is feasible by construction,
    so this always indicates an internal bug and must abort loudly."""


@dataclass(frozen=True)
class LpOneSolution:
    """Optimal assignment of the compact distortion program for one anchor."""

    value: float
    d: np.ndarray  # (m, n) voter-alternative distances
    t: np.ndarray  # (m,) valuation


@dataclass(frozen=True)
class BiasedValuation:
    """Nonnegative per-alternative valuation anchored at ``t[anchor] = 0``."""

    anchor: int
    t: np.ndarray

    def __post_init__(self) -> None:
        t = np.asarray(self.t, dtype=float)
        if t.min() < 0.0:
            raise ValueError("valuation must be nonnegative")
        if t[self.anchor] != 0.0:
            raise ValueError("valuation must vanish at the anchor")
        t.flags.writeable = False
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class MetricWitness:
    """A full metric on alternatives and voters, alternatives first.

    ``distances[i, j]`` ranges over the ``m + n`` points with alternatives at
    indices ``0..m-1`` and voter ``v`` at ``m + v``.
    """

    distances: np.ndarray
    m: int
    n: int

    def __post_init__(self) -> None:
        self.distances.flags.writeable = False

    def voter_alt(self, voter: int, alt: int) -> float:
        return float(self.distances[self.m + voter, alt])

    def social_cost(self, alt: int) -> float:
        return float(self.distances[self.m :, alt].sum())

    def lottery_cost(self, lottery: Lottery) -> float:
        return float(lottery.probabilities @ self.distances[self.m :, : self.m].sum(axis=0))

    def cost_ratio(self, lottery: Lottery, x_star: int) -> float:
        """``sc(p, d) / sc(x*, d)`` under the 0/0 = 1 and z/0 = inf conventions."""
        num = self.lottery_cost(lottery)
        den = self.social_cost(x_star)
        if den > 0.0:
            return num / den
        return 1.0 if num == 0.0 else math.inf

    def validate(self, profile: PreferenceProfile, triangle_tol: float = 1e-7,
                 consistency_tol: float = 1e-9) -> None:
        """Raise ValueError unless this is a consistent metric for the profile."""
        d = self.distances
        size = self.m + self.n
        if d.shape != (size, size):
            raise ValueError("distance table has wrong shape")
        if d.min() < 0.0:
            raise ValueError("negative distance")
        if np.abs(np.diagonal(d)).max() > 0.0:
            raise ValueError("nonzero self-distance")
        if np.abs(d - d.T).max() > 0.0:
            raise ValueError("asymmetric distances")
        worst = (d[:, :, None] - (d[:, None, :] + d[None, :, :])).max()
        if worst > triangle_tol:
            raise ValueError(f"triangle inequality violated by {worst}")
        for voter in range(self.n):
            ranking = profile.rankings[voter]
            row = d[self.m + voter, list(ranking)]
            if (np.diff(row) < -consistency_tol).any():
                raise ValueError(f"voter {voter} distances violate the ranking")


def _complete_from_bipartite(dxv: np.ndarray) -> np.ndarray:
    """Close voter-alternative distances into a full table via min-sum paths.

    Alternative-alternative distances route through the best common voter and
    voter-voter distances through the best common alternative, exactly the
    completion that makes the repaired program solutions metrics.
    """
    m, n = dxv.shape
    size = m + n
    full = np.zeros((size, size))
    full[:m, m:] = dxv
    full[m:, :m] = dxv.T
    if m > 1:
        alt_alt = (dxv[:, None, :] + dxv[None, :, :]).min(axis=2)
        np.fill_diagonal(alt_alt, 0.0)
        full[:m, :m] = alt_alt
    if n > 1:
        voter_voter = (dxv[:, :, None] + dxv[:, None, :]).min(axis=0)
        np.fill_diagonal(voter_voter, 0.0)
        full[m:, m:] = voter_voter
    return full


class DistortionLp:
    """Compact distortion program for one profile, reusable across lotteries.

    Constraint matrices depend only on (profile, anchor) and are cached; each
    lottery only swaps the objective.  Calls across anchors are independent.
    """

    def __init__(self, profile: PreferenceProfile):
        self.profile = profile
        self._cache: dict[int, tuple] = {}

    # Variable layout: d(x, v) at x*n + v, then t(x) at m*n + x.
    def _constraints(self, anchor: int):
        cached = self._cache.get(anchor)
        if cached is not None:
            return cached
        profile = self.profile
        m, n = profile.m, profile.n
        nvar = m * n + m
        rk = profile.ranking_array
        hi, lo = np.triu_indices(m)  # position pairs hi <= lo: ranked weakly above
        pairs = hi.size
        upper = rk[:, hi].ravel()  # alternative ranked weakly above, per voter
        lower = rk[:, lo].ravel()
        voter = np.repeat(np.arange(n), pairs)
        base2 = n * pairs
        base3 = 2 * n * pairs
        rows1 = np.arange(n * pairs)
        rows2 = base2 + rows1
        alt_all = np.repeat(np.arange(m), n)
        voter_all = np.tile(np.arange(n), m)
        rows3 = base3 + np.arange(m * n)

        # anchor spread bound:   -d(x*,v) + t(x)/2 - t(y)/2 <= 0   for x >=_v y
        # anchor-relative cap:    d(x,v) - d(x*,v) - t(y)   <= 0   for x >=_v y
        # valuation floor:       -d(x,v) - d(x*,v) + t(x)   <= 0   for all x, v
        rows = np.concatenate([
            rows1, rows1, rows1,
            rows2, rows2, rows2,
            rows3, rows3, rows3,
        ])
        cols = np.concatenate([
            anchor * n + voter, m * n + upper, m * n + lower,
            upper * n + voter, anchor * n + voter, m * n + lower,
            alt_all * n + voter_all, anchor * n + voter_all, m * n + alt_all,
        ])
        data = np.concatenate([
            np.full(n * pairs, -1.0), np.full(n * pairs, 0.5), np.full(n * pairs, -0.5),
            np.full(n * pairs, 1.0), np.full(n * pairs, -1.0), np.full(n * pairs, -1.0),
            np.full(m * n, -1.0), np.full(m * n, -1.0), np.full(m * n, 1.0),
        ])
        a_ub = sparse.csr_matrix((data, (rows, cols)), shape=(base3 + m * n, nvar))
        b_ub = np.zeros(base3 + m * n)

        # normalization: sum_v d(x*, v) = 1
        a_eq = sparse.csr_matrix(
            (np.ones(n), (np.zeros(n, dtype=int), anchor * n + np.arange(n))),
            shape=(1, nvar),
        )
        b_eq = np.ones(1)

        bounds = np.empty((nvar, 2))
        bounds[: m * n] = (-np.inf, np.inf)
        bounds[m * n :] = (0.0, np.inf)
        bounds[m * n + anchor] = (0.0, 0.0)

        built = (a_ub, b_ub, a_eq, b_eq, bounds)
        self._cache[anchor] = built
        return built

    def _solve(self, lottery: Lottery, anchor: int):
        profile = self.profile
        if lottery.probabilities.size != profile.m:
            raise ValueError("lottery does not match the profile's alternatives")
        a_ub, b_ub, a_eq, b_eq, bounds = self._constraints(anchor)
        objective = np.zeros(profile.m * profile.n + profile.m)
        objective[: profile.m * profile.n] = np.repeat(lottery.probabilities, profile.n)
        outcome = solve_linear(objective, a_ub, b_ub, a_eq, b_eq, bounds)
        if outcome.status is LpStatus.INFEASIBLE:
            raise InfeasibleLpError(
                "distortion LP reported infeasible; it is feasible by construction "
                f"(anchor={anchor}, m={profile.m}, n={profile.n})"
            )
        return outcome

    def distortion_at(self, lottery: Lottery, x_star: int) -> float:
        """``dist(p, R, x*)``: optimal value, or ``math.inf`` when unbounded."""
        outcome = self._solve(lottery, x_star)
        if outcome.status is LpStatus.UNBOUNDED:
            return math.inf
        return max(1.0, outcome.value)

    def solution_at(self, lottery: Lottery, x_star: int) -> LpOneSolution | None:
        """Optimal assignment for witness extraction; ``None`` when unbounded."""
        outcome = self._solve(lottery, x_star)
        if outcome.status is LpStatus.UNBOUNDED:
            return None
        m, n = self.profile.m, self.profile.n
        return LpOneSolution(
            value=max(1.0, outcome.value),
            d=outcome.x[: m * n].reshape(m, n),
            t=outcome.x[m * n :],
        )

    def metric_distortion(self, lottery: Lottery) -> float:
        """``dist(p, R) = max_x dist(p, R, x)``; ``math.inf`` dominates."""
        worst = 1.0
        for anchor in range(self.profile.m):
            value = self.distortion_at(lottery, anchor)
            if value == math.inf:
                return math.inf
            worst = max(worst, value)
        return worst


def distortion_at(profile: PreferenceProfile, lottery: Lottery, x_star: int) -> float:
    return DistortionLp(profile).distortion_at(lottery, x_star)


def metric_distortion(profile: PreferenceProfile, lottery: Lottery) -> float:
    return DistortionLp(profile).metric_distortion(lottery)


def _pair_indexer(size: int):
    """Variable indices for unordered point pairs ``i < j``."""
    offsets = np.zeros(size, dtype=int)
    offsets[1:] = np.cumsum(size - 1 - np.arange(size - 1))

    def index(i: int, j: int) -> int:
        if i > j:
            i, j = j, i
        return int(offsets[i] + (j - i - 1))

    return index, int(size * (size - 1) // 2)


def _oracle_system(profile: PreferenceProfile, x_star: int):
    """Triangle + consistency rows of the naive full-metric program."""
    m, n = profile.m, profile.n
    size = m + n
    index, nvar = _pair_indexer(size)
    rows, cols, data = [], [], []
    row = 0
    for i in range(size):
        for j in range(i + 1, size):
            for k in range(j + 1, size):
                ij, ik, jk = index(i, j), index(i, k), index(j, k)
                for longest, others in ((ij, (ik, jk)), (ik, (ij, jk)), (jk, (ij, ik))):
                    rows += [row, row, row]
                    cols += [longest, others[0], others[1]]
                    data += [1.0, -1.0, -1.0]
                    row += 1
    for voter in range(n):
        point = m + voter
        ranking = profile.rankings[voter]
        for better, worse in zip(ranking, ranking[1:]):
            rows += [row, row]
            cols += [index(point, better), index(point, worse)]
            data += [1.0, -1.0]
            row += 1
    a_ub = sparse.csr_matrix((data, (rows, cols)), shape=(row, nvar))
    b_ub = np.zeros(row)
    anchor_cols = [index(m + voter, x_star) for voter in range(n)]
    a_eq = sparse.csr_matrix(
        (np.ones(n), (np.zeros(n, dtype=int), anchor_cols)), shape=(1, nvar)
    )
    return index, nvar, a_ub, b_ub, a_eq


def oracle_distortion(profile: PreferenceProfile, lottery: Lottery, x_star: int) -> float:
    """Brute-force distortion over explicit metrics; small instances only.

    Builds the naive program with one variable per unordered point pair, all
    triangle inequalities, and the ranking consistency rows.  The degenerate
    regime where the anchor's social cost can vanish is detected by an
    explicit feasibility subproblem (cost 0 for the anchor, cost >= 1 for the
    lottery): if it is feasible the distortion is infinite, otherwise the
    normalized program (anchor cost = 1) gives the exact value.
    """
    m, n = profile.m, profile.n
    index, nvar, a_ub, b_ub, a_eq = _oracle_system(profile, x_star)
    objective = np.zeros(nvar)
    for x in range(m):
        p = lottery.probabilities[x]
        for voter in range(n):
            objective[index(m + voter, x)] += p

    # Degenerate regime: sc(x*) = 0 while sc(p) >= 1 scales to infinity.
    zero_row = sparse.vstack([a_ub, sparse.csr_matrix(-objective)], format="csr")
    zero_rhs = np.concatenate([b_ub, [-1.0]])
    feas = solve_linear(np.zeros(nvar), zero_row, zero_rhs, a_eq, np.zeros(1),
                        [(0.0, None)] * nvar)
    if feas.status is LpStatus.OPTIMAL:
        return math.inf

    outcome = solve_linear(objective, a_ub, b_ub, a_eq, np.ones(1), [(0.0, None)] * nvar)
    if outcome.status is not LpStatus.OPTIMAL:
        raise NumericalFailure(
            f"oracle program ended {outcome.status} after feasibility said bounded"
        )
    return max(1.0, outcome.value)


def biased_metric(profile: PreferenceProfile, valuation: BiasedValuation) -> MetricWitness:
    """Metric induced by a valuation: anchor distances are half the largest
    valuation drop a voter concedes, other distances add the smallest
    valuation below the alternative; cross-distances close via min-sum paths."""
    m, n = profile.m, profile.n
    t = valuation.t
    rk = profile.ranking_array
    t_by_rank = t[rk]  # (n, m) valuations in ranking order
    suffix_min = np.minimum.accumulate(t_by_rank[:, ::-1], axis=1)[:, ::-1]
    anchor_dist = 0.5 * (t_by_rank - suffix_min).max(axis=1)  # per voter
    dxv = np.empty((m, n))
    for voter in range(n):
        dxv[rk[voter], voter] = anchor_dist[voter] + suffix_min[voter]
    dxv[valuation.anchor] = anchor_dist
    return MetricWitness(distances=_complete_from_bipartite(dxv), m=m, n=n)


def extract_witness_metric(
    profile: PreferenceProfile, solution: LpOneSolution, x_star: int
) -> MetricWitness:
    """Repair a feasible program assignment into a consistent metric.

    Distances are first raised to at least the anchor's distance, then made
    monotone along every voter's ranking by a top-down running maximum; both
    repairs preserve feasibility and never lower the objective, and the
    min-sum completion of the result satisfies the triangle inequality.  The
    witness certifies ``cost_ratio >= value`` up to solver tolerance.
    """
    d = np.maximum(solution.d, solution.d[x_star][None, :])
    rk = profile.ranking_array
    rows = np.arange(profile.n)[:, None]
    by_rank = d[rk, rows]  # (n, m) distances in ranking order
    d[rk, rows] = np.maximum.accumulate(by_rank, axis=1)
    return MetricWitness(distances=_complete_from_bipartite(d), m=profile.m, n=profile.n)


def majority_distance_bound(profile: PreferenceProfile, lottery: Lottery) -> float:
    """Upper bound ``1 + 2 max_x md(p, x)`` on the metric distortion of any
    lottery chosen by a majoritarian rule; ``math.inf`` propagates."""
    dist = majority_distance_matrix(majority_relation(profile))
    support = lottery.support()
    if np.isinf(dist[support]).any():
        return math.inf
    reach = lottery.probabilities[support] @ dist[support]
    return 1.0 + 2.0 * float(reach.max())


def optimal_majoritarian_lottery(rel: MajorityRelation) -> tuple[Lottery, float]:
    """Lottery minimizing the worst expected majority distance, with its value.

    Support is restricted to alternatives that reach every other alternative
    (the top cycle); the minimization is a small linear program.  For a
    complete relation the top cycle is never empty, but if no alternative
    reaches all others every lottery has infinite value and an arbitrary
    top-cycle lottery is returned.
    """
    m = rel.m
    dist = majority_distance_matrix(rel)
    reach_all = np.flatnonzero(np.isfinite(dist).all(axis=1))
    if reach_all.size == 0:
        finite_counts = np.isfinite(dist).sum(axis=1)
        best = int(np.argmax(finite_counts))
        return Lottery.degenerate(m, best), math.inf

    k = reach_all.size
    nvar = k + 1  # support probabilities then the bound variable z
    rows, cols, data = [], [], []
    for x in range(m):
        for j, y in enumerate(reach_all):
            rows.append(x)
            cols.append(j)
            data.append(dist[y, x])
        rows.append(x)
        cols.append(k)
        data.append(-1.0)
    a_ub = sparse.csr_matrix((data, (rows, cols)), shape=(m, nvar))
    a_eq = sparse.csr_matrix(
        (np.ones(k), (np.zeros(k, dtype=int), np.arange(k))), shape=(1, nvar)
    )
    objective = np.zeros(nvar)
    objective[k] = -1.0  # maximize -z
    outcome = solve_linear(objective, a_ub, np.zeros(m), a_eq, np.ones(1),
                           [(0.0, None)] * nvar)
    if outcome.status is not LpStatus.OPTIMAL:
        raise NumericalFailure(f"majoritarian lottery program ended {outcome.status}")
    probs = np.zeros(m)
    probs[reach_all] = np.maximum(outcome.x[:k], 0.0)
    probs /= probs.sum()
    return Lottery(probs), float(outcome.x[k])
