"""The five randomized social choice functions.

Implemented rules: uniform random dictatorship, randomized Plurality-Veto,
C2 maximal lotteries (zero-sum game on pairwise margins), C1 maximal
lotteries (game on majority-relation signs), and the mixed rule that
combines a C2 maximal lottery with an integral over beta-radius rules.

Every rule maps a :class:`~distvote.profiles.PreferenceProfile` to a
:class:`Lottery` over the profile's alternatives, is deterministic, and is
safe to call concurrently on shared profiles.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from .lp import solve_matrix_game
from .profiles import (
    PreferenceProfile,
    majority_relation,
    restrict,
    support_matrix,
    tallies,
)

PROBABILITY_SUM_TOL = 1e-9
PROBABILITY_NEG_TOL = -1e-12


@dataclass(frozen=True)
class Lottery:
    """A probability distribution over a profile's alternatives.

    Probabilities are aligned with the profile's alternative order.  Entries
    in ``[-1e-12, 0)`` are clamped to 0 on construction; the total must be 1
    within ``1e-9``.
    """

    probabilities: np.ndarray

    def __post_init__(self) -> None:
        probs = np.asarray(self.probabilities, dtype=float)
        if probs.ndim != 1 or probs.size < 1:
            raise ValueError("lottery needs a nonempty probability vector")
        if probs.min() < PROBABILITY_NEG_TOL:
            raise ValueError(f"negative probability {probs.min()}")
        if abs(probs.sum() - 1.0) > PROBABILITY_SUM_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()}, not 1")
        probs = np.where(probs < 0.0, 0.0, probs)
        probs.flags.writeable = False
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def degenerate(cls, m: int, index: int) -> "Lottery":
        probs = np.zeros(m)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def uniform(cls, m: int) -> "Lottery":
        return cls(np.full(m, 1.0 / m))

    def support(self) -> np.ndarray:
        """Indices with strictly positive probability."""
        return np.flatnonzero(self.probabilities > 0.0)

    def as_dict(self, names) -> dict[str, float]:
        return {name: float(p) for name, p in zip(names, self.probabilities)}


def random_dictatorship(profile: PreferenceProfile) -> Lottery:
    """Each alternative gets the fraction of voters that top-rank it."""
    return Lottery(tallies(profile).top / profile.n)


def _veto_winner(profile: PreferenceProfile, order) -> int:
    """Winner of the sequential veto process for one voter order.

    Scores start at the plurality tallies; each voter in turn decrements
    their lowest-ranked alternative that still has positive score.  Rankings
    are strict, so that veto target is unique.  The winner is the target of
    the final veto, i.e. the last alternative with positive score.
    """
    scores = tallies(profile).top.copy()
    winner = -1
    for voter in order:
        ranking = profile.rankings[voter]
        for alt in reversed(ranking):
            if scores[alt] > 0:
                scores[alt] -= 1
                winner = alt
                break
    assert scores.sum() == 0, "veto process must consume all score"
    return winner


def plurality_veto_winners_brute(profile: PreferenceProfile) -> frozenset[str]:
    """All veto-process winners by exhausting voter orders (oracle; n small)."""
    winners = {
        _veto_winner(profile, order)
        for order in itertools.permutations(range(profile.n))
    }
    return frozenset(profile.alternatives[w] for w in winners)


def _veto_assignment_feasible(profile: PreferenceProfile, candidate: int, top: np.ndarray) -> bool:
    """Max-flow test: can each voter veto an alternative weakly below the candidate
    so that every alternative receives exactly its plurality score in vetoes?"""
    n, m = profile.n, profile.m
    source, sink = 0, 1 + n + m
    rows, cols, caps = [], [], []
    for voter in range(n):
        rows.append(source)
        cols.append(1 + voter)
        caps.append(1)
        ranking = profile.rankings[voter]
        cut = profile.position[voter, candidate]
        for alt in ranking[cut:]:
            rows.append(1 + voter)
            cols.append(1 + n + alt)
            caps.append(1)
    for alt in range(m):
        if top[alt] > 0:
            rows.append(1 + n + alt)
            cols.append(sink)
            caps.append(int(top[alt]))
    graph = csr_matrix((caps, (rows, cols)), shape=(sink + 1, sink + 1), dtype=np.int32)
    return maximum_flow(graph, source, sink).flow_value == n


def plurality_veto_winners(profile: PreferenceProfile) -> frozenset[str]:
    """Alternatives that win the veto process for some voter order.

    Membership of a candidate is decided by a bipartite flow feasibility
    problem (one per candidate): a winning order exists iff the vetoes can be
    assigned one per voter, each voter targeting an alternative they rank
    weakly below the candidate, with every alternative collecting exactly its
    plurality score.  The candidate must also be top-ranked at least once.
    This formulation is pinned to the order-enumeration semantics by tests.
    """
    top = tallies(profile).top
    winners = [
        profile.alternatives[x]
        for x in range(profile.m)
        if top[x] > 0 and _veto_assignment_feasible(profile, x, top)
    ]
    return frozenset(winners)


def randomized_plurality_veto(profile: PreferenceProfile) -> Lottery:
    """Uniform lottery over the possible veto-process winners."""
    winners = plurality_veto_winners(profile)
    probs = np.zeros(profile.m)
    for name in winners:
        probs[profile.index_of(name)] = 1.0 / len(winners)
    return Lottery(probs)


def c2_maximal_lottery(profile: PreferenceProfile) -> Lottery:
    """Maximin strategy of the game on pairwise support margins.

    The output ``p`` satisfies ``n_pq >= n_qp`` for every lottery ``q``;
    among all such lotteries the minimum-norm one is returned.
    """
    margin = support_matrix(profile).margin().astype(float)
    return Lottery(solve_matrix_game(margin))


def c1_maximal_lottery(profile: PreferenceProfile) -> Lottery:
    """Maximin strategy of the game on majority-relation signs.

    Only strict majority comparisons carry payoff; ties contribute 0.  The
    output is majoritarian: it depends on the profile only through its
    majority relation.
    """
    sign = majority_relation(profile).sign.astype(float)
    return Lottery(solve_matrix_game(sign))


def beta_uncovered_set(profile: PreferenceProfile, beta: float) -> frozenset[str]:
    """Alternatives not beta-covered, by the definitional double loop.

    ``x`` beta-covers ``y`` iff at least ``beta * n`` voters rank ``x`` above
    ``y`` and every ``z`` that beats ``x`` at the ``beta * n`` level also
    beats ``y`` at that level.
    """
    counts = support_matrix(profile).counts
    threshold = beta * profile.n
    m = profile.m
    strong = counts >= threshold
    covered = set()
    for y in range(m):
        for x in range(m):
            if x == y or not strong[x, y]:
                continue
            if all(strong[z, y] for z in range(m) if strong[z, x]):
                covered.add(y)
                break
    return frozenset(
        profile.alternatives[x] for x in range(m) if x not in covered
    )


def beta_radius_rule(profile: PreferenceProfile, beta: float) -> Lottery:
    """Random dictatorship on the restriction to the beta-uncovered set."""
    keep = beta_uncovered_set(profile, beta)
    sub = restrict(profile, keep)
    sub_lottery = random_dictatorship(sub)
    probs = np.zeros(profile.m)
    for name, p in zip(sub.alternatives, sub_lottery.probabilities):
        probs[profile.index_of(name)] = p
    return Lottery(probs)


@dataclass(frozen=True)
class CrwwConstants:
    """Constants of the mixed rule.

    ``p_mix`` is recomputed from ``B`` via the closed form
    ``1 / (1 + atanh(B) - atanh(1/2))`` (the integral of ``1/(1-x^2)`` is
    ``atanh``), rather than hard-coding the published rounded decimal; tests
    cross-check the two.
    """

    B: float = 0.876353
    p_mix: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "p_mix", 1.0 / (1.0 + math.atanh(self.B) - math.atanh(0.5))
        )

    def density(self, beta: float) -> float:
        """Mixing density over ``(1/2, B)``; integrates to 1."""
        if not 0.5 < beta < self.B:
            return 0.0
        return self.p_mix / ((1.0 - self.p_mix) * (1.0 - beta * beta))

    def interval_weight(self, lo: float, hi: float) -> float:
        """Final-mixture weight of a beta interval: ``(1 - p_mix)`` times the
        density mass, which telescopes to ``p_mix * (atanh(hi) - atanh(lo))``."""
        return self.p_mix * (math.atanh(hi) - math.atanh(lo))


CRWW_CONSTANTS = CrwwConstants()


def crww_intervals(profile: PreferenceProfile) -> list[tuple[float, float, float, Lottery]]:
    """Piecewise decomposition of the beta integral.

    Between consecutive breakpoints (the support fractions ``n_xy / n``
    falling strictly inside ``(1/2, B)``) every comparison ``n_xy >= beta*n``
    has constant truth value, so the beta-radius lottery is constant and is
    evaluated at the interval midpoint.  Returns ``(lo, hi, weight, lottery)``
    per interval; the weights sum to ``1 - p_mix``.
    """
    consts = CRWW_CONSTANTS
    counts = support_matrix(profile).counts
    fractions = sorted(
        {
            counts[x, y] / profile.n
            for x in range(profile.m)
            for y in range(profile.m)
            if x != y and 0.5 < counts[x, y] / profile.n < consts.B
        }
    )
    edges = [0.5, *fractions, consts.B]
    pieces = []
    for lo, hi in zip(edges, edges[1:]):
        weight = consts.interval_weight(lo, hi)
        pieces.append((lo, hi, weight, beta_radius_rule(profile, (lo + hi) / 2.0)))
    return pieces


def crww(profile: PreferenceProfile) -> Lottery:
    """Mix a C2 maximal lottery with the exact beta-radius integral.

    The integral is evaluated in closed form piecewise (no quadrature): the
    final lottery is ``p_mix * C2ML + sum_i w_i * f_beta_i`` with the interval
    weights ``w_i`` summing to ``1 - p_mix``.
    """
    probs = CRWW_CONSTANTS.p_mix * c2_maximal_lottery(profile).probabilities
    for _, _, weight, piece in crww_intervals(profile):
        probs = probs + weight * piece.probabilities
    return Lottery(probs)
