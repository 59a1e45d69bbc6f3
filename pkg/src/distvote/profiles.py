"""Preference profiles and the combinatorial structure derived from them.

A profile is a collection of strict total orders (rankings) over a common
set of alternatives.  Everything downstream -- pairwise supports, the
majority relation, top/bottom tallies, majority distances, restrictions,
and the McGarvey realization of a prescribed majority relation -- is
computed from this one structure.

Alternatives are handled as dense indices ``0..m-1`` internally; external
names live in a side table on the profile.  Profiles are immutable and
safe to share across worker processes.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class ProfileError(ValueError):
    """Base class for invalid profile construction."""


class EmptyProfileError(ProfileError):
    """Raised when a profile has no voters or no alternatives."""


class MalformedRankingError(ProfileError):
    """Raised when a ranking is not a permutation of the alternatives."""


class EmptySubsetError(ProfileError):
    """Raised when restricting a profile to an empty alternative set."""


class IncompleteRelationError(ValueError):
    """Raised when a pairwise comparison table is not a complete relation."""


@dataclass(frozen=True)
class PreferenceProfile:
    """An immutable election: ``n`` strict total orders over ``m`` alternatives.

    ``alternatives`` fixes the canonical index order; each ranking is a
    permutation of ``0..m-1`` listing alternatives from most to least
    preferred.  Use :func:`build_profile` to construct from names.
    """

    alternatives: tuple[str, ...]
    rankings: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        if not self.alternatives or not self.rankings:
            raise EmptyProfileError("profile needs at least one voter and one alternative")
        full = frozenset(range(len(self.alternatives)))
        for ranking in self.rankings:
            if len(ranking) != len(full) or set(ranking) != full:
                raise MalformedRankingError(f"ranking {ranking!r} is not a permutation")

    @property
    def m(self) -> int:
        return len(self.alternatives)

    @property
    def n(self) -> int:
        return len(self.rankings)

    @cached_property
    def ranking_array(self) -> np.ndarray:
        """Rankings as a read-only ``n x m`` int array (best to worst)."""
        arr = np.array(self.rankings, dtype=np.int64)
        arr.flags.writeable = False
        return arr

    @cached_property
    def position(self) -> np.ndarray:
        """``position[v, x]`` = rank of alternative ``x`` for voter ``v`` (0 = top)."""
        arr = self.ranking_array
        pos = np.empty_like(arr)
        rows = np.arange(self.n)[:, None]
        pos[rows, arr] = np.arange(self.m)[None, :]
        pos.flags.writeable = False
        return pos

    def index_of(self, name: str) -> int:
        try:
            return self.alternatives.index(name)
        except ValueError:
            raise KeyError(f"unknown alternative {name!r}") from None

    def prefers(self, voter: int, x: int, y: int) -> bool:
        """True iff voter ranks ``x`` strictly above ``y``."""
        return bool(self.position[voter, x] < self.position[voter, y])


@dataclass(frozen=True)
class SupportMatrix:
    """Pairwise voter counts: ``counts[x, y]`` voters rank ``x`` above ``y``."""

    counts: np.ndarray
    n: int

    def __post_init__(self) -> None:
        self.counts.flags.writeable = False

    def margin(self) -> np.ndarray:
        """Skew-symmetric margin matrix ``counts - counts.T``."""
        return self.counts - self.counts.T


@dataclass(frozen=True)
class MajorityRelation:
    """Complete pairwise comparison structure.

    ``sign[x, y]`` is ``+1`` if ``x`` strictly majority-beats ``y``, ``-1``
    if it strictly loses, and ``0`` on ties and the diagonal.  Every pair is
    thereby comparable (ties count as mutual weak preference), which is the
    completeness invariant.
    """

    sign: np.ndarray

    def __post_init__(self) -> None:
        s = self.sign
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise IncompleteRelationError("comparison table must be square")
        if not np.isin(s, (-1, 0, 1)).all():
            raise IncompleteRelationError("comparison entries must be -1, 0, or +1")
        if np.diagonal(s).any():
            raise IncompleteRelationError("diagonal must be 0")
        if (s != -s.T).any():
            raise IncompleteRelationError("strict comparisons must be anti-symmetric")
        s.flags.writeable = False

    @property
    def m(self) -> int:
        return self.sign.shape[0]

    def weakly_beats(self, x: int, y: int) -> bool:
        """``x`` beats or ties ``y`` (the weak relation; reflexive by convention)."""
        return bool(self.sign[x, y] >= 0)

    def strictly_beats(self, x: int, y: int) -> bool:
        return bool(self.sign[x, y] > 0)

    def condorcet_winner(self) -> int | None:
        """Index of the alternative strictly beating all others, if any."""
        if self.m == 1:
            return 0
        strict_wins = (self.sign > 0).sum(axis=1)
        winners = np.flatnonzero(strict_wins == self.m - 1)
        return int(winners[0]) if winners.size else None


@dataclass(frozen=True)
class Tallies:
    """Top- and bottom-rank counts per alternative."""

    top: np.ndarray
    bottom: np.ndarray

    def __post_init__(self) -> None:
        self.top.flags.writeable = False
        self.bottom.flags.writeable = False


def build_profile(rankings: Sequence[Sequence[str]]) -> PreferenceProfile:
    """Validate name rankings and build a profile.

    The alternative order is canonicalized to the first ranking's mention
    order.  Raises :class:`EmptyProfileError` or :class:`MalformedRankingError`.
    """
    if not rankings:
        raise EmptyProfileError("no rankings given")
    first = list(rankings[0])
    if len(set(first)) != len(first) or not first:
        raise MalformedRankingError(f"ranking {first!r} contains duplicates or is empty")
    index = {name: i for i, name in enumerate(first)}
    encoded = []
    for ranking in rankings:
        if len(ranking) != len(first) or set(ranking) != set(first):
            raise MalformedRankingError(
                f"ranking {list(ranking)!r} is not a permutation of {first!r}"
            )
        encoded.append(tuple(index[name] for name in ranking))
    return PreferenceProfile(alternatives=tuple(first), rankings=tuple(encoded))


def profile_from_indices(
    rankings: Iterable[Sequence[int]], names: Sequence[str] | None = None
) -> PreferenceProfile:
    """Build a profile directly from index rankings (names default to x1..xm)."""
    encoded = tuple(tuple(int(x) for x in r) for r in rankings)
    if not encoded:
        raise EmptyProfileError("no rankings given")
    m = len(encoded[0])
    if names is None:
        names = tuple(f"x{i + 1}" for i in range(m))
    return PreferenceProfile(alternatives=tuple(names), rankings=encoded)


def support_matrix(profile: PreferenceProfile) -> SupportMatrix:
    """Count, for every ordered pair, the voters ranking the first above the second."""
    pos = profile.position
    counts = (pos[:, :, None] < pos[:, None, :]).sum(axis=0).astype(np.int64)
    return SupportMatrix(counts=counts, n=profile.n)


def majority_relation(profile: PreferenceProfile) -> MajorityRelation:
    """Strict edge iff a strict majority prefers; tie iff exactly half do."""
    return MajorityRelation(sign=np.sign(support_matrix(profile).margin()).astype(np.int8))


def tallies(profile: PreferenceProfile) -> Tallies:
    arr = profile.ranking_array
    top = np.bincount(arr[:, 0], minlength=profile.m)
    bottom = np.bincount(arr[:, -1], minlength=profile.m)
    return Tallies(top=top, bottom=bottom)


def majority_distance_matrix(rel: MajorityRelation) -> np.ndarray:
    """All-pairs shortest directed path lengths in the weak majority relation.

    Edges run from ``u`` to ``w`` whenever ``u`` weakly beats ``w`` (ties give
    edges both ways).  Unreachable pairs get ``math.inf``; the diagonal is 0.
    """
    m = rel.m
    adj = rel.sign >= 0
    np.fill_diagonal(adj, False)
    dist = np.full((m, m), math.inf)
    for start in range(m):
        dist[start, start] = 0.0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in np.flatnonzero(adj[u]):
                if dist[start, w] == math.inf:
                    dist[start, w] = dist[start, u] + 1.0
                    queue.append(int(w))
    return dist


def majority_distance(rel: MajorityRelation, x: int, y: int) -> float:
    """Shortest-path length from ``x`` to ``y``; ``math.inf`` if unreachable."""
    if x == y:
        return 0.0
    if rel.sign[x, y] >= 0:
        return 1.0
    return float(majority_distance_matrix(rel)[x, y])


def lottery_majority_distance(rel: MajorityRelation, p, y: int) -> float:
    """Probability-weighted majority distance from a lottery to alternative ``y``.

    ``p`` may be a Lottery or a bare probability vector.  The result is
    ``math.inf`` iff some alternative with positive probability cannot reach
    ``y``; zero-probability alternatives never contribute.
    """
    probs = np.asarray(getattr(p, "probabilities", p), dtype=float)
    dist = majority_distance_matrix(rel)[:, y]
    support = probs > 0.0
    if np.isinf(dist[support]).any():
        return math.inf
    return float(probs[support] @ dist[support])


def restrict(profile: PreferenceProfile, keep: Iterable[str]) -> PreferenceProfile:
    """Induced profile on a nonempty subset of alternatives (same voters)."""
    keep_names = set(keep)
    if not keep_names:
        raise EmptySubsetError("cannot restrict to an empty alternative set")
    unknown = keep_names - set(profile.alternatives)
    if unknown:
        raise KeyError(f"unknown alternatives {sorted(unknown)!r}")
    keep_idx = {i for i, name in enumerate(profile.alternatives) if name in keep_names}
    names = tuple(name for i, name in enumerate(profile.alternatives) if i in keep_idx)
    remap = {old: new for new, old in enumerate(sorted(keep_idx))}
    rankings = tuple(
        tuple(remap[x] for x in ranking if x in keep_idx) for ranking in profile.rankings
    )
    return PreferenceProfile(alternatives=names, rankings=rankings)


def mcgarvey(rel: MajorityRelation, names: Sequence[str] | None = None) -> PreferenceProfile:
    """Realize an arbitrary complete relation as the majority relation of a profile.

    For each strictly ordered pair (x, y), two voters are added: one ranks
    x, y at the very top followed by the remaining alternatives in index
    order, the other ranks the remaining alternatives in reversed order
    followed by x, y at the very bottom.  Both prefer x to y while every
    other comparison cancels, so the pair contributes a +2 margin on (x, y)
    and nothing elsewhere.  Tied pairs receive no voters.  If the relation
    has no strict pair at all, two mutually reversed rankings are emitted.
    """
    m = rel.m
    if names is None:
        names = tuple(f"x{i + 1}" for i in range(m))
    rankings: list[tuple[int, ...]] = []
    for x in range(m):
        for y in range(m):
            if rel.sign[x, y] > 0:
                rest = [z for z in range(m) if z != x and z != y]
                rankings.append((x, y, *rest))
                rankings.append((*reversed(rest), x, y))
    if not rankings:
        forward = tuple(range(m))
        rankings = [forward, tuple(reversed(forward))]
    return profile_from_indices(rankings, names=names)
