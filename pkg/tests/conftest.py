"""Shared fixtures: the canonical small profiles and random-instance helpers."""

import itertools

import numpy as np
import pytest

from distvote.profiles import (
    MajorityRelation,
    PreferenceProfile,
    build_profile,
    profile_from_indices,
)
from distvote.rules import Lottery


@pytest.fixture
def p1() -> PreferenceProfile:
    """Condorcet winner a; supports n_ab=2, n_ac=3, n_bc=2."""
    return build_profile([["a", "b", "c"], ["b", "a", "c"], ["a", "c", "b"]])


@pytest.fixture
def p2() -> PreferenceProfile:
    """Majority 3-cycle with all supports 2 of 3."""
    return build_profile([["a", "b", "c"], ["b", "c", "a"], ["c", "a", "b"]])


@pytest.fixture
def p3() -> PreferenceProfile:
    """All six orders of three alternatives, once each."""
    return build_profile([list(t) for t in itertools.permutations(["a", "b", "c"])])


@pytest.fixture
def p4() -> PreferenceProfile:
    """Realizes a > b, b > c, c ~ a (two a-b-c voters plus one cycle pair)."""
    return build_profile(
        [["a", "b", "c"], ["a", "b", "c"], ["b", "c", "a"], ["c", "a", "b"]]
    )


def theorem_tournament(m: int) -> MajorityRelation:
    """The layered tournament whose unique C1 maximal lottery has geometric
    probabilities: x_{k+1} beats x_k, x_k beats everything later, and
    everything later beats x_{k+1}, for odd 1-based k."""
    sign = np.zeros((m, m), dtype=np.int8)

    def wins(i: int, j: int) -> None:  # 1-based
        sign[i - 1, j - 1] = 1
        sign[j - 1, i - 1] = -1

    for k in range(1, m, 2):
        if k + 1 <= m:
            wins(k + 1, k)
        for j in range(k + 2, m + 1):
            wins(k, j)
            wins(j, k + 1)
    return MajorityRelation(sign=sign)


def cyclic_relation(m: int) -> MajorityRelation:
    """x_i beats the next (m-1)/2 alternatives cyclically (odd m)."""
    assert m % 2 == 1
    sign = np.zeros((m, m), dtype=np.int8)
    for i in range(m):
        for k in range(1, (m - 1) // 2 + 1):
            j = (i + k) % m
            sign[i, j] = 1
            sign[j, i] = -1
    return MajorityRelation(sign=sign)


def random_profile(rng: np.random.Generator, m: int, n: int) -> PreferenceProfile:
    return profile_from_indices(
        [tuple(int(x) for x in rng.permutation(m)) for _ in range(n)]
    )


def random_complete_relation(rng: np.random.Generator, m: int, ties: bool = True) -> MajorityRelation:
    sign = np.zeros((m, m), dtype=np.int8)
    choices = (-1, 0, 1) if ties else (-1, 1)
    for i in range(m):
        for j in range(i + 1, m):
            s = int(rng.choice(choices))
            sign[i, j] = s
            sign[j, i] = -s
    return MajorityRelation(sign=sign)


def random_lottery(rng: np.random.Generator, m: int, kind: str = "mixed") -> Lottery:
    """Random test lottery: full support, with zeros, or degenerate."""
    if kind == "mixed":
        kind = ("full", "zeros", "degenerate")[int(rng.integers(3))]
    if kind == "degenerate":
        return Lottery.degenerate(m, int(rng.integers(m)))
    probs = rng.dirichlet(np.ones(m))
    if kind == "zeros" and m >= 2:
        kill = rng.choice(m, size=int(rng.integers(1, m)), replace=False)
        probs[kill] = 0.0
        total = probs.sum()
        if total == 0.0:
            return Lottery.degenerate(m, int(rng.integers(m)))
        probs /= total
    return Lottery(probs)
